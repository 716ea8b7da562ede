// eventqa: generate scene/question bundles, run the symbolic oracle, parse
// question text, evaluate predictions and run the question-type baselines.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "eventqa/errors.hpp"
#include "eventqa/harness.hpp"

using namespace eventqa;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

Quota parse_quota(const std::string& text) {
    if (!text.empty() && std::all_of(text.begin(), text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        return default_quota(std::stoi(text));
    const json j = read_json_file(text);
    try {
        return j.get<Quota>();
    } catch (const json::exception& e) {
        throw InputError("quota file " + text + ": " + e.what());
    }
}

void write_predictions(const std::string& path, const std::vector<Prediction>& preds) {
    std::vector<json> rows;
    rows.reserve(preds.size());
    for (const auto& p : preds) rows.push_back(prediction_to_json(p));
    write_text_file(path, to_jsonl(rows));
}

const TemplateSet& templates_from(const std::string& path, TemplateSet& storage) {
    if (path.empty()) return default_templates();
    storage = load_templates_file(path);
    return storage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scene generation, question generation and evaluation for collision-event video QA"};
    app.require_subcommand(1);
    int threads = default_threads();
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    // gen-scenes
    auto* gen = app.add_subcommand("gen-scenes", "simulate scenes and write scenes, annotations and manifest");
    int n_scenes = 0;
    std::uint64_t scene_seed_base = 0;
    std::string config_path, out_dir;
    gen->add_option("--n", n_scenes, "number of scenes")->required()->check(CLI::NonNegativeNumber);
    gen->add_option("--seed", scene_seed_base, "base seed")->required();
    gen->add_option("--config", config_path, "JSON overrides for the generator and simulator");
    gen->add_option("--out", out_dir, "bundle directory")->required();

    // gen-questions
    auto* genq = app.add_subcommand("gen-questions", "enumerate and sample balanced questions for a bundle");
    std::string bundle_dir, quota_text, questions_out, templates_path;
    std::uint64_t question_seed = 0;
    genq->add_option("--scenes", bundle_dir, "bundle directory")->required();
    genq->add_option("--quota", quota_text, "total question count, or a JSON file of per-stratum counts")->required();
    genq->add_option("--seed", question_seed, "sampling seed")->required();
    genq->add_option("--out", questions_out, "questions file (default: <bundle>/questions.jsonl)");
    genq->add_option("--templates", templates_path, "template file (default: built-in inventory)");

    // execute
    auto* exec = app.add_subcommand("execute", "answer every question with the symbolic executor");
    std::string exec_bundle, exec_questions, exec_out;
    bool use_programs = false;
    exec->add_option("--bundle", exec_bundle, "bundle directory")->required();
    exec->add_option("--questions", exec_questions, "questions file (default: <bundle>/questions.jsonl)");
    exec->add_option("--out", exec_out, "predictions file")->required();
    exec->add_flag("--use-programs", use_programs, "execute the stored programs instead of parsing the text");
    exec->add_option("--templates", templates_path, "template file for the parser");

    // parse
    auto* parse = app.add_subcommand("parse", "parse question or choice text into programs");
    std::string parse_text, parse_file;
    bool parse_as_choice = false;
    auto* text_opt = parse->add_option("--text", parse_text, "one question or choice");
    auto* file_opt = parse->add_option("--file", parse_file, "file with one text per line");
    text_opt->excludes(file_opt);
    parse->add_flag("--choice", parse_as_choice, "use the choice grammar");
    parse->add_option("--templates", templates_path, "template file");

    // eval
    auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
    std::string truth_path, pred_path, report_path, eval_split;
    eval->add_option("--truth", truth_path, "questions file")->required();
    eval->add_option("--pred", pred_path, "predictions file")->required();
    eval->add_option("--report", report_path, "write the report JSON here");
    eval->add_option("--split", eval_split, "score only one split (train, val, test)");

    // baseline
    auto* base = app.add_subcommand("baseline", "question-type baselines");
    std::string kind, base_questions, base_out, base_split = "test";
    std::uint64_t base_seed = 0;
    base->add_option("--kind", kind, "random or frequent")->required()->check(CLI::IsMember({"random", "frequent"}));
    base->add_option("--questions", base_questions, "questions file")->required();
    base->add_option("--out", base_out, "predictions file")->required();
    base->add_option("--seed", base_seed, "seed for random answers");
    base->add_option("--split", base_split, "split to predict (frequent trains on the train split)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        TemplateSet custom;
        if (*gen) {
            GenConfig g;
            SimConfig s;
            if (!config_path.empty()) config_from_json(read_json_file(config_path), g, s);
            const auto scenes = generate_scenes(n_scenes, scene_seed_base, g, s, threads);
            const auto contexts = annotate_scenes(scenes, s, threads);
            write_scene_bundle(out_dir, scene_seed_base, g, s, scenes, contexts);
            std::cout << json{{"scenes", scenes.size()}, {"out", out_dir}}.dump() << "\n";
        } else if (*genq) {
            const TemplateSet& templates = templates_from(templates_path, custom);
            const Quota quota = parse_quota(quota_text);
            const Bundle bundle = read_bundle(bundle_dir);
            const auto candidates = enumerate_all(bundle.scenes, bundle.contexts, templates, threads);
            const SampleResult sampled = sample_balanced(candidates, quota, question_seed);
            for (const auto& w : sampled.warnings) std::cerr << "warning: " << w << "\n";
            const std::string out =
                questions_out.empty() ? (std::filesystem::path(bundle_dir) / "questions.jsonl").string() : questions_out;
            write_questions(bundle_dir, out, sampled.items, question_seed, quota, templates.version, sampled.warnings);
            std::cout << json{{"candidates", candidates.size()}, {"questions", sampled.items.size()},
                              {"warnings", sampled.warnings.size()}, {"out", out}}
                             .dump()
                      << "\n";
        } else if (*exec) {
            const Bundle bundle = read_bundle(exec_bundle);
            const std::string qpath = exec_questions.empty()
                                          ? (std::filesystem::path(exec_bundle) / "questions.jsonl").string()
                                          : exec_questions;
            const auto questions = read_questions(qpath);
            const Grammar grammar(templates_from(templates_path, custom));
            const auto preds = oracle_predictions(questions, bundle.scenes, bundle.contexts, grammar, !use_programs, threads);
            write_predictions(exec_out, preds);
            std::cout << json{{"predictions", preds.size()}, {"out", exec_out}}.dump() << "\n";
        } else if (*parse) {
            if ((text_opt->count() > 0) == (file_opt->count() > 0)) {
                std::cerr << "parse: give exactly one of --text or --file\n";
                return kExitUsage;
            }
            const Grammar grammar(templates_from(templates_path, custom));
            std::vector<std::string> lines;
            if (text_opt->count() > 0) {
                lines.push_back(parse_text);
            } else {
                std::ifstream in(parse_file);
                if (!in) throw InputError("cannot open " + parse_file);
                for (std::string line; std::getline(in, line);)
                    if (!line.empty()) lines.push_back(line);
            }
            for (const auto& line : lines) {
                const ParseResult r = parse_as_choice ? grammar.parse_choice(line) : grammar.parse_question(line);
                std::cout << json{{"text", line}, {"template", r.template_id}, {"program", to_string(r.program)},
                                  {"nodes", program_to_json(r.program)}}
                                 .dump()
                          << "\n";
            }
        } else if (*eval) {
            auto truth = read_questions(truth_path);
            if (!eval_split.empty()) truth = select_split(truth, parse_split(eval_split));
            const auto preds = read_predictions(pred_path);
            const EvalReport report = evaluate(truth, preds);
            const json j = report.to_json();
            if (!report_path.empty()) write_text_file(report_path, j.dump(2) + "\n");
            if (report.missing) std::cerr << "warning: " << report.missing << " questions have no prediction\n";
            std::cout << j.dump(2) << "\n";
        } else if (*base) {
            const auto all = read_questions(base_questions);
            const auto target = select_split(all, parse_split(base_split));
            json summary = {{"kind", kind}, {"split", base_split}, {"questions", target.size()}};
            std::vector<Prediction> preds;
            if (kind == "random") {
                preds = baseline_random(target, base_seed);
                summary["expected_descriptive_accuracy"] = expected_random_descriptive(target);
            } else {
                const FrequentModel model = fit_frequent(select_split(all, Split::Train));
                for (const auto& s : model.fallbacks)
                    std::cerr << "warning: no training questions for " << s << ", answering at random\n";
                preds = baseline_frequent(model, target, base_seed);
                summary["expected_descriptive_accuracy"] = expected_frequent_descriptive(model, target);
                summary["modal_answers"] = model.answer;
                summary["modal_options"] = model.option;
            }
            write_predictions(base_out, preds);
            std::cout << summary.dump(2) << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
