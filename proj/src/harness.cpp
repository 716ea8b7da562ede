#include "eventqa/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <unordered_map>

#include "eventqa/errors.hpp"
#include "eventqa/rng.hpp"

namespace eventqa {

using nlohmann::json;

int default_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

std::string_view to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

Split parse_split(std::string_view s) {
    for (Split v : {Split::Train, Split::Val, Split::Test})
        if (to_string(v) == s) return v;
    throw InputError("unknown split '" + std::string(s) + "'");
}

Split split_of(int scene_id) {
    const std::string key = std::to_string(scene_id);
    switch (fnv1a64(key.data(), key.size()) % 4) {
        case 0:
        case 1: return Split::Train;
        case 2: return Split::Val;
        default: return Split::Test;
    }
}

std::vector<QAItem> select_split(std::span<const QAItem> items, Split split) {
    std::vector<QAItem> out;
    for (const auto& q : items)
        if (split_of(q.scene_id) == split) out.push_back(q);
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline

std::vector<Scene> generate_scenes(int n, std::uint64_t seed, const GenConfig& gen, const SimConfig& sim,
                                   int threads) {
    if (n < 0) throw InputError("scene count must be non-negative");
    return parallel_map(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
        GenConfig cfg = gen;
        cfg.rng_seed = scene_seed(seed, i);
        return Scene{static_cast<int>(i), cfg.rng_seed, generate_scene(cfg, sim)};
    });
}

std::vector<ExecContext> annotate_scenes(const std::vector<Scene>& scenes, const SimConfig& sim, int threads) {
    return parallel_map(scenes.size(), threads, [&](std::size_t i) { return annotate_scene(scenes[i].objects, sim); });
}

std::vector<QAItem> enumerate_all(const std::vector<Scene>& scenes, const std::vector<ExecContext>& contexts,
                                  const TemplateSet& templates, int threads) {
    auto per_scene = parallel_map(scenes.size(), threads, [&](std::size_t i) {
        return enumerate_candidates(scenes[i].id, contexts[i], templates);
    });
    std::vector<QAItem> out;
    for (auto& v : per_scene) std::move(v.begin(), v.end(), std::back_inserter(out));
    return out;
}

namespace {

std::string join(const std::string& dir, const std::string& name) { return (std::filesystem::path(dir) / name).string(); }

void write_manifest(const std::string& dir, json manifest) {
    manifest["config_hash"] = config_hash(manifest.at("config"));
    write_text_file(join(dir, "manifest.json"), manifest.dump(2) + "\n");
}

}  // namespace

void write_scene_bundle(const std::string& dir, std::uint64_t seed, const GenConfig& gen, const SimConfig& sim,
                        const std::vector<Scene>& scenes, const std::vector<ExecContext>& contexts) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InputError("cannot create " + dir + ": " + ec.message());
    write_text_file(join(dir, "scenes.json"), scenes_to_json(scenes).dump(1) + "\n");
    write_text_file(join(dir, "annotations.json"), annotations_to_json(scenes, contexts).dump() + "\n");

    std::size_t objects = 0, events = 0;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        objects += scenes[i].objects.size();
        events += contexts[i].events.size() + contexts[i].unseen_events.size();
    }
    json manifest = {{"schema_version", kSchemaVersion},
                     {"seed", seed},
                     {"config", {{"generator", config_to_json(gen, sim)}}},
                     {"counts", {{"scenes", scenes.size()}, {"objects", objects}, {"events", events}}},
                     {"files", {{"scenes", "scenes.json"}, {"annotations", "annotations.json"}}}};
    write_manifest(dir, std::move(manifest));
}

Bundle read_bundle(const std::string& dir) {
    Bundle b;
    b.manifest = read_json_file(join(dir, "manifest.json"));
    try {
        if (b.manifest.at("schema_version").get<int>() != kSchemaVersion)
            throw InputError("unsupported manifest schema version");
        if (b.manifest.at("config_hash").get<std::string>() != config_hash(b.manifest.at("config")))
            throw InputError("manifest config hash does not match its config");
        GenConfig gen;
        SimConfig sim;
        config_from_json(b.manifest.at("config").at("generator"), gen, sim);
        b.scenes = scenes_from_json(read_json_file(join(dir, b.manifest.at("files").at("scenes").get<std::string>())));
        if (b.manifest.at("counts").at("scenes").get<std::size_t>() != b.scenes.size())
            throw InputError("manifest scene count does not match the scenes file");
        b.contexts = annotations_from_json(
            read_json_file(join(dir, b.manifest.at("files").at("annotations").get<std::string>())), b.scenes);
    } catch (const json::exception& e) {
        throw InputError("bundle " + dir + ": " + e.what());
    }
    return b;
}

void write_questions(const std::string& dir, const std::string& questions_path, const std::vector<QAItem>& items,
                     std::uint64_t seed, const Quota& quota, int templates_version,
                     const std::vector<std::string>& warnings) {
    std::vector<json> rows;
    rows.reserve(items.size());
    for (const auto& q : items) rows.push_back(qa_to_json(q));
    write_text_file(questions_path, to_jsonl(rows));

    json manifest = read_json_file(join(dir, "manifest.json"));
    manifest["config"]["questions"] = {{"seed", seed}, {"quota", quota}, {"templates_version", templates_version}};
    manifest["counts"]["questions"] = items.size();
    manifest["files"]["questions"] = std::filesystem::path(questions_path).filename().string();
    manifest["warnings"] = warnings;
    write_manifest(dir, std::move(manifest));
}

std::vector<QAItem> read_questions(const std::string& path) {
    std::vector<QAItem> out;
    for (const auto& row : read_jsonl_file(path)) out.push_back(qa_from_json(row));
    return out;
}

// ---------------------------------------------------------------------------
// Predictions

json prediction_to_json(const Prediction& p) {
    json j = {{"id", p.id}};
    if (p.choices.empty())
        j["answer"] = p.answer;
    else
        j["choices"] = p.choices;
    return j;
}

Prediction prediction_from_json(const json& j) {
    try {
        Prediction p;
        p.id = j.at("id").get<int>();
        if (j.contains("answer")) p.answer = j.at("answer").get<std::string>();
        if (j.contains("choices")) p.choices = j.at("choices").get<std::vector<std::string>>();
        if (j.contains("answer") == j.contains("choices"))
            throw InputError("prediction " + std::to_string(p.id) + " needs exactly one of answer/choices");
        return p;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed prediction: ") + e.what());
    }
}

std::vector<Prediction> read_predictions(const std::string& path) {
    std::vector<Prediction> out;
    for (const auto& row : read_jsonl_file(path)) out.push_back(prediction_from_json(row));
    return out;
}

std::vector<Prediction> oracle_predictions(std::span<const QAItem> questions, const std::vector<Scene>& scenes,
                                           const std::vector<ExecContext>& contexts, const Grammar& grammar,
                                           bool parse_text, int threads) {
    std::unordered_map<int, std::size_t> scene_index;
    for (std::size_t i = 0; i < scenes.size(); ++i) scene_index[scenes[i].id] = i;
    return parallel_map(questions.size(), threads, [&](std::size_t i) {
        const QAItem& q = questions[i];
        auto it = scene_index.find(q.scene_id);
        if (it == scene_index.end())
            throw InputError("question " + std::to_string(q.id) + " refers to unknown scene " + std::to_string(q.scene_id));
        const ExecContext& ctx = contexts[it->second];
        const Program program = parse_text ? grammar.parse_question(q.question).program : q.program;
        Prediction p;
        p.id = q.id;
        if (q.qtype == QType::Descriptive) {
            p.answer = answer_token(execute(program, ctx));
            return p;
        }
        for (const auto& c : q.choices) {
            const Program choice = parse_text ? grammar.parse_choice(c.text).program : c.program;
            p.choices.push_back(execute_choice(program, choice, ctx) ? "yes" : "no");
        }
        return p;
    });
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

json score_json(const StratumScore& s, bool multiple_choice) {
    json j = {{"questions", s.questions}, {"missing", s.missing}};
    if (multiple_choice) {
        j["options"] = s.options;
        j["per_option"] = s.option_accuracy();
        j["per_question"] = s.question_accuracy();
    } else {
        j["accuracy"] = s.question_accuracy();
    }
    return j;
}

bool is_multiple_choice(const std::string& stratum) {
    return stratum == "explanatory" || stratum == "predictive" || stratum == "counterfactual";
}

}  // namespace

json EvalReport::to_json() const {
    json strata_json = json::object();
    for (const auto& [name, s] : strata) strata_json[name] = score_json(s, is_multiple_choice(name));
    return {{"descriptive", score_json(descriptive, false)}, {"strata", strata_json}, {"missing", missing}};
}

std::map<std::string, double> EvalReport::metrics() const {
    std::map<std::string, double> out;
    if (descriptive.questions) out["descriptive.accuracy"] = descriptive.question_accuracy();
    for (const auto& [name, s] : strata) {
        if (!s.questions) continue;
        if (is_multiple_choice(name)) {
            out[name + ".per_option"] = s.option_accuracy();
            out[name + ".per_question"] = s.question_accuracy();
        } else {
            out[name + ".accuracy"] = s.question_accuracy();
        }
    }
    return out;
}

EvalReport evaluate(std::span<const QAItem> truth, std::span<const Prediction> predictions) {
    std::unordered_map<int, std::size_t> position;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (!position.emplace(truth[i].id, i).second)
            throw InputError("duplicate question id " + std::to_string(truth[i].id));

    std::vector<const Prediction*> matched(truth.size(), nullptr);
    long last = -1;
    for (const auto& p : predictions) {
        auto it = position.find(p.id);
        if (it == position.end()) throw InputError("prediction for unknown question id " + std::to_string(p.id));
        if (static_cast<long>(it->second) <= last)
            throw InputError("prediction ids are not in question order (id " + std::to_string(p.id) + ")");
        last = static_cast<long>(it->second);
        matched[it->second] = &p;
    }

    EvalReport r;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const QAItem& q = truth[i];
        const Prediction* p = matched[i];
        StratumScore& s = r.strata[q.stratum()];
        ++s.questions;
        if (!p) {
            ++s.missing;
            ++r.missing;
        }
        if (q.qtype == QType::Descriptive) {
            const bool ok = p && p->choices.empty() && p->answer == q.answer;
            s.correct_questions += ok;
            ++r.descriptive.questions;
            r.descriptive.correct_questions += ok;
            r.descriptive.missing += p == nullptr;
            continue;
        }
        s.options += static_cast<int>(q.choices.size());
        if (!p) continue;
        if (p->choices.size() != q.choices.size())
            throw InputError("prediction " + std::to_string(p->id) + " has " + std::to_string(p->choices.size()) +
                             " choices, question has " + std::to_string(q.choices.size()));
        int right = 0;
        for (std::size_t c = 0; c < q.choices.size(); ++c) right += p->choices[c] == (q.choices[c].correct ? "yes" : "no");
        s.correct_options += right;
        s.correct_questions += right == static_cast<int>(q.choices.size());
    }
    return r;
}

// ---------------------------------------------------------------------------
// Baselines

std::vector<Prediction> baseline_random(std::span<const QAItem> questions, std::uint64_t seed) {
    Rng rng(mix_seed(seed));
    std::vector<Prediction> out;
    out.reserve(questions.size());
    for (const auto& q : questions) {
        Prediction p;
        p.id = q.id;
        if (q.qtype == QType::Descriptive) {
            const auto& space = answer_space(q.subtype);
            p.answer = space[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(space.size()) - 1))];
        } else {
            for (std::size_t c = 0; c < q.choices.size(); ++c) p.choices.push_back(rng.bernoulli(0.5) ? "yes" : "no");
        }
        out.push_back(std::move(p));
    }
    return out;
}

FrequentModel fit_frequent(std::span<const QAItem> train) {
    std::map<std::string, std::map<std::string, int>> counts;
    for (const auto& q : train) {
        auto& c = counts[q.stratum()];
        if (q.qtype == QType::Descriptive)
            ++c[q.answer];
        else
            for (const auto& o : q.choices) ++c[o.correct ? "yes" : "no"];
    }
    FrequentModel m;
    for (const auto& stratum : kStrata) {
        auto it = counts.find(stratum);
        if (it == counts.end()) {
            m.fallbacks.push_back(stratum);
            continue;
        }
        const bool mc = is_multiple_choice(stratum);
        const std::vector<std::string> space =
            mc ? std::vector<std::string>{"yes", "no"} : answer_space(parse_subtype(stratum));
        std::string best;
        int best_n = -1;
        for (const auto& a : space) {
            const auto c = it->second.count(a) ? it->second.at(a) : 0;
            if (c > best_n) {
                best = a;
                best_n = c;
            }
        }
        (mc ? m.option : m.answer)[stratum] = best;
    }
    return m;
}

std::vector<Prediction> baseline_frequent(const FrequentModel& model, std::span<const QAItem> test, std::uint64_t seed) {
    std::vector<Prediction> out = baseline_random(test, seed);
    for (std::size_t i = 0; i < test.size(); ++i) {
        const QAItem& q = test[i];
        const std::string stratum = q.stratum();
        if (q.qtype == QType::Descriptive) {
            if (auto it = model.answer.find(stratum); it != model.answer.end()) out[i].answer = it->second;
        } else if (auto it = model.option.find(stratum); it != model.option.end()) {
            std::fill(out[i].choices.begin(), out[i].choices.end(), it->second);
        }
    }
    return out;
}

double expected_random_descriptive(std::span<const QAItem> questions) {
    double sum = 0.0;
    int n = 0;
    for (const auto& q : questions) {
        if (q.qtype != QType::Descriptive) continue;
        sum += 1.0 / static_cast<double>(answer_space(q.subtype).size());
        ++n;
    }
    return n ? sum / n : 0.0;
}

double expected_frequent_descriptive(const FrequentModel& model, std::span<const QAItem> test) {
    double hits = 0.0;
    int n = 0;
    for (const auto& q : test) {
        if (q.qtype != QType::Descriptive) continue;
        ++n;
        auto it = model.answer.find(q.stratum());
        if (it == model.answer.end())
            hits += 1.0 / static_cast<double>(answer_space(q.subtype).size());
        else
            hits += q.answer == it->second ? 1.0 : 0.0;
    }
    return n ? hits / n : 0.0;
}

}  // namespace eventqa
