#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "eventqa/errors.hpp"
#include "support.hpp"

using namespace eventqa;
namespace fs = std::filesystem;

namespace {

QAItem mc_item(int id, std::vector<bool> truth, QType type = QType::Explanatory) {
    QAItem q;
    q.id = id;
    q.qtype = type;
    for (bool t : truth) q.choices.push_back({"", {}, t});
    return q;
}

QAItem desc_item(int id, Subtype s, std::string answer) {
    QAItem q;
    q.id = id;
    q.qtype = QType::Descriptive;
    q.subtype = s;
    q.answer = std::move(answer);
    return q;
}

Prediction yes_no(int id, std::vector<bool> picks) {
    Prediction p;
    p.id = id;
    for (bool b : picks) p.choices.push_back(b ? "yes" : "no");
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("eventqa_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("per-option and per-question accuracy") {
    const std::vector<QAItem> truth = {mc_item(0, {true, false, false})};
    const EvalReport r = evaluate(truth, std::vector<Prediction>{yes_no(0, {true, false, true})});
    const StratumScore& s = r.strata.at("explanatory");
    CHECK(s.option_accuracy() == doctest::Approx(2.0 / 3.0));
    CHECK(s.question_accuracy() == 0.0);

    const EvalReport perfect = evaluate(truth, std::vector<Prediction>{yes_no(0, {true, false, false})});
    for (const auto& [name, v] : perfect.metrics()) CHECK(v == 1.0);
}

TEST_CASE("descriptive accuracy and missing predictions") {
    const std::vector<QAItem> truth = {desc_item(0, Subtype::Count, "2"), desc_item(1, Subtype::Exist, "yes"),
                                       desc_item(2, Subtype::Exist, "no")};
    Prediction p0{0, "2", {}}, p2{2, "yes", {}};
    const EvalReport r = evaluate(truth, std::vector<Prediction>{p0, p2});
    CHECK(r.missing == 1);
    CHECK(r.descriptive.questions == 3);
    CHECK(r.descriptive.correct_questions == 1);
    CHECK(r.strata.at("count").question_accuracy() == 1.0);
    CHECK(r.strata.at("exist").question_accuracy() == 0.0);
}

TEST_CASE("malformed prediction files are rejected") {
    const std::vector<QAItem> truth = {desc_item(0, Subtype::Count, "2"), desc_item(1, Subtype::Exist, "yes")};
    const Prediction a{0, "2", {}}, b{1, "yes", {}};
    CHECK_THROWS_AS(evaluate(truth, std::vector<Prediction>{b, a}), InputError);
    CHECK_THROWS_AS(evaluate(truth, std::vector<Prediction>{a, a}), InputError);
    CHECK_THROWS_AS(evaluate(truth, std::vector<Prediction>{a, Prediction{7, "1", {}}}), InputError);
    CHECK_THROWS_AS(evaluate(std::vector<QAItem>{mc_item(0, {true, false})}, std::vector<Prediction>{yes_no(0, {true})}),
                    InputError);
}

TEST_CASE("per-question accuracy never exceeds per-option accuracy (property)") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<QAItem> truth;
        std::vector<Prediction> preds;
        const int n = rng.uniform_int(1, 30);
        for (int i = 0; i < n; ++i) {
            std::vector<bool> t, p;
            const int k = rng.uniform_int(2, 4);
            for (int j = 0; j < k; ++j) {
                t.push_back(rng.bernoulli(0.5));
                p.push_back(rng.bernoulli(0.7) ? static_cast<bool>(t.back()) : rng.bernoulli(0.5));
            }
            truth.push_back(mc_item(i, t, rng.bernoulli(0.5) ? QType::Explanatory : QType::Counterfactual));
            preds.push_back(yes_no(i, p));
        }
        const EvalReport r = evaluate(truth, preds);
        for (const auto& [name, s] : r.strata)
            if (s.questions) CHECK(s.question_accuracy() <= s.option_accuracy() + 1e-12);
    }
}

TEST_CASE("parallel_map keeps index order and propagates errors") {
    const auto squares = parallel_map(1000, 4, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < squares.size(); ++i) CHECK(squares[i] == static_cast<int>(i * i));
    CHECK(parallel_map(0, 4, [](std::size_t i) { return i; }).empty());
    CHECK_THROWS_AS(parallel_map(100, 3,
                                 [](std::size_t i) {
                                     if (i == 37) throw InputError("boom");
                                     return i;
                                 }),
                    InputError);
}

TEST_CASE("split assignment is stable and close to 2:1:1") {
    std::map<Split, int> counts;
    for (int id = 0; id < 20000; ++id) {
        const Split s = split_of(id);
        CHECK(s == split_of(id));
        ++counts[s];
    }
    CHECK(counts[Split::Train] == doctest::Approx(10000).epsilon(0.05));
    CHECK(counts[Split::Val] == doctest::Approx(5000).epsilon(0.05));
    CHECK(counts[Split::Test] == doctest::Approx(5000).epsilon(0.05));
    CHECK(parse_split("val") == Split::Val);
    CHECK_THROWS_AS(parse_split("holdout"), InputError);
}

TEST_CASE("config overrides") {
    GenConfig g;
    SimConfig s;
    config_from_json(nlohmann::json{{"max_objects", 5}}, g, s);
    CHECK(g.max_objects == 5);
    CHECK(s == SimConfig{});
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"max_objekts", 5}}, g, s), InputError);
    CHECK(config_hash(config_to_json(GenConfig{}, SimConfig{})) == config_hash(config_to_json(GenConfig{}, SimConfig{})));
    CHECK(config_hash(config_to_json(g, s)) != config_hash(config_to_json(GenConfig{}, SimConfig{})));
}

TEST_CASE("bundles round-trip byte for byte") {
    const auto scenes = generate_scenes(12, 3, GenConfig{}, SimConfig{}, 2);
    const auto contexts = annotate_scenes(scenes, SimConfig{}, 2);
    const fs::path a = fresh_dir("bundle_a"), b = fresh_dir("bundle_b");
    write_scene_bundle(a.string(), 3, GenConfig{}, SimConfig{}, scenes, contexts);

    const Bundle loaded = read_bundle(a.string());
    CHECK(loaded.scenes == scenes);
    CHECK(loaded.contexts == contexts);
    write_scene_bundle(b.string(), 3, GenConfig{}, SimConfig{}, loaded.scenes, loaded.contexts);
    for (const char* f : {"scenes.json", "annotations.json", "manifest.json"}) CHECK(slurp(a / f) == slurp(b / f));

    const auto candidates = enumerate_all(scenes, contexts, default_templates(), 2);
    const auto sampled = sample_balanced(candidates, default_quota(300), 1);
    write_questions(a.string(), (a / "questions.jsonl").string(), sampled.items, 1, default_quota(300), 1, sampled.warnings);
    CHECK(read_questions((a / "questions.jsonl").string()) == sampled.items);
    CHECK_NOTHROW(read_bundle(a.string()));  // manifest hash updated consistently

    // Tampering with the annotations is detected.
    std::string ann = slurp(a / "annotations.json");
    const auto pos = ann.find("\"causal_edges\":[");
    REQUIRE(pos != std::string::npos);
    ann.insert(pos + 16, "{\"cause\":{\"kind\":\"object\",\"index\":0},\"effect\":{\"kind\":\"event\",\"index\":0}},");
    write_text_file((a / "annotations.json").string(), ann);
    CHECK_THROWS_AS(read_bundle(a.string()), InputError);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("oracle predictions score perfectly, from programs and from text") {
    const auto& corpus = testing::small_corpus();
    const auto items = sample_balanced(corpus.candidates, default_quota(1500), 2).items;
    for (bool parse_text : {false, true}) {
        const auto preds = oracle_predictions(items, corpus.scenes, corpus.contexts, default_grammar(), parse_text, 2);
        for (const auto& [name, v] : evaluate(items, preds).metrics()) {
            INFO(name);
            CHECK(v == 1.0);
        }
    }
}

TEST_CASE("baselines") {
    const auto& corpus = testing::small_corpus();
    const auto items = sample_balanced(corpus.candidates, default_quota(4000), 3).items;

    // Independent closed form for uniform guessing.
    double expected = 0;
    int descriptive = 0;
    for (const auto& q : items)
        if (q.qtype == QType::Descriptive) {
            expected += 1.0 / answer_space(q.subtype).size();
            ++descriptive;
        }
    expected /= descriptive;
    CHECK(expected_random_descriptive(items) == doctest::Approx(expected));

    const auto random_preds = baseline_random(items, 4);
    CHECK(random_preds == baseline_random(items, 4));
    const EvalReport rr = evaluate(items, random_preds);
    CHECK(std::abs(rr.descriptive.question_accuracy() - expected) < 0.05);

    // Frequent: every prediction in a stratum is that stratum's modal training answer.
    const auto train = select_split(items, Split::Train);
    const auto test = select_split(items, Split::Test);
    const FrequentModel model = fit_frequent(train);
    CHECK(model.fallbacks.empty());
    std::map<std::string, std::map<std::string, int>> hist;
    for (const auto& q : train)
        if (q.qtype == QType::Descriptive) ++hist[q.stratum()][q.answer];
    for (const auto& [stratum, counts] : hist) {
        int best = 0;
        for (const auto& [a, n] : counts) best = std::max(best, n);
        CHECK(counts.at(model.answer.at(stratum)) == best);
    }
    const auto preds = baseline_frequent(model, test, 4);
    REQUIRE(preds.size() == test.size());
    double hits = 0;
    int n = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (test[i].qtype != QType::Descriptive) {
            for (const auto& c : preds[i].choices) CHECK(c == model.option.at(test[i].stratum()));
            continue;
        }
        CHECK(preds[i].answer == model.answer.at(test[i].stratum()));
        hits += preds[i].answer == test[i].answer;
        ++n;
    }
    CHECK(expected_frequent_descriptive(model, test) == doctest::Approx(hits / n));

    // A stratum with no training data falls back to random answers.
    const FrequentModel empty = fit_frequent(std::vector<QAItem>{});
    CHECK(empty.fallbacks.size() == kStrata.size());
    CHECK(baseline_frequent(empty, test, 1).size() == test.size());
}
