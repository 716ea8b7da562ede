#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "eventqa/errors.hpp"
#include "support.hpp"

using namespace eventqa;
using nlohmann::json;
using testing::make_object;

namespace {

json minimal_set(json question) {
    return json{{"version", 3},
                {"questions", json::array({question})},
                {"choices", json::array({json{{"id", "c"}, {"pool", "observed"}, {"text", "The <O1> enters the scene"},
                                              {"program", "Unique(Filter_in(Events, $O1))"}}})}};
}

json count_template() {
    return {{"id", "t"}, {"type", "descriptive"}, {"subtype", "count"},
            {"text", "How many collisions does the <O1> have?"},
            {"program", "Count(Filter_collision(Events, $O1))"}};
}

// Brute force: the smallest attribute subsets that pick out exactly one object.
std::size_t smallest_unique_size(const std::vector<ObjectSpec>& objs, const ObjectSpec& target) {
    std::size_t best = 4;
    for (int mask = 1; mask < 8; ++mask) {
        int matches = 0;
        for (const auto& o : objs)
            matches += (!(mask & 1) || o.attrs.color == target.attrs.color) &&
                       (!(mask & 2) || o.attrs.material == target.attrs.material) &&
                       (!(mask & 4) || o.attrs.shape == target.attrs.shape);
        if (matches == 1) best = std::min<std::size_t>(best, static_cast<std::size_t>(__builtin_popcount(mask)));
    }
    return best;
}

std::size_t attribute_count(const ObjectDescription& d) {
    return static_cast<std::size_t>(d.color.has_value()) + d.material.has_value() + d.shape.has_value();
}

}  // namespace

TEST_CASE("built-in inventory") {
    const TemplateSet& t = default_templates();
    CHECK(t.version == 1);
    std::map<std::string, int> per_stratum;
    for (const auto& q : t.questions) ++per_stratum[stratum_of(q.qtype, q.subtype)];
    for (const auto& s : {"count", "exist", "query_color", "query_material", "query_shape"}) CHECK(per_stratum[s] >= 3);
    for (const auto& s : {"explanatory", "predictive", "counterfactual"}) CHECK(per_stratum[s] >= 2);
    CHECK(t.choices.size() >= 2);
    CHECK(load_templates(json::parse(default_templates_text())).questions == t.questions);
}

TEST_CASE("template loading errors") {
    CHECK_NOTHROW(load_templates(minimal_set(count_template())));

    json bad = count_template();
    bad["program"] = "Count(Filter_collision(Events, $O2))";
    CHECK_THROWS_AS(load_templates(minimal_set(bad)), InputError);

    bad = count_template();
    bad["type"] = "rhetorical";
    CHECK_THROWS_AS(load_templates(minimal_set(bad)), InputError);

    bad = count_template();
    bad["subtype"] = "exist";  // Count does not produce yes/no
    CHECK_THROWS_AS(load_templates(minimal_set(bad)), InputError);

    bad = count_template();
    bad["program"] = "Count(Query_color(Events))";
    CHECK_THROWS(load_templates(minimal_set(bad)));

    bad = {{"id", "m"}, {"type", "explanatory"}, {"choices", "imagined"}, {"text", "Which is responsible?"},
           {"program", "Belong_to(?, Events)"}};
    CHECK_THROWS_AS(load_templates(minimal_set(bad)), InputError);

    json twice = minimal_set(count_template());
    twice["questions"].push_back(count_template());
    CHECK_THROWS_AS(load_templates(twice), InputError);

    CHECK_THROWS_AS(load_templates(json{{"questions", json::array()}}), InputError);
    CHECK_THROWS_AS(load_templates_file("/nonexistent/templates.json"), InputError);
}

TEST_CASE("minimal descriptions") {
    const std::vector<ObjectSpec> objs = {make_object(0, Color::Red, Material::Metal, Shape::Cube, {}, {}),
                                          make_object(1, Color::Red, Material::Metal, Shape::Sphere, {}, {}),
                                          make_object(2, Color::Blue, Material::Metal, Shape::Cube, {}, {})};
    const auto d0 = minimal_description(objs, 0);
    CHECK(d0 == ObjectDescription{Color::Red, std::nullopt, Shape::Cube});
    CHECK(describe_phrase(d0) == "red cube");
    const auto d1 = minimal_description(objs, 1);
    CHECK(d1 == ObjectDescription{std::nullopt, std::nullopt, Shape::Sphere});
    CHECK(describe_phrase(d1) == "sphere");
    const auto d2 = minimal_description(objs, 2);
    CHECK(d2 == ObjectDescription{Color::Blue, std::nullopt, std::nullopt});
    CHECK(describe_phrase(d2) == "blue object");
    CHECK(describe_phrase({std::nullopt, Material::Rubber, Shape::Cylinder}) == "rubber cylinder");
    CHECK(describe_phrase({Color::Gray, Material::Metal, Shape::Sphere}) == "gray metal sphere");
    CHECK(to_string(description_program(d0)) == "Unique(Filter_color(Filter_shape(Objects, cube), red))");
    CHECK_THROWS_AS(minimal_description(objs, 7), InputError);
    CHECK_THROWS_AS(description_program({}), InputError);
}

TEST_CASE("minimal descriptions are unique and minimal on generated scenes (property)") {
    const auto& corpus = testing::small_corpus();
    for (const auto& ctx : corpus.contexts)
        for (const auto& o : ctx.objects) {
            const auto d = minimal_description(ctx.objects, o.id);
            CHECK(attribute_count(d) == smallest_unique_size(ctx.objects, o));
            CHECK(std::get<ObjectRef>(execute(description_program(d), ctx)).id == o.id);
        }
}

TEST_CASE("rendering fills slots") {
    SlotValues v;
    v.objects["O1"] = {Color::Cyan, std::nullopt, Shape::Cylinder};
    v.orders["ORD"] = Order::Second;
    CHECK(render_text("What shape is the object that collides with the <O1>?", v) ==
          "What shape is the object that collides with the cyan cylinder?");
    CHECK(render_text("The <ORD> collision", v) == "The second collision");
    CHECK(to_string(instantiate_program("Filter_order(Filter_collision(Events, $O1), $ORD)", v)) ==
          "Filter_order(Filter_collision(Events, Unique(Filter_color(Filter_shape(Objects, cylinder), cyan))), second)");
    CHECK_THROWS_AS(render_text("The <O2> enters", v), InputError);
}

TEST_CASE("a scene without collisions has no explanatory candidates") {
    const ExecContext ctx = annotate_scene({make_object(0, Color::Red, Material::Metal, Shape::Cube, {0.0, 0.0}, {}),
                                            make_object(1, Color::Blue, Material::Rubber, Shape::Sphere, {-6.0, 3.0}, {1.5, 0.0}, 5)});
    REQUIRE(std::none_of(ctx.events.begin(), ctx.events.end(), [](const Event& e) { return e.kind == EventKind::Collision; }));
    for (const auto& c : enumerate_candidates(0, ctx, default_templates())) CHECK(c.qtype != QType::Explanatory);
}

TEST_CASE("two-collision scene offers the first collision as a cause of the second") {
    const ExecContext ctx = annotate_scene({make_object(0, Color::Red, Material::Metal, Shape::Cube, {-3.0, 0.0}, {2.0, 0.0}),
                                            make_object(1, Color::Blue, Material::Rubber, Shape::Sphere, {-1.0, 0.0}, {}),
                                            make_object(2, Color::Cyan, Material::Metal, Shape::Cylinder, {1.5, 0.0}, {}),
                                            // an unrelated late arrival supplies a wrong option
                                            make_object(3, Color::Green, Material::Rubber, Shape::Sphere, {-6.0, -4.0}, {2.0, 0.0}, 10)});
    bool found = false;
    for (const auto& c : enumerate_candidates(0, ctx, default_templates())) {
        if (c.template_id != "explain_pair" || c.question.find("blue object and the cylinder") == std::string::npos) continue;
        for (const auto& ch : c.choices)
            if (event_identity(std::get<Event>(execute(ch.program, ctx))) == event_identity(Event::collision(0, 1, 0))) {
                CHECK(ch.correct);
                found = true;
            }
    }
    CHECK(found);
}

TEST_CASE("candidate pool properties over 100 scenes") {
    const auto& corpus = testing::small_corpus();
    REQUIRE(!corpus.candidates.empty());
    std::map<std::string, std::set<std::string>> answers_by_template;
    std::set<std::string> strata_seen;
    for (const auto& c : corpus.candidates) {
        const ExecContext& ctx = corpus.contexts.at(static_cast<std::size_t>(c.scene_id));
        strata_seen.insert(c.stratum());
        if (c.qtype == QType::Descriptive) {
            const auto& space = answer_space(c.subtype);
            CHECK(std::find(space.begin(), space.end(), c.answer) != space.end());
            CHECK(answer_token(execute(c.program, ctx)) == c.answer);
            CHECK(c.choices.empty());
            answers_by_template[c.template_id].insert(c.answer);
        } else {
            REQUIRE(c.choices.size() >= 2);
            int correct = 0;
            for (const auto& ch : c.choices) {
                CHECK(execute_choice(c.program, ch.program, ctx) == ch.correct);
                correct += ch.correct;
            }
            CHECK(correct >= 1);
            CHECK(correct < static_cast<int>(c.choices.size()));
        }
    }
    CHECK(strata_seen.size() == kStrata.size());
    // Anti-degeneracy: no descriptive template has the same answer in every scene.
    for (const auto& [id, answers] : answers_by_template) {
        INFO(id);
        CHECK(answers.size() >= 2);
    }
}

TEST_CASE("balanced sampling") {
    const auto& corpus = testing::small_corpus();
    const Quota quota = default_quota(3000);
    const SampleResult a = sample_balanced(corpus.candidates, quota, 5);
    const SampleResult b = sample_balanced(corpus.candidates, quota, 5);
    CHECK(a.items == b.items);
    CHECK(a.items != sample_balanced(corpus.candidates, quota, 6).items);

    std::map<std::string, int> per_stratum;
    std::map<std::string, std::map<std::string, int>> hist;
    int correct = 0, options = 0;
    for (std::size_t i = 0; i < a.items.size(); ++i) {
        const QAItem& q = a.items[i];
        CHECK(q.id == static_cast<int>(i));
        if (i) CHECK(a.items[i - 1].scene_id <= q.scene_id);
        ++per_stratum[q.stratum()];
        if (q.qtype == QType::Descriptive) {
            ++hist[q.stratum()][q.answer];
            continue;
        }
        if (q.qtype == QType::Predictive) {
            REQUIRE(q.choices.size() == 2);
            CHECK(q.choices[0].correct != q.choices[1].correct);
        } else {
            CHECK(q.choices.size() >= 2);
            CHECK(q.choices.size() <= 4);
            for (const auto& ch : q.choices) {
                correct += ch.correct;
                ++options;
            }
        }
    }
    for (const auto& [stratum, n] : quota) {
        if (a.warnings.empty()) CHECK(per_stratum[stratum] == n);
    }
    // Every answer stays under 1.2x its uniform share.
    for (const auto& [stratum, counts] : hist) {
        int total = 0;
        for (const auto& [ans, n] : counts) total += n;
        const double uniform = double(total) / answer_space(parse_subtype(stratum)).size();
        for (const auto& [ans, n] : counts) CHECK(n <= 1.2 * uniform + 1);
    }
    CHECK(double(correct) / options == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("sampling short of supply warns and returns what it has") {
    const auto& corpus = testing::small_corpus();
    const SampleResult r = sample_balanced(corpus.candidates, Quota{{"count", 1000000}}, 1);
    CHECK_FALSE(r.warnings.empty());
    CHECK(!r.items.empty());
    CHECK(r.items.size() < 1000000);
    CHECK_THROWS_AS(sample_balanced(corpus.candidates, Quota{{"sarcasm", 3}}, 1), InputError);
}

TEST_CASE("QA items round-trip through JSON") {
    const auto& corpus = testing::small_corpus();
    const SampleResult r = sample_balanced(corpus.candidates, default_quota(400), 9);
    for (const auto& q : r.items) CHECK(qa_from_json(qa_to_json(q)) == q);
}
