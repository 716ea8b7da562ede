#pragma once

// Template-driven question generation: the template inventory, referring
// expressions, exhaustive candidate enumeration and balanced sampling.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eventqa/executor.hpp"
#include "eventqa/program.hpp"
#include "json.hpp"

namespace eventqa {

enum class QType : std::uint8_t { Descriptive, Explanatory, Predictive, Counterfactual };
enum class Subtype : std::uint8_t { None, Count, Exist, QueryColor, QueryMaterial, QueryShape };

std::string_view to_string(QType t);
std::string_view to_string(Subtype s);
QType parse_qtype(std::string_view s);      // throws InputError
Subtype parse_subtype(std::string_view s);  // throws InputError

/// Single-word answers a descriptive sub-type can have.
const std::vector<std::string>& answer_space(Subtype s);

/// Sampling stratum: the sub-type for descriptive questions, the type otherwise.
std::string stratum_of(QType t, Subtype s);
inline const std::vector<std::string> kStrata = {"count",       "exist",      "query_color",   "query_material",
                                                 "query_shape", "explanatory", "predictive", "counterfactual"};

/// Slots appear as <O1>, <O2>, <ORD> in text and as $O1, $O2, $ORD in the program.
/// `O<n>` slots bind scene objects, `ORD` binds first/second/last.
struct QuestionTemplate {
    std::string id;
    QType qtype = QType::Descriptive;
    Subtype subtype = Subtype::None;
    std::string text;
    std::string program;
    bool symmetric = false;            // O1/O2 bound in id order only
    std::string choice_pool;           // multiple-choice only: "observed" or "hypothetical"
    std::string exclude_choices_with;  // object slot whose object may not appear in options
    std::vector<std::string> slots;    // in order of first appearance in the text

    bool operator==(const QuestionTemplate&) const = default;
};

struct ChoiceTemplate {
    std::string id;
    std::string pool;
    std::string text;
    std::string program;
    bool symmetric = false;
    std::vector<std::string> slots;

    bool operator==(const ChoiceTemplate&) const = default;
};

struct TemplateSet {
    int version = 0;
    std::vector<QuestionTemplate> questions;
    std::vector<ChoiceTemplate> choices;
};

/// Parses and validates a template file. `{q}` in a query template expands to
/// color, material and shape. Throws InputError on schema or slot mismatches.
TemplateSet load_templates(const nlohmann::json& j);
TemplateSet load_templates_file(const std::string& path);
/// The inventory compiled into the library.
const TemplateSet& default_templates();
std::string_view default_templates_text();

/// Attribute subset used to refer to an object, e.g. "red cube" or "metal object".
struct ObjectDescription {
    std::optional<Color> color;
    std::optional<Material> material;
    std::optional<Shape> shape;

    bool operator==(const ObjectDescription&) const = default;
};

/// Smallest attribute subset that singles the object out among `objects`.
ObjectDescription minimal_description(std::span<const ObjectSpec> objects, int id);
std::string describe_phrase(const ObjectDescription& d);
/// Unique(Filter_color(Filter_material(Filter_shape(Objects, s), m), c)) with only the used filters.
Program description_program(const ObjectDescription& d);

/// Values bound to a template's slots.
struct SlotValues {
    std::map<std::string, ObjectDescription> objects;
    std::map<std::string, Order> orders;
};

/// Instantiates a template's text / program with bound slot values.
std::string render_text(std::string_view pattern, const SlotValues& v);
Program instantiate_program(std::string_view pattern, const SlotValues& v);

struct Choice {
    std::string text;
    Program program;
    bool correct = false;

    bool operator==(const Choice&) const = default;
};

struct QAItem {
    int id = -1;
    int scene_id = 0;
    std::string template_id;
    QType qtype = QType::Descriptive;
    Subtype subtype = Subtype::None;
    std::string question;
    Program program;
    std::string answer;           // descriptive only
    std::vector<Choice> choices;  // multiple-choice only

    bool operator==(const QAItem&) const = default;
    std::string stratum() const { return stratum_of(qtype, subtype); }
};

/// Every answerable instantiation of every template on one scene. For
/// multiple-choice templates `choices` holds the whole option pool (at least
/// one correct and one wrong option, distinct events).
std::vector<QAItem> enumerate_candidates(int scene_id, const ExecContext& ctx, const TemplateSet& templates);

/// Questions per stratum (see kStrata).
using Quota = std::map<std::string, int>;

/// Splits `total` questions over the strata by fixed weights.
Quota default_quota(int total);

struct SampleResult {
    std::vector<QAItem> items;  // ordered by scene id, ids assigned 0..n-1
    std::vector<std::string> warnings;
};

/// Balanced selection: descriptive answers drawn toward uniform within each
/// sub-type, with no answer above 1.2x its uniform share; multiple-choice
/// options subsampled (2 for predictive, 2-4 otherwise) so that correct and
/// wrong options are balanced globally. Deterministic given the seed.
SampleResult sample_balanced(std::span<const QAItem> candidates, const Quota& quota, std::uint64_t seed);

nlohmann::json qa_to_json(const QAItem& q);
QAItem qa_from_json(const nlohmann::json& j);

}  // namespace eventqa
