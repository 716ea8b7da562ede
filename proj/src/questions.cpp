#include "eventqa/questions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "eventqa/errors.hpp"
#include "eventqa/rng.hpp"

namespace eventqa {

std::string_view to_string(QType t) {
    switch (t) {
        case QType::Descriptive: return "descriptive";
        case QType::Explanatory: return "explanatory";
        case QType::Predictive: return "predictive";
        case QType::Counterfactual: return "counterfactual";
    }
    return "?";
}

std::string_view to_string(Subtype s) {
    switch (s) {
        case Subtype::None: return "";
        case Subtype::Count: return "count";
        case Subtype::Exist: return "exist";
        case Subtype::QueryColor: return "query_color";
        case Subtype::QueryMaterial: return "query_material";
        case Subtype::QueryShape: return "query_shape";
    }
    return "?";
}

QType parse_qtype(std::string_view s) {
    for (QType t : {QType::Descriptive, QType::Explanatory, QType::Predictive, QType::Counterfactual})
        if (to_string(t) == s) return t;
    throw InputError("unknown question type '" + std::string(s) + "'");
}

Subtype parse_subtype(std::string_view s) {
    for (Subtype t : {Subtype::None, Subtype::Count, Subtype::Exist, Subtype::QueryColor, Subtype::QueryMaterial,
                      Subtype::QueryShape})
        if (to_string(t) == s) return t;
    throw InputError("unknown descriptive sub-type '" + std::string(s) + "'");
}

const std::vector<std::string>& answer_space(Subtype s) {
    static const std::vector<std::string> none;
    static const std::vector<std::string> count = {"0", "1", "2", "3", "4", "5"};
    static const std::vector<std::string> exist = {"yes", "no"};
    static const auto names = [](const auto& all) {
        std::vector<std::string> out;
        for (auto v : all) out.emplace_back(to_string(v));
        return out;
    };
    static const std::vector<std::string> colors = names(kAllColors);
    static const std::vector<std::string> materials = names(kAllMaterials);
    static const std::vector<std::string> shapes = names(kAllShapes);
    switch (s) {
        case Subtype::None: return none;
        case Subtype::Count: return count;
        case Subtype::Exist: return exist;
        case Subtype::QueryColor: return colors;
        case Subtype::QueryMaterial: return materials;
        case Subtype::QueryShape: return shapes;
    }
    return none;
}

std::string stratum_of(QType t, Subtype s) {
    if (t == QType::Descriptive) return std::string(to_string(s));
    return std::string(to_string(t));
}

namespace {

bool is_object_slot(std::string_view name) {
    return name.size() >= 2 && name[0] == 'O' &&
           std::all_of(name.begin() + 1, name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

// Slot names in order of first appearance, for `<NAME>` (text) or `$NAME` (program).
std::vector<std::string> text_slots(std::string_view text) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '<') continue;
        const auto close = text.find('>', i);
        if (close == std::string_view::npos) throw InputError("unterminated slot in '" + std::string(text) + "'");
        std::string name(text.substr(i + 1, close - i - 1));
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
        i = close;
    }
    return out;
}

std::set<std::string> program_slots(std::string_view program) {
    std::set<std::string> out;
    for (std::size_t i = 0; i < program.size(); ++i) {
        if (program[i] != '$') continue;
        std::size_t j = i + 1;
        while (j < program.size() && (std::isalnum(static_cast<unsigned char>(program[j])) || program[j] == '_')) ++j;
        out.insert(std::string(program.substr(i + 1, j - i - 1)));
        i = j - 1;
    }
    return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
    return s;
}

void check_slots(const std::string& id, const std::vector<std::string>& slots, const std::string& program,
                 bool symmetric) {
    for (const auto& s : slots)
        if (!is_object_slot(s) && s != "ORD") throw InputError("template " + id + ": unknown slot <" + s + ">");
    const std::set<std::string> in_text(slots.begin(), slots.end());
    if (in_text != program_slots(program)) throw InputError("template " + id + ": text and program slots differ");
    if (symmetric && !(in_text.count("O1") && in_text.count("O2")))
        throw InputError("template " + id + ": symmetric templates need <O1> and <O2>");
}

// Binds every slot to something valid, so the program can be typechecked.
SlotValues dummy_values(const std::vector<std::string>& slots) {
    SlotValues v;
    for (const auto& s : slots) {
        if (s == "ORD")
            v.orders[s] = Order::First;
        else
            v.objects[s] = ObjectDescription{std::nullopt, std::nullopt, Shape::Cube};
    }
    return v;
}

Tag expected_root(Subtype s) {
    switch (s) {
        case Subtype::Count: return Tag::Int;
        case Subtype::Exist: return Tag::Bool;
        case Subtype::QueryColor: return Tag::Color;
        case Subtype::QueryMaterial: return Tag::Material;
        case Subtype::QueryShape: return Tag::Shape;
        case Subtype::None: break;
    }
    return Tag::Bool;
}

std::string get_string(const nlohmann::json& j, const char* key, const std::string& what) {
    if (!j.contains(key) || !j.at(key).is_string()) throw InputError(what + ": missing string field '" + key + "'");
    return j.at(key).get<std::string>();
}

QuestionTemplate parse_question_template(const nlohmann::json& j) {
    QuestionTemplate t;
    t.id = get_string(j, "id", "question template");
    t.qtype = parse_qtype(get_string(j, "type", t.id));
    if (t.qtype == QType::Descriptive) t.subtype = parse_subtype(get_string(j, "subtype", t.id));
    t.text = get_string(j, "text", t.id);
    t.program = get_string(j, "program", t.id);
    t.symmetric = j.value("symmetric", false);
    t.choice_pool = j.value("choices", std::string());
    t.exclude_choices_with = j.value("exclude_choices_with", std::string());
    return t;
}

void validate(QuestionTemplate& t) {
    t.slots = text_slots(t.text);
    check_slots(t.id, t.slots, t.program, t.symmetric);
    const bool mc = t.qtype != QType::Descriptive;
    if (!mc && t.subtype == Subtype::None) throw InputError("template " + t.id + ": descriptive needs a sub-type");
    if (mc && t.choice_pool != "observed" && t.choice_pool != "hypothetical")
        throw InputError("template " + t.id + ": choices must be 'observed' or 'hypothetical'");
    if (!mc && !t.choice_pool.empty()) throw InputError("template " + t.id + ": descriptive templates take no choices");
    if (!t.exclude_choices_with.empty() &&
        std::find(t.slots.begin(), t.slots.end(), t.exclude_choices_with) == t.slots.end())
        throw InputError("template " + t.id + ": exclude_choices_with names an unknown slot");

    const Program p = instantiate_program(t.program, dummy_values(t.slots));
    const TypeInfo info = typecheck(p);
    if (mc) {
        if (info.root != Tag::Bool || info.slot != Tag::Event)
            throw InputError("template " + t.id + ": multiple-choice program must map an event choice to bool");
    } else if (info.slot || info.root != expected_root(t.subtype)) {
        throw InputError("template " + t.id + ": program output does not fit sub-type " +
                         std::string(to_string(t.subtype)));
    }
}

void validate(ChoiceTemplate& t) {
    t.slots = text_slots(t.text);
    check_slots(t.id, t.slots, t.program, t.symmetric);
    if (t.pool != "observed" && t.pool != "hypothetical")
        throw InputError("choice template " + t.id + ": pool must be 'observed' or 'hypothetical'");
    const TypeInfo info = typecheck(instantiate_program(t.program, dummy_values(t.slots)));
    if (info.slot || info.root != Tag::Event)
        throw InputError("choice template " + t.id + ": program must produce one event");
}

}  // namespace

TemplateSet load_templates(const nlohmann::json& j) {
    TemplateSet set;
    if (!j.is_object() || !j.contains("version") || !j.at("version").is_number_integer())
        throw InputError("template file: missing integer 'version'");
    set.version = j.at("version").get<int>();
    if (!j.contains("questions") || !j.at("questions").is_array())
        throw InputError("template file: missing 'questions' array");
    for (const auto& q : j.at("questions")) {
        const std::string id = get_string(q, "id", "question template");
        if (id.find("{q}") == std::string::npos) {
            set.questions.push_back(parse_question_template(q));
            continue;
        }
        for (std::string attr : {"color", "material", "shape"}) {
            nlohmann::json e = q;
            for (const char* key : {"id", "subtype", "text", "program"})
                if (e.contains(key) && e[key].is_string())
                    e[key] = replace_all(e[key].get<std::string>(), "{q}", attr);
            set.questions.push_back(parse_question_template(e));
        }
    }
    if (j.contains("choices")) {
        for (const auto& c : j.at("choices")) {
            ChoiceTemplate t;
            t.id = get_string(c, "id", "choice template");
            t.pool = get_string(c, "pool", t.id);
            t.text = get_string(c, "text", t.id);
            t.program = get_string(c, "program", t.id);
            t.symmetric = c.value("symmetric", false);
            set.choices.push_back(std::move(t));
        }
    }
    std::set<std::string> ids;
    for (auto& t : set.questions) {
        validate(t);
        if (!ids.insert(t.id).second) throw InputError("duplicate template id " + t.id);
    }
    for (auto& t : set.choices) {
        validate(t);
        if (!ids.insert(t.id).second) throw InputError("duplicate template id " + t.id);
    }
    for (const auto& t : set.questions) {
        if (t.choice_pool.empty()) continue;
        if (std::none_of(set.choices.begin(), set.choices.end(), [&](const auto& c) { return c.pool == t.choice_pool; }))
            throw InputError("template " + t.id + ": no choice templates in pool " + t.choice_pool);
    }
    return set;
}

TemplateSet load_templates_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open template file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("template file " + path + ": " + e.what());
    }
    return load_templates(j);
}

const TemplateSet& default_templates() {
    static const TemplateSet set = load_templates(nlohmann::json::parse(default_templates_text()));
    return set;
}

// ---------------------------------------------------------------------------
// Referring expressions

ObjectDescription minimal_description(std::span<const ObjectSpec> objects, int id) {
    auto it = std::find_if(objects.begin(), objects.end(), [&](const ObjectSpec& o) { return o.id == id; });
    if (it == objects.end()) throw InputError("unknown object " + std::to_string(id));
    const Attribute& a = it->attrs;
    // Candidate subsets, smallest first: shape, color, material, then pairs, then all three.
    static constexpr std::array<std::array<bool, 3>, 7> kSubsets = {{{false, false, true},
                                                                     {true, false, false},
                                                                     {false, true, false},
                                                                     {true, false, true},
                                                                     {false, true, true},
                                                                     {true, true, false},
                                                                     {true, true, true}}};
    for (const auto& [use_c, use_m, use_s] : kSubsets) {
        const auto matches = std::count_if(objects.begin(), objects.end(), [&](const ObjectSpec& o) {
            return (!use_c || o.attrs.color == a.color) && (!use_m || o.attrs.material == a.material) &&
                   (!use_s || o.attrs.shape == a.shape);
        });
        if (matches == 1) {
            ObjectDescription d;
            if (use_c) d.color = a.color;
            if (use_m) d.material = a.material;
            if (use_s) d.shape = a.shape;
            return d;
        }
    }
    throw InputError("object " + std::to_string(id) + " has the same attributes as another object");
}

std::string describe_phrase(const ObjectDescription& d) {
    std::string out;
    if (d.color) out += std::string(to_string(*d.color)) + " ";
    if (d.material) out += std::string(to_string(*d.material)) + " ";
    out += d.shape ? std::string(to_string(*d.shape)) : std::string("object");
    return out;
}

Program description_program(const ObjectDescription& d) {
    if (!d.color && !d.material && !d.shape) throw InputError("object description needs at least one attribute");
    Program p;
    p.nodes.push_back({Op::Objects, {}, {}});
    auto add = [&](Op op, std::string_view literal) {
        p.nodes.push_back({op, {p.root()}, {std::string(literal)}});
    };
    if (d.shape) add(Op::FilterShape, to_string(*d.shape));
    if (d.material) add(Op::FilterMaterial, to_string(*d.material));
    if (d.color) add(Op::FilterColor, to_string(*d.color));
    p.nodes.push_back({Op::Unique, {p.root()}, {}});
    return p;
}

std::string render_text(std::string_view pattern, const SlotValues& v) {
    std::string out;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] != '<') {
            out += pattern[i];
            continue;
        }
        const auto close = pattern.find('>', i);
        const std::string name(pattern.substr(i + 1, close - i - 1));
        if (auto it = v.objects.find(name); it != v.objects.end())
            out += describe_phrase(it->second);
        else if (auto ot = v.orders.find(name); ot != v.orders.end())
            out += to_string(ot->second);
        else
            throw InputError("no value for slot <" + name + ">");
        i = close;
    }
    return out;
}

Program instantiate_program(std::string_view pattern, const SlotValues& v) {
    return parse_program(pattern, [&](std::string_view name) -> SlotBinding {
        const std::string key(name);
        if (auto it = v.objects.find(key); it != v.objects.end()) return description_program(it->second);
        if (auto ot = v.orders.find(key); ot != v.orders.end()) return std::string(to_string(ot->second));
        throw InputError("no value for slot $" + key);
    });
}

// ---------------------------------------------------------------------------
// Candidate enumeration

namespace {

struct Binding {
    std::map<std::string, int> objects;  // slot -> object id
    SlotValues values;
};

// Calls `emit` for every assignment of distinct objects to object slots and of
// orders to ORD. Symmetric templates keep O1 < O2 by id.
template <typename Emit>
void for_each_binding(const std::vector<std::string>& slots, bool symmetric, const ExecContext& ctx,
                      const std::vector<ObjectDescription>& descriptions, Emit&& emit) {
    Binding b;
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == slots.size()) {
            emit(b);
            return;
        }
        const std::string& s = slots[k];
        if (s == "ORD") {
            for (Order o : {Order::First, Order::Second, Order::Last}) {
                b.values.orders[s] = o;
                rec(k + 1);
            }
            b.values.orders.erase(s);
            return;
        }
        for (std::size_t i = 0; i < ctx.objects.size(); ++i) {
            const int id = ctx.objects[i].id;
            bool taken = false;
            for (const auto& [name, other] : b.objects) taken |= other == id;
            if (taken) continue;
            if (symmetric && s == "O2" && b.objects.count("O1") && b.objects.at("O1") > id) continue;
            if (symmetric && s == "O1" && b.objects.count("O2") && b.objects.at("O2") < id) continue;
            b.objects[s] = id;
            b.values.objects[s] = descriptions[i];
            rec(k + 1);
            b.objects.erase(s);
            b.values.objects.erase(s);
        }
    };
    rec(0);
}

struct Option {
    std::string text;
    Program program;
    Value value;  // always an Event
    const Event& event() const { return std::get<Event>(value); }
};

std::vector<Option> option_pool(const std::string& pool, const ExecContext& ctx, const TemplateSet& templates,
                                const std::vector<ObjectDescription>& descriptions) {
    std::vector<Option> out;
    for (const auto& t : templates.choices) {
        if (t.pool != pool) continue;
        for_each_binding(t.slots, t.symmetric, ctx, descriptions, [&](const Binding& b) {
            Program p = instantiate_program(t.program, b.values);
            try {
                Value v = execute(p, ctx);
                if (tag_of(v) != Tag::Event) throw InputError("choice template " + t.id + " does not denote an event");
                out.push_back({render_text(t.text, b.values), std::move(p), std::move(v)});
            } catch (const ExecError&) {
                // binding does not denote an event in this scene
            }
        });
    }
    return out;
}

std::string key_string(const EventKey& k) {
    return std::to_string(static_cast<int>(k.kind)) + ":" + std::to_string(k.ids[0]) + ":" + std::to_string(k.ids[1]);
}

}  // namespace

std::vector<QAItem> enumerate_candidates(int scene_id, const ExecContext& ctx, const TemplateSet& templates) {
    std::vector<ObjectDescription> descriptions;
    for (const auto& o : ctx.objects) descriptions.push_back(minimal_description(ctx.objects, o.id));

    std::map<std::string, std::vector<Option>> pools;
    std::vector<QAItem> out;
    for (const auto& t : templates.questions) {
        const bool mc = t.qtype != QType::Descriptive;
        if (mc && !pools.count(t.choice_pool)) pools[t.choice_pool] = option_pool(t.choice_pool, ctx, templates, descriptions);

        for_each_binding(t.slots, t.symmetric, ctx, descriptions, [&](const Binding& b) {
            QAItem item;
            item.scene_id = scene_id;
            item.template_id = t.id;
            item.qtype = t.qtype;
            item.subtype = t.subtype;
            item.question = render_text(t.text, b.values);
            item.program = instantiate_program(t.program, b.values);
            try {
                if (!mc) {
                    const Value v = execute(item.program, ctx);
                    if (const int* n = std::get_if<int>(&v); n && (*n < 0 || *n > 5)) return;
                    item.answer = answer_token(v);
                    out.push_back(std::move(item));
                    return;
                }

                std::set<EventKey> excluded;
                for (int i = 0; i <= item.program.root(); ++i) {
                    const Node& n = item.program.nodes[static_cast<std::size_t>(i)];
                    if (n.op != Op::FilterAncestor) continue;
                    excluded.insert(event_identity(std::get<Event>(execute_subtree(item.program, n.inputs[1], ctx))));
                }
                std::optional<int> banned;
                if (!t.exclude_choices_with.empty()) banned = b.objects.at(t.exclude_choices_with);

                // Options denoting the same event are alternatives; keep one, chosen by a stable hash.
                std::map<EventKey, std::vector<Choice>> by_event;
                for (const auto& opt : pools.at(t.choice_pool)) {
                    const EventKey key = event_identity(opt.event());
                    if (excluded.count(key) || (banned && opt.event().involves(*banned))) continue;
                    const bool correct = std::get<bool>(execute(item.program, ctx, &opt.value));
                    by_event[key].push_back({opt.text, opt.program, correct});
                }
                int n_correct = 0;
                for (auto& [key, alternatives] : by_event) {
                    const std::string salt = item.question + "|" + key_string(key);
                    const auto pick = fnv1a64(salt.data(), salt.size()) % alternatives.size();
                    item.choices.push_back(std::move(alternatives[pick]));
                    n_correct += item.choices.back().correct;
                }
                if (n_correct == 0 || n_correct == static_cast<int>(item.choices.size())) return;
                out.push_back(std::move(item));
            } catch (const ExecError&) {
                // a referring expression or ordinal does not resolve in this scene
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Balanced sampling

Quota default_quota(int total) {
    static const std::vector<std::pair<std::string, double>> weights = {
        {"count", 0.08},       {"exist", 0.15},       {"query_color", 0.12}, {"query_material", 0.14},
        {"query_shape", 0.14}, {"explanatory", 0.16}, {"predictive", 0.05},  {"counterfactual", 0.16}};
    Quota q;
    int assigned = 0;
    for (const auto& [name, w] : weights) {
        q[name] = static_cast<int>(std::floor(w * total));
        assigned += q[name];
    }
    for (std::size_t i = 0; assigned < total; i = (i + 1) % weights.size(), ++assigned) ++q[weights[i].first];
    return q;
}

namespace {

constexpr int kMaxChoiceReuse = 10;

bool is_descriptive_stratum(const std::string& s) {
    return s == "count" || s == "exist" || s.rfind("query_", 0) == 0;
}

void sample_descriptive(const std::string& stratum, const std::vector<const QAItem*>& pool, int quota, Rng& rng,
                        SampleResult& out) {
    const Subtype sub = parse_subtype(stratum);
    const auto& answers = answer_space(sub);
    const std::size_t k = answers.size();
    std::vector<std::vector<const QAItem*>> buckets(k);
    for (const QAItem* q : pool) {
        auto it = std::find(answers.begin(), answers.end(), q->answer);
        if (it == answers.end()) throw InputError("candidate answer '" + q->answer + "' outside the " + stratum + " answer space");
        buckets[static_cast<std::size_t>(it - answers.begin())].push_back(q);
    }

    std::vector<int> take(k);
    for (std::size_t a = 0; a < k; ++a) {
        const int target = quota / static_cast<int>(k) + (static_cast<int>(a) < quota % static_cast<int>(k) ? 1 : 0);
        take[a] = std::min<int>(target, static_cast<int>(buckets[a].size()));
    }
    // Correlation control: no answer may exceed 1.2x the uniform share of what is taken.
    for (bool changed = true; changed;) {
        changed = false;
        const int total = std::accumulate(take.begin(), take.end(), 0);
        const int cap = static_cast<int>(std::floor(1.2 * total / static_cast<double>(k)));
        for (int& t : take)
            if (t > cap) {
                t = cap;
                changed = true;
            }
    }

    const int total = std::accumulate(take.begin(), take.end(), 0);
    if (total < quota) {
        std::ostringstream msg;
        msg << stratum << ": " << total << " of " << quota << " questions; candidates per answer:";
        for (std::size_t a = 0; a < k; ++a) msg << " " << answers[a] << "=" << buckets[a].size();
        out.warnings.push_back(msg.str());
    }
    for (std::size_t a = 0; a < k; ++a) {
        auto& bucket = buckets[a];
        rng.shuffle(bucket);
        for (int i = 0; i < take[a]; ++i) out.items.push_back(*bucket[static_cast<std::size_t>(i)]);
    }
}

void sample_choices(const std::string& stratum, const std::vector<const QAItem*>& pool, int quota, Rng& rng,
                    long& balance, SampleResult& out) {
    const bool predictive = stratum == "predictive";
    std::vector<const QAItem*> order = pool;
    rng.shuffle(order);
    std::map<const QAItem*, std::set<std::vector<std::size_t>>> used;
    int produced = 0;
    for (int round = 0; round < kMaxChoiceReuse && produced < quota; ++round) {
        for (const QAItem* q : order) {
            if (produced >= quota) break;
            std::vector<std::size_t> right, wrong;
            for (std::size_t i = 0; i < q->choices.size(); ++i) (q->choices[i].correct ? right : wrong).push_back(i);

            for (int attempt = 0; attempt < 4; ++attempt) {
                int n_options = 2;
                int n_right = 1;
                if (!predictive) {
                    n_options = static_cast<int>(rng.uniform_int(2, 4));
                    n_options = std::min<int>(n_options, static_cast<int>(q->choices.size()));
                    const int lo = std::max<int>(1, n_options - static_cast<int>(wrong.size()));
                    const int hi = std::min<int>(n_options - 1, static_cast<int>(right.size()));
                    // Pull the running correct-minus-wrong count toward zero.
                    long best = -1;
                    for (int c = lo; c <= hi; ++c) {
                        const long after = std::labs(balance + c - (n_options - c));
                        if (best < 0 || after < best || (after == best && rng.bernoulli(0.5))) {
                            best = after;
                            n_right = c;
                        }
                    }
                }
                rng.shuffle(right);
                rng.shuffle(wrong);
                std::vector<std::size_t> picked(right.begin(), right.begin() + n_right);
                picked.insert(picked.end(), wrong.begin(), wrong.begin() + (n_options - n_right));
                std::vector<std::size_t> key = picked;
                std::sort(key.begin(), key.end());
                if (!used[q].insert(key).second) continue;

                rng.shuffle(picked);
                QAItem item = *q;
                item.choices.clear();
                for (std::size_t i : picked) item.choices.push_back(q->choices[i]);
                balance += n_right - (n_options - n_right);
                out.items.push_back(std::move(item));
                ++produced;
                break;
            }
        }
    }
    if (produced < quota)
        out.warnings.push_back(stratum + ": " + std::to_string(produced) + " of " + std::to_string(quota) +
                               " questions from " + std::to_string(pool.size()) + " candidates");
}

}  // namespace

SampleResult sample_balanced(std::span<const QAItem> candidates, const Quota& quota, std::uint64_t seed) {
    for (const auto& [name, n] : quota) {
        if (std::find(kStrata.begin(), kStrata.end(), name) == kStrata.end())
            throw InputError("unknown quota stratum '" + name + "'");
        if (n < 0) throw InputError("negative quota for " + name);
    }
    std::map<std::string, std::vector<const QAItem*>> by_stratum;
    for (const auto& q : candidates) by_stratum[q.stratum()].push_back(&q);

    SampleResult out;
    long balance = 0;  // correct minus wrong options over explanatory and counterfactual
    for (const auto& stratum : kStrata) {
        auto it = quota.find(stratum);
        if (it == quota.end() || it->second == 0) continue;
        const auto& pool = by_stratum[stratum];
        if (pool.empty()) {
            out.warnings.push_back(stratum + ": no candidates");
            continue;
        }
        Rng rng(mix_seed(seed ^ fnv1a64(stratum.data(), stratum.size())));
        if (is_descriptive_stratum(stratum)) {
            sample_descriptive(stratum, pool, it->second, rng, out);
        } else {
            long local = 0;
            sample_choices(stratum, pool, it->second, rng, stratum == "predictive" ? local : balance, out);
        }
    }
    std::stable_sort(out.items.begin(), out.items.end(),
                     [](const QAItem& a, const QAItem& b) { return a.scene_id < b.scene_id; });
    for (std::size_t i = 0; i < out.items.size(); ++i) out.items[i].id = static_cast<int>(i);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json qa_to_json(const QAItem& q) {
    nlohmann::json j;
    j["id"] = q.id;
    j["scene_id"] = q.scene_id;
    j["template"] = q.template_id;
    j["type"] = std::string(to_string(q.qtype));
    j["question"] = q.question;
    j["program"] = program_to_json(q.program);
    if (q.qtype == QType::Descriptive) {
        j["subtype"] = std::string(to_string(q.subtype));
        j["answer"] = q.answer;
    } else {
        nlohmann::json choices = nlohmann::json::array();
        for (const auto& c : q.choices)
            choices.push_back({{"text", c.text}, {"program", program_to_json(c.program)}, {"answer", c.correct ? "yes" : "no"}});
        j["choices"] = std::move(choices);
    }
    return j;
}

QAItem qa_from_json(const nlohmann::json& j) {
    try {
        QAItem q;
        q.id = j.at("id").get<int>();
        q.scene_id = j.at("scene_id").get<int>();
        q.template_id = j.at("template").get<std::string>();
        q.qtype = parse_qtype(j.at("type").get<std::string>());
        q.question = j.at("question").get<std::string>();
        q.program = program_from_json(j.at("program"));
        if (q.qtype == QType::Descriptive) {
            q.subtype = parse_subtype(j.at("subtype").get<std::string>());
            q.answer = j.at("answer").get<std::string>();
        } else {
            for (const auto& c : j.at("choices")) {
                const std::string a = c.at("answer").get<std::string>();
                if (a != "yes" && a != "no") throw InputError("choice answer must be yes or no");
                q.choices.push_back({c.at("text").get<std::string>(), program_from_json(c.at("program")), a == "yes"});
            }
        }
        return q;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed question record: ") + e.what());
    }
}

}  // namespace eventqa
