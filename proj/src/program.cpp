#include "eventqa/program.hpp"

#include <array>
#include <cctype>
#include <initializer_list>

#include "eventqa/errors.hpp"

namespace eventqa {

namespace {

constexpr std::array<std::string_view, kOpCount> kOpNames{
    "Objects",         "Events",         "UnseenEvents",   "AllEvents",        "Start",
    "End",             "Filter_color",   "Filter_material", "Filter_shape",    "Filter_moving",
    "Filter_stationary", "Filter_in",    "Filter_out",     "Filter_collision", "Filter_before",
    "Filter_after",    "Filter_order",   "Filter_ancestor", "Get_frame",       "Get_counterfact",
    "Get_col_partner", "Get_object",     "Unique",         "Query_color",      "Query_material",
    "Query_shape",     "Count",          "Exist",          "Belong_to",        "Negate",
};

constexpr std::array<std::string_view, 3> kOrderNames{"first", "second", "last"};
constexpr std::array<std::string_view, 11> kTagNames{"object", "objects", "event", "events", "order", "color",
                                                     "material", "shape", "frame", "int", "bool"};

using TagSet = std::initializer_list<Tag>;

// Accepted tags for one child input.
struct Slot {
    std::vector<Tag> accepts;
    bool optional = false;
};

struct Signature {
    std::vector<Slot> children;
    std::vector<Tag> side;  // literal kinds, in order
};

Slot one(Tag t) { return {{t}, false}; }
Slot objects_like() { return {{Tag::Objects, Tag::Object}, false}; }

Signature signature(Op op) {
    switch (op) {
        case Op::Objects:
        case Op::Events:
        case Op::UnseenEvents:
        case Op::AllEvents:
        case Op::Start:
        case Op::End:
            return {};
        case Op::FilterColor: return {{objects_like()}, {Tag::Color}};
        case Op::FilterMaterial: return {{objects_like()}, {Tag::Material}};
        case Op::FilterShape: return {{objects_like()}, {Tag::Shape}};
        case Op::FilterMoving:
        case Op::FilterStationary: return {{objects_like(), {{Tag::Frame}, true}}, {}};
        case Op::FilterIn:
        case Op::FilterOut:
        case Op::FilterCollision: return {{one(Tag::Events), objects_like()}, {}};
        case Op::FilterBefore:
        case Op::FilterAfter:
        case Op::FilterAncestor: return {{one(Tag::Events), one(Tag::Event)}, {}};
        case Op::FilterOrder: return {{one(Tag::Events)}, {Tag::Order}};
        case Op::GetFrame: return {{one(Tag::Event)}, {}};
        case Op::GetCounterfact: return {{one(Tag::Events), one(Tag::Object)}, {}};
        case Op::GetColPartner: return {{one(Tag::Event), one(Tag::Object)}, {}};
        case Op::GetObject: return {{one(Tag::Event)}, {}};
        case Op::Unique: return {{{{Tag::Objects, Tag::Events}, false}}, {}};
        case Op::QueryColor:
        case Op::QueryMaterial:
        case Op::QueryShape: return {{one(Tag::Object)}, {}};
        case Op::Count:
        case Op::Exist: return {{{{Tag::Objects, Tag::Events}, false}}, {}};
        case Op::BelongTo: return {{one(Tag::Event), one(Tag::Events)}, {}};
        case Op::Negate: return {{one(Tag::Bool)}, {}};
    }
    return {};
}

Tag output_tag(Op op, const std::vector<Tag>& in) {
    switch (op) {
        case Op::Objects:
        case Op::FilterColor:
        case Op::FilterMaterial:
        case Op::FilterShape:
        case Op::FilterMoving:
        case Op::FilterStationary: return Tag::Objects;
        case Op::Events:
        case Op::UnseenEvents:
        case Op::AllEvents:
        case Op::FilterIn:
        case Op::FilterOut:
        case Op::FilterCollision:
        case Op::FilterBefore:
        case Op::FilterAfter:
        case Op::FilterAncestor:
        case Op::GetCounterfact: return Tag::Events;
        case Op::Start:
        case Op::End:
        case Op::FilterOrder: return Tag::Event;
        case Op::GetFrame: return Tag::Frame;
        case Op::GetColPartner:
        case Op::GetObject: return Tag::Object;
        case Op::Unique: return in.at(0) == Tag::Objects ? Tag::Object : Tag::Event;
        case Op::QueryColor: return Tag::Color;
        case Op::QueryMaterial: return Tag::Material;
        case Op::QueryShape: return Tag::Shape;
        case Op::Count: return Tag::Int;
        case Op::Exist:
        case Op::BelongTo:
        case Op::Negate: return Tag::Bool;
    }
    return Tag::Bool;
}

bool literal_ok(Tag kind, const std::string& s) {
    switch (kind) {
        case Tag::Color: return parse_color(s).has_value();
        case Tag::Material: return parse_material(s).has_value();
        case Tag::Shape: return parse_shape(s).has_value();
        case Tag::Order: return parse_order(s).has_value();
        default: return false;
    }
}

std::string tag_list(const std::vector<Tag>& tags) {
    std::string s;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (i) s += "|";
        s += to_string(tags[i]);
    }
    return s;
}

// Recursive-descent reader for functional notation.
class ExprParser {
public:
    ExprParser(std::string_view text, const SlotResolver& resolve) : text_(text), resolve_(resolve) {}

    Program run() {
        skip_ws();
        if (pos_ == text_.size()) fail("empty program");
        expression();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing text");
        if (pending_literal_) fail("program root cannot be a literal");
        return std::move(out_);
    }

private:
    // Parses one argument. Returns true when it produced a node, false when it
    // produced a side-input literal (stored in pending_literal_).
    bool expression() {
        skip_ws();
        if (peek() == '?') {
            ++pos_;
            pending_index_ = kChoiceSlot;
            pending_literal_.reset();
            return true;
        }
        if (peek() == '$') {
            ++pos_;
            const std::string name = word();
            if (!resolve_) fail("no binding for $" + name);
            SlotBinding b = resolve_(name);
            if (auto* lit = std::get_if<std::string>(&b)) {
                pending_literal_ = *lit;
                return false;
            }
            splice(std::get<Program>(b));
            return true;
        }
        const std::string name = word();
        if (name.empty()) fail("expected an operation or literal");
        const auto op = parse_op(name);
        if (!op) {
            pending_literal_ = name;
            return false;
        }
        Node node;
        node.op = *op;
        skip_ws();
        if (peek() == '(') {
            ++pos_;
            for (;;) {
                if (expression()) {
                    node.inputs.push_back(pending_index_);
                } else {
                    node.side_inputs.push_back(*pending_literal_);
                    pending_literal_.reset();
                }
                skip_ws();
                if (peek() == ',') {
                    ++pos_;
                    continue;
                }
                if (peek() == ')') {
                    ++pos_;
                    break;
                }
                fail("expected ',' or ')'");
            }
        }
        out_.nodes.push_back(std::move(node));
        pending_index_ = static_cast<int>(out_.nodes.size()) - 1;
        pending_literal_.reset();
        return true;
    }

    void splice(const Program& sub) {
        if (sub.empty()) fail("empty slot binding");
        const int offset = static_cast<int>(out_.nodes.size());
        for (Node n : sub.nodes) {
            for (int& i : n.inputs)
                if (i != kChoiceSlot) i += offset;
            out_.nodes.push_back(std::move(n));
        }
        pending_index_ = static_cast<int>(out_.nodes.size()) - 1;
        pending_literal_.reset();
    }

    std::string word() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    [[noreturn]] void fail(const std::string& what) const {
        throw InputError("program text, offset " + std::to_string(pos_) + ": " + what);
    }

    std::string_view text_;
    const SlotResolver& resolve_;
    std::size_t pos_ = 0;
    Program out_;
    int pending_index_ = 0;
    std::optional<std::string> pending_literal_;
};

void render(const Program& p, int index, std::string& out) {
    if (index == kChoiceSlot) {
        out += '?';
        return;
    }
    const Node& n = p.nodes[static_cast<std::size_t>(index)];
    out += op_name(n.op);
    if (n.inputs.empty() && n.side_inputs.empty()) return;
    out += '(';
    bool first = true;
    for (int child : n.inputs) {
        if (!first) out += ", ";
        first = false;
        render(p, child, out);
    }
    for (const auto& lit : n.side_inputs) {
        if (!first) out += ", ";
        first = false;
        out += lit;
    }
    out += ')';
}

}  // namespace

std::string_view op_name(Op op) { return kOpNames[static_cast<std::size_t>(op)]; }

std::optional<Op> parse_op(std::string_view name) {
    for (std::size_t i = 0; i < kOpNames.size(); ++i)
        if (kOpNames[i] == name) return static_cast<Op>(i);
    return std::nullopt;
}

std::string_view to_string(Order o) { return kOrderNames[static_cast<std::size_t>(o)]; }

std::optional<Order> parse_order(std::string_view s) {
    for (std::size_t i = 0; i < kOrderNames.size(); ++i)
        if (kOrderNames[i] == s) return static_cast<Order>(i);
    return std::nullopt;
}

std::string_view to_string(Tag t) { return kTagNames[static_cast<std::size_t>(t)]; }

std::string answer_token(const Value& v) {
    switch (tag_of(v)) {
        case Tag::Int: return std::to_string(std::get<int>(v));
        case Tag::Bool: return std::get<bool>(v) ? "yes" : "no";
        case Tag::Color: return std::string(to_string(std::get<Color>(v)));
        case Tag::Material: return std::string(to_string(std::get<Material>(v)));
        case Tag::Shape: return std::string(to_string(std::get<Shape>(v)));
        default: throw InputError("value of tag " + std::string(to_string(tag_of(v))) + " is not an answer token");
    }
}

bool Program::has_choice_slot() const {
    for (const auto& n : nodes)
        for (int i : n.inputs)
            if (i == kChoiceSlot) return true;
    return false;
}

TypeInfo typecheck(const Program& p) {
    if (p.nodes.empty()) throw ProgramTypeError(0, "empty program");
    TypeInfo info;
    std::vector<Tag> tags(p.nodes.size());
    std::vector<int> consumers(p.nodes.size(), 0);

    for (std::size_t k = 0; k < p.nodes.size(); ++k) {
        const int idx = static_cast<int>(k);
        const Node& n = p.nodes[k];
        const Signature sig = signature(n.op);
        const std::string where = std::string(op_name(n.op));

        std::size_t required = 0;
        for (const auto& s : sig.children) required += s.optional ? 0 : 1;
        if (n.inputs.size() < required || n.inputs.size() > sig.children.size())
            throw ProgramTypeError(idx, where + " takes " + std::to_string(required) + ".." +
                                            std::to_string(sig.children.size()) + " inputs, got " +
                                            std::to_string(n.inputs.size()));
        if (n.side_inputs.size() != sig.side.size())
            throw ProgramTypeError(idx, where + " takes " + std::to_string(sig.side.size()) + " side inputs, got " +
                                            std::to_string(n.side_inputs.size()));
        for (std::size_t s = 0; s < sig.side.size(); ++s)
            if (!literal_ok(sig.side[s], n.side_inputs[s]))
                throw ProgramTypeError(idx, where + " side input '" + n.side_inputs[s] + "' is not a " +
                                                std::string(to_string(sig.side[s])));

        std::vector<Tag> in;
        for (std::size_t c = 0; c < n.inputs.size(); ++c) {
            const auto& accepts = sig.children[c].accepts;
            const int child = n.inputs[c];
            Tag t;
            if (child == kChoiceSlot) {
                if (info.slot) throw ProgramTypeError(idx, "more than one choice slot");
                if (accepts.size() != 1)
                    throw ProgramTypeError(idx, "choice slot in a position that accepts several tags");
                info.slot = accepts[0];
                t = accepts[0];
            } else {
                if (child < 0 || child >= idx)
                    throw ProgramTypeError(idx, where + " input " + std::to_string(child) + " is not an earlier node");
                if (++consumers[static_cast<std::size_t>(child)] > 1)
                    throw ProgramTypeError(child, "node feeds more than one parent");
                t = tags[static_cast<std::size_t>(child)];
            }
            bool ok = false;
            for (Tag a : accepts) ok |= (a == t);
            if (!ok)
                throw ProgramTypeError(idx, where + " input " + std::to_string(c) + " expects " + tag_list(accepts) +
                                                ", got " + std::string(to_string(t)));
            in.push_back(t);
        }
        tags[k] = output_tag(n.op, in);
    }
    for (std::size_t k = 0; k + 1 < p.nodes.size(); ++k)
        if (consumers[k] == 0) throw ProgramTypeError(static_cast<int>(k), "node is not connected to the root");
    info.root = tags.back();
    return info;
}

std::string to_string(const Program& p) {
    std::string out;
    if (!p.empty()) render(p, p.root(), out);
    return out;
}

Program parse_program(std::string_view text, const SlotResolver& resolve) {
    return ExprParser(text, resolve).run();
}

nlohmann::json program_to_json(const Program& p) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& n : p.nodes) {
        arr.push_back({{"op", std::string(op_name(n.op))}, {"inputs", n.inputs}, {"side_inputs", n.side_inputs}});
    }
    return arr;
}

Program program_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw InputError("program must be a JSON array");
    Program p;
    for (const auto& item : j) {
        if (!item.is_object() || !item.contains("op")) throw InputError("program node needs an 'op'");
        const auto op = parse_op(item.at("op").get<std::string>());
        if (!op) throw InputError("unknown op " + item.at("op").get<std::string>());
        Node n;
        n.op = *op;
        if (item.contains("inputs")) n.inputs = item.at("inputs").get<std::vector<int>>();
        if (item.contains("side_inputs")) n.side_inputs = item.at("side_inputs").get<std::vector<std::string>>();
        p.nodes.push_back(std::move(n));
    }
    return p;
}

}  // namespace eventqa
