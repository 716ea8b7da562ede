#pragma once

// Question-program DSL: the closed module catalog, runtime values, and the
// flat post-order program representation shared by the generator, the parser
// and the executor.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "eventqa/scene.hpp"
#include "json.hpp"

namespace eventqa {

enum class Op : std::uint8_t {
    // input
    Objects, Events, UnseenEvents, AllEvents, Start, End,
    // object filters
    FilterColor, FilterMaterial, FilterShape, FilterMoving, FilterStationary,
    // event filters
    FilterIn, FilterOut, FilterCollision, FilterBefore, FilterAfter, FilterOrder, FilterAncestor,
    GetFrame, GetCounterfact, GetColPartner, GetObject,
    Unique,
    // output
    QueryColor, QueryMaterial, QueryShape, Count, Exist, BelongTo, Negate,
};
inline constexpr int kOpCount = static_cast<int>(Op::Negate) + 1;

std::string_view op_name(Op op);
std::optional<Op> parse_op(std::string_view name);

enum class Order : std::uint8_t { First, Second, Last };
std::string_view to_string(Order o);
std::optional<Order> parse_order(std::string_view s);

/// Value tags, in the same order as the alternatives of Value.
enum class Tag : std::uint8_t { Object, Objects, Event, Events, Order, Color, Material, Shape, Frame, Int, Bool };
std::string_view to_string(Tag t);

struct ObjectRef {
    int id = 0;
    bool operator==(const ObjectRef&) const = default;
};
struct ObjectSet {
    std::vector<int> ids;
    bool operator==(const ObjectSet&) const = default;
};
struct EventSet {
    std::vector<Event> events;
    bool operator==(const EventSet&) const = default;
};
struct FrameValue {
    std::optional<int> frame;  // null = the whole video
    bool operator==(const FrameValue&) const = default;
};

using Value = std::variant<ObjectRef, ObjectSet, Event, EventSet, Order, Color, Material, Shape, FrameValue, int, bool>;

inline Tag tag_of(const Value& v) { return static_cast<Tag>(v.index()); }

/// Single-word answer token for output values (int, bool, color, material, shape).
std::string answer_token(const Value& v);

/// Input index that stands for the choice program's result in a question program.
inline constexpr int kChoiceSlot = -1;

struct Node {
    Op op = Op::Objects;
    std::vector<int> inputs;              // indices of earlier nodes, or kChoiceSlot
    std::vector<std::string> side_inputs; // literals: color, material, shape, order

    bool operator==(const Node&) const = default;
};

/// Post-order node list; every node feeds exactly one later node, the root is last.
struct Program {
    std::vector<Node> nodes;

    bool operator==(const Program&) const = default;
    bool empty() const { return nodes.empty(); }
    int root() const { return static_cast<int>(nodes.size()) - 1; }
    bool has_choice_slot() const;
};

struct TypeInfo {
    Tag root = Tag::Bool;
    std::optional<Tag> slot;  // tag the choice slot expects, if the program has one
};

/// Checks tree shape, arities, literal domains and tag compatibility of every
/// edge. An `object` is accepted wherever `objects` is expected. Throws
/// ProgramTypeError naming the first offending node.
TypeInfo typecheck(const Program& p);

/// Functional notation, e.g. `Count(Filter_collision(Events, Objects))`.
std::string to_string(const Program& p);

/// Value bound to a `$name` placeholder while parsing functional notation:
/// either a sub-program to splice in or a literal side input.
using SlotBinding = std::variant<Program, std::string>;
using SlotResolver = std::function<SlotBinding(std::string_view name)>;

/// Parses functional notation. `?` denotes the choice slot; `$name` is looked up
/// through `resolve`. Throws InputError on malformed text.
Program parse_program(std::string_view text, const SlotResolver& resolve = {});

/// Flat JSON form: [{"op": ..., "inputs": [...], "side_inputs": [...]}, ...].
nlohmann::json program_to_json(const Program& p);
Program program_from_json(const nlohmann::json& j);

}  // namespace eventqa
