#pragma once

#include <set>
#include <span>
#include <vector>

#include "eventqa/scene.hpp"

namespace eventqa {

struct CausalNode {
    enum class Kind : std::uint8_t { Object, Event };
    Kind kind = Kind::Object;
    int index = 0;  // object id, or position in CausalGraph::events

    auto operator<=>(const CausalNode&) const = default;
    static CausalNode object(int id) { return {Kind::Object, id}; }
    static CausalNode event(int index) { return {Kind::Event, index}; }
};

struct CausalEdge {
    CausalNode cause;
    CausalNode effect;

    auto operator<=>(const CausalEdge&) const = default;
};

/// DAG over objects and observed events. An object causes the first event it
/// takes part in; on each object, an event causes that object's next event.
struct CausalGraph {
    std::vector<int> object_ids;
    std::vector<Event> events;       // chronological; event node i is events[i]
    std::vector<CausalEdge> edges;   // sorted, unique

    bool operator==(const CausalGraph&) const = default;

    /// Event node index by identity (frame ignored), or -1.
    int find_event(const Event& e) const;
    std::vector<int> event_parents(int event_index) const;
};

/// Throws InputError when an event references an unknown object or the list is
/// not chronological. Start/end pseudo-events are not allowed in the graph.
CausalGraph build_causal_graph(std::span<const ObjectSpec> objects, std::span<const Event> events);

/// Event indices with a directed path to `event_index`, excluding itself.
std::set<int> ancestors(const CausalGraph& g, int event_index);

/// Participants of the event and of all its ancestors.
std::set<int> responsible_objects(const CausalGraph& g, int event_index);

}  // namespace eventqa
