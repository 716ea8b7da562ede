#include "eventqa/causal.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "eventqa/errors.hpp"

namespace eventqa {

namespace {

void check_index(const CausalGraph& g, int event_index) {
    if (event_index < 0 || static_cast<std::size_t>(event_index) >= g.events.size())
        throw InputError("no event node " + std::to_string(event_index) + " in causal graph");
}

}  // namespace

int CausalGraph::find_event(const Event& e) const {
    if (e.kind == EventKind::Start || e.kind == EventKind::End) return -1;
    const EventKey key = event_identity(e);
    for (std::size_t i = 0; i < events.size(); ++i)
        if (event_identity(events[i]) == key) return static_cast<int>(i);
    return -1;
}

std::vector<int> CausalGraph::event_parents(int event_index) const {
    std::vector<int> parents;
    const auto target = CausalNode::event(event_index);
    for (const auto& edge : edges)
        if (edge.effect == target && edge.cause.kind == CausalNode::Kind::Event)
            parents.push_back(edge.cause.index);
    return parents;
}

CausalGraph build_causal_graph(std::span<const ObjectSpec> objects, std::span<const Event> events) {
    CausalGraph g;
    for (const auto& o : objects) g.object_ids.push_back(o.id);
    std::sort(g.object_ids.begin(), g.object_ids.end());
    g.events.assign(events.begin(), events.end());

    std::map<int, int> last_event;  // object id -> latest event index on that object
    for (int id : g.object_ids) last_event[id] = -1;

    std::optional<int> prev_frame;
    for (std::size_t i = 0; i < g.events.size(); ++i) {
        const Event& e = g.events[i];
        if (e.kind == EventKind::Start || e.kind == EventKind::End)
            throw InputError("start/end events do not belong in the causal graph");
        if (!e.frame) throw InputError("causal graph events need frames");
        if (prev_frame && *e.frame < *prev_frame) throw InputError("events are not chronological");
        prev_frame = e.frame;
        event_identity(e);  // validates participant count

        for (int id : e.participants) {
            auto it = last_event.find(id);
            if (it == last_event.end())
                throw InputError("event " + describe(e) + " references unknown object " + std::to_string(id));
            const auto effect = CausalNode::event(static_cast<int>(i));
            if (it->second < 0)
                g.edges.push_back({CausalNode::object(id), effect});
            else
                g.edges.push_back({CausalNode::event(it->second), effect});
            it->second = static_cast<int>(i);
        }
    }
    std::sort(g.edges.begin(), g.edges.end());
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
    return g;
}

std::set<int> ancestors(const CausalGraph& g, int event_index) {
    check_index(g, event_index);
    std::set<int> seen;
    std::vector<int> stack{event_index};
    while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        for (int parent : g.event_parents(cur))
            if (seen.insert(parent).second) stack.push_back(parent);
    }
    return seen;
}

std::set<int> responsible_objects(const CausalGraph& g, int event_index) {
    std::set<int> objects;
    auto add = [&](int idx) {
        const auto& p = g.events[static_cast<std::size_t>(idx)].participants;
        objects.insert(p.begin(), p.end());
    };
    for (int a : ancestors(g, event_index)) add(a);
    add(event_index);
    return objects;
}

}  // namespace eventqa
