#include "eventqa/executor.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "eventqa/errors.hpp"

namespace eventqa {

namespace {

std::set<EventKey> identity_set(const std::vector<Event>& events) {
    std::set<EventKey> keys;
    for (const auto& e : events)
        if (e.kind != EventKind::Start && e.kind != EventKind::End) keys.insert(event_identity(e));
    return keys;
}

class Evaluator {
public:
    Evaluator(const Program& p, const ExecContext& ctx, const Value* slot) : p_(p), ctx_(ctx), slot_(slot) {}

    Value eval(int index) {
        if (index == kChoiceSlot) {
            if (!slot_) throw ExecError(index, "choice slot is unbound");
            return *slot_;
        }
        const Node& n = p_.nodes[static_cast<std::size_t>(index)];
        std::vector<Value> in;
        in.reserve(n.inputs.size());
        for (int child : n.inputs) in.push_back(eval(child));
        return apply(index, n, in);
    }

private:
    [[noreturn]] void fail(int node, const std::string& what) const { throw ExecError(node, what); }

    std::vector<int> as_objects(const Value& v) const {
        if (const auto* o = std::get_if<ObjectRef>(&v)) return {o->id};
        return std::get<ObjectSet>(v).ids;
    }

    const FrameState& state(int node, int object, int frame) const {
        if (frame < 0 || frame >= kTotalFrames) fail(node, "frame " + std::to_string(frame) + " out of range");
        return ctx_.trace.of(object)[static_cast<std::size_t>(frame)];
    }

    bool moving_at(int node, int object, int frame) const {
        const auto& s = state(node, object, frame);
        return s.visible && s.velocity.norm() > ctx_.speed_eps;
    }

    bool stationary_at(int node, int object, int frame) const {
        const auto& s = state(node, object, frame);
        return s.visible && s.velocity.norm() <= ctx_.speed_eps;
    }

    // "Anywhere in the video": moving at some observed frame; stationary if it is
    // seen in the observed window and never moves there.
    bool ever_moving(int node, int object) const {
        for (int f = 0; f <= kObservedEndFrame; ++f)
            if (moving_at(node, object, f)) return true;
        return false;
    }
    bool never_moving(int node, int object) const {
        bool seen = false;
        for (int f = 0; f <= kObservedEndFrame; ++f) {
            const auto& s = state(node, object, f);
            if (!s.visible) continue;
            seen = true;
            if (s.velocity.norm() > ctx_.speed_eps) return false;
        }
        return seen;
    }

    template <typename Pred>
    Value filter_objects(const Value& v, Pred keep) const {
        ObjectSet out;
        for (int id : as_objects(v))
            if (keep(ctx_.object(id))) out.ids.push_back(id);
        return out;
    }

    template <typename Pred>
    Value filter_events(const Value& v, Pred keep) const {
        EventSet out;
        for (const auto& e : std::get<EventSet>(v).events)
            if (keep(e)) out.events.push_back(e);
        return out;
    }

    int anchor_frame(int node, const Event& e) const {
        if (!e.frame) fail(node, "anchor event " + describe(e) + " has no frame");
        return *e.frame;
    }

    Value apply(int idx, const Node& n, const std::vector<Value>& in) {
        switch (n.op) {
            case Op::Objects: {
                ObjectSet out;
                for (const auto& o : ctx_.objects) out.ids.push_back(o.id);
                return out;
            }
            case Op::Events: return EventSet{ctx_.events};
            case Op::UnseenEvents: return EventSet{ctx_.unseen_events};
            case Op::AllEvents: return EventSet{ctx_.all_event_candidates()};
            case Op::Start: return Event::start();
            case Op::End: return Event::end();

            case Op::FilterColor: {
                const Color c = *parse_color(n.side_inputs[0]);
                return filter_objects(in[0], [&](const ObjectSpec& o) { return o.attrs.color == c; });
            }
            case Op::FilterMaterial: {
                const Material m = *parse_material(n.side_inputs[0]);
                return filter_objects(in[0], [&](const ObjectSpec& o) { return o.attrs.material == m; });
            }
            case Op::FilterShape: {
                const Shape s = *parse_shape(n.side_inputs[0]);
                return filter_objects(in[0], [&](const ObjectSpec& o) { return o.attrs.shape == s; });
            }
            case Op::FilterMoving:
            case Op::FilterStationary: {
                std::optional<int> frame;
                if (in.size() > 1) frame = std::get<FrameValue>(in[1]).frame;
                const bool moving = n.op == Op::FilterMoving;
                return filter_objects(in[0], [&](const ObjectSpec& o) {
                    if (frame) return moving ? moving_at(idx, o.id, *frame) : stationary_at(idx, o.id, *frame);
                    return moving ? ever_moving(idx, o.id) : never_moving(idx, o.id);
                });
            }

            case Op::FilterIn:
            case Op::FilterOut:
            case Op::FilterCollision: {
                const auto ids = as_objects(in[1]);
                const std::set<int> wanted(ids.begin(), ids.end());
                const EventKind kind = n.op == Op::FilterIn    ? EventKind::Enter
                                       : n.op == Op::FilterOut ? EventKind::Exit
                                                               : EventKind::Collision;
                return filter_events(in[0], [&](const Event& e) {
                    if (e.kind != kind) return false;
                    for (int id : e.participants)
                        if (wanted.count(id)) return true;
                    return false;
                });
            }
            case Op::FilterBefore: {
                const int f = anchor_frame(idx, std::get<Event>(in[1]));
                return filter_events(in[0], [&](const Event& e) { return e.frame && *e.frame < f; });
            }
            case Op::FilterAfter: {
                const int f = anchor_frame(idx, std::get<Event>(in[1]));
                return filter_events(in[0], [&](const Event& e) { return e.frame && *e.frame > f; });
            }
            case Op::FilterOrder: {
                std::vector<Event> sorted = std::get<EventSet>(in[0]).events;
                for (const auto& e : sorted)
                    if (!e.frame) fail(idx, "cannot order hypothetical events");
                sort_chronologically(sorted);
                const Order order = *parse_order(n.side_inputs[0]);
                const std::size_t need = order == Order::Second ? 2 : 1;
                if (sorted.size() < need)
                    fail(idx, "no " + n.side_inputs[0] + " event among " + std::to_string(sorted.size()));
                switch (order) {
                    case Order::First: return sorted[0];
                    case Order::Second: return sorted[1];
                    case Order::Last: return sorted.back();
                }
                break;
            }
            case Op::FilterAncestor: {
                const Event& anchor = std::get<Event>(in[1]);
                const int node = ctx_.graph.find_event(anchor);
                if (node < 0) fail(idx, "event " + describe(anchor) + " is not in the causal graph");
                std::set<EventKey> keys;
                for (int a : ancestors(ctx_.graph, node))
                    keys.insert(event_identity(ctx_.graph.events[static_cast<std::size_t>(a)]));
                return filter_events(in[0], [&](const Event& e) {
                    return e.kind != EventKind::Start && e.kind != EventKind::End && keys.count(event_identity(e));
                });
            }
            case Op::GetFrame: return FrameValue{std::get<Event>(in[0]).frame};
            case Op::GetCounterfact: {
                const int removed = std::get<ObjectRef>(in[1]).id;
                auto it = ctx_.counterfactual.find(removed);
                if (it == ctx_.counterfactual.end())
                    fail(idx, "no counterfactual world without object " + std::to_string(removed));
                const auto keys = identity_set(it->second);
                return filter_events(in[0], [&](const Event& e) {
                    return e.kind != EventKind::Start && e.kind != EventKind::End && keys.count(event_identity(e));
                });
            }
            case Op::GetColPartner: {
                const Event& e = std::get<Event>(in[0]);
                const int id = std::get<ObjectRef>(in[1]).id;
                if (e.kind != EventKind::Collision) fail(idx, "Get_col_partner needs a collision, got " + describe(e));
                if (!e.involves(id))
                    fail(idx, "object " + std::to_string(id) + " does not take part in " + describe(e));
                return ObjectRef{e.participants[0] == id ? e.participants[1] : e.participants[0]};
            }
            case Op::GetObject: {
                const Event& e = std::get<Event>(in[0]);
                if (e.kind != EventKind::Enter && e.kind != EventKind::Exit)
                    fail(idx, "Get_object needs an enter or exit event, got " + describe(e));
                return ObjectRef{e.participants[0]};
            }
            case Op::Unique: {
                if (const auto* objs = std::get_if<ObjectSet>(&in[0])) {
                    if (objs->ids.size() != 1)
                        fail(idx, "Unique over " + std::to_string(objs->ids.size()) + " objects");
                    return ObjectRef{objs->ids[0]};
                }
                const auto& evs = std::get<EventSet>(in[0]).events;
                if (evs.size() != 1) fail(idx, "Unique over " + std::to_string(evs.size()) + " events");
                return evs[0];
            }

            case Op::QueryColor: return ctx_.object(std::get<ObjectRef>(in[0]).id).attrs.color;
            case Op::QueryMaterial: return ctx_.object(std::get<ObjectRef>(in[0]).id).attrs.material;
            case Op::QueryShape: return ctx_.object(std::get<ObjectRef>(in[0]).id).attrs.shape;
            case Op::Count:
            case Op::Exist: {
                std::size_t size = 0;
                if (const auto* objs = std::get_if<ObjectSet>(&in[0]))
                    size = objs->ids.size();
                else
                    size = std::get<EventSet>(in[0]).events.size();
                if (n.op == Op::Count) return static_cast<int>(size);
                return size > 0;
            }
            case Op::BelongTo: {
                const Event& e = std::get<Event>(in[0]);
                const auto& set = std::get<EventSet>(in[1]).events;
                if (e.kind == EventKind::Start || e.kind == EventKind::End)
                    return std::any_of(set.begin(), set.end(), [&](const Event& x) { return x.kind == e.kind; });
                return identity_set(set).count(event_identity(e)) > 0;
            }
            case Op::Negate: return !std::get<bool>(in[0]);
        }
        fail(idx, "unhandled op");
    }

    const Program& p_;
    const ExecContext& ctx_;
    const Value* slot_;
};

void check_slot(const TypeInfo& info, const Value* slot) {
    if (!info.slot) return;
    if (!slot) throw ExecError(kChoiceSlot, "program has a choice slot but no choice value was given");
    if (tag_of(*slot) != *info.slot)
        throw ExecError(kChoiceSlot, "choice slot expects " + std::string(to_string(*info.slot)) + ", got " +
                                         std::string(to_string(tag_of(*slot))));
}

}  // namespace

const ObjectSpec& ExecContext::object(int id) const {
    auto it = std::lower_bound(objects.begin(), objects.end(), id,
                               [](const ObjectSpec& o, int v) { return o.id < v; });
    if (it == objects.end() || it->id != id) throw InputError("unknown object " + std::to_string(id));
    return *it;
}

std::vector<Event> ExecContext::all_event_candidates() const {
    std::vector<Event> out;
    for (const auto& o : objects) {
        out.push_back(Event::enter(o.id, std::nullopt));
        out.push_back(Event::exit(o.id, std::nullopt));
    }
    for (std::size_t i = 0; i < objects.size(); ++i)
        for (std::size_t j = i + 1; j < objects.size(); ++j)
            out.push_back(Event::collision(objects[i].id, objects[j].id, std::nullopt));
    return out;
}

ExecContext annotate_scene(std::vector<ObjectSpec> objects, const SimConfig& sim, double speed_eps) {
    std::sort(objects.begin(), objects.end(), [](const ObjectSpec& a, const ObjectSpec& b) { return a.id < b.id; });
    ExecContext ctx;
    SimResult result = simulate(objects, sim);
    ctx.trace = std::move(result.trace);
    ctx.events = std::move(result.events);
    ctx.unseen_events = std::move(result.unseen_events);
    for (const auto& o : objects) {
        SimResult cf = rollout_counterfactual(objects, o.id, sim);
        ctx.counterfactual[o.id] = std::move(cf.events);
    }
    ctx.graph = build_causal_graph(objects, ctx.events);
    ctx.objects = std::move(objects);
    ctx.speed_eps = speed_eps;
    return ctx;
}

void validate_context(const ExecContext& ctx) {
    for (std::size_t i = 1; i < ctx.objects.size(); ++i)
        if (ctx.objects[i - 1].id >= ctx.objects[i].id) throw InputError("context objects must be sorted by id");
    for (const auto& o : ctx.objects) {
        if (!ctx.counterfactual.count(o.id))
            throw InputError("missing counterfactual events for object " + std::to_string(o.id));
        if (ctx.trace.index_of(o.id) < 0) throw InputError("missing trace for object " + std::to_string(o.id));
    }
    for (const auto& s : ctx.trace.states)
        if (s.size() != static_cast<std::size_t>(kTotalFrames)) throw InputError("trace must have 175 frames");
    if (ctx.graph.events != ctx.events) throw InputError("causal graph events differ from the observed events");
}

Value execute(const Program& p, const ExecContext& ctx, const Value* slot) {
    const TypeInfo info = typecheck(p);
    check_slot(info, slot);
    return Evaluator(p, ctx, slot).eval(p.root());
}

Value execute_subtree(const Program& p, int node, const ExecContext& ctx, const Value* slot) {
    const TypeInfo info = typecheck(p);
    // A subtree may leave out the choice slot, so an unbound slot is only an
    // error if evaluation reaches it.
    if (slot) check_slot(info, slot);
    if (node < 0 || node > p.root()) throw ExecError(node, "no such node");
    return Evaluator(p, ctx, slot).eval(node);
}

bool execute_choice(const Program& question, const Program& choice, const ExecContext& ctx) {
    const TypeInfo q = typecheck(question);
    if (!q.slot) throw ProgramTypeError(question.root(), "question program has no choice slot");
    const TypeInfo c = typecheck(choice);
    if (c.slot) throw ProgramTypeError(choice.root(), "choice program has its own choice slot");
    if (c.root != *q.slot)
        throw ProgramTypeError(choice.root(), "choice produces " + std::string(to_string(c.root)) +
                                                  ", question expects " + std::string(to_string(*q.slot)));
    const Value chosen = execute(choice, ctx);
    const Value out = execute(question, ctx, &chosen);
    if (tag_of(out) != Tag::Bool) throw ExecError(question.root(), "joint execution must produce a bool");
    return std::get<bool>(out);
}

}  // namespace eventqa
