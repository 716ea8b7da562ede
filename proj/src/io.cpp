#include "eventqa/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "eventqa/errors.hpp"
#include "eventqa/rng.hpp"

namespace eventqa {

namespace {

using nlohmann::json;

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

Vec2 vec_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw InputError("expected a [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
T parse_or_throw(std::optional<T> v, const std::string& what, const std::string& text) {
    if (!v) throw InputError("unknown " + what + " '" + text + "'");
    return *v;
}

json node_json(const CausalNode& n) {
    if (n.kind == CausalNode::Kind::Object) return {{"object", n.index}};
    return {{"event", n.index}};
}

json events_json(const std::vector<Event>& events) {
    json out = json::array();
    for (const auto& e : events) out.push_back(event_to_json(e));
    return out;
}

std::vector<Event> events_from(const json& j) {
    std::vector<Event> out;
    for (const auto& e : j) out.push_back(event_from_json(e));
    return out;
}

// Calls body(), turning library exceptions into InputError with context.
template <typename F>
auto guarded(const std::string& what, F&& body) {
    try {
        return body();
    } catch (const json::exception& e) {
        throw InputError(what + ": " + e.what());
    }
}

}  // namespace

json object_to_json(const ObjectSpec& o) {
    return {{"id", o.id},
            {"color", to_string(o.attrs.color)},
            {"material", to_string(o.attrs.material)},
            {"shape", to_string(o.attrs.shape)},
            {"position", vec_json(o.init_position)},
            {"velocity", vec_json(o.init_velocity)},
            {"spawn_frame", o.spawn_frame}};
}

ObjectSpec object_from_json(const json& j) {
    return guarded("object", [&] {
        ObjectSpec o;
        o.id = j.at("id").get<int>();
        const auto c = j.at("color").get<std::string>();
        const auto m = j.at("material").get<std::string>();
        const auto s = j.at("shape").get<std::string>();
        o.attrs.color = parse_or_throw(parse_color(c), "color", c);
        o.attrs.material = parse_or_throw(parse_material(m), "material", m);
        o.attrs.shape = parse_or_throw(parse_shape(s), "shape", s);
        o.init_position = vec_from(j.at("position"));
        o.init_velocity = vec_from(j.at("velocity"));
        o.spawn_frame = j.at("spawn_frame").get<int>();
        return o;
    });
}

json event_to_json(const Event& e) {
    json j = {{"kind", to_string(e.kind)}, {"objects", e.participants}};
    j["frame"] = e.frame ? json(*e.frame) : json(nullptr);
    return j;
}

Event event_from_json(const json& j) {
    return guarded("event", [&] {
        Event e;
        const auto kind = j.at("kind").get<std::string>();
        e.kind = parse_or_throw(parse_event_kind(kind), "event kind", kind);
        if (!j.at("frame").is_null()) e.frame = j.at("frame").get<int>();
        e.participants = j.at("objects").get<std::vector<int>>();
        return e;
    });
}

json scenes_to_json(const std::vector<Scene>& scenes) {
    json list = json::array();
    for (const auto& s : scenes) {
        json objects = json::array();
        for (const auto& o : s.objects) objects.push_back(object_to_json(o));
        list.push_back({{"id", s.id}, {"seed", s.seed}, {"objects", std::move(objects)}});
    }
    return {{"schema_version", kSchemaVersion}, {"scenes", std::move(list)}};
}

std::vector<Scene> scenes_from_json(const json& j) {
    return guarded("scenes file", [&] {
        if (j.at("schema_version").get<int>() != kSchemaVersion) throw InputError("unsupported scenes schema version");
        std::vector<Scene> out;
        std::set<int> ids;
        for (const auto& s : j.at("scenes")) {
            Scene scene;
            scene.id = s.at("id").get<int>();
            scene.seed = s.at("seed").get<std::uint64_t>();
            for (const auto& o : s.at("objects")) scene.objects.push_back(object_from_json(o));
            if (!ids.insert(scene.id).second) throw InputError("duplicate scene id " + std::to_string(scene.id));
            out.push_back(std::move(scene));
        }
        return out;
    });
}

json annotation_to_json(int scene_id, const ExecContext& ctx) {
    json trace = json::array();
    for (std::size_t k = 0; k < ctx.trace.object_ids.size(); ++k) {
        json pos = json::array(), vel = json::array(), vis = json::array();
        for (const auto& s : ctx.trace.states[k]) {
            pos.push_back(vec_json(s.position));
            vel.push_back(vec_json(s.velocity));
            vis.push_back(s.visible ? 1 : 0);
        }
        trace.push_back({{"id", ctx.trace.object_ids[k]}, {"position", std::move(pos)}, {"velocity", std::move(vel)},
                         {"visible", std::move(vis)}});
    }
    json cf = json::array();
    for (const auto& [removed, events] : ctx.counterfactual) cf.push_back({{"removed", removed}, {"events", events_json(events)}});
    json edges = json::array();
    for (const auto& e : ctx.graph.edges) edges.push_back({{"cause", node_json(e.cause)}, {"effect", node_json(e.effect)}});
    return {{"scene_id", scene_id},
            {"speed_eps", ctx.speed_eps},
            {"trace", std::move(trace)},
            {"events", events_json(ctx.events)},
            {"unseen_events", events_json(ctx.unseen_events)},
            {"counterfactual", std::move(cf)},
            {"causal_edges", std::move(edges)}};
}

ExecContext annotation_from_json(const json& j, const Scene& scene) {
    return guarded("annotation of scene " + std::to_string(scene.id), [&] {
        if (j.at("scene_id").get<int>() != scene.id) throw InputError("annotation order does not match the scenes file");
        ExecContext ctx;
        ctx.objects = scene.objects;
        std::sort(ctx.objects.begin(), ctx.objects.end(),
                  [](const ObjectSpec& a, const ObjectSpec& b) { return a.id < b.id; });
        ctx.speed_eps = j.at("speed_eps").get<double>();
        for (const auto& row : j.at("trace")) {
            ctx.trace.object_ids.push_back(row.at("id").get<int>());
            const auto& pos = row.at("position");
            const auto& vel = row.at("velocity");
            const auto& vis = row.at("visible");
            if (pos.size() != vel.size() || pos.size() != vis.size()) throw InputError("trace columns differ in length");
            std::vector<FrameState> states(pos.size());
            for (std::size_t f = 0; f < pos.size(); ++f)
                states[f] = {vec_from(pos[f]), vec_from(vel[f]), vis[f].get<int>() != 0};
            ctx.trace.states.push_back(std::move(states));
        }
        ctx.events = events_from(j.at("events"));
        ctx.unseen_events = events_from(j.at("unseen_events"));
        for (const auto& cf : j.at("counterfactual"))
            ctx.counterfactual[cf.at("removed").get<int>()] = events_from(cf.at("events"));
        ctx.graph = build_causal_graph(ctx.objects, ctx.events);

        json edges = json::array();
        for (const auto& e : ctx.graph.edges) edges.push_back({{"cause", node_json(e.cause)}, {"effect", node_json(e.effect)}});
        if (edges != j.at("causal_edges")) throw InputError("stored causal edges disagree with the event log");
        validate_context(ctx);
        return ctx;
    });
}

json annotations_to_json(const std::vector<Scene>& scenes, const std::vector<ExecContext>& contexts) {
    if (scenes.size() != contexts.size()) throw InputError("one annotation per scene required");
    json list = json::array();
    for (std::size_t i = 0; i < scenes.size(); ++i) list.push_back(annotation_to_json(scenes[i].id, contexts[i]));
    return {{"schema_version", kSchemaVersion}, {"scenes", std::move(list)}};
}

std::vector<ExecContext> annotations_from_json(const json& j, const std::vector<Scene>& scenes) {
    return guarded("annotations file", [&] {
        if (j.at("schema_version").get<int>() != kSchemaVersion)
            throw InputError("unsupported annotations schema version");
        const auto& list = j.at("scenes");
        if (list.size() != scenes.size()) throw InputError("annotations and scenes differ in count");
        std::vector<ExecContext> out;
        out.reserve(scenes.size());
        for (std::size_t i = 0; i < scenes.size(); ++i) out.push_back(annotation_from_json(list[i], scenes[i]));
        return out;
    });
}

json config_to_json(const GenConfig& g, const SimConfig& s) {
    return {{"min_objects", g.min_objects},
            {"max_objects", g.max_objects},
            {"n_seed_collisions", g.n_seed_collisions},
            {"speed_min", g.speed_min},
            {"speed_max", g.speed_max},
            {"placement_margin", g.placement_margin},
            {"entry_margin", g.entry_margin},
            {"spawn_window_end", g.spawn_window_end},
            {"strike_min", g.strike_min},
            {"strike_max", g.strike_max},
            {"predictive_strike_min", g.predictive_strike_min},
            {"predictive_strike_max", g.predictive_strike_max},
            {"predictive_fraction", g.predictive_fraction},
            {"stationary_fraction", g.stationary_fraction},
            {"max_contact_offset", g.max_contact_offset},
            {"min_closing_speed", g.min_closing_speed},
            {"min_event_gap", g.min_event_gap},
            {"require_counterfactual_soundness", g.require_counterfactual_soundness},
            {"max_retries", g.max_retries},
            {"max_placement_tries", g.max_placement_tries},
            {"simulator",
             {{"dt", s.dt},
              {"substeps_per_frame", s.substeps_per_frame},
              {"restitution", s.restitution},
              {"damping", s.damping},
              {"radius", s.radius},
              {"bounds", {s.bounds.min_x, s.bounds.max_x, s.bounds.min_y, s.bounds.max_y}}}}};
}

void config_from_json(const json& j, GenConfig& g, SimConfig& s) {
    guarded("config", [&] {
        if (!j.is_object()) throw InputError("config must be a JSON object");
        const json defaults = config_to_json(g, s);
        for (const auto& [key, value] : j.items())
            if (!defaults.contains(key)) throw InputError("unknown config key '" + key + "'");
        auto set = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        set("min_objects", g.min_objects);
        set("max_objects", g.max_objects);
        set("n_seed_collisions", g.n_seed_collisions);
        set("speed_min", g.speed_min);
        set("speed_max", g.speed_max);
        set("placement_margin", g.placement_margin);
        set("entry_margin", g.entry_margin);
        set("spawn_window_end", g.spawn_window_end);
        set("strike_min", g.strike_min);
        set("strike_max", g.strike_max);
        set("predictive_strike_min", g.predictive_strike_min);
        set("predictive_strike_max", g.predictive_strike_max);
        set("predictive_fraction", g.predictive_fraction);
        set("stationary_fraction", g.stationary_fraction);
        set("max_contact_offset", g.max_contact_offset);
        set("min_closing_speed", g.min_closing_speed);
        set("min_event_gap", g.min_event_gap);
        set("require_counterfactual_soundness", g.require_counterfactual_soundness);
        set("max_retries", g.max_retries);
        set("max_placement_tries", g.max_placement_tries);
        if (j.contains("simulator")) {
            const json& sj = j.at("simulator");
            for (const auto& [key, value] : sj.items())
                if (!defaults.at("simulator").contains(key)) throw InputError("unknown simulator key '" + key + "'");
            if (sj.contains("dt")) s.dt = sj.at("dt").get<double>();
            if (sj.contains("substeps_per_frame")) s.substeps_per_frame = sj.at("substeps_per_frame").get<int>();
            if (sj.contains("restitution")) s.restitution = sj.at("restitution").get<double>();
            if (sj.contains("damping")) s.damping = sj.at("damping").get<double>();
            if (sj.contains("radius")) s.radius = sj.at("radius").get<double>();
            if (sj.contains("bounds")) {
                const auto b = sj.at("bounds").get<std::vector<double>>();
                if (b.size() != 4) throw InputError("bounds must be [min_x, max_x, min_y, max_y]");
                s.bounds = {b[0], b[1], b[2], b[3]};
            }
        }
        return 0;
    });
}

std::string config_hash(const json& config) {
    const std::string text = config.dump();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text.data(), text.size())));
    return buf;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

std::vector<json> read_jsonl_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::vector<json> out;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw InputError(path + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path);
    out << text;
    if (!out) throw InputError("write failed for " + path);
}

std::string to_jsonl(const std::vector<json>& rows) {
    std::string out;
    for (const auto& r : rows) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

}  // namespace eventqa
