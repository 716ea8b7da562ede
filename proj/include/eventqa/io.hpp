#pragma once

// JSON / JSON-lines serialization of scenes, annotations, configs and files.

#include <cstdint>
#include <string>
#include <vector>

#include "eventqa/executor.hpp"
#include "eventqa/scene_gen.hpp"
#include "json.hpp"

namespace eventqa {

inline constexpr int kSchemaVersion = 1;

struct Scene {
    int id = 0;
    std::uint64_t seed = 0;  // generator seed of this scene
    std::vector<ObjectSpec> objects;

    bool operator==(const Scene&) const = default;
};

nlohmann::json object_to_json(const ObjectSpec& o);
ObjectSpec object_from_json(const nlohmann::json& j);

nlohmann::json event_to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

nlohmann::json scenes_to_json(const std::vector<Scene>& scenes);
std::vector<Scene> scenes_from_json(const nlohmann::json& j);

/// Trace, observed and held-out events, counterfactual event sets and causal edges of one scene.
nlohmann::json annotation_to_json(int scene_id, const ExecContext& ctx);
/// Rebuilds the context; the causal graph is recomputed and must match the stored edges.
ExecContext annotation_from_json(const nlohmann::json& j, const Scene& scene);

nlohmann::json annotations_to_json(const std::vector<Scene>& scenes, const std::vector<ExecContext>& contexts);
std::vector<ExecContext> annotations_from_json(const nlohmann::json& j, const std::vector<Scene>& scenes);

nlohmann::json config_to_json(const GenConfig& gen, const SimConfig& sim);
/// Starts from the defaults and overrides the keys present. Unknown keys are errors.
void config_from_json(const nlohmann::json& j, GenConfig& gen, SimConfig& sim);

/// Hex FNV-1a of the compact dump.
std::string config_hash(const nlohmann::json& config);

// File helpers; all throw InputError on I/O or syntax problems.
nlohmann::json read_json_file(const std::string& path);
std::vector<nlohmann::json> read_jsonl_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
std::string to_jsonl(const std::vector<nlohmann::json>& rows);

}  // namespace eventqa
