#pragma once

#include <map>
#include <vector>

#include "eventqa/causal.hpp"
#include "eventqa/dynamics.hpp"
#include "eventqa/program.hpp"
#include "eventqa/scene.hpp"

namespace eventqa {

/// Everything a program can look at for one scene: object attributes, the
/// motion trace, observed and held-out events, the observed events of every
/// single-object-removal world, and the causal graph.
struct ExecContext {
    std::vector<ObjectSpec> objects;  // sorted by id
    MotionTrace trace;
    std::vector<Event> events;         // frames 0..124
    std::vector<Event> unseen_events;  // frames 125..174
    std::map<int, std::vector<Event>> counterfactual;  // removed object -> events in frames 0..124
    CausalGraph graph;
    double speed_eps = 0.05;

    bool operator==(const ExecContext&) const = default;

    const ObjectSpec& object(int id) const;
    /// Hypothetical candidate universe: per-object enter/exit and every pair's collision, frames null.
    std::vector<Event> all_event_candidates() const;
};

/// Simulates the scene, its held-out window and every counterfactual rollout.
ExecContext annotate_scene(std::vector<ObjectSpec> objects, const SimConfig& sim = {}, double speed_eps = 0.05);

/// Throws InputError if a counterfactual set is missing or the graph disagrees with the events.
void validate_context(const ExecContext& ctx);

/// Typechecks, then evaluates bottom-up. Throws ProgramTypeError or ExecError.
/// A program with a choice slot needs `slot` bound to a value of the slot's tag.
Value execute(const Program& p, const ExecContext& ctx, const Value* slot = nullptr);

/// Evaluates only the subtree rooted at `node`; `slot` may be null if the subtree has no choice slot.
Value execute_subtree(const Program& p, int node, const ExecContext& ctx, const Value* slot = nullptr);

/// Runs the choice program, binds its result to the question's choice slot and
/// returns the resulting yes/no.
bool execute_choice(const Program& question, const Program& choice, const ExecContext& ctx);

}  // namespace eventqa
