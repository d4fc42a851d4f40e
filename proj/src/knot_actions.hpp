#pragma once

#include "knotfield/knot.hpp"

namespace knotfield::actions {

// Shared by all leaves of one run.
struct Context {
    KnotWorld& world;
    KnotResult& result;
    std::string active; // label of the last non-tracking leaf ticked
    const Node* last_logged = nullptr;

    // Appends to the step log unless the same node repeats its previous
    // entry, which happens when a reactive sequence re-ticks a finished step.
    void log(const Node& node, Status s) {
        auto& steps = result.steps;
        if (last_logged == &node && !steps.empty() && steps.back().status == s) return;
        last_logged = &node;
        steps.push_back({node.name(), s, world.tick()});
    }
};

enum class RopeEnd { Start, End }; // R0, Rf

NodePtr approach_loop(Context& ctx);
// arm < 0: the free arm at the first tick.
NodePtr grasp(Context& ctx, std::string label, RopeEnd end, int arm);
// The arm not holding `end` grasps it, then the holder releases.
NodePtr hand_over(Context& ctx, std::string label, RopeEnd end);
// Holder of `end` releases; Success at once when nobody holds it.
NodePtr release(Context& ctx, std::string label, RopeEnd end);
// Carries `end` through the anchor (to_anchor) or the rope loop.
NodePtr insertion(Context& ctx, std::string label, RopeEnd end, bool to_anchor);
NodePtr twist(Context& ctx, std::string label);
NodePtr turn_base(Context& ctx, std::string label);

} // namespace knotfield::actions
