#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "emql/mdp.hpp"

namespace emql {

/// Counts multiply-accumulate work done by belief propagation. A single
/// propagate costs exactly |S|^2 multiply-adds, so pushing a one-hot belief
/// through an action log of length d costs d*|S|^2.
struct OpCounter {
    std::uint64_t multiply_adds = 0;
};

/// Distribution (possibly sub-stochastic) over states. `mass` caches the L1
/// norm; propagation through unvisited estimate rows can only lose mass and
/// no renormalization is ever applied.
struct Belief {
    std::vector<double> probs;
    double mass = 0.0;
};

// Beliefs whose mass drops below this after propagation are treated as
// degenerate and replaced by the uniform distribution.
inline constexpr double kDegenerateMass = 1e-12;

/// probs[s] = 1, everything else 0. Out-of-range s throws std::out_of_range.
Belief one_hot(State s, int num_states);

/// out[s'] = sum_s b[s] * p(s, a, s'). Dense matrix-vector product.
Belief propagate(const Belief& b, const TransitionTable& p, Action a, OpCounter* ops = nullptr);

/// out[a] = sum_s b[s] * q(s, a).
std::vector<double> expected_q(const Belief& b, const QTable& q);

/// One-hot at `last_known` pushed through the logged actions in chronological
/// order (oldest first). A belief that collapses to (near) zero mass falls
/// back to uniform over all states.
Belief propagate_log(State last_known, std::span<const Action> action_log,
                     const TransitionTable& p, OpCounter* ops = nullptr);

/// The delayed-state action rule: propagate the last known state through the
/// action log, then argmax the belief-weighted Q values (lowest-index ties).
Action get_emql_action(State last_known, std::span<const Action> action_log,
                       const TransitionTable& p, const QTable& q, OpCounter* ops = nullptr);

}  // namespace emql
