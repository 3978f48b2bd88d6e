#include "emql/belief.hpp"

#include <stdexcept>

namespace emql {

Belief one_hot(State s, int num_states) {
    if (s < 0 || s >= num_states) throw std::out_of_range("one_hot: state out of range");
    Belief b;
    b.probs.assign(num_states, 0.0);
    b.probs[s] = 1.0;
    b.mass = 1.0;
    return b;
}

Belief propagate(const Belief& b, const TransitionTable& p, Action a, OpCounter* ops) {
    const int S = p.num_states;
    if (static_cast<int>(b.probs.size()) != S)
        throw std::invalid_argument("propagate: belief length does not match num_states");
    if (a < 0 || a >= p.num_actions) throw std::out_of_range("propagate: action out of range");

    Belief out;
    out.probs.assign(S, 0.0);
    for (State s = 0; s < S; ++s) {
        const double weight = b.probs[s];
        const double* row = p.data.data() + (static_cast<std::size_t>(s) * p.num_actions + a) * S;
        for (State next = 0; next < S; ++next) out.probs[next] += weight * row[next];
    }
    if (ops) ops->multiply_adds += static_cast<std::uint64_t>(S) * static_cast<std::uint64_t>(S);

    double mass = 0.0;
    for (double value : out.probs) mass += value;
    out.mass = mass;
    return out;
}

std::vector<double> expected_q(const Belief& b, const QTable& q) {
    if (static_cast<int>(b.probs.size()) != q.num_states)
        throw std::invalid_argument("expected_q: belief length does not match num_states");
    std::vector<double> out(q.num_actions, 0.0);
    for (State s = 0; s < q.num_states; ++s) {
        const double weight = b.probs[s];
        const double* row = q.data.data() + static_cast<std::size_t>(s) * q.num_actions;
        for (Action a = 0; a < q.num_actions; ++a) out[a] += weight * row[a];
    }
    return out;
}

Belief propagate_log(State last_known, std::span<const Action> action_log,
                     const TransitionTable& p, OpCounter* ops) {
    Belief b = one_hot(last_known, p.num_states);
    for (Action a : action_log) b = propagate(b, p, a, ops);
    if (b.mass < kDegenerateMass) {
        // Every path ran through unvisited rows; fall back to uniform.
        const double u = 1.0 / static_cast<double>(p.num_states);
        for (double& value : b.probs) value = u;
        b.mass = 1.0;
    }
    return b;
}

Action get_emql_action(State last_known, std::span<const Action> action_log,
                       const TransitionTable& p, const QTable& q, OpCounter* ops) {
    const Belief b = propagate_log(last_known, action_log, p, ops);
    return argmax(expected_q(b, q));
}

}  // namespace emql
