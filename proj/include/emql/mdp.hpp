#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace emql {

using State = int;
using Action = int;

/// Dimensions and discounting shared by every model of the same task.
struct MdpSpec {
    int num_states = 0;
    int num_actions = 0;
    double gamma = 0.0;   // discount, in [0, 1)
    double r_max = 0.0;   // maximum per-step reward

    std::size_t sa_cells() const {
        return static_cast<std::size_t>(num_states) * static_cast<std::size_t>(num_actions);
    }
    std::size_t sas_cells() const { return sa_cells() * static_cast<std::size_t>(num_states); }

    /// Throws std::invalid_argument when sizes or gamma are out of range.
    void validate() const;
};

/// Non-owning view over a flat row-major (state, action, next_state) table.
struct TransitionTable {
    std::span<const double> data;
    int num_states = 0;
    int num_actions = 0;

    double operator()(State s, Action a, State next) const {
        return data[(static_cast<std::size_t>(s) * num_actions + a) * num_states + next];
    }
};

/// Non-owning view over a flat row-major (state, action) value table.
struct QTable {
    std::span<const double> data;
    int num_states = 0;
    int num_actions = 0;

    double operator()(State s, Action a) const {
        return data[static_cast<std::size_t>(s) * num_actions + a];
    }
    std::span<const double> row(State s) const {
        return data.subspan(static_cast<std::size_t>(s) * num_actions, num_actions);
    }
};

/// Lowest-index argmax. Ties always break toward the smaller index so that
/// traces stay reproducible; exploration supplies all randomness.
Action argmax(std::span<const double> values);

/// argmax_a q(s, a) with lowest-index tie-break.
Action greedy_action(const QTable& q, State s);

struct SweepResult {
    int sweeps = 0;
    double residual = 0.0;
    bool converged = false;
};

/// Counted model of a finite MDP: visit/transition counts, reward sums and
/// the derived estimates p_hat, r_hat plus the planned Q/V tables.
///
/// Transition counts are stored sparsely per (s, a) cell; an optional dense
/// mirror of p_hat is kept for callers that need whole-matrix access
/// (belief propagation, checkpoint files). Augmented-state models switch the
/// mirror off because their state spaces grow as |S|*|A|^d.
class TabularModel {
public:
    enum class TransitionStorage { sparse, dense };

    struct SuccessorEntry {
        State next = 0;
        std::int64_t count = 0;
        double prob = 0.0;  // count / max(1, N), valid after refresh_estimates
    };

    explicit TabularModel(MdpSpec spec, TransitionStorage storage = TransitionStorage::dense);

    const MdpSpec& spec() const { return spec_; }
    bool has_dense_transitions() const { return dense_; }

    /// N(s,a) += 1, P(s,a,next) += 1, R(s,a) += reward. Out-of-range indices
    /// throw std::out_of_range; no cell other than the named ones changes.
    void record_transition(State s, Action a, State next, double reward);

    /// p_hat(s,a,s') = P(s,a,s') / max(1, N(s,a)), r_hat = R / max(1, N).
    /// Unvisited rows stay all-zero, which leaves propagation sub-stochastic.
    void refresh_estimates();

    /// One synchronous backup: with v_old(s) = max_a q(s,a),
    /// q(s,a) <- r_hat(s,a) + gamma * sum_s' v_old(s') p_hat(s,a,s'),
    /// then v is refreshed from the new q.
    void q_sweep();

    /// Repeated q_sweep until max |dq| < tol or max_sweeps is hit.
    /// Non-convergence is reported in the result, not an error.
    SweepResult value_iteration(double tol, int max_sweeps);

    std::int64_t visit_count(State s, Action a) const;
    std::int64_t state_visit_count(State s) const { return state_visits_.at(s); }
    std::int64_t total_visit_count() const { return total_visits_; }
    std::int64_t transition_count(State s, Action a, State next) const;
    double reward_sum(State s, Action a) const;
    double p_hat(State s, Action a, State next) const;
    double r_hat(State s, Action a) const;
    double q(State s, Action a) const;
    double v(State s) const { return v_.at(s); }

    std::span<const SuccessorEntry> successors(State s, Action a) const;

    /// Dense p_hat view; requires TransitionStorage::dense.
    TransitionTable transition_view() const;
    QTable q_view() const;
    std::span<const double> v_vector() const { return v_; }
    std::span<const double> q_table() const { return q_; }

    Action greedy(State s) const { return greedy_action(q_view_internal(), s); }

    /// max over cells of |q - (r_hat + gamma * sum v p_hat)| given current v.
    double bellman_residual() const;

    /// Replace the whole Q table (warm starts, baseline update rules).
    /// v is refreshed to keep v(s) = max_a q(s,a).
    void set_q(std::vector<double> q);
    /// Overwrite a single Q cell; v(s) is re-derived.
    void set_q_cell(State s, Action a, double value);
    double max_q(State s) const;

    /// Versioned binary checkpoint: header (|S|, |A|, gamma, r_max) followed
    /// by the row-major tables N, P, R, p_hat, r_hat, q, v. Round-trips
    /// exactly.
    void save(const std::filesystem::path& file) const;
    static TabularModel load(const std::filesystem::path& file);

private:
    std::size_t cell(State s, Action a) const;
    void check_state(State s, const char* what) const;
    void check_action(Action a) const;
    void mark_dirty(std::size_t c);
    QTable q_view_internal() const { return {q_, spec_.num_states, spec_.num_actions}; }
    void refresh_v();

    MdpSpec spec_;
    bool dense_ = true;
    std::vector<std::int64_t> visits_;                   // (s,a)
    std::vector<double> reward_sums_;                    // (s,a)
    std::vector<std::vector<SuccessorEntry>> rows_;      // (s,a) -> sorted by next
    std::vector<double> phat_dense_;                     // (s,a,s'), dense mode only
    std::vector<double> rhat_;                           // (s,a)
    std::vector<double> q_;                              // (s,a)
    std::vector<double> v_;                              // (s)
    std::vector<std::int64_t> state_visits_;             // (s)
    std::int64_t total_visits_ = 0;
    std::vector<std::size_t> dirty_cells_;
    std::vector<std::uint8_t> dirty_flags_;
};

/// Ground-truth MDP used by the environments-as-models path and the exact
/// verifiers. Terminal states are absorbing with zero reward.
struct TrueMdp {
    MdpSpec spec;
    std::vector<double> transition;       // (s,a,s'), each row a distribution
    std::vector<double> reward;           // (s,a)
    std::vector<std::uint8_t> terminal;   // per state

    double p(State s, Action a, State next) const {
        return transition[(static_cast<std::size_t>(s) * spec.num_actions + a) * spec.num_states + next];
    }
    double r(State s, Action a) const {
        return reward[static_cast<std::size_t>(s) * spec.num_actions + a];
    }
    TransitionTable transition_view() const {
        return {transition, spec.num_states, spec.num_actions};
    }

    /// Checks row sums (1 +- 1e-12), probability bounds and reward <= r_max.
    void validate() const;
};

}  // namespace emql
