#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "emql/delay_channel.hpp"
#include "emql/mdp.hpp"
#include "emql/rng.hpp"

namespace emql {

/// Time-dependent exploration factor:
/// log(num_states * total_count + 1) / (state_count + 1).
/// total_count is the table-wide visit sum, state_count the visit sum at the
/// reference state. The value can exceed 1 early on; callers clamp when
/// sampling.
double exploration_epsilon(std::int64_t total_count, std::int64_t state_count, int num_states);

/// (base state, last d actions) packed into one index:
/// code = base * |A|^d + sum_i tail[i] * |A|^(d-1-i), tail[0] oldest.
std::int64_t augmented_code(State base, std::span<const Action> tail, int num_actions);
struct AugmentedState {
    State base = 0;
    std::vector<Action> tail;
};
AugmentedState augmented_decode(std::int64_t code, int num_actions, int delay);
std::int64_t augmented_state_count(int num_states, int num_actions, int delay);

enum class AgentKind { emql, emdp, mbs, dq };
AgentKind parse_agent_kind(std::string_view name);
std::string_view to_string(AgentKind kind);

enum class PlannerMode { sweep, converge };

struct AgentConfig {
    AgentKind kind = AgentKind::emql;
    double gamma = 0.95;
    double alpha = 0.1;                        // dq learning rate
    PlannerMode planner = PlannerMode::sweep;
};

/// What the agent knows mid-episode: the newest contiguously-known state,
/// the actions taken since, and a buffer of arrived observations waiting for
/// their predecessors. Completed transitions are handed to the owner exactly
/// once, as soon as both endpoints are known.
class AgentView {
public:
    void begin_episode(State initial_state);
    void note_action(Action a);

    /// Processes timestamp-sorted arrivals.
    /// `on_transition(timestamp, s, a, next, reward)` fires once per
    /// completed tuple, where `timestamp` is the step index of the successor
    /// observation. Arrivals whose timestamp was already ingested are
    /// dropped and counted.
    template <typename F>
    void ingest(std::span<const DelayedObservation> arrivals, F&& on_transition) {
        for (const auto& obs : arrivals) {
            if (obs.timestamp <= 0 || known_.count(obs.timestamp)) {
                ++stale_arrivals_;
                continue;
            }
            known_.emplace(obs.timestamp, Entry{obs.state, obs.reward, false});
            try_record(obs.timestamp, on_transition);
            try_record(obs.timestamp + 1, on_transition);
            while (true) {
                auto it = known_.find(last_known_timestamp_ + 1);
                if (it == known_.end()) break;
                ++last_known_timestamp_;
                last_known_state_ = it->second.state;
            }
        }
    }

    State last_known_state() const { return last_known_state_; }
    std::int64_t last_known_timestamp() const { return last_known_timestamp_; }
    std::int64_t current_time() const { return static_cast<std::int64_t>(actions_.size()); }

    /// Actions taken at steps [last_known_timestamp, now), oldest first.
    std::span<const Action> action_log() const;

    bool knows_state(std::int64_t timestamp) const;
    State state_at(std::int64_t timestamp) const;
    Action action_at(std::int64_t timestamp) const { return actions_.at(timestamp); }

    std::int64_t stale_arrival_count() const { return stale_arrivals_; }

private:
    struct Entry {
        State state = 0;
        double reward = 0.0;
        bool recorded = false;  // transition *into* this timestamp handled
    };

    template <typename F>
    void try_record(std::int64_t timestamp, F&& on_transition) {
        auto here = known_.find(timestamp);
        if (here == known_.end() || here->second.recorded) return;
        State prev_state = 0;
        if (timestamp == 1) {
            prev_state = initial_state_;
        } else {
            auto prev = known_.find(timestamp - 1);
            if (prev == known_.end()) return;
            prev_state = prev->second.state;
        }
        if (timestamp - 1 >= static_cast<std::int64_t>(actions_.size())) return;
        here->second.recorded = true;
        on_transition(timestamp, prev_state, actions_[timestamp - 1], here->second.state,
                      here->second.reward);
    }

    State initial_state_ = 0;
    State last_known_state_ = 0;
    std::int64_t last_known_timestamp_ = 0;
    std::vector<Action> actions_;                // indexed by step within episode
    std::map<std::int64_t, Entry> known_;        // arrived observations
    std::int64_t stale_arrivals_ = 0;
};

/// Decision-maker contract consumed by the harness. One instance per
/// experiment iteration; learning accumulates across the episodes of that
/// iteration.
class Agent {
public:
    virtual ~Agent() = default;
    /// The initial state is delivered undelayed: resets are synchronous.
    virtual void begin_episode(State initial_state) = 0;
    /// Pick the action for step t. Exploration randomness comes from the
    /// caller-owned stream.
    virtual Action act(std::int64_t t, Rng& explore_rng) = 0;
    virtual void ingest(std::span<const DelayedObservation> arrivals) = 0;
    /// Planner refresh at the episode boundary (estimates + sweep for the
    /// model-based agents; a no-op for dq).
    virtual void end_episode() = 0;

    virtual std::string_view name() const = 0;
    virtual const TabularModel& model() const = 0;
    virtual TabularModel& mutable_model() = 0;
    virtual std::int64_t stale_arrival_count() const = 0;
};

/// Builds one of the four agents. EMDP requires a constant delay model; a
/// stochastic delay is a configuration error (std::invalid_argument).
std::unique_ptr<Agent> make_agent(const AgentConfig& cfg, int num_states, int num_actions,
                                  double r_max, const DelayModel& delay);

}  // namespace emql
