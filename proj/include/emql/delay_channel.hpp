#pragma once

#include <cstdint>
#include <vector>

#include "emql/mdp.hpp"
#include "emql/rng.hpp"

namespace emql {

/// One environment observation travelling through the delay pipe.
struct DelayedObservation {
    std::int64_t timestamp = 0;  // step index at which (state, reward, done) was generated
    State state = 0;
    double reward = 0.0;
    bool done = false;
    std::int64_t arrival = 0;    // step index at which the agent may first see it
};

/// Integer observation delay: constant d (d >= 0) or geometric with
/// parameter p, support {1, 2, ...} and P(k) = (1-p) p^(k-1), mean 1/(1-p).
class DelayModel {
public:
    enum class Kind { constant, geometric };

    static DelayModel constant(int d);
    static DelayModel geometric(double p);

    Kind kind() const { return kind_; }
    bool is_constant() const { return kind_ == Kind::constant; }
    int constant_delay() const { return d_; }
    double geometric_p() const { return p_; }
    double mean() const;

    std::int64_t sample(Rng& rng) const;

private:
    DelayModel(Kind kind, int d, double p) : kind_(kind), d_(d), p_(p) {}
    Kind kind_ = Kind::constant;
    int d_ = 0;
    double p_ = 0.0;
};

/// The observation pipe between environment and agent. Observations are
/// enqueued with an arrival step drawn from the delay model; polls hand back
/// everything due, presented in timestamp order even when arrivals crossed.
class Channel {
public:
    Channel(DelayModel model, Rng rng) : model_(model), rng_(rng) {}

    const DelayModel& delay_model() const { return model_; }
    std::size_t pending_count() const { return pending_.size(); }

    /// Enqueue the observation generated at `timestamp` (must equal `now`).
    /// A timestamp already pending is a contract violation.
    void send(std::int64_t timestamp, State state, double reward, bool done, std::int64_t now);

    /// Removes and returns all pending observations with arrival <= now,
    /// sorted ascending by timestamp.
    std::vector<DelayedObservation> poll(std::int64_t now);

    /// Episode-boundary flush: everything still pending, sorted by timestamp.
    std::vector<DelayedObservation> flush();

private:
    DelayModel model_;
    Rng rng_;
    std::vector<DelayedObservation> pending_;
};

}  // namespace emql
