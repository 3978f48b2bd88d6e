#include "emql/delay_channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emql {

DelayModel DelayModel::constant(int d) {
    if (d < 0) throw std::invalid_argument("DelayModel: constant delay must be >= 0");
    return DelayModel(Kind::constant, d, 0.0);
}

DelayModel DelayModel::geometric(double p) {
    if (!(p >= 0.0 && p < 1.0))
        throw std::invalid_argument("DelayModel: geometric parameter must lie in [0, 1)");
    return DelayModel(Kind::geometric, 0, p);
}

double DelayModel::mean() const {
    return kind_ == Kind::constant ? static_cast<double>(d_) : 1.0 / (1.0 - p_);
}

std::int64_t DelayModel::sample(Rng& rng) const {
    if (kind_ == Kind::constant) return d_;
    if (p_ == 0.0) return 1;
    // Inversion: P(delay = k) = (1-p) p^(k-1) for k >= 1.
    const double u = rng.uniform();             // [0, 1)
    const double tail = 1.0 - u;                // (0, 1]
    return 1 + static_cast<std::int64_t>(std::floor(std::log(tail) / std::log(p_)));
}

void Channel::send(std::int64_t timestamp, State state, double reward, bool done,
                   std::int64_t now) {
    if (timestamp != now)
        throw std::logic_error("Channel::send: observation timestamp must equal current step");
    for (const auto& obs : pending_) {
        if (obs.timestamp == timestamp)
            throw std::logic_error("Channel::send: duplicate timestamp in pending queue");
    }
    DelayedObservation obs{timestamp, state, reward, done, now + model_.sample(rng_)};
    pending_.push_back(obs);
}

std::vector<DelayedObservation> Channel::poll(std::int64_t now) {
    std::vector<DelayedObservation> due;
    auto it = std::stable_partition(pending_.begin(), pending_.end(),
                                    [now](const DelayedObservation& obs) { return obs.arrival > now; });
    due.assign(it, pending_.end());
    pending_.erase(it, pending_.end());
    std::sort(due.begin(), due.end(),
              [](const DelayedObservation& a, const DelayedObservation& b) {
                  return a.timestamp < b.timestamp;
              });
    return due;
}

std::vector<DelayedObservation> Channel::flush() {
    std::vector<DelayedObservation> all = std::move(pending_);
    pending_.clear();
    std::sort(all.begin(), all.end(),
              [](const DelayedObservation& a, const DelayedObservation& b) {
                  return a.timestamp < b.timestamp;
              });
    return all;
}

}  // namespace emql
