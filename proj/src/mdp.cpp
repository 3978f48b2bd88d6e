#include "emql/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace emql {

void MdpSpec::validate() const {
    if (num_states < 1) throw std::invalid_argument("MdpSpec: num_states must be >= 1");
    if (num_actions < 1) throw std::invalid_argument("MdpSpec: num_actions must be >= 1");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("MdpSpec: gamma must lie in [0, 1)");
    if (!std::isfinite(r_max)) throw std::invalid_argument("MdpSpec: r_max must be finite");
}

Action argmax(std::span<const double> values) {
    Action best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = static_cast<Action>(i);
    }
    return best;
}

Action greedy_action(const QTable& q, State s) {
    return argmax(q.row(s));
}

TabularModel::TabularModel(MdpSpec spec, TransitionStorage storage)
    : spec_(spec), dense_(storage == TransitionStorage::dense) {
    spec_.validate();
    const std::size_t sa = spec_.sa_cells();
    visits_.assign(sa, 0);
    reward_sums_.assign(sa, 0.0);
    rows_.assign(sa, {});
    if (dense_) phat_dense_.assign(spec_.sas_cells(), 0.0);
    rhat_.assign(sa, 0.0);
    q_.assign(sa, 0.0);
    v_.assign(spec_.num_states, 0.0);
    state_visits_.assign(spec_.num_states, 0);
    dirty_flags_.assign(sa, 0);
}

std::size_t TabularModel::cell(State s, Action a) const {
    return static_cast<std::size_t>(s) * spec_.num_actions + a;
}

void TabularModel::check_state(State s, const char* what) const {
    if (s < 0 || s >= spec_.num_states)
        throw std::out_of_range(std::string("TabularModel: ") + what + " out of range");
}

void TabularModel::check_action(Action a) const {
    if (a < 0 || a >= spec_.num_actions)
        throw std::out_of_range("TabularModel: action out of range");
}

void TabularModel::mark_dirty(std::size_t c) {
    if (!dirty_flags_[c]) {
        dirty_flags_[c] = 1;
        dirty_cells_.push_back(c);
    }
}

void TabularModel::record_transition(State s, Action a, State next, double reward) {
    check_state(s, "state");
    check_state(next, "next state");
    check_action(a);
    const std::size_t c = cell(s, a);
    visits_[c] += 1;
    reward_sums_[c] += reward;
    state_visits_[s] += 1;
    total_visits_ += 1;

    auto& row = rows_[c];
    auto it = std::lower_bound(row.begin(), row.end(), next,
                               [](const SuccessorEntry& e, State ns) { return e.next < ns; });
    if (it != row.end() && it->next == next) {
        it->count += 1;
    } else {
        row.insert(it, SuccessorEntry{next, 1, 0.0});
    }
    mark_dirty(c);
}

void TabularModel::refresh_estimates() {
    for (std::size_t c : dirty_cells_) {
        const double denom = static_cast<double>(std::max<std::int64_t>(1, visits_[c]));
        rhat_[c] = reward_sums_[c] / denom;
        double* dense_row = dense_ ? phat_dense_.data() + c * spec_.num_states : nullptr;
        for (auto& entry : rows_[c]) {
            entry.prob = static_cast<double>(entry.count) / denom;
            if (dense_row) dense_row[entry.next] = entry.prob;
        }
        dirty_flags_[c] = 0;
    }
    dirty_cells_.clear();
}

void TabularModel::refresh_v() {
    const int A = spec_.num_actions;
    for (State s = 0; s < spec_.num_states; ++s) {
        const double* row = q_.data() + static_cast<std::size_t>(s) * A;
        double best = row[0];
        for (int a = 1; a < A; ++a) best = std::max(best, row[a]);
        v_[s] = best;
    }
}

void TabularModel::q_sweep() {
    refresh_v();  // v_old from the current q
    const double gamma = spec_.gamma;
    for (std::size_t c = 0; c < q_.size(); ++c) {
        double acc = 0.0;
        for (const auto& entry : rows_[c]) acc += v_[entry.next] * entry.prob;
        q_[c] = rhat_[c] + gamma * acc;
    }
    refresh_v();
}

SweepResult TabularModel::value_iteration(double tol, int max_sweeps) {
    if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be > 0");
    SweepResult result;
    std::vector<double> prev;
    for (int i = 0; i < max_sweeps; ++i) {
        prev = q_;
        q_sweep();
        result.sweeps = i + 1;
        double residual = 0.0;
        for (std::size_t c = 0; c < q_.size(); ++c)
            residual = std::max(residual, std::abs(q_[c] - prev[c]));
        result.residual = residual;
        if (residual < tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

std::int64_t TabularModel::visit_count(State s, Action a) const {
    check_state(s, "state");
    check_action(a);
    return visits_[cell(s, a)];
}

std::int64_t TabularModel::transition_count(State s, Action a, State next) const {
    check_state(s, "state");
    check_state(next, "next state");
    check_action(a);
    const auto& row = rows_[cell(s, a)];
    auto it = std::lower_bound(row.begin(), row.end(), next,
                               [](const SuccessorEntry& e, State ns) { return e.next < ns; });
    return (it != row.end() && it->next == next) ? it->count : 0;
}

double TabularModel::reward_sum(State s, Action a) const {
    check_state(s, "state");
    check_action(a);
    return reward_sums_[cell(s, a)];
}

double TabularModel::p_hat(State s, Action a, State next) const {
    check_state(s, "state");
    check_state(next, "next state");
    check_action(a);
    const auto& row = rows_[cell(s, a)];
    auto it = std::lower_bound(row.begin(), row.end(), next,
                               [](const SuccessorEntry& e, State ns) { return e.next < ns; });
    return (it != row.end() && it->next == next) ? it->prob : 0.0;
}

double TabularModel::r_hat(State s, Action a) const {
    check_state(s, "state");
    check_action(a);
    return rhat_[cell(s, a)];
}

double TabularModel::q(State s, Action a) const {
    check_state(s, "state");
    check_action(a);
    return q_[cell(s, a)];
}

std::span<const TabularModel::SuccessorEntry> TabularModel::successors(State s, Action a) const {
    check_state(s, "state");
    check_action(a);
    return rows_[cell(s, a)];
}

TransitionTable TabularModel::transition_view() const {
    if (!dense_)
        throw std::logic_error("TabularModel: dense transition view requested from sparse storage");
    return {phat_dense_, spec_.num_states, spec_.num_actions};
}

QTable TabularModel::q_view() const { return q_view_internal(); }

double TabularModel::bellman_residual() const {
    double worst = 0.0;
    for (std::size_t c = 0; c < q_.size(); ++c) {
        double acc = 0.0;
        for (const auto& entry : rows_[c]) acc += v_[entry.next] * entry.prob;
        worst = std::max(worst, std::abs(q_[c] - (rhat_[c] + spec_.gamma * acc)));
    }
    return worst;
}

void TabularModel::set_q(std::vector<double> q) {
    if (q.size() != q_.size()) throw std::invalid_argument("set_q: size mismatch");
    q_ = std::move(q);
    refresh_v();
}

void TabularModel::set_q_cell(State s, Action a, double value) {
    check_state(s, "state");
    check_action(a);
    q_[cell(s, a)] = value;
    v_[s] = max_q(s);
}

double TabularModel::max_q(State s) const {
    check_state(s, "state");
    const double* row = q_.data() + cell(s, 0);
    double best = row[0];
    for (int a = 1; a < spec_.num_actions; ++a) best = std::max(best, row[a]);
    return best;
}

namespace {

constexpr char kMagic[8] = {'E', 'M', 'Q', 'L', 'M', 'D', 'L', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void write_vec(std::ostream& out, const std::vector<T>& values) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(T)));
}

template <typename T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("TabularModel::load: truncated file");
    return value;
}

template <typename T>
std::vector<T> read_vec(std::istream& in, std::size_t n) {
    std::vector<T> values(n);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!in) throw std::runtime_error("TabularModel::load: truncated file");
    return values;
}

}  // namespace

void TabularModel::save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("TabularModel::save: cannot open " + file.string());
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kVersion);
    write_pod(out, static_cast<std::uint32_t>(spec_.num_states));
    write_pod(out, static_cast<std::uint32_t>(spec_.num_actions));
    write_pod(out, spec_.gamma);
    write_pod(out, spec_.r_max);
    write_pod(out, static_cast<std::uint8_t>(dense_ ? 1 : 0));

    write_vec(out, visits_);
    // Dense row-major transition counts, materialized row by row.
    std::vector<std::int64_t> count_row(spec_.num_states);
    std::vector<double> prob_row(spec_.num_states);
    for (std::size_t c = 0; c < rows_.size(); ++c) {
        std::fill(count_row.begin(), count_row.end(), 0);
        for (const auto& entry : rows_[c]) count_row[entry.next] = entry.count;
        write_vec(out, count_row);
    }
    write_vec(out, reward_sums_);
    for (std::size_t c = 0; c < rows_.size(); ++c) {
        std::fill(prob_row.begin(), prob_row.end(), 0.0);
        for (const auto& entry : rows_[c]) prob_row[entry.next] = entry.prob;
        write_vec(out, prob_row);
    }
    write_vec(out, rhat_);
    write_vec(out, q_);
    write_vec(out, v_);
    if (!out) throw std::runtime_error("TabularModel::save: write failed for " + file.string());
}

TabularModel TabularModel::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("TabularModel::load: cannot open " + file.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("TabularModel::load: bad magic in " + file.string());
    const auto version = read_pod<std::uint32_t>(in);
    if (version != kVersion)
        throw std::runtime_error("TabularModel::load: unsupported version");

    MdpSpec spec;
    spec.num_states = static_cast<int>(read_pod<std::uint32_t>(in));
    spec.num_actions = static_cast<int>(read_pod<std::uint32_t>(in));
    spec.gamma = read_pod<double>(in);
    spec.r_max = read_pod<double>(in);
    const bool dense = read_pod<std::uint8_t>(in) != 0;

    TabularModel model(spec, dense ? TransitionStorage::dense : TransitionStorage::sparse);
    const std::size_t sa = spec.sa_cells();
    const std::size_t S = static_cast<std::size_t>(spec.num_states);

    model.visits_ = read_vec<std::int64_t>(in, sa);
    for (std::size_t c = 0; c < sa; ++c) {
        auto counts = read_vec<std::int64_t>(in, S);
        for (std::size_t next = 0; next < S; ++next) {
            if (counts[next] > 0)
                model.rows_[c].push_back(SuccessorEntry{static_cast<State>(next), counts[next], 0.0});
        }
    }
    model.reward_sums_ = read_vec<double>(in, sa);
    for (std::size_t c = 0; c < sa; ++c) {
        auto probs = read_vec<double>(in, S);
        for (auto& entry : model.rows_[c]) entry.prob = probs[entry.next];
        if (dense)
            std::copy(probs.begin(), probs.end(), model.phat_dense_.begin() + c * S);
    }
    model.rhat_ = read_vec<double>(in, sa);
    model.q_ = read_vec<double>(in, sa);
    model.v_ = read_vec<double>(in, S);

    model.total_visits_ = 0;
    std::fill(model.state_visits_.begin(), model.state_visits_.end(), 0);
    for (State s = 0; s < spec.num_states; ++s) {
        for (Action a = 0; a < spec.num_actions; ++a) {
            const std::int64_t n = model.visits_[model.cell(s, a)];
            model.state_visits_[s] += n;
            model.total_visits_ += n;
        }
    }
    // Counts may have been recorded after the last refresh; make the next
    // refresh rebuild every visited cell rather than trusting staleness info
    // that was not serialized.
    for (std::size_t c = 0; c < sa; ++c) {
        if (model.visits_[c] > 0) model.mark_dirty(c);
    }
    return model;
}

void TrueMdp::validate() const {
    spec.validate();
    if (transition.size() != spec.sas_cells())
        throw std::invalid_argument("TrueMdp: transition table has wrong size");
    if (reward.size() != spec.sa_cells())
        throw std::invalid_argument("TrueMdp: reward table has wrong size");
    if (terminal.size() != static_cast<std::size_t>(spec.num_states))
        throw std::invalid_argument("TrueMdp: terminal vector has wrong size");
    for (State s = 0; s < spec.num_states; ++s) {
        for (Action a = 0; a < spec.num_actions; ++a) {
            double sum = 0.0;
            for (State next = 0; next < spec.num_states; ++next) {
                const double value = p(s, a, next);
                if (value < 0.0 || value > 1.0)
                    throw std::invalid_argument("TrueMdp: transition entry outside [0, 1]");
                sum += value;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("TrueMdp: transition row does not sum to 1");
            if (r(s, a) > spec.r_max + 1e-12)
                throw std::invalid_argument("TrueMdp: reward exceeds r_max");
        }
    }
}

}  // namespace emql
