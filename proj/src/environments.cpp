#include "emql/environments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace emql {

namespace {

// Row/col deltas for left, down, right, up.
constexpr int kRowDelta[4] = {0, 1, 0, -1};
constexpr int kColDelta[4] = {-1, 0, 1, 0};

}  // namespace

const std::vector<std::string>& FrozenLake::default_map() {
    static const std::vector<std::string> kMap = {
        "SFFFFFFF",
        "FFFFFFFF",
        "FFFHFFFF",
        "FFFFFHFF",
        "FFFHFFFF",
        "FHHFFFHF",
        "FHFFHFHF",
        "FFFHFFFG",
    };
    return kMap;
}

FrozenLake::FrozenLake(std::vector<std::string> grid, bool slippery)
    : grid_(std::move(grid)), slippery_(slippery) {
    rows_ = static_cast<int>(grid_.size());
    if (rows_ == 0) throw std::invalid_argument("FrozenLake: empty grid");
    cols_ = static_cast<int>(grid_[0].size());
    if (cols_ == 0) throw std::invalid_argument("FrozenLake: empty grid row");

    int starts = 0;
    for (int r = 0; r < rows_; ++r) {
        if (static_cast<int>(grid_[r].size()) != cols_)
            throw std::invalid_argument("FrozenLake: ragged grid rows");
        for (int c = 0; c < cols_; ++c) {
            const char cell = grid_[r][c];
            if (cell == 'S') {
                start_ = r * cols_ + c;
                ++starts;
            } else if (cell != 'F' && cell != 'H' && cell != 'G') {
                throw std::invalid_argument("FrozenLake: unknown cell '" + std::string(1, cell) + "'");
            }
        }
    }
    if (starts != 1) throw std::invalid_argument("FrozenLake: grid must contain exactly one S");
}

FrozenLake FrozenLake::from_file(const std::filesystem::path& file, bool slippery) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("FrozenLake: cannot open map file " + file.string());
    std::vector<std::string> grid;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (!line.empty()) grid.push_back(line);
    }
    return FrozenLake(std::move(grid), slippery);
}

State FrozenLake::reset(Rng&) {
    current_ = start_;
    done_ = false;
    return current_;
}

State FrozenLake::move(State from, Action a) const {
    const int r = from / cols_ + kRowDelta[a];
    const int c = from % cols_ + kColDelta[a];
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) return from;  // walls clamp
    return r * cols_ + c;
}

EnvStep FrozenLake::step(Action a, Rng& rng) {
    if (done_) throw std::logic_error("FrozenLake: step after episode end");
    if (a < 0 || a >= 4) throw std::out_of_range("FrozenLake: action out of range");

    Action executed = a;
    if (slippery_) {
        // Intended direction or either perpendicular, 1/3 each.
        const int shift = rng.uniform_int(3) - 1;  // -1, 0, +1
        executed = (a + shift + 4) % 4;
    }
    current_ = move(current_, executed);

    EnvStep out;
    out.next_state = current_;
    const char kind = cell(current_);
    if (kind == 'H') {
        out.reward = 0.0;
        out.done = true;
    } else if (kind == 'G') {
        out.reward = 1.0;
        out.done = true;
    } else {
        out.reward = 0.0;
        out.done = false;
    }
    done_ = out.done;
    return out;
}

Discretizer::Discretizer(std::vector<Dimension> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("Discretizer: needs at least one dimension");
    edges_.reserve(dims_.size());
    for (const auto& dim : dims_) {
        if (dim.bins < 1) throw std::invalid_argument("Discretizer: bins must be >= 1");
        if (!(dim.low < dim.high)) throw std::invalid_argument("Discretizer: low must be < high");
        std::vector<double> edges;
        edges.reserve(dim.bins - 1);
        const double width = (dim.high - dim.low) / dim.bins;
        for (int i = 1; i < dim.bins; ++i) edges.push_back(dim.low + width * i);
        edges_.push_back(std::move(edges));
        total_states_ *= dim.bins;
    }
}

int Discretizer::bin_index(std::size_t dim, double value) const {
    const auto& edges = edges_[dim];
    // upper_bound clips below the first edge to bin 0 and at/above the last
    // edge to the final bin.
    return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), value) - edges.begin());
}

State Discretizer::encode(std::span<const int> indices) const {
    if (indices.size() != dims_.size())
        throw std::invalid_argument("Discretizer::encode: wrong index count");
    State id = 0;
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        if (indices[d] < 0 || indices[d] >= dims_[d].bins)
            throw std::out_of_range("Discretizer::encode: bin index out of range");
        id = id * dims_[d].bins + indices[d];
    }
    return id;
}

std::vector<int> Discretizer::decode(State id) const {
    if (id < 0 || id >= total_states_) throw std::out_of_range("Discretizer::decode: id out of range");
    std::vector<int> indices(dims_.size(), 0);
    for (std::size_t d = dims_.size(); d-- > 0;) {
        indices[d] = id % dims_[d].bins;
        id /= dims_[d].bins;
    }
    return indices;
}

State Discretizer::discretize(std::span<const double> values) const {
    if (values.size() != dims_.size())
        throw std::invalid_argument("Discretizer::discretize: wrong value count");
    std::vector<int> indices(dims_.size());
    for (std::size_t d = 0; d < dims_.size(); ++d) indices[d] = bin_index(d, values[d]);
    return encode(indices);
}

Discretizer CartPole::make_discretizer(int position_bins, int velocity_bins, int angle_bins,
                                       int angular_velocity_bins) {
    const CartPoleParams p;
    return Discretizer({
        {-p.position_limit, p.position_limit, position_bins},
        {-3.0, 3.0, velocity_bins},
        {-p.angle_limit, p.angle_limit, angle_bins},
        {-3.5, 3.5, angular_velocity_bins},
    });
}

Discretizer CartPole::default_discretizer() { return make_discretizer(6, 6, 12, 12); }

CartPole::CartPole(CartPoleParams params, Discretizer disc)
    : params_(params), disc_(std::move(disc)) {
    if (disc_.num_dims() != 4)
        throw std::invalid_argument("CartPole: discretizer must have 4 dimensions");
}

State CartPole::discretized() const { return disc_.discretize(state_); }

State CartPole::reset(Rng& rng) {
    for (double& dim : state_) dim = rng.uniform_real(-0.05, 0.05);
    done_ = false;
    return discretized();
}

EnvStep CartPole::step(Action a, Rng&) {
    if (done_) throw std::logic_error("CartPole: step after episode end");
    if (a < 0 || a >= 2) throw std::out_of_range("CartPole: action out of range");

    const double force = (a == 1) ? params_.force_magnitude : -params_.force_magnitude;
    const double cos_theta = std::cos(state_[2]);
    const double sin_theta = std::sin(state_[2]);
    const double total_mass = params_.total_mass();
    const double pml = params_.pole_mass_length();

    const double temp = (force + pml * state_[3] * state_[3] * sin_theta) / total_mass;
    const double theta_acc =
        (params_.gravity * sin_theta - cos_theta * temp) /
        (params_.pole_half_length * (4.0 / 3.0 - params_.pole_mass * cos_theta * cos_theta / total_mass));
    const double x_acc = temp - pml * theta_acc * cos_theta / total_mass;

    const double tau = params_.time_step;
    state_[0] += tau * state_[1];
    state_[1] += tau * x_acc;
    state_[2] += tau * state_[3];
    state_[3] += tau * theta_acc;

    for (double dim : state_) {
        if (!std::isfinite(dim))
            throw std::runtime_error("CartPole: non-finite state (check the physics constants)");
    }

    EnvStep out;
    out.next_state = discretized();
    out.reward = 1.0;
    out.done = std::abs(state_[0]) > params_.position_limit ||
               std::abs(state_[2]) > params_.angle_limit;
    done_ = out.done;
    return out;
}

}  // namespace emql
