#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emql/mdp.hpp"
#include "emql/rng.hpp"

namespace emql {

struct EnvStep {
    State next_state = 0;
    double reward = 0.0;
    bool done = false;
};

/// Episodic environment contract consumed by the harness. done=true is
/// final: the driver must reset before stepping again.
class Environment {
public:
    virtual ~Environment() = default;
    virtual State reset(Rng& rng) = 0;
    virtual EnvStep step(Action a, Rng& rng) = 0;
    virtual int num_states() const = 0;
    virtual int num_actions() const = 0;
    virtual double r_max() const = 0;
    virtual std::string_view name() const = 0;
};

/// Grid lake with frozen cells, holes and a goal. State ids are
/// row * cols + col. Actions: 0=left, 1=down, 2=right, 3=up. In slippery
/// mode the agent moves in the intended direction or either perpendicular,
/// each with probability 1/3; walls clamp.
class FrozenLake : public Environment {
public:
    /// The standard 8x8 layout (10 holes), slippery.
    FrozenLake() : FrozenLake(default_map(), true) {}
    FrozenLake(std::vector<std::string> grid, bool slippery);

    /// Grid file: one row per line, characters S/F/H/G.
    static FrozenLake from_file(const std::filesystem::path& file, bool slippery);
    static const std::vector<std::string>& default_map();

    State reset(Rng& rng) override;
    EnvStep step(Action a, Rng& rng) override;
    int num_states() const override { return rows_ * cols_; }
    int num_actions() const override { return 4; }
    double r_max() const override { return 1.0; }
    std::string_view name() const override { return "frozen_lake"; }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool slippery() const { return slippery_; }
    char cell(State s) const { return grid_[s / cols_][s % cols_]; }

private:
    State move(State from, Action a) const;

    std::vector<std::string> grid_;
    bool slippery_ = true;
    int rows_ = 0;
    int cols_ = 0;
    State start_ = 0;
    State current_ = 0;
    bool done_ = true;
};

/// Uniform-width bins per dimension with clipping outside the edge range;
/// combined ids use mixed-radix encoding with dimension 0 most significant.
class Discretizer {
public:
    struct Dimension {
        double low = 0.0;
        double high = 0.0;
        int bins = 1;
    };

    explicit Discretizer(std::vector<Dimension> dims);

    int total_states() const { return total_states_; }
    std::size_t num_dims() const { return dims_.size(); }
    int bin_index(std::size_t dim, double value) const;  // binary search over edges
    State encode(std::span<const int> indices) const;
    std::vector<int> decode(State id) const;
    State discretize(std::span<const double> values) const;

private:
    std::vector<Dimension> dims_;
    std::vector<std::vector<double>> edges_;  // internal edges, bins-1 per dim
    int total_states_ = 1;
};

struct CartPoleParams {
    double gravity = 9.8;
    double cart_mass = 1.0;
    double pole_mass = 0.1;
    double pole_half_length = 0.5;
    double force_magnitude = 10.0;
    double time_step = 0.02;               // explicit Euler integration step
    double position_limit = 2.4;           // |x| beyond this terminates
    double angle_limit = 0.2094395102393195;  // 12 degrees in radians

    double total_mass() const { return cart_mass + pole_mass; }
    double pole_mass_length() const { return pole_mass * pole_half_length; }
};

/// Pole balancing with the classic textbook dynamics, integrated by explicit
/// Euler. The continuous state (x, x_dot, theta, theta_dot) is exposed to
/// tabular agents through the discretizer. Actions: 0=push_left,
/// 1=push_right. Reward 1 per step, including the terminating one.
class CartPole : public Environment {
public:
    CartPole() : CartPole(CartPoleParams{}, default_discretizer()) {}
    CartPole(CartPoleParams params, Discretizer disc);

    static Discretizer default_discretizer();
    static Discretizer make_discretizer(int position_bins, int velocity_bins, int angle_bins,
                                        int angular_velocity_bins);

    State reset(Rng& rng) override;
    EnvStep step(Action a, Rng& rng) override;
    int num_states() const override { return disc_.total_states(); }
    int num_actions() const override { return 2; }
    double r_max() const override { return 1.0; }
    std::string_view name() const override { return "cart_pole"; }

    std::array<double, 4> physical_state() const { return state_; }
    const Discretizer& discretizer() const { return disc_; }
    const CartPoleParams& params() const { return params_; }

private:
    State discretized() const;

    CartPoleParams params_;
    Discretizer disc_;
    std::array<double, 4> state_{};  // x, x_dot, theta, theta_dot
    bool done_ = true;
};

}  // namespace emql
