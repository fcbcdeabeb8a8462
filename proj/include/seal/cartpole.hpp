#pragma once

#include <numbers>

#include "seal/env.hpp"
#include "seal/rng.hpp"

namespace seal {

inline constexpr double kDegToRad = std::numbers::pi / 180.0;

struct CartPoleState {
    double x = 0.0;          // cart position (m)
    double x_dot = 0.0;      // cart velocity (m/s)
    double theta = 0.0;      // pole angle (rad)
    double theta_dot = 0.0;  // pole tip angular velocity (rad/s)
};

// Classic-control constants plus failure/observation thresholds. Angles are
// radians everywhere inside the library; degree values appear only at the
// spec-file and CLI boundaries.
struct CartPoleParams {
    double gravity = 9.8;
    double cart_mass = 1.0;
    double pole_mass = 0.1;
    double pole_half_length = 0.5;
    double force_mag = 10.0;
    double tau = 0.02;  // explicit Euler timestep (s)

    double x_fail = 2.4;                      // episode fails beyond these
    double theta_fail = 12.0 * kDegToRad;
    double x_bound = 4.8;                     // observation-space bounds
    double theta_bound = 24.0 * kDegToRad;
    long max_steps = 500;
    double reset_range = 0.05;  // uniform init in [-reset_range, reset_range]^4
};

// One explicit Euler step of the cart-pole equations of motion.
// Action 0 pushes the cart left, 1 pushes it right.
CartPoleState cartpole_integrate(const CartPoleState& s, int action, const CartPoleParams& p);

bool cartpole_failed(const CartPoleState& s, const CartPoleParams& p);

// Pure single-step transition: reward +1, done on |x| or |theta| beyond the
// failure thresholds. The step cap is enforced by CartPoleEnv, not here.
StepOutcome cartpole_step(const CartPoleState& s, int action, const CartPoleParams& p);

CartPoleState cartpole_reset(Rng& rng, const CartPoleParams& p);

class CartPoleEnv final : public Environment {
public:
    CartPoleEnv(const CartPoleParams& params, std::uint64_t seed);
    explicit CartPoleEnv(std::uint64_t seed) : CartPoleEnv(CartPoleParams{}, seed) {}

    const EnvMeta& meta() const override { return meta_; }
    State reset() override;
    StepOutcome step(int action) override;

    const CartPoleState& physical_state() const { return state_; }

private:
    CartPoleParams params_;
    EnvMeta meta_;
    Rng rng_;
    CartPoleState state_;
    long steps_ = 0;
    bool needs_reset_ = true;
};

EnvMeta cartpole_meta(const CartPoleParams& p = CartPoleParams{});

}  // namespace seal
