#include "seal/cartpole.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace seal {

CartPoleState cartpole_integrate(const CartPoleState& s, int action, const CartPoleParams& p) {
    const double force = action == 1 ? p.force_mag : -p.force_mag;
    // sin/cos evaluated on |theta| with the sign reapplied, so that mirrored
    // states integrate to exactly mirrored results (libm itself does not
    // guarantee bitwise odd/even symmetry).
    const double sin_theta = std::copysign(std::sin(std::fabs(s.theta)), s.theta);
    const double cos_theta = std::cos(std::fabs(s.theta));

    const double total_mass = p.cart_mass + p.pole_mass;
    const double pole_mass_length = p.pole_mass * p.pole_half_length;

    const double temp =
        (force + pole_mass_length * s.theta_dot * s.theta_dot * sin_theta) / total_mass;
    const double theta_acc =
        (p.gravity * sin_theta - cos_theta * temp) /
        (p.pole_half_length * (4.0 / 3.0 - p.pole_mass * cos_theta * cos_theta / total_mass));
    const double x_acc = temp - pole_mass_length * theta_acc * cos_theta / total_mass;

    CartPoleState next;
    next.x = s.x + p.tau * s.x_dot;
    next.x_dot = s.x_dot + p.tau * x_acc;
    next.theta = s.theta + p.tau * s.theta_dot;
    next.theta_dot = s.theta_dot + p.tau * theta_acc;
    return next;
}

bool cartpole_failed(const CartPoleState& s, const CartPoleParams& p) {
    return std::fabs(s.x) > p.x_fail || std::fabs(s.theta) > p.theta_fail;
}

StepOutcome cartpole_step(const CartPoleState& s, int action, const CartPoleParams& p) {
    if (action != 0 && action != 1)
        throw std::invalid_argument("cartpole_step: action must be 0 (left) or 1 (right)");
    const CartPoleState next = cartpole_integrate(s, action, p);
    StepOutcome out;
    out.next_state = {next.x, next.x_dot, next.theta, next.theta_dot};
    out.reward = 1.0;
    out.done = cartpole_failed(next, p);
    return out;
}

CartPoleState cartpole_reset(Rng& rng, const CartPoleParams& p) {
    CartPoleState s;
    s.x = rng.uniform(-p.reset_range, p.reset_range);
    s.x_dot = rng.uniform(-p.reset_range, p.reset_range);
    s.theta = rng.uniform(-p.reset_range, p.reset_range);
    s.theta_dot = rng.uniform(-p.reset_range, p.reset_range);
    return s;
}

EnvMeta cartpole_meta(const CartPoleParams& p) {
    const double inf = std::numeric_limits<double>::infinity();
    EnvMeta meta;
    meta.state_dim = 4;
    meta.action_count = 2;
    meta.max_steps = p.max_steps;
    meta.observation_bounds = {{-p.x_bound, p.x_bound},
                               {-inf, inf},
                               {-p.theta_bound, p.theta_bound},
                               {-inf, inf}};
    return meta;
}

CartPoleEnv::CartPoleEnv(const CartPoleParams& params, std::uint64_t seed)
    : params_(params), meta_(cartpole_meta(params)), rng_(seed) {
    if (params_.gravity <= 0 || params_.cart_mass <= 0 || params_.pole_mass <= 0 ||
        params_.pole_half_length <= 0 || params_.force_mag <= 0 || params_.tau <= 0)
        throw std::invalid_argument("CartPoleEnv: physical constants must be strictly positive");
}

State CartPoleEnv::reset() {
    state_ = cartpole_reset(rng_, params_);
    steps_ = 0;
    needs_reset_ = false;
    return {state_.x, state_.x_dot, state_.theta, state_.theta_dot};
}

StepOutcome CartPoleEnv::step(int action) {
    if (needs_reset_)
        throw std::logic_error("CartPoleEnv::step: episode finished, call reset()");
    StepOutcome out = cartpole_step(state_, action, params_);
    state_ = {out.next_state[0], out.next_state[1], out.next_state[2], out.next_state[3]};
    ++steps_;
    if (steps_ >= params_.max_steps) out.done = true;
    if (out.done) needs_reset_ = true;
    return out;
}

}  // namespace seal
