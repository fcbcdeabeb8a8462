#pragma once

#include <cstdint>
#include <vector>

#include "seal/env.hpp"
#include "seal/mlp.hpp"
#include "seal/replay.hpp"
#include "seal/rng.hpp"

namespace seal {

// Linear decay from initial to final_value over decay_steps, constant after.
struct ExplorationSchedule {
    double initial = 1.0;
    double final_value = 0.02;
    double decay_steps = 1e4;

    double value(long step) const {
        if (static_cast<double>(step) >= decay_steps) return final_value;
        return initial + (final_value - initial) * (static_cast<double>(step) / decay_steps);
    }
};

struct Hyperparams {
    long total_timesteps = 100000;
    double gamma = 0.99;
    double learning_rate = 1e-3;
    int buffer_capacity = 50000;
    long first_learning_step = 1000;
    long target_sync_period = 500;
    int batch_size = 32;
    std::vector<int> hidden_sizes = {64, 64};
    double per_alpha = 0.6;
    double per_beta = 0.4;
    double priority_floor = 1e-6;
    double epsilon_initial = 1.0;
    double epsilon_final = 0.02;
    double exploration_fraction = 0.1;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;

    ExplorationSchedule exploration_schedule() const {
        return {epsilon_initial, epsilon_final,
                exploration_fraction * static_cast<double>(total_timesteps)};
    }
    void check() const;  // throws std::invalid_argument on out-of-range values
};

// Q-values of a single state; throws std::invalid_argument on a dimension
// mismatch.
std::vector<double> q_values(const mlp::Network& net, const State& state);

int greedy_action(const mlp::Network& net, const State& state, mlp::Workspace& ws);

// Epsilon-greedy: uniform action with probability epsilon, otherwise the
// greedy argmax (ties to the lowest index).
int select_action(const mlp::Network& net, const State& state, double epsilon, Rng& rng,
                  mlp::Workspace& ws);

// Copies the online parameters into the target network, bit for bit.
void sync_target(const mlp::Network& net, mlp::Network& target);

struct TrainStepWorkspace {
    std::vector<double> states, next_states, targets, weights, q_next, td_errors, grads,
        new_priorities;
    std::vector<int> actions;
    mlp::Workspace mlp_ws;
};

// One TD(0) update on a prioritized batch: y_i = r_i + gamma (1-done_i)
// max_a Q_target(s'_i, a), one Adam step on the importance-weighted Huber
// loss, priorities updated to |TD error| + floor. Returns the batch loss;
// throws std::runtime_error if the loss is not finite.
double td_train_step(mlp::Network& net, const mlp::Network& target, PrioritizedReplay& buffer,
                     const Hyperparams& hp, mlp::AdamState& opt, Rng& rng,
                     TrainStepWorkspace& ws);

}  // namespace seal
