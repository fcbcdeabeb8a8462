#include "seal/dqn.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace seal {

void Hyperparams::check() const {
    if (total_timesteps < 0) throw std::invalid_argument("total_timesteps must be >= 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (buffer_capacity <= 0) throw std::invalid_argument("buffer_capacity must be > 0");
    if (first_learning_step < 0) throw std::invalid_argument("first_learning_step must be >= 0");
    if (target_sync_period <= 0) throw std::invalid_argument("target_sync_period must be > 0");
    if (batch_size <= 0) throw std::invalid_argument("batch_size must be > 0");
    if (batch_size > buffer_capacity)
        throw std::invalid_argument("batch_size must not exceed buffer_capacity");
    for (int h : hidden_sizes)
        if (h <= 0) throw std::invalid_argument("hidden sizes must be > 0");
    if (per_alpha < 0.0) throw std::invalid_argument("per_alpha must be >= 0");
    if (per_beta < 0.0) throw std::invalid_argument("per_beta must be >= 0");
    if (!(priority_floor > 0.0)) throw std::invalid_argument("priority_floor must be > 0");
    if (epsilon_initial < 0.0 || epsilon_initial > 1.0 || epsilon_final < 0.0 ||
        epsilon_final > 1.0 || epsilon_final > epsilon_initial)
        throw std::invalid_argument("epsilon schedule must satisfy 0 <= final <= initial <= 1");
    if (!(exploration_fraction > 0.0 && exploration_fraction <= 1.0))
        throw std::invalid_argument("exploration_fraction must be in (0, 1]");
}

std::vector<double> q_values(const mlp::Network& net, const State& state) {
    if (static_cast<int>(state.size()) != net.input_dim)
        throw std::invalid_argument("q_values: state dimension does not match the network input");
    mlp::Workspace ws;
    std::vector<double> q(net.output_dim);
    mlp::reference::forward_batch(net, state.data(), 1, q.data(), ws);
    return q;
}

int greedy_action(const mlp::Network& net, const State& state, mlp::Workspace& ws) {
    if (static_cast<int>(state.size()) != net.input_dim)
        throw std::invalid_argument("greedy_action: state dimension does not match the network input");
    ws.q.resize(net.output_dim);
    mlp::reference::forward_batch(net, state.data(), 1, ws.q.data(), ws);
    return mlp::argmax({ws.q.data(), static_cast<std::size_t>(net.output_dim)});
}

int select_action(const mlp::Network& net, const State& state, double epsilon, Rng& rng,
                  mlp::Workspace& ws) {
    if (rng.uniform() < epsilon) return rng.uniform_int(net.output_dim);
    return greedy_action(net, state, ws);
}

void sync_target(const mlp::Network& net, mlp::Network& target) {
    target = net;
}

double td_train_step(mlp::Network& net, const mlp::Network& target, PrioritizedReplay& buffer,
                     const Hyperparams& hp, mlp::AdamState& opt, Rng& rng,
                     TrainStepWorkspace& ws) {
    const int batch = hp.batch_size;
    const int dim = buffer.state_dim();
    const int n_actions = net.output_dim;

    SampledBatch sampled = buffer.sample(batch, rng);

    ws.states.resize(static_cast<std::size_t>(batch) * dim);
    ws.next_states.resize(static_cast<std::size_t>(batch) * dim);
    ws.targets.resize(batch);
    ws.q_next.resize(static_cast<std::size_t>(batch) * n_actions);
    ws.td_errors.resize(batch);
    ws.new_priorities.resize(batch);
    ws.actions.resize(batch);

    for (int k = 0; k < batch; ++k) {
        const int i = sampled.indices[k];
        std::memcpy(ws.states.data() + static_cast<std::size_t>(k) * dim, buffer.state_at(i),
                    sizeof(double) * dim);
        std::memcpy(ws.next_states.data() + static_cast<std::size_t>(k) * dim,
                    buffer.next_state_at(i), sizeof(double) * dim);
        ws.actions[k] = buffer.action_at(i);
    }

    mlp::forward_batch(target, ws.next_states.data(), batch, ws.q_next.data(), ws.mlp_ws);
    for (int k = 0; k < batch; ++k) {
        const int i = sampled.indices[k];
        const double* row = ws.q_next.data() + static_cast<std::size_t>(k) * n_actions;
        double best = row[0];
        for (int a = 1; a < n_actions; ++a) best = std::max(best, row[a]);
        const double mask = buffer.done_at(i) ? 0.0 : 1.0;
        ws.targets[k] = buffer.reward_at(i) + hp.gamma * mask * best;
    }

    const double loss =
        mlp::train_batch(net, ws.states.data(), ws.actions.data(), ws.targets.data(),
                         sampled.weights.data(), batch, ws.grads, ws.td_errors.data(), ws.mlp_ws);
    if (!std::isfinite(loss))
        throw std::runtime_error("td_train_step: non-finite loss at optimizer step " +
                                 std::to_string(opt.t + 1));
    opt.step(net, ws.grads);

    for (int k = 0; k < batch; ++k)
        ws.new_priorities[k] = std::fabs(ws.td_errors[k]) + hp.priority_floor;
    buffer.update_priorities(sampled.indices, ws.new_priorities);
    return loss;
}

}  // namespace seal
