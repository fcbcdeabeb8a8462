#include "seal/replay.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace seal {

namespace {

int round_up_pow2(int n) {
    int p = 1;
    while (p < n) p *= 2;
    return p;
}

}  // namespace

SumTree::SumTree(int capacity) : leaf_(round_up_pow2(capacity)) {
    tree_.assign(static_cast<std::size_t>(2) * leaf_, 0.0);
}

void SumTree::set(int i, double value) {
    int node = leaf_ + i;
    tree_[node] = value;
    for (node /= 2; node >= 1; node /= 2) tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
}

int SumTree::find_prefix(double u) const {
    int node = 1;
    while (node < leaf_) {
        const double left = tree_[2 * node];
        if (u < left) {
            node = 2 * node;
        } else {
            u -= left;
            node = 2 * node + 1;
        }
    }
    return node - leaf_;
}

MinTree::MinTree(int capacity) : leaf_(round_up_pow2(capacity)) {
    tree_.assign(static_cast<std::size_t>(2) * leaf_, std::numeric_limits<double>::infinity());
}

void MinTree::set(int i, double value) {
    int node = leaf_ + i;
    tree_[node] = value;
    for (node /= 2; node >= 1; node /= 2)
        tree_[node] = std::min(tree_[2 * node], tree_[2 * node + 1]);
}

PrioritizedReplay::PrioritizedReplay(int capacity, int state_dim, double alpha, double beta)
    : capacity_(capacity),
      state_dim_(state_dim),
      alpha_(alpha),
      beta_(beta),
      sum_(capacity),
      min_(capacity) {
    if (capacity <= 0) throw std::invalid_argument("PrioritizedReplay: capacity must be positive");
    if (state_dim <= 0) throw std::invalid_argument("PrioritizedReplay: state_dim must be positive");
    states_.assign(static_cast<std::size_t>(capacity) * state_dim, 0.0);
    next_states_.assign(static_cast<std::size_t>(capacity) * state_dim, 0.0);
    rewards_.assign(capacity, 0.0);
    priorities_.assign(capacity, 0.0);
    actions_.assign(capacity, 0);
    dones_.assign(capacity, 0);
}

void PrioritizedReplay::store(const State& state, int action, double reward,
                              const State& next_state, bool done) {
    if (static_cast<int>(state.size()) != state_dim_ ||
        static_cast<int>(next_state.size()) != state_dim_)
        throw std::invalid_argument("PrioritizedReplay::store: state dimension mismatch");
    const int i = next_;
    std::memcpy(states_.data() + static_cast<std::size_t>(i) * state_dim_, state.data(),
                sizeof(double) * state_dim_);
    std::memcpy(next_states_.data() + static_cast<std::size_t>(i) * state_dim_, next_state.data(),
                sizeof(double) * state_dim_);
    actions_[i] = action;
    rewards_[i] = reward;
    dones_[i] = done ? 1 : 0;
    priorities_[i] = max_priority_;
    const double mass = std::pow(max_priority_, alpha_);
    sum_.set(i, mass);
    min_.set(i, mass);
    next_ = (next_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
}

SampledBatch PrioritizedReplay::sample(int batch_size, Rng& rng) const {
    if (batch_size <= 0) throw std::invalid_argument("PrioritizedReplay::sample: batch_size must be positive");
    if (size_ < batch_size)
        throw std::logic_error("PrioritizedReplay::sample: buffer holds fewer transitions than batch_size");

    SampledBatch batch;
    batch.indices.reserve(batch_size);
    batch.weights.reserve(batch_size);
    const double total = sum_.total();
    const double min_mass = min_.min();
    for (int k = 0; k < batch_size; ++k) {
        int i = sum_.find_prefix(rng.uniform() * total);
        // u can round up to exactly total() and walk past the occupied leaves.
        if (i >= size_) i = size_ - 1;
        batch.indices.push_back(i);
        // (N P(i))^-beta / (N P_min)^-beta
        batch.weights.push_back(std::pow(sum_.get(i) / min_mass, -beta_));
    }
    return batch;
}

void PrioritizedReplay::update_priorities(const std::vector<int>& indices,
                                          const std::vector<double>& priorities) {
    if (indices.size() != priorities.size())
        throw std::invalid_argument("PrioritizedReplay::update_priorities: size mismatch");
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const int i = indices[k];
        const double p = priorities[k];
        if (i < 0 || i >= size_)
            throw std::invalid_argument("PrioritizedReplay::update_priorities: index out of range");
        if (!(p > 0.0))
            throw std::invalid_argument("PrioritizedReplay::update_priorities: priorities must be > 0");
        priorities_[i] = p;
        const double mass = std::pow(p, alpha_);
        sum_.set(i, mass);
        min_.set(i, mass);
        max_priority_ = std::max(max_priority_, p);
    }
}

}  // namespace seal
