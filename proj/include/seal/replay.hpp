#pragma once

#include <cstdint>
#include <vector>

#include "seal/env.hpp"
#include "seal/rng.hpp"

namespace seal {

// Fixed-capacity segment tree with sum queries and prefix search, the usual
// backing structure for proportional prioritized sampling.
class SumTree {
public:
    explicit SumTree(int capacity);
    void set(int i, double value);
    double get(int i) const { return tree_[leaf_ + i]; }
    double total() const { return tree_[1]; }
    // Largest i such that the cumulative sum of leaves [0, i) is <= u.
    int find_prefix(double u) const;

private:
    int leaf_;
    std::vector<double> tree_;
};

class MinTree {
public:
    explicit MinTree(int capacity);
    void set(int i, double value);
    double min() const { return tree_[1]; }

private:
    int leaf_;
    std::vector<double> tree_;
};

struct SampledBatch {
    std::vector<int> indices;
    std::vector<double> weights;  // importance weights, normalized by the max weight
};

// Bounded prioritized transition store. Sampling probability of entry i is
// proportional to priority_i^alpha; importance weights are (N * P(i))^-beta
// normalized by the largest weight in the buffer. New entries receive the
// maximum priority seen so far, and eviction is oldest-first.
class PrioritizedReplay {
public:
    PrioritizedReplay(int capacity, int state_dim, double alpha, double beta);

    void store(const State& state, int action, double reward, const State& next_state, bool done);

    // Throws std::logic_error when fewer than batch_size transitions are stored.
    SampledBatch sample(int batch_size, Rng& rng) const;

    // Priorities must be strictly positive (callers add a small floor to
    // |TD error| so no transition ever starves).
    void update_priorities(const std::vector<int>& indices,
                           const std::vector<double>& priorities);

    int size() const { return size_; }
    int capacity() const { return capacity_; }
    int state_dim() const { return state_dim_; }
    double priority_at(int i) const { return priorities_[i]; }

    const double* state_at(int i) const { return states_.data() + static_cast<std::size_t>(i) * state_dim_; }
    const double* next_state_at(int i) const { return next_states_.data() + static_cast<std::size_t>(i) * state_dim_; }
    int action_at(int i) const { return actions_[i]; }
    double reward_at(int i) const { return rewards_[i]; }
    bool done_at(int i) const { return dones_[i] != 0; }

private:
    int capacity_;
    int state_dim_;
    double alpha_;
    double beta_;
    int size_ = 0;
    int next_ = 0;
    double max_priority_ = 1.0;
    std::vector<double> states_;
    std::vector<double> next_states_;
    std::vector<double> rewards_;
    std::vector<double> priorities_;
    std::vector<int> actions_;
    std::vector<std::uint8_t> dones_;
    SumTree sum_;
    MinTree min_;
};

}  // namespace seal
