#pragma once

#include <span>
#include <vector>

#include "seal/rng.hpp"

namespace seal::mlp {

struct LayerShape {
    int in = 0;
    int out = 0;
    int w_offset = 0;  // row-major [out][in] block in params
    int b_offset = 0;
};

// Fully connected Q-network: rectifier hidden layers, linear output. All
// parameters live in one flat array so the optimizer, serialization and the
// finite-difference tests can treat the network as a single vector.
struct Network {
    int input_dim = 0;
    int output_dim = 0;
    std::vector<int> hidden;
    std::vector<LayerShape> layers;
    std::vector<double> params;

    int param_count() const { return static_cast<int>(params.size()); }
    int act_stride() const;  // summed layer widths, per-sample activation size
    int max_width() const;
};

Network make_network(int input_dim, const std::vector<int>& hidden, int output_dim);

// Glorot-uniform weights, zero biases.
Network make_network(int input_dim, const std::vector<int>& hidden, int output_dim, Rng& rng);

// Reusable scratch for the batched kernels; grows on demand.
struct Workspace {
    std::vector<double> acts;       // batch x act_stride
    std::vector<double> delta;      // per-thread backprop scratch
    std::vector<double> grad_buf;   // batch x param_count (parallel reduction buffer)
    std::vector<double> loss_term;  // batch
    std::vector<double> q;          // single-sample Q output
};

double huber(double delta);

// Lowest index wins ties.
int argmax(std::span<const double> values);

// Q-values for a batch of states; states is batch x input_dim, q_out is
// batch x output_dim.
void forward_batch(const Network& net, const double* states, int batch, double* q_out,
                   Workspace& ws);

// Mean importance-weighted Huber loss of Q(s_i, a_i) against targets. Pure
// function of the parameters; this is the quantity train_batch differentiates.
double loss_batch(const Network& net, const double* states, const int* actions,
                  const double* targets, const double* weights, int batch, Workspace& ws);

// Forward + backward over the batch. Fills grad_out (overwritten) with
// d(loss)/d(params), td_errors with Q(s_i,a_i) - target_i, and returns the
// loss. Deterministic for any thread count: per-sample gradients are
// reduced in sample order.
double train_batch(const Network& net, const double* states, const int* actions,
                   const double* targets, const double* weights, int batch,
                   std::vector<double>& grad_out, double* td_errors, Workspace& ws);

// Serial reference implementations used by the tests and the benchmark; they
// produce bit-identical results to the OpenMP kernels above.
namespace reference {
void forward_batch(const Network& net, const double* states, int batch, double* q_out,
                   Workspace& ws);
double train_batch(const Network& net, const double* states, const int* actions,
                   const double* targets, const double* weights, int batch,
                   std::vector<double>& grad_out, double* td_errors, Workspace& ws);
}  // namespace reference

// Adaptive moment estimation over the flat parameter vector.
struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long t = 0;
    std::vector<double> m;
    std::vector<double> v;

    AdamState(int param_count, double lr);
    void step(Network& net, const std::vector<double>& grads);
};

}  // namespace seal::mlp
