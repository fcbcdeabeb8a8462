#include "seal/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace seal::mlp {

namespace {

std::vector<LayerShape> layout(int input_dim, const std::vector<int>& hidden, int output_dim,
                               int* total) {
    std::vector<int> widths = hidden;
    widths.push_back(output_dim);
    std::vector<LayerShape> layers;
    int offset = 0;
    int in = input_dim;
    for (int out : widths) {
        if (in <= 0 || out <= 0)
            throw std::invalid_argument("mlp: layer widths must be positive");
        LayerShape shape{in, out, offset, offset + in * out};
        offset += in * out + out;
        layers.push_back(shape);
        in = out;
    }
    *total = offset;
    return layers;
}

}  // namespace

int Network::act_stride() const {
    int stride = 0;
    for (const auto& layer : layers) stride += layer.out;
    return stride;
}

int Network::max_width() const {
    int width = input_dim;
    for (const auto& layer : layers) width = std::max(width, layer.out);
    return width;
}

Network make_network(int input_dim, const std::vector<int>& hidden, int output_dim) {
    Network net;
    net.input_dim = input_dim;
    net.output_dim = output_dim;
    net.hidden = hidden;
    int total = 0;
    net.layers = layout(input_dim, hidden, output_dim, &total);
    net.params.assign(total, 0.0);
    return net;
}

Network make_network(int input_dim, const std::vector<int>& hidden, int output_dim, Rng& rng) {
    Network net = make_network(input_dim, hidden, output_dim);
    for (const auto& layer : net.layers) {
        const double bound = std::sqrt(6.0 / (layer.in + layer.out));
        double* w = net.params.data() + layer.w_offset;
        for (int i = 0; i < layer.in * layer.out; ++i) w[i] = rng.uniform(-bound, bound);
    }
    return net;
}

double huber(double delta) {
    const double a = std::fabs(delta);
    return a <= 1.0 ? 0.5 * delta * delta : a - 0.5;
}

int argmax(std::span<const double> values) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

namespace {

// Forward pass of one sample; writes every layer's activations into acts
// (act_stride doubles). The final block holds the Q-values.
void forward_sample(const Network& net, const double* x, double* acts) {
    const double* in = x;
    double* a = acts;
    const std::size_t last = net.layers.size() - 1;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const LayerShape& shape = net.layers[l];
        const double* w = net.params.data() + shape.w_offset;
        const double* b = net.params.data() + shape.b_offset;
        for (int o = 0; o < shape.out; ++o) {
            const double* row = w + static_cast<std::size_t>(o) * shape.in;
            double acc = b[o];
            for (int i = 0; i < shape.in; ++i) acc += row[i] * in[i];
            a[o] = (l == last || acc > 0.0) ? acc : 0.0;
        }
        in = a;
        a += shape.out;
    }
}

// Backward pass of one sample given d(loss)/d(Q[action]) = coeff. Writes the
// sample's full gradient (every parameter exactly once, so no pre-zeroing).
// delta must hold 2 * max_width doubles.
void backward_sample(const Network& net, const double* x, const double* acts, int action,
                     double coeff, double* grad, double* delta) {
    const int n_layers = static_cast<int>(net.layers.size());
    double* cur = delta;
    double* prev = delta + net.max_width();

    const LayerShape& out_shape = net.layers[n_layers - 1];
    for (int o = 0; o < out_shape.out; ++o) cur[o] = o == action ? coeff : 0.0;

    // Offsets of each layer's activation block within acts.
    int act_offset = net.act_stride();
    for (int l = n_layers - 1; l >= 0; --l) {
        const LayerShape& shape = net.layers[l];
        act_offset -= shape.out;
        const double* in_act = l == 0 ? x : acts + act_offset - net.layers[l - 1].out;
        const double* w = net.params.data() + shape.w_offset;
        double* gw = grad + shape.w_offset;
        double* gb = grad + shape.b_offset;
        for (int o = 0; o < shape.out; ++o) {
            const double d = cur[o];
            gb[o] = d;
            double* grow = gw + static_cast<std::size_t>(o) * shape.in;
            for (int i = 0; i < shape.in; ++i) grow[i] = d * in_act[i];
        }
        if (l == 0) break;
        // Propagate through the weights, then through the rectifier of the
        // previous layer (its activation is positive iff the unit was live).
        for (int i = 0; i < shape.in; ++i) {
            double acc = 0.0;
            for (int o = 0; o < shape.out; ++o)
                acc += w[static_cast<std::size_t>(o) * shape.in + i] * cur[o];
            prev[i] = in_act[i] > 0.0 ? acc : 0.0;
        }
        std::swap(cur, prev);
    }
}

void ensure_forward(const Network& net, int batch, Workspace& ws) {
    ws.acts.resize(static_cast<std::size_t>(batch) * net.act_stride());
    ws.loss_term.resize(batch);
}

}  // namespace

void forward_batch(const Network& net, const double* states, int batch, double* q_out,
                   Workspace& ws) {
    ensure_forward(net, batch, ws);
    const int stride = net.act_stride();
    const int out_dim = net.output_dim;
    const int q_offset = stride - out_dim;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < batch; ++i) {
        double* acts = ws.acts.data() + static_cast<std::size_t>(i) * stride;
        forward_sample(net, states + static_cast<std::size_t>(i) * net.input_dim, acts);
        std::memcpy(q_out + static_cast<std::size_t>(i) * out_dim, acts + q_offset,
                    sizeof(double) * out_dim);
    }
}

double loss_batch(const Network& net, const double* states, const int* actions,
                  const double* targets, const double* weights, int batch, Workspace& ws) {
    ensure_forward(net, batch, ws);
    const int stride = net.act_stride();
    const int q_offset = stride - net.output_dim;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < batch; ++i) {
        double* acts = ws.acts.data() + static_cast<std::size_t>(i) * stride;
        forward_sample(net, states + static_cast<std::size_t>(i) * net.input_dim, acts);
        const double delta = acts[q_offset + actions[i]] - targets[i];
        ws.loss_term[i] = weights[i] * huber(delta);
    }
    double loss = 0.0;
    for (int i = 0; i < batch; ++i) loss += ws.loss_term[i];
    return loss / batch;
}

double train_batch(const Network& net, const double* states, const int* actions,
                   const double* targets, const double* weights, int batch,
                   std::vector<double>& grad_out, double* td_errors, Workspace& ws) {
    ensure_forward(net, batch, ws);
    const int stride = net.act_stride();
    const int q_offset = stride - net.output_dim;
    const int n_params = net.param_count();
    ws.grad_buf.resize(static_cast<std::size_t>(batch) * n_params);
#ifdef _OPENMP
    const int n_threads = omp_get_max_threads();
#else
    const int n_threads = 1;
#endif
    ws.delta.resize(static_cast<std::size_t>(2) * net.max_width() * n_threads);

#pragma omp parallel for schedule(static)
    for (int i = 0; i < batch; ++i) {
#ifdef _OPENMP
        double* delta = ws.delta.data() + static_cast<std::size_t>(2) * net.max_width() *
                                              omp_get_thread_num();
#else
        double* delta = ws.delta.data();
#endif
        const double* x = states + static_cast<std::size_t>(i) * net.input_dim;
        double* acts = ws.acts.data() + static_cast<std::size_t>(i) * stride;
        forward_sample(net, x, acts);
        const double err = acts[q_offset + actions[i]] - targets[i];
        td_errors[i] = err;
        ws.loss_term[i] = weights[i] * huber(err);
        const double coeff = weights[i] * std::clamp(err, -1.0, 1.0) / batch;
        backward_sample(net, x, acts, actions[i], coeff,
                        ws.grad_buf.data() + static_cast<std::size_t>(i) * n_params, delta);
    }

    // Ordered reduction keeps the result independent of the thread count.
    grad_out.assign(n_params, 0.0);
    for (int i = 0; i < batch; ++i) {
        const double* g = ws.grad_buf.data() + static_cast<std::size_t>(i) * n_params;
        for (int p = 0; p < n_params; ++p) grad_out[p] += g[p];
    }
    double loss = 0.0;
    for (int i = 0; i < batch; ++i) loss += ws.loss_term[i];
    return loss / batch;
}

namespace reference {

void forward_batch(const Network& net, const double* states, int batch, double* q_out,
                   Workspace& ws) {
    ensure_forward(net, batch, ws);
    const int stride = net.act_stride();
    const int out_dim = net.output_dim;
    const int q_offset = stride - out_dim;
    for (int i = 0; i < batch; ++i) {
        double* acts = ws.acts.data() + static_cast<std::size_t>(i) * stride;
        forward_sample(net, states + static_cast<std::size_t>(i) * net.input_dim, acts);
        std::memcpy(q_out + static_cast<std::size_t>(i) * out_dim, acts + q_offset,
                    sizeof(double) * out_dim);
    }
}

double train_batch(const Network& net, const double* states, const int* actions,
                   const double* targets, const double* weights, int batch,
                   std::vector<double>& grad_out, double* td_errors, Workspace& ws) {
    ensure_forward(net, batch, ws);
    const int stride = net.act_stride();
    const int q_offset = stride - net.output_dim;
    const int n_params = net.param_count();
    ws.delta.resize(static_cast<std::size_t>(2) * net.max_width());
    ws.grad_buf.resize(n_params);

    grad_out.assign(n_params, 0.0);
    double loss = 0.0;
    for (int i = 0; i < batch; ++i) {
        const double* x = states + static_cast<std::size_t>(i) * net.input_dim;
        double* acts = ws.acts.data() + static_cast<std::size_t>(i) * stride;
        forward_sample(net, x, acts);
        const double err = acts[q_offset + actions[i]] - targets[i];
        td_errors[i] = err;
        loss += weights[i] * huber(err);
        const double coeff = weights[i] * std::clamp(err, -1.0, 1.0) / batch;
        backward_sample(net, x, acts, actions[i], coeff, ws.grad_buf.data(), ws.delta.data());
        for (int p = 0; p < n_params; ++p) grad_out[p] += ws.grad_buf[p];
    }
    return loss / batch;
}

}  // namespace reference

AdamState::AdamState(int param_count, double lr)
    : learning_rate(lr), m(param_count, 0.0), v(param_count, 0.0) {}

void AdamState::step(Network& net, const std::vector<double>& grads) {
    if (grads.size() != net.params.size() || m.size() != net.params.size())
        throw std::invalid_argument("AdamState::step: size mismatch");
    ++t;
    const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t p = 0; p < net.params.size(); ++p) {
        const double g = grads[p];
        m[p] = beta1 * m[p] + (1.0 - beta1) * g;
        v[p] = beta2 * v[p] + (1.0 - beta2) * g * g;
        const double m_hat = m[p] / bias1;
        const double v_hat = v[p] / bias2;
        net.params[p] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon);
    }
}

}  // namespace seal::mlp
