#ifndef RUD_MLP_HPP
#define RUD_MLP_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rud/linalg.hpp"

namespace rud {

// Flat view of all network parameters: per layer, the weight block
// (fan_in x fan_out, row-major over fan_in) followed by the bias block.
using ParameterVector = std::vector<double>;

enum class OutputActivation { identity, tanh_squash };

struct MlpWorkspace;

// Dense feedforward network with ReLU hidden units and manual
// backpropagation. Parameters live in one flat vector so optimizers and
// soft updates operate on plain arrays.
class Mlp {
  public:
    Mlp() = default;
    Mlp(std::vector<int> layer_sizes, OutputActivation out_act)
        : sizes_(std::move(layer_sizes)), out_act_(out_act) {
        if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
        for (int s : sizes_)
            if (s < 1) throw std::invalid_argument("Mlp: layer sizes must be positive");
        size_t total = 0;
        for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
            weight_offsets_.push_back(total);
            total += static_cast<size_t>(sizes_[l]) * sizes_[l + 1];
            bias_offsets_.push_back(total);
            total += static_cast<size_t>(sizes_[l + 1]);
        }
        params_.assign(total, 0.0);
    }

    const std::vector<int>& layer_sizes() const { return sizes_; }
    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
    size_t num_params() const { return params_.size(); }
    OutputActivation output_activation() const { return out_act_; }

    ParameterVector& params() { return params_; }
    const ParameterVector& params() const { return params_; }
    void set_params(const ParameterVector& p) {
        if (p.size() != params_.size()) throw std::invalid_argument("set_params: length mismatch");
        params_ = p;
    }

    bool same_architecture(const Mlp& other) const {
        return sizes_ == other.sizes_ && out_act_ == other.out_act_;
    }

    // weight(l) is fan_in x fan_out row-major: w[i*fan_out + j] connects
    // input i of layer l to output j.
    std::span<double> weight(int l) {
        return {params_.data() + weight_offsets_[l], static_cast<size_t>(sizes_[l]) * sizes_[l + 1]};
    }
    std::span<const double> weight(int l) const {
        return {params_.data() + weight_offsets_[l], static_cast<size_t>(sizes_[l]) * sizes_[l + 1]};
    }
    std::span<double> bias(int l) { return {params_.data() + bias_offsets_[l], static_cast<size_t>(sizes_[l + 1])}; }
    std::span<const double> bias(int l) const {
        return {params_.data() + bias_offsets_[l], static_cast<size_t>(sizes_[l + 1])};
    }

    // Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer.
    void init_weights(std::mt19937_64& rng) {
        for (int l = 0; l < num_layers(); ++l) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
            std::uniform_real_distribution<double> dist(-bound, bound);
            for (double& w : weight(l)) w = dist(rng);
            for (double& b : bias(l)) b = dist(rng);
        }
    }

    std::vector<double> forward(const std::vector<double>& input) const {
        if (static_cast<int>(input.size()) != input_dim())
            throw std::invalid_argument("Mlp::forward: input dimension mismatch");
        std::vector<double> cur = input;
        std::vector<double> next;
        for (int l = 0; l < num_layers(); ++l) {
            const int out = sizes_[l + 1];
            next.assign(bias(l).begin(), bias(l).end());
            const double* w = weight(l).data();
            for (int i = 0; i < sizes_[l]; ++i) {
                const double xi = cur[i];
                const double* wi = w + static_cast<size_t>(i) * out;
                for (int j = 0; j < out; ++j) next[j] += xi * wi[j];
            }
            apply_activation(next.data(), out, l);
            cur.swap(next);
        }
        return cur;
    }

    // Batched forward: X is batch x input_dim. When a workspace is given
    // the per-layer activations are retained for backward_batch.
    Matrix forward_batch(const Matrix& X, MlpWorkspace* ws = nullptr) const;

    // Gradient of sum_j output_grad[j] * output_j with respect to all
    // parameters and to the input. Recomputes the forward pass internally.
    std::pair<ParameterVector, std::vector<double>> backward(const std::vector<double>& input,
                                                             const std::vector<double>& output_grad) const;

    // Batched backward from a workspace filled by forward_batch. Writes the
    // parameter gradient (summed over the batch) into grad, which must have
    // num_params() entries. Optionally produces per-sample input gradients.
    void backward_batch(const MlpWorkspace& ws, const Matrix& output_grad, ParameterVector& grad,
                        Matrix* input_grad = nullptr, bool want_param_grad = true) const;

  private:
    void apply_activation(double* v, int n, int layer) const {
        if (layer + 1 < num_layers()) {
            for (int j = 0; j < n; ++j) v[j] = v[j] > 0.0 ? v[j] : 0.0;
        } else if (out_act_ == OutputActivation::tanh_squash) {
            for (int j = 0; j < n; ++j) v[j] = std::tanh(v[j]);
        }
    }

    std::vector<int> sizes_;
    OutputActivation out_act_ = OutputActivation::identity;
    ParameterVector params_;
    std::vector<size_t> weight_offsets_;
    std::vector<size_t> bias_offsets_;

    friend struct MlpWorkspace;
};

// Holds the input plus post-activation outputs of every layer for one
// batched forward pass, reused across training steps to avoid reallocation.
struct MlpWorkspace {
    std::vector<Matrix> activations;  // activations[0] = input copy
    std::vector<Matrix> deltas;       // scratch for backward
};

inline Matrix Mlp::forward_batch(const Matrix& X, MlpWorkspace* ws) const {
    if (X.cols != input_dim()) throw std::invalid_argument("Mlp::forward_batch: input dimension mismatch");
    const int B = X.rows;
    if (ws) {
        ws->activations.resize(static_cast<size_t>(num_layers()) + 1);
        ws->activations[0] = X;
    }
    Matrix cur = X;
    for (int l = 0; l < num_layers(); ++l) {
        const int in = sizes_[l];
        const int out = sizes_[l + 1];
        Matrix next(B, out);
        const double* bptr = bias(l).data();
        const double* w = weight(l).data();
        for (int b = 0; b < B; ++b) {
            double* nb = next.row(b);
            for (int j = 0; j < out; ++j) nb[j] = bptr[j];
            const double* xb = cur.row(b);
            for (int i = 0; i < in; ++i) {
                const double xi = xb[i];
                const double* wi = w + static_cast<size_t>(i) * out;
                for (int j = 0; j < out; ++j) nb[j] += xi * wi[j];
            }
            apply_activation(nb, out, l);
        }
        if (ws) ws->activations[static_cast<size_t>(l) + 1] = next;
        cur = std::move(next);
    }
    return cur;
}

inline void Mlp::backward_batch(const MlpWorkspace& ws, const Matrix& output_grad, ParameterVector& grad,
                                Matrix* input_grad, bool want_param_grad) const {
    const int L = num_layers();
    if (ws.activations.size() != static_cast<size_t>(L) + 1)
        throw std::invalid_argument("Mlp::backward_batch: workspace not filled by forward_batch");
    const int B = ws.activations[0].rows;
    if (output_grad.rows != B || output_grad.cols != output_dim())
        throw std::invalid_argument("Mlp::backward_batch: output_grad shape mismatch");
    if (want_param_grad && grad.size() != params_.size())
        throw std::invalid_argument("Mlp::backward_batch: grad length mismatch");

    // delta starts as dL/d(post-activation output), converted layer by layer
    // to dL/d(pre-activation) via the activation derivative.
    Matrix delta = output_grad;
    for (int l = L - 1; l >= 0; --l) {
        const int in = sizes_[l];
        const int out = sizes_[l + 1];
        const Matrix& post = ws.activations[static_cast<size_t>(l) + 1];
        if (l == L - 1 && out_act_ == OutputActivation::tanh_squash) {
            for (int b = 0; b < B; ++b)
                for (int j = 0; j < out; ++j) delta(b, j) *= 1.0 - post(b, j) * post(b, j);
        } else if (l < L - 1) {
            for (int b = 0; b < B; ++b)
                for (int j = 0; j < out; ++j)
                    if (post(b, j) <= 0.0) delta(b, j) = 0.0;
        }

        const Matrix& prev = ws.activations[static_cast<size_t>(l)];
        if (want_param_grad) {
            double* gw = grad.data() + weight_offsets_[l];
            double* gb = grad.data() + bias_offsets_[l];
            for (int b = 0; b < B; ++b) {
                const double* db = delta.row(b);
                const double* pb = prev.row(b);
                for (int j = 0; j < out; ++j) gb[j] += db[j];
                for (int i = 0; i < in; ++i) {
                    const double pi = pb[i];
                    double* gwi = gw + static_cast<size_t>(i) * out;
                    for (int j = 0; j < out; ++j) gwi[j] += pi * db[j];
                }
            }
        }

        const bool need_input = l > 0 || input_grad != nullptr;
        if (!need_input) break;
        Matrix prev_delta(B, in);
        const double* w = weight(l).data();
        for (int b = 0; b < B; ++b) {
            const double* db = delta.row(b);
            double* pd = prev_delta.row(b);
            for (int i = 0; i < in; ++i) {
                const double* wi = w + static_cast<size_t>(i) * out;
                double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
                int j = 0;
                for (; j + 4 <= out; j += 4) {
                    s0 += wi[j] * db[j];
                    s1 += wi[j + 1] * db[j + 1];
                    s2 += wi[j + 2] * db[j + 2];
                    s3 += wi[j + 3] * db[j + 3];
                }
                for (; j < out; ++j) s0 += wi[j] * db[j];
                pd[i] = s0 + s1 + s2 + s3;
            }
        }
        delta = std::move(prev_delta);
    }
    if (input_grad) *input_grad = std::move(delta);
}

inline std::pair<ParameterVector, std::vector<double>> Mlp::backward(
    const std::vector<double>& input, const std::vector<double>& output_grad) const {
    if (static_cast<int>(input.size()) != input_dim())
        throw std::invalid_argument("Mlp::backward: input dimension mismatch");
    if (static_cast<int>(output_grad.size()) != output_dim())
        throw std::invalid_argument("Mlp::backward: output_grad dimension mismatch");
    Matrix X(1, input_dim());
    for (int i = 0; i < input_dim(); ++i) X(0, i) = input[i];
    Matrix G(1, output_dim());
    for (int j = 0; j < output_dim(); ++j) G(0, j) = output_grad[j];
    MlpWorkspace ws;
    forward_batch(X, &ws);
    ParameterVector grad(num_params(), 0.0);
    Matrix in_grad;
    backward_batch(ws, G, grad, &in_grad);
    return {std::move(grad), std::vector<double>(in_grad.data.begin(), in_grad.data.end())};
}

// Adam with bias correction.
struct AdamState {
    long step = 0;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double learning_rate = 3e-4;

    AdamState() = default;
    AdamState(size_t n, double lr) : first_moment(n, 0.0), second_moment(n, 0.0), learning_rate(lr) {}
};

inline void adam_step(AdamState& state, ParameterVector& params, const ParameterVector& grad) {
    if (params.size() != grad.size() || params.size() != state.first_moment.size())
        throw std::invalid_argument("adam_step: length mismatch");
    for (size_t i = 0; i < grad.size(); ++i)
        if (!std::isfinite(grad[i]))
            throw std::runtime_error("adam_step: non-finite gradient at index " + std::to_string(i));
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        double& m = state.first_moment[i];
        double& v = state.second_moment[i];
        m = state.beta1 * m + (1.0 - state.beta1) * grad[i];
        v = state.beta2 * v + (1.0 - state.beta2) * grad[i] * grad[i];
        params[i] -= state.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + state.epsilon);
    }
}

}  // namespace rud

#endif
