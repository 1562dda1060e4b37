#include "hfedsn/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hfedsn {

namespace {

// Per-layer output of one sample, plus pooling argmax indices for backward.
struct Tape {
    std::vector<double> out;
    std::vector<int> argmax;
};

void conv_forward(const Layer& l, std::span<const double> params,
                  const std::vector<double>& in, std::vector<double>& out) {
    const int C = l.in_channels, H = l.in_shape.height, W = l.in_shape.width;
    const int OC = l.out_channels;
    const double* weights = params.data() + l.param_offset;
    const double* bias = weights + l.weight_count;
    out.assign(static_cast<std::size_t>(OC) * H * W, 0.0);
    for (int oc = 0; oc < OC; ++oc) {
        double* out_plane = out.data() + static_cast<std::size_t>(oc) * H * W;
        for (int i = 0; i < H * W; ++i) out_plane[i] = bias[oc];
        for (int ic = 0; ic < C; ++ic) {
            const double* in_plane = in.data() + static_cast<std::size_t>(ic) * H * W;
            const double* k = weights + (static_cast<std::size_t>(oc) * C + ic) * 9;
            for (int y = 0; y < H; ++y) {
                for (int x = 0; x < W; ++x) {
                    double acc = 0.0;
                    for (int ky = 0; ky < 3; ++ky) {
                        int iy = y + ky - 1;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            int ix = x + kx - 1;
                            if (ix < 0 || ix >= W) continue;
                            acc += k[ky * 3 + kx] * in_plane[iy * W + ix];
                        }
                    }
                    out_plane[y * W + x] += acc;
                }
            }
        }
    }
    if (l.relu_after) {
        for (double& v : out) v = std::max(v, 0.0);
    }
}

void conv_backward(const Layer& l, std::span<const double> params,
                   const std::vector<double>& in, const std::vector<double>& out,
                   std::vector<double>& d_out, std::vector<double>& d_in,
                   std::vector<double>& param_grad) {
    const int C = l.in_channels, H = l.in_shape.height, W = l.in_shape.width;
    const int OC = l.out_channels;
    if (l.relu_after) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (out[i] <= 0.0) d_out[i] = 0.0;
        }
    }
    const double* weights = params.data() + l.param_offset;
    double* d_weights = param_grad.data() + l.param_offset;
    double* d_bias = d_weights + l.weight_count;
    d_in.assign(in.size(), 0.0);
    for (int oc = 0; oc < OC; ++oc) {
        const double* dout_plane = d_out.data() + static_cast<std::size_t>(oc) * H * W;
        for (int i = 0; i < H * W; ++i) d_bias[oc] += dout_plane[i];
        for (int ic = 0; ic < C; ++ic) {
            const double* in_plane = in.data() + static_cast<std::size_t>(ic) * H * W;
            double* din_plane = d_in.data() + static_cast<std::size_t>(ic) * H * W;
            const double* k = weights + (static_cast<std::size_t>(oc) * C + ic) * 9;
            double* dk = d_weights + (static_cast<std::size_t>(oc) * C + ic) * 9;
            for (int y = 0; y < H; ++y) {
                for (int x = 0; x < W; ++x) {
                    double g = dout_plane[y * W + x];
                    if (g == 0.0) continue;
                    for (int ky = 0; ky < 3; ++ky) {
                        int iy = y + ky - 1;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            int ix = x + kx - 1;
                            if (ix < 0 || ix >= W) continue;
                            dk[ky * 3 + kx] += g * in_plane[iy * W + ix];
                            din_plane[iy * W + ix] += g * k[ky * 3 + kx];
                        }
                    }
                }
            }
        }
    }
}

void pool_forward(const Layer& l, const std::vector<double>& in, Tape& tape) {
    const int C = l.in_shape.channels, H = l.in_shape.height, W = l.in_shape.width;
    const int OH = l.out_shape.height, OW = l.out_shape.width;
    tape.out.assign(static_cast<std::size_t>(C) * OH * OW, 0.0);
    tape.argmax.assign(tape.out.size(), 0);
    for (int c = 0; c < C; ++c) {
        const double* in_plane = in.data() + static_cast<std::size_t>(c) * H * W;
        for (int y = 0; y < OH; ++y) {
            for (int x = 0; x < OW; ++x) {
                int best = (2 * y) * W + 2 * x;
                double best_v = in_plane[best];
                const int cand[3] = {(2 * y) * W + 2 * x + 1, (2 * y + 1) * W + 2 * x,
                                     (2 * y + 1) * W + 2 * x + 1};
                for (int idx : cand) {
                    if (in_plane[idx] > best_v) {
                        best_v = in_plane[idx];
                        best = idx;
                    }
                }
                std::size_t o = static_cast<std::size_t>(c) * OH * OW + y * OW + x;
                tape.out[o] = best_v;
                tape.argmax[o] = c * H * W + best;
            }
        }
    }
}

void pool_backward(const Tape& tape, const std::vector<double>& d_out,
                   std::size_t in_size, std::vector<double>& d_in) {
    d_in.assign(in_size, 0.0);
    for (std::size_t o = 0; o < d_out.size(); ++o) {
        d_in[tape.argmax[o]] += d_out[o];
    }
}

void dense_forward(const Layer& l, std::span<const double> params,
                   const std::vector<double>& in, std::vector<double>& out) {
    const double* weights = params.data() + l.param_offset;
    const double* bias = weights + l.weight_count;
    out.assign(l.out_dim, 0.0);
    for (int j = 0; j < l.out_dim; ++j) {
        const double* row = weights + static_cast<std::size_t>(j) * l.in_dim;
        double acc = bias[j];
        for (int i = 0; i < l.in_dim; ++i) acc += row[i] * in[i];
        out[j] = l.relu_after ? std::max(acc, 0.0) : acc;
    }
}

void dense_backward(const Layer& l, std::span<const double> params,
                    const std::vector<double>& in, const std::vector<double>& out,
                    std::vector<double>& d_out, std::vector<double>& d_in,
                    std::vector<double>& param_grad) {
    if (l.relu_after) {
        for (int j = 0; j < l.out_dim; ++j) {
            if (out[j] <= 0.0) d_out[j] = 0.0;
        }
    }
    const double* weights = params.data() + l.param_offset;
    double* d_weights = param_grad.data() + l.param_offset;
    double* d_bias = d_weights + l.weight_count;
    d_in.assign(l.in_dim, 0.0);
    for (int j = 0; j < l.out_dim; ++j) {
        double g = d_out[j];
        if (g == 0.0) continue;
        d_bias[j] += g;
        const double* row = weights + static_cast<std::size_t>(j) * l.in_dim;
        double* d_row = d_weights + static_cast<std::size_t>(j) * l.in_dim;
        for (int i = 0; i < l.in_dim; ++i) {
            d_row[i] += g * in[i];
            d_in[i] += g * row[i];
        }
    }
}

// Runs one sample through the network, filling one tape entry per layer.
void forward_sample(const ArchitectureSpec& arch, std::span<const double> params,
                    std::span<const double> input, std::vector<Tape>& tapes) {
    tapes.resize(arch.layers.size());
    std::vector<double> first(input.begin(), input.end());
    const std::vector<double>* cur = &first;
    for (std::size_t li = 0; li < arch.layers.size(); ++li) {
        const Layer& l = arch.layers[li];
        Tape& tape = tapes[li];
        switch (l.kind) {
            case LayerKind::Conv2d:
                conv_forward(l, params, *cur, tape.out);
                break;
            case LayerKind::MaxPool:
                pool_forward(l, *cur, tape);
                break;
            case LayerKind::Flatten:
                tape.out = *cur;
                break;
            case LayerKind::Dense:
                dense_forward(l, params, *cur, tape.out);
                break;
        }
        cur = &tape.out;
    }
}

// Mean cross-entropy of one sample from its logits; fills the logit gradient
// already scaled by the caller's weight.
double softmax_loss(std::span<const double> logits, int label, double grad_scale,
                    std::vector<double>& d_logits) {
    double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - m);
    double log_z = m + std::log(sum);
    d_logits.resize(logits.size());
    for (std::size_t j = 0; j < logits.size(); ++j) {
        double p = std::exp(logits[j] - m) / sum;
        d_logits[j] = p * grad_scale;
    }
    d_logits[label] -= grad_scale;
    return log_z - logits[label];
}

void check_batch(const ArchitectureSpec& arch, std::span<const double> params,
                 const Batch& batch) {
    if (params.size() != arch.param_count) {
        throw std::invalid_argument("parameter vector length " +
                                    std::to_string(params.size()) + " does not match " +
                                    std::to_string(arch.param_count));
    }
    if (batch.size() == 0) {
        throw std::invalid_argument("empty batch");
    }
    if (batch.inputs.size() != batch.size() * arch.input_shape.elems()) {
        throw std::invalid_argument("batch input length does not match sample count");
    }
    for (int label : batch.labels) {
        if (label < 0 || label >= arch.num_classes) {
            throw std::invalid_argument("label " + std::to_string(label) +
                                        " out of range");
        }
    }
}

}  // namespace

ForwardResult forward(const ArchitectureSpec& arch, std::span<const double> params,
                      const Batch& batch) {
    check_batch(arch, params, batch);
    const std::size_t in_elems = arch.input_shape.elems();
    ForwardResult result;
    result.logits.reserve(batch.size() * arch.num_classes);
    std::vector<Tape> tapes;
    std::vector<double> d_logits;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        forward_sample(arch, params,
                       std::span<const double>(batch.inputs).subspan(i * in_elems, in_elems),
                       tapes);
        const std::vector<double>& logits = tapes.back().out;
        result.loss += softmax_loss(logits, batch.labels[i], 0.0, d_logits);
        result.logits.insert(result.logits.end(), logits.begin(), logits.end());
    }
    result.loss /= static_cast<double>(batch.size());
    return result;
}

BackwardResult loss_and_param_grad(const ArchitectureSpec& arch,
                                   std::span<const double> params, const Batch& batch) {
    check_batch(arch, params, batch);
    const std::size_t in_elems = arch.input_shape.elems();
    BackwardResult result;
    result.param_grad.assign(arch.param_count, 0.0);
    const double scale = 1.0 / static_cast<double>(batch.size());
    std::vector<Tape> tapes;
    std::vector<double> d_cur, d_prev, input_copy;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        std::span<const double> input =
            std::span<const double>(batch.inputs).subspan(i * in_elems, in_elems);
        input_copy.assign(input.begin(), input.end());
        forward_sample(arch, params, input, tapes);
        result.loss += softmax_loss(tapes.back().out, batch.labels[i], scale, d_cur);
        for (int li = static_cast<int>(arch.layers.size()) - 1; li >= 0; --li) {
            const Layer& l = arch.layers[li];
            const std::vector<double>& in_act = li == 0 ? input_copy : tapes[li - 1].out;
            switch (l.kind) {
                case LayerKind::Conv2d:
                    conv_backward(l, params, in_act, tapes[li].out, d_cur, d_prev,
                                  result.param_grad);
                    break;
                case LayerKind::MaxPool:
                    pool_backward(tapes[li], d_cur, in_act.size(), d_prev);
                    break;
                case LayerKind::Flatten:
                    d_prev = d_cur;
                    break;
                case LayerKind::Dense:
                    dense_backward(l, params, in_act, tapes[li].out, d_cur, d_prev,
                                   result.param_grad);
                    break;
            }
            std::swap(d_cur, d_prev);
        }
    }
    result.loss *= scale;
    return result;
}

ScoreGradResult backward_score_grad(const ArchitectureSpec& arch, const ParameterVector& w_init,
                                    const ProbabilityMask& theta, const BinaryMask* mask,
                                    const Batch& batch, SteMode ste) {
    if (theta.size() != w_init.size()) {
        throw std::invalid_argument("theta length does not match parameter count");
    }
    std::vector<double> masked(w_init.size());
    if (mask != nullptr) {
        if (mask->size() != w_init.size()) {
            throw std::invalid_argument("mask length does not match parameter count");
        }
        for (std::size_t i = 0; i < masked.size(); ++i) {
            masked[i] = mask->get(i) ? w_init[i] : 0.0;
        }
    } else {
        for (std::size_t i = 0; i < masked.size(); ++i) {
            masked[i] = w_init[i] * theta.values[i];
        }
    }

    BackwardResult back = loss_and_param_grad(arch, masked, batch);
    ScoreGradResult result;
    result.loss = back.loss;
    result.score_grad.resize(w_init.size());
    for (std::size_t i = 0; i < w_init.size(); ++i) {
        double t = theta.values[i];
        double pass = ste == SteMode::ThetaScaled ? t : 1.0;
        result.score_grad[i] = back.param_grad[i] * w_init[i] * pass * t * (1.0 - t);
    }
    return result;
}

void sgd_step(ScoreMask& scores, std::span<const double> grad, double eta) {
    if (scores.values.size() != grad.size()) {
        throw std::invalid_argument("gradient length does not match score length");
    }
    for (std::size_t i = 0; i < grad.size(); ++i) {
        scores.values[i] -= eta * grad[i];
    }
}

}  // namespace hfedsn
