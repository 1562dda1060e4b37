#pragma once

#include <span>
#include <vector>

#include "hfedsn/architecture.hpp"
#include "hfedsn/masks.hpp"
#include "hfedsn/parameter_vector.hpp"

namespace hfedsn {

struct Batch {
    std::vector<double> inputs;  // size() * input elems, sample-major
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
};

struct ForwardResult {
    std::vector<double> logits;  // size() * num_classes
    double loss = 0.0;           // mean softmax cross-entropy
};

// Forward propagation through the network defined by `arch` using the flat
// parameter vector `params` (typically a masked view of w_init).
ForwardResult forward(const ArchitectureSpec& arch, std::span<const double> params,
                      const Batch& batch);

struct BackwardResult {
    double loss = 0.0;
    std::vector<double> param_grad;  // dL/dparams, mean over batch, length d
};

// Loss plus the gradient with respect to every network parameter.
BackwardResult loss_and_param_grad(const ArchitectureSpec& arch,
                                   std::span<const double> params, const Batch& batch);

// Straight-through handling of the Bernoulli sampling hop. Identity passes
// the upstream gradient unchanged; ThetaScaled multiplies it by theta (the
// literal reading of the estimator), kept behind this switch for comparison.
enum class SteMode { Identity, ThetaScaled };

struct ScoreGradResult {
    double loss = 0.0;
    std::vector<double> score_grad;  // dL/ds, length d
};

// Gradient of the loss with respect to the score mask via the chain
// dL/dw_masked .* w_init .* [STE] .* theta(1-theta). When `mask` is null the
// forward pass runs in deterministic relaxation (w .* theta instead of
// w .* m), which makes the analytic gradient exact and finite-difference
// checkable; the relaxed form is never used in simulation runs.
ScoreGradResult backward_score_grad(const ArchitectureSpec& arch, const ParameterVector& w_init,
                                    const ProbabilityMask& theta, const BinaryMask* mask,
                                    const Batch& batch, SteMode ste = SteMode::Identity);

// s <- s - eta * grad
void sgd_step(ScoreMask& scores, std::span<const double> grad, double eta);

}  // namespace hfedsn
