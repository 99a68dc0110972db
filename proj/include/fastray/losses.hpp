// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0
//
// Anchor-based detection loss:
//   total = (b_cls * L_cls + b_loc * L_loc + b_dir * L_dir) / N_pos
// with focal classification, per-target weighted smooth-L1 box regression and
// binary cross-entropy on direction logits, plus analytic gradients.

#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace fastray {

/// Regression targets per positive anchor: x, y, z, w, h, l, yaw, vx, vy.
inline constexpr std::size_t kBoxTargets = 9;

struct FocalParams {
    double alpha = 0.25;
    double gamma = 2.0;
};

struct LossWeights {
    double beta_cls = 1.0;
    double beta_loc = 0.8;
    double beta_dir = 0.8;
    std::array<double, kBoxTargets> target_weights{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.2, 0.2};
    FocalParams focal;
    double smooth_l1_beta = 1.0;

    void validate() const;
};

/// Classification covers every anchor; localization and direction cover the
/// positives only, so loc_residuals has n_pos * 9 entries and dir_* n_pos.
struct AnchorBatch {
    std::size_t n_pos = 0;
    std::vector<double> cls_probs;
    std::vector<int> cls_targets;
    std::vector<double> loc_residuals;
    std::vector<double> dir_logits;
    std::vector<int> dir_targets;

    void validate() const;
};

struct LossBreakdown {
    double total = 0.0;
    double cls = 0.0; // unweighted sums
    double loc = 0.0;
    double dir = 0.0;
};

struct LossGradients {
    std::vector<double> cls_probs;
    std::vector<double> loc_residuals;
    std::vector<double> dir_logits;
};

/// -alpha_t * (1 - p_t)^gamma * log(p_t). Throws if p is outside (0, 1).
double focalLoss(double p, int y, double alpha = 0.25, double gamma = 2.0);
double focalLossGrad(double p, int y, double alpha = 0.25, double gamma = 2.0);

/// 0.5 x^2 / beta inside |x| < beta, |x| - 0.5 beta outside. Throws on beta <= 0.
double smoothL1(double x, double beta = 1.0);
double smoothL1Grad(double x, double beta = 1.0);

/// Binary cross-entropy on a logit, evaluated stably.
double bceWithLogits(double logit, int y);
double bceWithLogitsGrad(double logit, int y);

/// Zero everywhere when n_pos == 0. Sums run in anchor order.
LossBreakdown detectionLoss(const AnchorBatch &batch, const LossWeights &weights = {});

/// d total / d (cls_probs, loc_residuals, dir_logits).
LossGradients lossGradient(const AnchorBatch &batch, const LossWeights &weights = {});

} // namespace fastray
