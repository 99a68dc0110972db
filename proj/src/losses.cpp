// Copyright Contributors to the fastray project
// SPDX-License-Identifier: Apache-2.0

#include "fastray/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fastray {

namespace {

void checkProb(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("probability " + std::to_string(p) + " outside (0, 1)");
    }
}

void checkLabel(int y) {
    if (y != 0 && y != 1) {
        throw std::invalid_argument("binary target must be 0 or 1");
    }
}

} // namespace

void LossWeights::validate() const {
    auto ok = [](double x) { return std::isfinite(x) && x >= 0.0; };
    if (!ok(beta_cls) || !ok(beta_loc) || !ok(beta_dir)) {
        throw std::invalid_argument("loss weights must be finite and non-negative");
    }
    for (double w : target_weights) {
        if (!ok(w)) {
            throw std::invalid_argument("target weights must be finite and non-negative");
        }
    }
    if (!ok(focal.alpha) || focal.alpha > 1.0 || !ok(focal.gamma)) {
        throw std::invalid_argument("focal alpha must be in [0, 1] and gamma >= 0");
    }
    if (!(smooth_l1_beta > 0.0)) {
        throw std::invalid_argument("smooth-L1 beta must be positive");
    }
}

void AnchorBatch::validate() const {
    if (cls_probs.size() != cls_targets.size()) {
        throw std::invalid_argument("cls_probs and cls_targets differ in length");
    }
    if (loc_residuals.size() != n_pos * kBoxTargets) {
        throw std::invalid_argument("loc_residuals must hold 9 values per positive anchor");
    }
    if (dir_logits.size() != n_pos || dir_targets.size() != n_pos) {
        throw std::invalid_argument("direction logits/targets must hold one value per positive anchor");
    }
}

double focalLoss(double p, int y, double alpha, double gamma) {
    checkProb(p);
    checkLabel(y);
    const double pt = y == 1 ? p : 1.0 - p;
    const double at = y == 1 ? alpha : 1.0 - alpha;
    return -at * std::pow(1.0 - pt, gamma) * std::log(pt);
}

double focalLossGrad(double p, int y, double alpha, double gamma) {
    checkProb(p);
    checkLabel(y);
    const double pt = y == 1 ? p : 1.0 - p;
    const double at = y == 1 ? alpha : 1.0 - alpha;
    const double q = 1.0 - pt;
    // d/dp_t of -a q^g log p_t
    double d_pt = -at * std::pow(q, gamma) / pt;
    if (gamma != 0.0) {
        d_pt += at * gamma * std::pow(q, gamma - 1.0) * std::log(pt);
    }
    return y == 1 ? d_pt : -d_pt;
}

double smoothL1(double x, double beta) {
    if (!(beta > 0.0)) {
        throw std::invalid_argument("smooth-L1 beta must be positive");
    }
    const double ax = std::abs(x);
    return ax < beta ? 0.5 * x * x / beta : ax - 0.5 * beta;
}

double smoothL1Grad(double x, double beta) {
    if (!(beta > 0.0)) {
        throw std::invalid_argument("smooth-L1 beta must be positive");
    }
    if (std::abs(x) < beta) {
        return x / beta;
    }
    return x > 0.0 ? 1.0 : -1.0;
}

double bceWithLogits(double logit, int y) {
    checkLabel(y);
    return std::max(logit, 0.0) - logit * y + std::log1p(std::exp(-std::abs(logit)));
}

double bceWithLogitsGrad(double logit, int y) {
    checkLabel(y);
    const double sig = logit >= 0.0 ? 1.0 / (1.0 + std::exp(-logit)) : std::exp(logit) / (1.0 + std::exp(logit));
    return sig - y;
}

LossBreakdown detectionLoss(const AnchorBatch &batch, const LossWeights &weights) {
    batch.validate();
    weights.validate();
    LossBreakdown out;
    if (batch.n_pos == 0) {
        return out;
    }
    for (std::size_t a = 0; a < batch.cls_probs.size(); ++a) {
        out.cls += focalLoss(batch.cls_probs[a], batch.cls_targets[a], weights.focal.alpha, weights.focal.gamma);
    }
    for (std::size_t a = 0; a < batch.n_pos; ++a) {
        for (std::size_t t = 0; t < kBoxTargets; ++t) {
            out.loc += weights.target_weights[t] * smoothL1(batch.loc_residuals[a * kBoxTargets + t], weights.smooth_l1_beta);
        }
        out.dir += bceWithLogits(batch.dir_logits[a], batch.dir_targets[a]);
    }
    out.total = (weights.beta_cls * out.cls + weights.beta_loc * out.loc + weights.beta_dir * out.dir) /
                static_cast<double>(batch.n_pos);
    return out;
}

LossGradients lossGradient(const AnchorBatch &batch, const LossWeights &weights) {
    batch.validate();
    weights.validate();
    LossGradients g;
    g.cls_probs.assign(batch.cls_probs.size(), 0.0);
    g.loc_residuals.assign(batch.loc_residuals.size(), 0.0);
    g.dir_logits.assign(batch.dir_logits.size(), 0.0);
    if (batch.n_pos == 0) {
        return g;
    }
    const double inv_n = 1.0 / static_cast<double>(batch.n_pos);
    for (std::size_t a = 0; a < batch.cls_probs.size(); ++a) {
        g.cls_probs[a] = weights.beta_cls * inv_n *
                         focalLossGrad(batch.cls_probs[a], batch.cls_targets[a], weights.focal.alpha, weights.focal.gamma);
    }
    for (std::size_t a = 0; a < batch.n_pos; ++a) {
        for (std::size_t t = 0; t < kBoxTargets; ++t) {
            const std::size_t i = a * kBoxTargets + t;
            g.loc_residuals[i] = weights.beta_loc * inv_n * weights.target_weights[t] *
                                 smoothL1Grad(batch.loc_residuals[i], weights.smooth_l1_beta);
        }
        g.dir_logits[a] = weights.beta_dir * inv_n * bceWithLogitsGrad(batch.dir_logits[a], batch.dir_targets[a]);
    }
    return g;
}

} // namespace fastray
