// Step-wise and cumulative log-likelihood ratios under model mismatch.
#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include "qcd/distributions.hpp"

namespace qcd {

/// Pre-change model, true post-change model, and the post-change model the
/// detector assumes. Passing the same object for f1_true and f1_assumed gives
/// the matched (classical) configuration.
struct ModelTriple {
    std::shared_ptr<const ObservationModel> f0;
    std::shared_ptr<const ObservationModel> f1_true;
    std::shared_ptr<const ObservationModel> f1_assumed;

    static ModelTriple matched(std::shared_ptr<const ObservationModel> f0,
                               std::shared_ptr<const ObservationModel> f1);
    bool is_matched() const noexcept { return f1_true == f1_assumed; }
};

/// log_lambda = log f1_true - log f0, log_lambda_tilde = log f1_assumed - log f0,
/// log_lambda_11 = log f1_true - log f1_assumed.
/// log_lambda == log_lambda_tilde + log_lambda_11 up to rounding.
struct LogRatioTriple {
    double log_lambda = 0.0;
    double log_lambda_tilde = 0.0;
    double log_lambda_11 = 0.0;

    LogRatioTriple& operator+=(const LogRatioTriple& other) noexcept {
        log_lambda += other.log_lambda;
        log_lambda_tilde += other.log_lambda_tilde;
        log_lambda_11 += other.log_lambda_11;
        return *this;
    }
};

LogRatioTriple log_ratio_step(const ModelTriple& models, const Observation& x, History history);

/// Log of the products over i = k..n of the step ratios, where n = xs.size() and
/// k is 1-based. Each step sees xs[0..i-1) as its history.
/// Throws std::out_of_range unless 1 <= k <= n.
LogRatioTriple cumulative_log_ratio(const ModelTriple& models, std::span<const Observation> xs,
                                    std::size_t k);

}  // namespace qcd
