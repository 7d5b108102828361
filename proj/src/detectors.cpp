#include "qcd/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qcd {

std::string_view to_string(DetectorKind kind) noexcept {
    switch (kind) {
        case DetectorKind::Cusum: return "cusum";
        case DetectorKind::ShiryaevRoberts: return "sr";
    }
    return "unknown";
}

double log1p_exp(double z) noexcept {
    if (z <= 0.0) return std::log1p(std::exp(z));
    return z + std::log1p(std::exp(-z));
}

DetectorState detector_init(DetectorKind kind) noexcept { return DetectorState{kind}; }

DetectorState detector_update(const DetectorState& state, double log_lambda_tilde) {
    if (!std::isfinite(log_lambda_tilde)) {
        throw std::invalid_argument("detector_update: log-likelihood ratio is not finite");
    }
    DetectorState next = state;
    switch (state.kind) {
        case DetectorKind::Cusum:
            // max(0, -inf) = 0 gives C_1 = lambda_1.
            next.log_stat = std::max(0.0, state.log_stat) + log_lambda_tilde;
            break;
        case DetectorKind::ShiryaevRoberts:
            next.log_stat = log1p_exp(state.log_stat) + log_lambda_tilde;
            break;
    }
    ++next.n;
    return next;
}

double brute_force_stat(DetectorKind kind, std::span<const double> log_ratios) {
    if (log_ratios.empty()) throw std::invalid_argument("brute_force_stat: empty log-ratio list");
    const std::size_t n = log_ratios.size();
    std::vector<double> partial(n);
    for (std::size_t k = 0; k < n; ++k) {
        double sum = 0.0;
        for (std::size_t i = k; i < n; ++i) sum += log_ratios[i];
        partial[k] = sum;
    }
    const double top = *std::max_element(partial.begin(), partial.end());
    if (kind == DetectorKind::Cusum) return top;
    double acc = 0.0;
    for (double p : partial) acc += std::exp(p - top);
    return top + std::log(acc);
}

StoppingOutcome run_to_stopping(DetectorKind kind, const StoppingRule& rule,
                                std::span<const double> log_ratio_stream, std::uint64_t horizon) {
    if (horizon == 0) throw std::invalid_argument("run_to_stopping: horizon must be >= 1");
    if (!std::isfinite(rule.log_threshold)) {
        throw std::invalid_argument("run_to_stopping: threshold must be finite");
    }
    DetectorState state = detector_init(kind);
    while (state.n < horizon) {
        if (state.n >= log_ratio_stream.size()) {
            throw std::out_of_range("run_to_stopping: stream exhausted before stopping or horizon");
        }
        state = detector_update(state, log_ratio_stream[state.n]);
        if (rule.stops(state)) return {state.n, state};
    }
    return {std::nullopt, state};
}

}  // namespace qcd
