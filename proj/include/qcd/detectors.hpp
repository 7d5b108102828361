// CUSUM and Shiryaev-Roberts statistics as log-domain state machines.
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>

namespace qcd {

enum class DetectorKind { Cusum, ShiryaevRoberts };

inline constexpr DetectorKind kAllDetectorKinds[] = {DetectorKind::Cusum,
                                                    DetectorKind::ShiryaevRoberts};

std::string_view to_string(DetectorKind kind) noexcept;

/// Log of C_n (CUSUM) or S_n (SR) after n updates. log_stat is -inf exactly
/// when n == 0, which encodes C_0 = S_0 = 0.
struct DetectorState {
    DetectorKind kind = DetectorKind::Cusum;
    double log_stat = -std::numeric_limits<double>::infinity();
    std::uint64_t n = 0;
};

/// Stop at the first n with log_stat >= log_threshold (log A).
struct StoppingRule {
    double log_threshold;

    bool stops(const DetectorState& state) const noexcept {
        return state.log_stat >= log_threshold;
    }
};

/// Stopping time; std::nullopt means censored at the horizon.
using StopTime = std::optional<std::uint64_t>;

/// log(1 + e^z) without overflow; log1p_exp(-inf) == 0.
double log1p_exp(double z) noexcept;

DetectorState detector_init(DetectorKind kind) noexcept;

/// CUSUM: log C' = max(0, log C) + l.  SR: log S' = log(1 + S) + l.
/// Throws std::invalid_argument if log_lambda_tilde is not finite.
DetectorState detector_update(const DetectorState& state, double log_lambda_tilde);

/// Definitional value of the statistic after the whole list: the max (CUSUM) or
/// log-sum-exp (SR) over k of the partial sums log_ratios[k..n].
/// Throws std::invalid_argument for an empty list.
double brute_force_stat(DetectorKind kind, std::span<const double> log_ratios);

struct StoppingOutcome {
    StopTime tau;
    DetectorState final_state;
};

/// Feeds the stream into a fresh detector until the rule fires or `horizon`
/// updates have been made. Throws std::invalid_argument for horizon == 0 or a
/// non-finite threshold, and std::out_of_range if the stream runs out first.
StoppingOutcome run_to_stopping(DetectorKind kind, const StoppingRule& rule,
                                std::span<const double> log_ratio_stream, std::uint64_t horizon);

}  // namespace qcd
