// Monte Carlo trial runner, metric estimators and empirical verification harnesses.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "qcd/detectors.hpp"
#include "qcd/distributions.hpp"
#include "qcd/likelihood.hpp"

namespace qcd {

inline constexpr std::uint64_t kDefaultHorizon = 100000;

struct ExperimentConfig {
    ModelTriple models;
    ChangePointPrior prior = ChangePointPrior::no_change();
    std::vector<DetectorKind> kinds{DetectorKind::Cusum, DetectorKind::ShiryaevRoberts};
    double log_threshold = 0.0;
    std::uint64_t n_trials = 10000;
    std::uint64_t horizon = kDefaultHorizon;
    std::uint64_t master_seed = 0;
    /// Worker threads; 0 selects std::thread::hardware_concurrency(). Results do
    /// not depend on this value.
    unsigned workers = 0;

    /// Throws std::invalid_argument for missing models, empty kinds, zero
    /// trials/horizon or a non-finite threshold.
    void validate() const;
};

/// One simulated trial. theta is std::nullopt for "no change"; a tau of
/// std::nullopt means the detector was censored at the horizon.
struct RunRecord {
    ChangePoint theta;
    std::map<DetectorKind, StopTime> tau;
    std::uint64_t trial_index = 0;

    bool operator==(const RunRecord&) const = default;
};

/// SplitMix64 finalizer over (master_seed, stream, trial_index).
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index,
                         std::uint64_t stream = 0) noexcept;

/// Runs fn(i) for i in [0, count) on `workers` threads (0 = hardware concurrency).
void parallel_for(std::uint64_t count, unsigned workers,
                  const std::function<void(std::uint64_t)>& fn);

/// Deterministic in (master_seed, trial_index). Throws std::out_of_range when
/// trial_index >= n_trials.
RunRecord run_trial(const ExperimentConfig& config, std::uint64_t trial_index);

/// All trials of the config, ordered by trial index.
std::vector<RunRecord> run_trials(const ExperimentConfig& config);

/// A point estimate with its standard error. value is empty when no trial
/// qualified (the metric is unavailable, not zero).
struct Estimate {
    std::optional<double> value;
    double std_error = 0.0;
    std::uint64_t count = 0;
    /// Censored trials exist, so the value underestimates the true mean.
    bool lower_bound = false;
};

struct MetricsEstimate {
    Estimate add;
    Estimate pfa;
    Estimate arl;
    std::uint64_t n_trials = 0;
    std::uint64_t n_detections = 0;
    std::uint64_t n_false_alarms = 0;
    std::uint64_t n_censored = 0;      ///< censored trials in the prior batch
    std::uint64_t n_arl_censored = 0;  ///< censored trials in the no-change batch
};

/// Sample mean and standard error; an empty input yields an unavailable estimate.
Estimate mean_estimate(std::span<const double> values);

/// ADD and PFA from prior-sampled trials, ARL from no-change trials. A censored
/// no-change trial contributes the horizon to the ARL and marks it a lower bound.
MetricsEstimate summarize(DetectorKind kind, std::span<const RunRecord> prior_batch,
                          std::span<const RunRecord> no_change_batch, std::uint64_t horizon);

/// Same trial count and seeds as `config`, but with the no-change prior and a
/// separate random stream.
ExperimentConfig no_change_batch_config(const ExperimentConfig& config);

std::map<DetectorKind, MetricsEstimate> estimate_metrics(const ExperimentConfig& config);

struct SweepPoint {
    double log_threshold;
    std::map<DetectorKind, MetricsEstimate> metrics;
};

/// One estimate_metrics run per threshold. Every threshold reuses the same
/// per-trial random streams. Throws std::invalid_argument unless the thresholds
/// are strictly increasing.
std::vector<SweepPoint> add_vs_logA_sweep(const ExperimentConfig& base,
                                          std::span<const double> log_thresholds);

struct LineFit {
    double slope;
    double intercept;
};

/// Ordinary least squares. Throws std::invalid_argument with fewer than two
/// distinct x values.
LineFit fit_slope(std::span<const std::pair<double, double>> points);

struct MartingaleCheck {
    double mean;
    double std_error;
};

/// Mean and standard error of S~_n - n with every sample drawn from f0.
/// Requires n >= 1 and n_trials >= 1000.
MartingaleCheck martingale_check(const ObservationModel& f0, const ObservationModel& f1_assumed,
                                 std::uint64_t n, std::uint64_t n_trials, std::uint64_t seed,
                                 unsigned workers = 0);

/// E[S~_n] under i.i.d. Bernoulli f0 data, by summing over all 2^n sequences.
/// Requires 1 <= n <= 24.
double sr_expectation_by_enumeration(const BernoulliModel& f0, const BernoulliModel& f1_assumed,
                                     unsigned n);

}  // namespace qcd
