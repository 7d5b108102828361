#include "qcd/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace qcd {

namespace {

constexpr std::uint64_t kPriorStream = 0;
constexpr std::uint64_t kNoChangeStream = 1;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

unsigned resolve_workers(unsigned workers) {
    if (workers != 0) return workers;
    return std::max(1u, std::thread::hardware_concurrency());
}

RunRecord simulate(const ExperimentConfig& config, std::uint64_t trial_index, std::uint64_t stream) {
    Rng rng(trial_seed(config.master_seed, trial_index, stream));
    RunRecord record;
    record.trial_index = trial_index;
    record.theta = sample_change_point(config.prior, rng);

    const StoppingRule rule{config.log_threshold};
    std::vector<DetectorState> states;
    states.reserve(config.kinds.size());
    for (DetectorKind kind : config.kinds) {
        states.push_back(detector_init(kind));
        record.tau[kind] = std::nullopt;
    }
    std::vector<bool> stopped(states.size(), false);
    std::size_t active = states.size();

    const ModelTriple& models = config.models;
    std::vector<Observation> history;
    for (std::uint64_t n = 1; n <= config.horizon && active > 0; ++n) {
        const bool post_change = record.theta && n >= *record.theta;
        const ObservationModel& source = post_change ? *models.f1_true : *models.f0;
        const Observation x = source.sample(rng, history);
        const double log_ratio = log_ratio_step(models, x, history).log_lambda_tilde;
        history.push_back(x);
        for (std::size_t d = 0; d < states.size(); ++d) {
            if (stopped[d]) continue;
            states[d] = detector_update(states[d], log_ratio);
            if (rule.stops(states[d])) {
                stopped[d] = true;
                --active;
                record.tau[states[d].kind] = n;
            }
        }
    }
    return record;
}

std::vector<RunRecord> simulate_all(const ExperimentConfig& config, std::uint64_t stream) {
    config.validate();
    std::vector<RunRecord> records(config.n_trials);
    parallel_for(config.n_trials, config.workers,
                 [&](std::uint64_t i) { records[i] = simulate(config, i, stream); });
    return records;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!models.f0 || !models.f1_true || !models.f1_assumed) {
        throw std::invalid_argument("ExperimentConfig: all three models are required");
    }
    if (kinds.empty()) throw std::invalid_argument("ExperimentConfig: no detector kinds");
    if (n_trials == 0) throw std::invalid_argument("ExperimentConfig: n_trials must be >= 1");
    if (horizon == 0) throw std::invalid_argument("ExperimentConfig: horizon must be >= 1");
    if (!std::isfinite(log_threshold)) {
        throw std::invalid_argument("ExperimentConfig: log_threshold must be finite");
    }
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index,
                         std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(splitmix64(master_seed) ^ stream) ^ trial_index);
}

void parallel_for(std::uint64_t count, unsigned workers,
                  const std::function<void(std::uint64_t)>& fn) {
    const unsigned n_threads =
        static_cast<unsigned>(std::min<std::uint64_t>(resolve_workers(workers), count));
    if (n_threads <= 1) {
        for (std::uint64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        try {
            for (std::uint64_t i = next++; i < count; i = next++) fn(i);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = count;
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

RunRecord run_trial(const ExperimentConfig& config, std::uint64_t trial_index) {
    config.validate();
    if (trial_index >= config.n_trials) {
        throw std::out_of_range("run_trial: trial_index must be < n_trials");
    }
    return simulate(config, trial_index, kPriorStream);
}

std::vector<RunRecord> run_trials(const ExperimentConfig& config) {
    return simulate_all(config, kPriorStream);
}

Estimate mean_estimate(std::span<const double> values) {
    Estimate est;
    est.count = values.size();
    if (values.empty()) return est;
    double mean = 0.0;
    double m2 = 0.0;
    std::uint64_t i = 0;
    for (double v : values) {
        ++i;
        const double delta = v - mean;
        mean += delta / static_cast<double>(i);
        m2 += delta * (v - mean);
    }
    est.value = mean;
    if (values.size() > 1) {
        const double n = static_cast<double>(values.size());
        est.std_error = std::sqrt(m2 / (n - 1.0) / n);
    }
    return est;
}

MetricsEstimate summarize(DetectorKind kind, std::span<const RunRecord> prior_batch,
                          std::span<const RunRecord> no_change_batch, std::uint64_t horizon) {
    MetricsEstimate out;
    out.n_trials = prior_batch.size();

    std::vector<double> delays;
    std::vector<double> false_alarm;
    false_alarm.reserve(prior_batch.size());
    for (const RunRecord& rec : prior_batch) {
        const StopTime tau = rec.tau.at(kind);
        const bool is_false_alarm = tau && (!rec.theta || *tau < *rec.theta);
        false_alarm.push_back(is_false_alarm ? 1.0 : 0.0);
        if (is_false_alarm) {
            ++out.n_false_alarms;
        } else if (!tau) {
            ++out.n_censored;
        } else {
            ++out.n_detections;
            delays.push_back(static_cast<double>(*tau - *rec.theta));
        }
    }
    out.add = mean_estimate(delays);
    out.add.lower_bound = out.n_censored > 0;
    out.pfa = mean_estimate(false_alarm);

    std::vector<double> run_lengths;
    run_lengths.reserve(no_change_batch.size());
    for (const RunRecord& rec : no_change_batch) {
        const StopTime tau = rec.tau.at(kind);
        if (!tau) ++out.n_arl_censored;
        run_lengths.push_back(static_cast<double>(tau.value_or(horizon)));
    }
    out.arl = mean_estimate(run_lengths);
    out.arl.lower_bound = out.n_arl_censored > 0;
    return out;
}

ExperimentConfig no_change_batch_config(const ExperimentConfig& config) {
    ExperimentConfig copy = config;
    copy.prior = ChangePointPrior::no_change();
    return copy;
}

std::map<DetectorKind, MetricsEstimate> estimate_metrics(const ExperimentConfig& config) {
    const std::vector<RunRecord> prior_batch = simulate_all(config, kPriorStream);
    const std::vector<RunRecord> no_change_batch =
        simulate_all(no_change_batch_config(config), kNoChangeStream);
    std::map<DetectorKind, MetricsEstimate> result;
    for (DetectorKind kind : config.kinds) {
        result[kind] = summarize(kind, prior_batch, no_change_batch, config.horizon);
    }
    return result;
}

std::vector<SweepPoint> add_vs_logA_sweep(const ExperimentConfig& base,
                                          std::span<const double> log_thresholds) {
    for (std::size_t i = 1; i < log_thresholds.size(); ++i) {
        if (!(log_thresholds[i] > log_thresholds[i - 1])) {
            throw std::invalid_argument("add_vs_logA_sweep: thresholds must be strictly increasing");
        }
    }
    std::vector<SweepPoint> table;
    table.reserve(log_thresholds.size());
    ExperimentConfig config = base;
    for (double log_threshold : log_thresholds) {
        config.log_threshold = log_threshold;
        table.push_back({log_threshold, estimate_metrics(config)});
    }
    return table;
}

LineFit fit_slope(std::span<const std::pair<double, double>> points) {
    if (points.size() < 2) throw std::invalid_argument("fit_slope: need at least two points");
    const double n = static_cast<double>(points.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& [x, y] : points) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [x, y] : points) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_slope: x values are all equal");
    const double slope = sxy / sxx;
    return {slope, mean_y - slope * mean_x};
}

MartingaleCheck martingale_check(const ObservationModel& f0, const ObservationModel& f1_assumed,
                                 std::uint64_t n, std::uint64_t n_trials, std::uint64_t seed,
                                 unsigned workers) {
    if (n == 0) throw std::invalid_argument("martingale_check: n must be >= 1");
    if (n_trials < 1000) throw std::invalid_argument("martingale_check: need at least 1000 trials");
    std::vector<double> centered(n_trials);
    parallel_for(n_trials, workers, [&](std::uint64_t trial) {
        Rng rng(trial_seed(seed, trial));
        std::vector<Observation> history;
        history.reserve(n);
        // Linear domain: S_n = n is then exact when f1_assumed == f0.
        double sr = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) {
            const Observation x = f0.sample(rng, history);
            const double log_ratio = f1_assumed.log_density(x, history) - f0.log_density(x, history);
            history.push_back(x);
            sr = (1.0 + sr) * std::exp(log_ratio);
        }
        centered[trial] = sr - static_cast<double>(n);
    });
    const Estimate est = mean_estimate(centered);
    return {*est.value, est.std_error};
}

double sr_expectation_by_enumeration(const BernoulliModel& f0, const BernoulliModel& f1_assumed,
                                     unsigned n) {
    if (n < 1 || n > 24) {
        throw std::invalid_argument("sr_expectation_by_enumeration: n must lie in [1, 24]");
    }
    const std::uint64_t sequences = std::uint64_t{1} << n;
    double expectation = 0.0;
    for (std::uint64_t mask = 0; mask < sequences; ++mask) {
        double log_prob = 0.0;
        DetectorState state = detector_init(DetectorKind::ShiryaevRoberts);
        for (unsigned i = 0; i < n; ++i) {
            const Observation x{static_cast<double>((mask >> i) & 1U), 0.0};
            const double l0 = f0.log_density(x);
            log_prob += l0;
            state = detector_update(state, f1_assumed.log_density(x) - l0);
        }
        expectation += std::exp(log_prob + state.log_stat);
    }
    return expectation;
}

}  // namespace qcd
