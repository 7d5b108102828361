#include "qcd/validation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "qcd/bounds.hpp"
#include "qcd/detectors.hpp"
#include "qcd/distributions.hpp"
#include "qcd/simulator.hpp"

namespace qcd {

namespace {

template <typename... Parts>
std::string concat(const Parts&... parts) {
    std::ostringstream out;
    out.precision(6);
    (out << ... << parts);
    return out.str();
}

CheckResult check_kl_constants() {
    struct Case {
        double rho_p, rho_q, expected;
    };
    constexpr Case cases[] = {{0.5, 0.0, 0.1438}, {0.5, 0.3, 0.0308}, {0.5, 0.4, 0.0090}};
    CheckResult result{"kl_constants", true, {}};
    for (const Case& c : cases) {
        const double kl = gaussian_kl(c.rho_p, c.rho_q);
        const bool ok = std::abs(kl - c.expected) <= 5e-4;
        result.passed = result.passed && ok;
        result.detail += concat("KL(", c.rho_p, "||", c.rho_q, ")=", kl, " ");
    }
    return result;
}

CheckResult check_kl_monte_carlo(const ValidationOptions& opt) {
    const GaussianModel p(opt.rho1);
    const GaussianModel q(opt.rho0);
    const std::uint64_t n = std::max<std::uint64_t>(opt.trials * 10, 10000);
    const MonteCarloEstimate mc = kl_monte_carlo(p, q, n, opt.seed);
    const double exact = gaussian_kl(opt.rho1, opt.rho0);
    const double z = std::abs(mc.estimate - exact) / mc.std_error;
    return {"kl_monte_carlo", z <= 4.0,
            concat("closed=", exact, " mc=", mc.estimate, " se=", mc.std_error, " z=", z)};
}

CheckResult check_oracle_equivalence(const ValidationOptions& opt) {
    constexpr int kStreams = 10000;
    constexpr std::size_t kMaxLength = 50;
    Rng rng(opt.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> length(1, kMaxLength);
    double worst = 0.0;
    std::vector<double> stream;
    for (int s = 0; s < kStreams; ++s) {
        stream.resize(length(rng));
        for (double& v : stream) v = normal(rng);
        for (DetectorKind kind : kAllDetectorKinds) {
            DetectorState state = detector_init(kind);
            for (std::size_t n = 1; n <= stream.size(); ++n) {
                state = detector_update(state, stream[n - 1]);
                const double oracle = brute_force_stat(kind, std::span(stream).first(n));
                worst = std::max(worst, std::abs(state.log_stat - oracle));
            }
        }
    }
    return {"oracle_equivalence", worst <= 1e-9, concat("max |recursion - definition| = ", worst)};
}

CheckResult check_martingale_enumeration() {
    const BernoulliModel f0(0.5);
    const BernoulliModel f1(0.8);
    const double centered = sr_expectation_by_enumeration(f0, f1, 10) - 10.0;
    return {"martingale_enumeration", std::abs(centered) <= 1e-10,
            concat("E[S_10] - 10 = ", centered)};
}

CheckResult check_martingale_monte_carlo(const ValidationOptions& opt) {
    const GaussianModel f0(opt.rho0);
    const GaussianModel f1(opt.rho_assumed);
    const std::uint64_t trials = std::max<std::uint64_t>(opt.trials, 1000);
    const MartingaleCheck mc = martingale_check(f0, f1, 50, trials, opt.seed, opt.workers);
    const bool ok = std::abs(mc.mean) <= 4.0 * mc.std_error;
    return {"martingale_monte_carlo", ok, concat("mean(S_50 - 50)=", mc.mean, " se=", mc.std_error)};
}

ExperimentConfig base_config(const ValidationOptions& opt, double rho_assumed) {
    auto f0 = std::make_shared<const GaussianModel>(opt.rho0);
    auto f1 = std::make_shared<const GaussianModel>(opt.rho1);
    ExperimentConfig config;
    config.models = rho_assumed == opt.rho1
                        ? ModelTriple::matched(f0, f1)
                        : ModelTriple{f0, f1, std::make_shared<const GaussianModel>(rho_assumed)};
    config.prior = ChangePointPrior::geometric(opt.p0);
    config.n_trials = opt.trials;
    config.horizon = opt.horizon;
    config.master_seed = opt.seed;
    config.workers = opt.workers;
    return config;
}

std::vector<double> assumed_models(const ValidationOptions& opt) {
    std::vector<double> rhos{opt.rho1};
    if (opt.rho_assumed != opt.rho1) rhos.push_back(opt.rho_assumed);
    return rhos;
}

CheckResult check_arl_bound(const ValidationOptions& opt) {
    CheckResult result{"arl_bound", true, {}};
    for (double rho_assumed : assumed_models(opt)) {
        ExperimentConfig config = no_change_batch_config(base_config(opt, rho_assumed));
        for (double log_a : {2.0, 3.0, 4.0}) {
            config.log_threshold = log_a;
            const auto records = run_trials(config);
            for (DetectorKind kind : config.kinds) {
                const MetricsEstimate m = summarize(kind, {}, records, config.horizon);
                const double bound = arl_lower_bound(std::exp(log_a));
                const bool ok = *m.arl.value >= bound - 3.0 * m.arl.std_error;
                result.passed = result.passed && ok;
                if (!ok) {
                    result.detail += concat(to_string(kind), " rho~=", rho_assumed, " logA=", log_a,
                                            " arl=", *m.arl.value, " < ", bound, "; ");
                }
            }
        }
    }
    if (result.passed) result.detail = "ARL >= A - 3 se at log A in {2, 3, 4}";
    return result;
}

CheckResult check_pfa_bound(const ValidationOptions& opt) {
    CheckResult result{"pfa_bound", true, {}};
    const double theta_bar = prior_mean(ChangePointPrior::geometric(opt.p0));
    for (double rho_assumed : assumed_models(opt)) {
        for (double alpha : {0.1, 0.05}) {
            for (DetectorKind kind : kAllDetectorKinds) {
                ExperimentConfig config = base_config(opt, rho_assumed);
                config.kinds = {kind};
                config.log_threshold = std::log(threshold_for_pfa(kind, alpha, theta_bar));
                const auto records = run_trials(config);
                const MetricsEstimate m = summarize(kind, records, {}, config.horizon);
                const bool ok = *m.pfa.value <= alpha + 3.0 * m.pfa.std_error;
                result.passed = result.passed && ok;
                if (!ok) {
                    result.detail += concat(to_string(kind), " rho~=", rho_assumed, " alpha=", alpha,
                                            " pfa=", *m.pfa.value, "; ");
                }
            }
        }
    }
    if (result.passed) result.detail = "PFA <= alpha + 3 se at alpha in {0.1, 0.05}";
    return result;
}

}  // namespace

std::vector<CheckResult> run_validation(const ValidationOptions& options) {
    std::vector<CheckResult> results;
    results.push_back(check_kl_constants());
    results.push_back(check_kl_monte_carlo(options));
    results.push_back(check_oracle_equivalence(options));
    results.push_back(check_martingale_enumeration());
    results.push_back(check_martingale_monte_carlo(options));
    results.push_back(check_arl_bound(options));
    results.push_back(check_pfa_bound(options));
    return results;
}

}  // namespace qcd
