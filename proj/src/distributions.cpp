#include "qcd/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace qcd {

namespace {

double standard_normal(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    return normal(rng);
}

// Uniform on (0, 1].
double open_uniform(Rng& rng) {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

GaussianModel::GaussianModel(double rho) : rho_(rho) {
    if (!(std::abs(rho) < 1.0)) {
        std::ostringstream msg;
        msg << "GaussianModel: correlation must satisfy |rho| < 1, got " << rho;
        throw std::invalid_argument(msg.str());
    }
    one_minus_rho2_ = 1.0 - rho * rho;
    sqrt_one_minus_rho2_ = std::sqrt(one_minus_rho2_);
    log_norm_ = -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(one_minus_rho2_);
}

double GaussianModel::log_density(const Observation& x, History) const {
    const double quad = (x[0] * x[0] - 2.0 * rho_ * x[0] * x[1] + x[1] * x[1]) / one_minus_rho2_;
    return log_norm_ - 0.5 * quad;
}

Observation GaussianModel::sample(Rng& rng, History) const {
    const double z1 = standard_normal(rng);
    const double z2 = standard_normal(rng);
    return {z1, rho_ * z1 + sqrt_one_minus_rho2_ * z2};
}

std::string GaussianModel::describe() const {
    std::ostringstream out;
    out << "Gaussian(rho=" << rho_ << ")";
    return out.str();
}

BernoulliModel::BernoulliModel(double p) : p_(p) {
    if (!(p > 0.0 && p < 1.0)) {
        std::ostringstream msg;
        msg << "BernoulliModel: p must lie in (0, 1), got " << p;
        throw std::invalid_argument(msg.str());
    }
    log_p_ = std::log(p);
    log_q_ = std::log1p(-p);
}

double BernoulliModel::log_density(const Observation& x, History) const {
    if (x[0] == 1.0) return log_p_;
    if (x[0] == 0.0) return log_q_;
    throw std::invalid_argument("BernoulliModel: observation must be 0 or 1");
}

Observation BernoulliModel::sample(Rng& rng, History) const {
    return {open_uniform(rng) <= p_ ? 1.0 : 0.0, 0.0};
}

std::string BernoulliModel::describe() const {
    std::ostringstream out;
    out << "Bernoulli(p=" << p_ << ")";
    return out.str();
}

ChangePointPrior ChangePointPrior::geometric(double p0) {
    if (!(p0 > 0.0 && p0 <= 1.0)) {
        std::ostringstream msg;
        msg << "ChangePointPrior: p0 must lie in (0, 1], got " << p0;
        throw std::invalid_argument(msg.str());
    }
    ChangePointPrior prior;
    prior.p0_ = p0;
    return prior;
}

ChangePointPrior ChangePointPrior::no_change() noexcept { return ChangePointPrior{}; }

double ChangePointPrior::p0() const {
    if (!p0_) throw std::logic_error("ChangePointPrior: no-change prior has no p0");
    return *p0_;
}

double prior_pmf(const ChangePointPrior& prior, std::uint64_t k) {
    if (prior.is_no_change()) throw std::logic_error("prior_pmf: undefined for the no-change prior");
    if (k == 0) throw std::invalid_argument("prior_pmf: change points start at k = 1");
    const double p0 = prior.p0();
    return std::pow(1.0 - p0, static_cast<double>(k - 1)) * p0;
}

double prior_mean(const ChangePointPrior& prior) {
    if (prior.is_no_change()) throw std::logic_error("prior_mean: undefined for the no-change prior");
    return 1.0 / prior.p0();
}

ChangePoint sample_change_point(const ChangePointPrior& prior, Rng& rng) {
    if (prior.is_no_change()) return std::nullopt;
    const double p0 = prior.p0();
    if (p0 == 1.0) return 1;
    // Inverse transform: P(K > k) = (1 - p0)^k.
    const double u = open_uniform(rng);
    const double k = std::floor(std::log(u) / std::log1p(-p0));
    constexpr double kMax = 9.0e18;
    return static_cast<std::uint64_t>(std::min(k, kMax)) + 1;
}

double gaussian_kl(double rho_p, double rho_q) {
    // Validates both correlations.
    const GaussianModel p(rho_p);
    const GaussianModel q(rho_q);
    const double det_p = 1.0 - rho_p * rho_p;
    const double det_q = 1.0 - rho_q * rho_q;
    const double trace = (2.0 - 2.0 * rho_p * rho_q) / det_q;
    const double kl = 0.5 * (trace - 2.0 + std::log(det_q / det_p));
    return std::max(kl, 0.0);
}

MonteCarloEstimate kl_monte_carlo(const ObservationModel& p, const ObservationModel& q,
                                  std::uint64_t n_samples, std::uint64_t seed) {
    if (n_samples < 1000) throw std::invalid_argument("kl_monte_carlo: need at least 1000 samples");
    Rng rng(seed);
    // Welford accumulation.
    double mean = 0.0;
    double m2 = 0.0;
    for (std::uint64_t i = 1; i <= n_samples; ++i) {
        const Observation x = p.sample(rng, {});
        const double d = p.log_density(x, {}) - q.log_density(x, {});
        const double delta = d - mean;
        mean += delta / static_cast<double>(i);
        m2 += delta * (d - mean);
    }
    const double n = static_cast<double>(n_samples);
    const double variance = m2 / (n - 1.0);
    return {mean, std::sqrt(variance / n)};
}

}  // namespace qcd
