// Observation models, the geometric change-point prior and KL divergences.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>

namespace qcd {

/// One observation. Scalar models use component 0 and leave component 1 at zero.
using Observation = std::array<double, 2>;

/// Ordered observations x^{1:n-1} preceding the current sample.
using History = std::span<const Observation>;

using Rng = std::mt19937_64;

/// Change point index; std::nullopt encodes "no change" (theta = infinity).
using ChangePoint = std::optional<std::uint64_t>;

/// A conditional density f_n(x | x^{1:n-1}) that can be sampled and evaluated.
///
/// The shipped models are i.i.d. and ignore the history argument. Implementations
/// are immutable after construction and may be shared between threads.
class ObservationModel {
public:
    virtual ~ObservationModel() = default;

    virtual double log_density(const Observation& x, History history) const = 0;
    virtual Observation sample(Rng& rng, History history) const = 0;
    virtual std::string describe() const = 0;
};

/// Zero-mean bivariate normal with unit variances and correlation rho.
class GaussianModel final : public ObservationModel {
public:
    /// Throws std::invalid_argument unless |rho| < 1.
    explicit GaussianModel(double rho);

    double rho() const noexcept { return rho_; }

    double log_density(const Observation& x, History history = {}) const override;
    Observation sample(Rng& rng, History history = {}) const override;
    std::string describe() const override;

private:
    double rho_;
    double one_minus_rho2_;
    double sqrt_one_minus_rho2_;
    double log_norm_;
};

/// Bernoulli(p) on {0, 1}.
class BernoulliModel final : public ObservationModel {
public:
    /// Throws std::invalid_argument unless 0 < p < 1.
    explicit BernoulliModel(double p);

    double p() const noexcept { return p_; }

    /// Throws std::invalid_argument when x[0] is not 0 or 1.
    double log_density(const Observation& x, History history = {}) const override;
    Observation sample(Rng& rng, History history = {}) const override;
    std::string describe() const override;

private:
    double p_;
    double log_p_;
    double log_q_;
};

/// Geometric prior pi_k = (1 - p0)^{k-1} p0 on k >= 1, or the degenerate
/// "no change" prior that puts all mass on theta = infinity.
class ChangePointPrior {
public:
    /// Throws std::invalid_argument unless 0 < p0 <= 1.
    static ChangePointPrior geometric(double p0);
    static ChangePointPrior no_change() noexcept;

    bool is_no_change() const noexcept { return !p0_.has_value(); }

    /// Throws std::logic_error for the no-change prior.
    double p0() const;

private:
    ChangePointPrior() = default;
    std::optional<double> p0_;
};

/// Throws std::logic_error for the no-change prior and std::invalid_argument for k = 0.
double prior_pmf(const ChangePointPrior& prior, std::uint64_t k);

/// Mean change point 1/p0. Throws std::logic_error for the no-change prior.
double prior_mean(const ChangePointPrior& prior);

ChangePoint sample_change_point(const ChangePointPrior& prior, Rng& rng);

/// KL(N(0, R_p) || N(0, R_q)) for the unit-variance bivariate normals with
/// correlations rho_p and rho_q.
double gaussian_kl(double rho_p, double rho_q);

struct MonteCarloEstimate {
    double estimate;
    double std_error;
};

/// Sample mean and standard error of log p(x) - log q(x) with x ~ p.
/// Requires n_samples >= 1000.
MonteCarloEstimate kl_monte_carlo(const ObservationModel& p, const ObservationModel& q,
                                  std::uint64_t n_samples, std::uint64_t seed);

}  // namespace qcd
