#include <doctest.h>

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "qcd/likelihood.hpp"

using namespace qcd;

namespace {

ModelTriple gaussian_triple(double rho0, double rho1, double rho_assumed) {
    auto f0 = std::make_shared<const GaussianModel>(rho0);
    auto f1 = std::make_shared<const GaussianModel>(rho1);
    if (rho_assumed == rho1) return ModelTriple::matched(f0, f1);
    return {f0, f1, std::make_shared<const GaussianModel>(rho_assumed)};
}

struct Moments {
    double mean;
    double se;
};

Moments moments(const std::vector<double>& v) {
    double sum = 0.0;
    double sum2 = 0.0;
    for (double x : v) {
        sum += x;
        sum2 += x * x;
    }
    const double n = static_cast<double>(v.size());
    const double mean = sum / n;
    return {mean, std::sqrt((sum2 / n - mean * mean) / (n - 1.0))};
}

}  // namespace

TEST_CASE("log_ratio_step examples") {
    SUBCASE("identical models") {
        auto m = std::make_shared<const GaussianModel>(0.2);
        const ModelTriple triple{m, m, m};
        const auto r = log_ratio_step(triple, {0.3, -1.2}, {});
        CHECK(r.log_lambda == 0.0);
        CHECK(r.log_lambda_tilde == 0.0);
        CHECK(r.log_lambda_11 == 0.0);
    }
    SUBCASE("matched Gaussian at the origin") {
        const auto r = log_ratio_step(gaussian_triple(0.0, 0.5, 0.5), {0.0, 0.0}, {});
        CHECK(r.log_lambda == doctest::Approx(0.143841036225890).epsilon(1e-12));
        CHECK(r.log_lambda_tilde == r.log_lambda);
        CHECK(r.log_lambda_11 == 0.0);
    }
    SUBCASE("Bernoulli mismatch") {
        const ModelTriple triple{std::make_shared<const BernoulliModel>(0.5),
                                 std::make_shared<const BernoulliModel>(0.8),
                                 std::make_shared<const BernoulliModel>(0.6)};
        const auto r = log_ratio_step(triple, {1.0, 0.0}, {});
        CHECK(r.log_lambda == doctest::Approx(std::log(1.6)).epsilon(1e-14));
        CHECK(r.log_lambda_tilde == doctest::Approx(std::log(1.2)).epsilon(1e-14));
        CHECK(r.log_lambda_11 == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-14));
        CHECK(std::abs(r.log_lambda - r.log_lambda_tilde - r.log_lambda_11) <= 1e-12);
    }
}

TEST_CASE("cumulative_log_ratio") {
    const ModelTriple triple = gaussian_triple(0.0, 0.5, 0.3);
    Rng rng(17);
    std::vector<Observation> xs;
    for (int i = 0; i < 40; ++i) xs.push_back(triple.f1_true->sample(rng, xs));

    SUBCASE("single sample equals one step") {
        const auto one = cumulative_log_ratio(triple, xs, xs.size());
        const auto step = log_ratio_step(triple, xs.back(), std::span(xs).first(xs.size() - 1));
        CHECK(one.log_lambda == step.log_lambda);
        CHECK(one.log_lambda_tilde == step.log_lambda_tilde);
        CHECK(one.log_lambda_11 == step.log_lambda_11);
    }
    SUBCASE("additive identity for every prefix and start index") {
        for (std::size_t n = 1; n <= xs.size(); ++n) {
            const auto prefix = std::span(xs).first(n);
            for (std::size_t k = 1; k <= n; ++k) {
                const auto r = cumulative_log_ratio(triple, prefix, k);
                CHECK(std::abs(r.log_lambda - r.log_lambda_tilde - r.log_lambda_11) <= 1e-10);
            }
        }
    }
    SUBCASE("start index out of range") {
        CHECK_THROWS_AS(cumulative_log_ratio(triple, xs, 0), std::out_of_range);
        CHECK_THROWS_AS(cumulative_log_ratio(triple, xs, xs.size() + 1), std::out_of_range);
    }
}

TEST_CASE("per-sample cumulative ratios converge to the divergences") {
    constexpr int kTrials = 4000;
    constexpr int kLength = 50;
    for (double rho_assumed : {0.3, 0.4}) {
        const ModelTriple triple = gaussian_triple(0.0, 0.5, rho_assumed);
        Rng rng(23);
        std::vector<double> lambda;
        std::vector<double> lambda_11;
        for (int t = 0; t < kTrials; ++t) {
            std::vector<Observation> xs;
            for (int i = 0; i < kLength; ++i) xs.push_back(triple.f1_true->sample(rng, xs));
            const auto r = cumulative_log_ratio(triple, xs, 1);
            lambda.push_back(r.log_lambda / kLength);
            lambda_11.push_back(r.log_lambda_11 / kLength);
        }
        const Moments l = moments(lambda);
        const Moments l11 = moments(lambda_11);
        CAPTURE(rho_assumed);
        CHECK(std::abs(l.mean - gaussian_kl(0.5, 0.0)) <= 4.0 * l.se);
        CHECK(std::abs(l11.mean - gaussian_kl(0.5, rho_assumed)) <= 4.0 * l11.se);
    }
}

TEST_CASE("step ratio moments") {
    constexpr int n = 1000000;
    const ModelTriple triple = gaussian_triple(0.0, 0.5, 0.3);

    SUBCASE("E_f0[exp(log lambda~)] = 1") {
        Rng rng(31);
        std::vector<double> ratio(n);
        for (double& v : ratio) {
            v = std::exp(log_ratio_step(triple, triple.f0->sample(rng, {}), {}).log_lambda_tilde);
        }
        const Moments m = moments(ratio);
        CHECK(std::abs(m.mean - 1.0) <= 4.0 * m.se);
    }
    SUBCASE("means under f1 match the closed-form divergences") {
        Rng rng(37);
        std::vector<double> lambda(n);
        std::vector<double> tilde(n);
        std::vector<double> eleven(n);
        for (int i = 0; i < n; ++i) {
            const auto r = log_ratio_step(triple, triple.f1_true->sample(rng, {}), {});
            lambda[i] = r.log_lambda;
            tilde[i] = r.log_lambda_tilde;
            eleven[i] = r.log_lambda_11;
        }
        const double d10 = gaussian_kl(0.5, 0.0);
        const double d11 = gaussian_kl(0.5, 0.3);
        const Moments a = moments(lambda);
        const Moments b = moments(tilde);
        const Moments c = moments(eleven);
        CHECK(std::abs(a.mean - d10) <= 4.0 * a.se);
        CHECK(std::abs(b.mean - (d10 - d11)) <= 4.0 * b.se);
        CHECK(std::abs(c.mean - d11) <= 4.0 * c.se);
    }
}
