#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "qcd/detectors.hpp"

using namespace qcd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> iterate(DetectorKind kind, const std::vector<double>& stream) {
    std::vector<double> out;
    DetectorState state = detector_init(kind);
    for (double l : stream) {
        state = detector_update(state, l);
        out.push_back(state.log_stat);
    }
    return out;
}

std::vector<double> random_stream(std::mt19937_64& rng, std::size_t max_length) {
    std::uniform_int_distribution<std::size_t> length(1, max_length);
    std::normal_distribution<double> normal(-0.1, 1.0);
    std::vector<double> stream(length(rng));
    for (double& v : stream) v = normal(rng);
    return stream;
}

}  // namespace

TEST_CASE("detector_init") {
    for (DetectorKind kind : kAllDetectorKinds) {
        const DetectorState s = detector_init(kind);
        CHECK(s.kind == kind);
        CHECK(s.log_stat == -kInf);
        CHECK(s.n == 0);
        const DetectorState one = detector_update(s, 0.37);
        CHECK(one.log_stat == 0.37);
        CHECK(one.n == 1);
    }
}

TEST_CASE("detector_update examples") {
    const auto cusum = iterate(DetectorKind::Cusum, {0.5, -1.0, 0.3});
    CHECK(cusum[0] == doctest::Approx(0.5));
    CHECK(cusum[1] == doctest::Approx(-0.5));
    CHECK(cusum[2] == doctest::Approx(0.3));

    const auto sr = iterate(DetectorKind::ShiryaevRoberts, {std::log(2.0), std::log(2.0)});
    CHECK(sr[0] == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(sr[1] == doctest::Approx(std::log(6.0)).epsilon(1e-14));

    const auto zeros = iterate(DetectorKind::ShiryaevRoberts, std::vector<double>(1000, 0.0));
    for (std::size_t n = 1; n <= zeros.size(); ++n) {
        CHECK(std::abs(std::exp(zeros[n - 1]) - static_cast<double>(n)) <= 1e-9);
    }

    CHECK_THROWS_AS(detector_update(detector_init(DetectorKind::Cusum), kInf), std::invalid_argument);
    CHECK_THROWS_AS(detector_update(detector_init(DetectorKind::ShiryaevRoberts), std::nan("")),
                    std::invalid_argument);
}

TEST_CASE("log1p_exp is overflow safe") {
    CHECK(log1p_exp(-kInf) == 0.0);
    CHECK(log1p_exp(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(log1p_exp(800.0) == doctest::Approx(800.0).epsilon(1e-15));
    CHECK(log1p_exp(-800.0) >= 0.0);
    CHECK(std::isfinite(log1p_exp(1e6)));
}

TEST_CASE("brute_force_stat") {
    CHECK(brute_force_stat(DetectorKind::Cusum, std::vector{0.5, -1.0, 0.3}) == doctest::Approx(0.3));
    CHECK(brute_force_stat(DetectorKind::ShiryaevRoberts, std::vector{0.0, 0.0, 0.0}) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-14));
    for (DetectorKind kind : kAllDetectorKinds) {
        CHECK(brute_force_stat(kind, std::vector{-2.5}) == -2.5);
        CHECK_THROWS_AS(brute_force_stat(kind, std::vector<double>{}), std::invalid_argument);
    }
}

TEST_CASE("recursion equals definition on random streams") {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int s = 0; s < 10000; ++s) {
        const auto stream = random_stream(rng, 50);
        for (DetectorKind kind : kAllDetectorKinds) {
            const auto stats = iterate(kind, stream);
            for (std::size_t n = 1; n <= stream.size(); ++n) {
                const double oracle = brute_force_stat(kind, std::span(stream).first(n));
                worst = std::max(worst, std::abs(stats[n - 1] - oracle));
            }
        }
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("CUSUM statistic never exceeds SR statistic") {
    std::mt19937_64 rng(7);
    for (int s = 0; s < 2000; ++s) {
        const auto stream = random_stream(rng, 200);
        const auto c = iterate(DetectorKind::Cusum, stream);
        const auto r = iterate(DetectorKind::ShiryaevRoberts, stream);
        for (std::size_t n = 0; n < stream.size(); ++n) REQUIRE(c[n] <= r[n] + 1e-12);
    }
}

TEST_CASE("run_to_stopping examples") {
    const std::vector<double> stream{0.5, -1.0, 0.3, 0.4};
    CHECK(run_to_stopping(DetectorKind::Cusum, {0.6}, stream, 4).tau == StopTime{4});
    CHECK(run_to_stopping(DetectorKind::Cusum, {-1e9}, stream, 4).tau == StopTime{1});

    const std::vector<double> zeros(20, 0.0);
    const auto sr = run_to_stopping(DetectorKind::ShiryaevRoberts, {std::log(5.5)}, zeros, 20);
    CHECK(sr.tau == StopTime{6});
    CHECK(sr.final_state.n == 6);

    const auto censored = run_to_stopping(DetectorKind::Cusum, {10.0}, stream, 3);
    CHECK_FALSE(censored.tau.has_value());
    CHECK(censored.final_state.n == 3);

    CHECK_THROWS_AS(run_to_stopping(DetectorKind::Cusum, {10.0}, stream, 10), std::out_of_range);
    CHECK_THROWS_AS(run_to_stopping(DetectorKind::Cusum, {1.0}, stream, 0), std::invalid_argument);
    CHECK_THROWS_AS(run_to_stopping(DetectorKind::Cusum, {kInf}, stream, 4), std::invalid_argument);
}

TEST_CASE("stopping time is monotone in the threshold and SR stops first") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> normal(0.05, 1.0);
    for (int s = 0; s < 300; ++s) {
        std::vector<double> stream(2000);
        for (double& v : stream) v = normal(rng);
        std::uint64_t previous_cusum = 0;
        std::uint64_t previous_sr = 0;
        for (double log_a = 0.5; log_a <= 5.0; log_a += 0.5) {
            const auto c = run_to_stopping(DetectorKind::Cusum, {log_a}, stream, stream.size());
            const auto r = run_to_stopping(DetectorKind::ShiryaevRoberts, {log_a}, stream, stream.size());
            const std::uint64_t tc = c.tau.value_or(stream.size() + 1);
            const std::uint64_t tr = r.tau.value_or(stream.size() + 1);
            REQUIRE(tr <= tc);
            REQUIRE(tc >= previous_cusum);
            REQUIRE(tr >= previous_sr);
            previous_cusum = tc;
            previous_sr = tr;
        }
    }
}
