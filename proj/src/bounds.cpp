#include "qcd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qcd {

DivergencePair::DivergencePair(double d10_, double d11_tilde_) : d10(d10_), d11_tilde(d11_tilde_) {
    if (!(d10 >= 0.0) || !(d11_tilde >= 0.0)) {
        throw std::invalid_argument("DivergencePair: divergences must be non-negative");
    }
}

std::string_view to_string(RegimeClass regime) noexcept {
    switch (regime) {
        case RegimeClass::FiniteAddBound: return "FiniteAddBound";
        case RegimeClass::InfiniteCusumAdd: return "InfiniteCusumAdd";
        case RegimeClass::Degenerate: return "Degenerate";
    }
    return "unknown";
}

std::string_view to_string(BoundQualifier qualifier) noexcept {
    switch (qualifier) {
        case BoundQualifier::AsymptoticGuide: return "asymptotic guide";
        case BoundQualifier::NonAsymptotic: return "non-asymptotic";
        case BoundQualifier::ConditionalAsymptotic: return "asymptotic-only";
    }
    return "unknown";
}

bool AddBound::is_infinite() const noexcept { return std::isinf(value); }

double arl_lower_bound(double A) {
    if (!(A > 0.0)) throw std::invalid_argument("arl_lower_bound: threshold A must be positive");
    return A;
}

double pfa_upper_bound(DetectorKind kind, double A, double theta_bar) {
    if (!(A > 0.0)) throw std::invalid_argument("pfa_upper_bound: threshold A must be positive");
    if (!(theta_bar >= 1.0)) throw std::invalid_argument("pfa_upper_bound: theta_bar must be >= 1");
    const double raw = kind == DetectorKind::ShiryaevRoberts ? theta_bar / A : 1.0 / A;
    return std::min(raw, 1.0);
}

double threshold_for_pfa(DetectorKind kind, double alpha, double theta_bar) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("threshold_for_pfa: alpha must lie in (0, 1)");
    }
    if (!(theta_bar >= 1.0)) throw std::invalid_argument("threshold_for_pfa: theta_bar must be >= 1");
    return kind == DetectorKind::ShiryaevRoberts ? theta_bar / alpha : 1.0 / alpha;
}

AddBound add_asymptotic_upper(DetectorKind kind, double alpha, double theta_bar,
                              const DivergencePair& div) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("add_asymptotic_upper: alpha must lie in (0, 1)");
    }
    const double gap = div.gap();
    if (gap == 0.0) {
        throw DegenerateRegimeError("add_asymptotic_upper: D10 == D11~ is not covered");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (gap < 0.0) {
        return kind == DetectorKind::Cusum ? AddBound{inf, BoundQualifier::NonAsymptotic}
                                           : AddBound{inf, BoundQualifier::ConditionalAsymptotic};
    }
    if (kind == DetectorKind::ShiryaevRoberts && !(theta_bar >= 1.0)) {
        throw std::invalid_argument("add_asymptotic_upper: theta_bar must be >= 1");
    }
    const double log_term = kind == DetectorKind::Cusum ? std::abs(std::log(alpha))
                                                        : std::log(theta_bar) - std::log(alpha);
    return {log_term / (1.0 - alpha) / gap, BoundQualifier::AsymptoticGuide};
}

RegimeClass classify_regime(const DivergencePair& div) noexcept {
    const double gap = div.gap();
    if (gap > 0.0) return RegimeClass::FiniteAddBound;
    if (gap < 0.0) return RegimeClass::InfiniteCusumAdd;
    return RegimeClass::Degenerate;
}

double add_slope(const DivergencePair& div) {
    const double gap = div.gap();
    if (gap == 0.0) throw DegenerateRegimeError("add_slope: D10 == D11~ is not covered");
    if (gap < 0.0) throw std::domain_error("add_slope: requires D10 > D11~");
    return 1.0 / gap;
}

}  // namespace qcd
