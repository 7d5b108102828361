// Closed-form ARL, PFA and ADD bounds for mismatched CUSUM/SR procedures.
#pragma once

#include <stdexcept>
#include <string_view>

#include "qcd/detectors.hpp"

namespace qcd {

/// D10 = KL(f1 || f0) and D11~ = KL(f1 || f1~); gap = D10 - D11~.
struct DivergencePair {
    double d10;
    double d11_tilde;

    /// Throws std::invalid_argument if either divergence is negative or NaN.
    DivergencePair(double d10, double d11_tilde);

    double gap() const noexcept { return d10 - d11_tilde; }
};

enum class RegimeClass { FiniteAddBound, InfiniteCusumAdd, Degenerate };

std::string_view to_string(RegimeClass regime) noexcept;

/// Raised when an ADD quantity is requested for gap == 0.
class DegenerateRegimeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// How an ADD bound should be read.
enum class BoundQualifier {
    AsymptoticGuide,        ///< finite plug-in value of an alpha -> 0 bound
    NonAsymptotic,          ///< infinite CUSUM delay, holds for every alpha < 1
    ConditionalAsymptotic,  ///< infinite SR delay, only if log S_n ~ log C_n
};

std::string_view to_string(BoundQualifier qualifier) noexcept;

struct AddBound {
    double value;  ///< +inf in the negative-gap regime
    BoundQualifier qualifier;

    bool is_infinite() const noexcept;
};

/// ARL >= A for both procedures. Throws std::invalid_argument for A <= 0.
double arl_lower_bound(double A);

/// SR: min(theta_bar / A, 1). CUSUM: min(1 / A, 1).
/// Throws std::invalid_argument for A <= 0 or theta_bar < 1.
double pfa_upper_bound(DetectorKind kind, double A, double theta_bar);

/// CUSUM: 1 / alpha. SR: theta_bar / alpha.
/// Throws std::invalid_argument unless 0 < alpha < 1 and theta_bar >= 1.
double threshold_for_pfa(DetectorKind kind, double alpha, double theta_bar);

/// Plug-in asymptotic ADD upper bound at threshold threshold_for_pfa(kind, alpha, theta_bar).
/// Throws DegenerateRegimeError for gap == 0 and std::invalid_argument for alpha outside (0, 1).
AddBound add_asymptotic_upper(DetectorKind kind, double alpha, double theta_bar,
                              const DivergencePair& div);

RegimeClass classify_regime(const DivergencePair& div) noexcept;

/// Predicted slope of ADD against log A, 1 / gap. Throws std::domain_error for gap <= 0.
double add_slope(const DivergencePair& div);

}  // namespace qcd
