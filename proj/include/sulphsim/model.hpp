#pragma once

/// @file model.hpp
/// @brief Physical parameters and constitutive laws of the sulphation model.
///
/// All functions here are pure: they depend only on their arguments and may be
/// called concurrently.

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace sulphsim {

enum class NuLaw { Linear, Parabolic };
enum class ConstraintMode { Free, Box };

/// Raised when a constitutive law is evaluated outside its admissible range.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct PhysParams {
    double A = 0.1;          ///< porosity offset
    double B = -0.05;        ///< porosity slope
    double lambda = 100.0;   ///< reaction rate
    double C0 = 1.0;         ///< calcite density bound
    double S0 = 1.0;         ///< SO2 ceiling
    double sbar = 1.0;       ///< ambient SO2 on exposed edges
    double g = 30.0;         ///< rugosity rate coefficient
    double R0 = 4.0;         ///< rugosity cap (Box mode)
    NuLaw nu_law = NuLaw::Linear;
    double nu0 = 0.1;        ///< boundary permeability at r = 0
    double nul = 1.0;        ///< boundary permeability at r = rl
    double rl = 1.0;         ///< rugosity scale of the permeability law
    double weibull_m = 10.0;
    double weibull_r0 = 0.2; ///< Weibull scale, also the base rugosity r0
    ConstraintMode constraint_mode = ConstraintMode::Free;
    /// Psi(r) = psi[0] + psi[1] r + psi[2] r^2 + psi[3] r^3.
    std::array<double, 4> psi{0.0, 0.0, 0.0, 0.0};
    double forcing = 0.0;    ///< uniform external rugosity forcing F
};

struct ConstitutiveReport {
    double phi_min;
    double phi_max;
    double nu_at_zero;
    double nu_at_rl;
};

ConstitutiveReport constitutive_report(const PhysParams& p);

/// Lists every violated assumption, each prefixed with its tag, e.g. "(A1): A>0".
/// `global_bound` additionally enforces B <= 1/S0.
std::vector<std::string> validate(const PhysParams& p, bool global_bound);

/// phi(c) = A + B c. Throws DomainError if c is outside [0, C0] by more than 1e-12.
double porosity(double c, const PhysParams& p);

/// Boundary permeability nu(r); extrapolated beyond rl without clamping.
double nu_eval(double r, const PhysParams& p);

/// Rugosity reaction G(r, c, s) = -phi(c) c s (1 + r/(1+r)) g.
double g_reaction(double r, double c, double s, const PhysParams& p);

/// r-antiderivative of g_reaction vanishing at r = 0.
double ghat(double r, double c, double s, const PhysParams& p);

double psi(double r, const PhysParams& p);
double psi_prime(double r, const PhysParams& p);

struct BoxProjection {
    double r;
    double xi;
};

/// Projection onto [0, R0] with multiplier xi = (r_trial - r) / dt.
BoxProjection project_box(double r_trial, double dt, const PhysParams& p);

const char* to_string(NuLaw law);
const char* to_string(ConstraintMode mode);

}  // namespace sulphsim
