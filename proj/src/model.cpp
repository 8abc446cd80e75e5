#include "sulphsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sulphsim {

namespace {
constexpr double kConcentrationSlack = 1e-12;
}

ConstitutiveReport constitutive_report(const PhysParams& p) {
    const double at_zero = p.A;
    const double at_cap = p.A + p.B * p.C0;
    return {std::min(at_zero, at_cap), std::max(at_zero, at_cap), nu_eval(0.0, p), nu_eval(p.rl, p)};
}

std::vector<std::string> validate(const PhysParams& p, bool global_bound) {
    std::vector<std::string> errors;
    auto require = [&errors](bool ok, const char* what) {
        if (!ok) errors.emplace_back(what);
    };
    require(p.A > 0.0, "(A1): A>0");
    require(p.A + p.B * p.C0 > 0.0, "(A1): A+B*C0>0");
    require(p.lambda > 0.0, "(rate): lambda>0");
    require(p.C0 > 0.0, "(A4): C0>0");
    require(p.S0 > 0.0, "(A9): S0>0");
    require(p.sbar >= 0.0, "(A3): sbar>=0");
    require(p.sbar <= p.S0, "(A9): sbar<=S0");
    if (global_bound) require(p.B <= 1.0 / p.S0, "(A9): B<=1/S0");
    require(p.nu0 >= 0.0, "(A2): nu0>=0");
    require(p.nul >= 0.0, "(A2): nul>=0");
    require(p.rl > 0.0, "(nu-law): rl>0");
    require(p.g >= 0.0, "(G): g>=0");
    require(p.R0 > 0.0, "(W): R0>0");
    require(p.weibull_m > 0.0, "(Weibull): weibull_m>0");
    require(p.weibull_r0 >= 0.0, "(Weibull): weibull_r0>=0");
    bool finite = std::isfinite(p.A) && std::isfinite(p.B) && std::isfinite(p.lambda) &&
                  std::isfinite(p.C0) && std::isfinite(p.S0) && std::isfinite(p.sbar) &&
                  std::isfinite(p.g) && std::isfinite(p.R0) && std::isfinite(p.nu0) &&
                  std::isfinite(p.nul) && std::isfinite(p.rl) && std::isfinite(p.forcing);
    for (double k : p.psi) finite = finite && std::isfinite(k);
    require(finite, "(data): all parameters finite");
    return errors;
}

double porosity(double c, const PhysParams& p) {
    if (!(c >= -kConcentrationSlack && c <= p.C0 + kConcentrationSlack)) {
        std::ostringstream msg;
        msg << "porosity: calcite density " << c << " outside [0, " << p.C0 << "]";
        throw DomainError(msg.str());
    }
    return p.A + p.B * c;
}

double nu_eval(double r, const PhysParams& p) {
    const double t = r / p.rl;
    switch (p.nu_law) {
    case NuLaw::Linear:
        return p.nu0 + (p.nul - p.nu0) * t;
    case NuLaw::Parabolic:
        return p.nu0 + (p.nul - p.nu0) * t * t;
    }
    return p.nu0;
}

double g_reaction(double r, double c, double s, const PhysParams& p) {
    return -porosity(c, p) * c * s * (1.0 + r / (1.0 + r)) * p.g;
}

double ghat(double r, double c, double s, const PhysParams& p) {
    // d/dr [2r - ln(1+r)] = 1 + r/(1+r)
    return -porosity(c, p) * c * s * p.g * (2.0 * r - std::log1p(r));
}

double psi(double r, const PhysParams& p) {
    return p.psi[0] + r * (p.psi[1] + r * (p.psi[2] + r * p.psi[3]));
}

double psi_prime(double r, const PhysParams& p) {
    return p.psi[1] + r * (2.0 * p.psi[2] + r * 3.0 * p.psi[3]);
}

BoxProjection project_box(double r_trial, double dt, const PhysParams& p) {
    const double r = std::clamp(r_trial, 0.0, p.R0);
    if (r == r_trial) return {r, 0.0};
    return {r, (r_trial - r) / dt};
}

const char* to_string(NuLaw law) {
    return law == NuLaw::Linear ? "linear" : "parabolic";
}

const char* to_string(ConstraintMode mode) {
    return mode == ConstraintMode::Free ? "free" : "box";
}

}  // namespace sulphsim
