#pragma once

/// @file surface.hpp
/// @brief Rugosity evolution on exposed edges and initial rugosity profiles.

#include <cstdint>
#include <span>
#include <vector>

#include "sulphsim/grid.hpp"
#include "sulphsim/model.hpp"
#include "sulphsim/rng.hpp"

namespace sulphsim {

/// Inverse Weibull CDF: r0 (ln(1/(1-u)))^(1/m). Throws for u outside (0, 1).
double weibull_sample(double u, double r0, double m);

struct RugosityInit {
    enum class Mode { Constant, Piecewise, WeibullRandom };

    Mode mode = Mode::Piecewise;
    double value = 0.0;      ///< Constant mode
    double lo_factor = 0.5;  ///< Piecewise: multiplier of r0 below split_x2
    double hi_factor = 2.0;  ///< Piecewise: multiplier of r0 at and above split_x2
    double split_x2 = 0.5;
    double base_r0 = 0.2;    ///< r0 for Piecewise and WeibullRandom
};

const char* to_string(RugosityInit::Mode mode);

/// Initial rugosity, one value per trace entry. In Box mode values are
/// projected onto [0, R0].
std::vector<double> init_rugosity(const BoundaryTrace& trace, const RugosityInit& init,
                                  const PhysParams& p, Rng& rng);

struct RugosityUpdate {
    std::vector<double> r;
    std::vector<double> xi;
};

/// One explicit Euler step of dr/dt + xi + Psi'(r) + G(r, c, s) = F, followed
/// by projection in Box mode. `forcing` is per trace entry; when empty the
/// uniform p.forcing is used.
RugosityUpdate step_r(std::span<const double> r_n, std::span<const double> c_trace,
                      std::span<const double> s_trace, double dt, const PhysParams& p,
                      std::span<const double> forcing = {});

}  // namespace sulphsim
