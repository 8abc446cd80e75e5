#include "sulphsim/surface.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sulphsim {

double weibull_sample(double u, double r0, double m) {
    if (!(u > 0.0 && u < 1.0)) {
        std::ostringstream msg;
        msg << "weibull_sample: variate " << u << " outside (0, 1)";
        throw std::invalid_argument(msg.str());
    }
    // ln(1/(1-u)) = -log1p(-u), accurate for small u
    return r0 * std::pow(-std::log1p(-u), 1.0 / m);
}

const char* to_string(RugosityInit::Mode mode) {
    switch (mode) {
    case RugosityInit::Mode::Constant: return "constant";
    case RugosityInit::Mode::Piecewise: return "piecewise";
    case RugosityInit::Mode::WeibullRandom: return "weibull";
    }
    return "constant";
}

std::vector<double> init_rugosity(const BoundaryTrace& trace, const RugosityInit& init,
                                  const PhysParams& p, Rng& rng) {
    std::vector<double> r(trace.size());
    for (std::size_t k = 0; k < trace.size(); ++k) {
        switch (init.mode) {
        case RugosityInit::Mode::Constant:
            r[k] = init.value;
            break;
        case RugosityInit::Mode::Piecewise:
            r[k] = (trace.x2[k] < init.split_x2 ? init.lo_factor : init.hi_factor) * init.base_r0;
            break;
        case RugosityInit::Mode::WeibullRandom:
            r[k] = weibull_sample(rng.uniform_open(), init.base_r0, p.weibull_m);
            break;
        }
        if (p.constraint_mode == ConstraintMode::Box) r[k] = std::clamp(r[k], 0.0, p.R0);
    }
    return r;
}

RugosityUpdate step_r(std::span<const double> r_n, std::span<const double> c_trace,
                      std::span<const double> s_trace, double dt, const PhysParams& p,
                      std::span<const double> forcing) {
    const std::size_t n = r_n.size();
    if (c_trace.size() != n || s_trace.size() != n || (!forcing.empty() && forcing.size() != n)) {
        throw std::invalid_argument("step_r: trace sizes differ");
    }
    RugosityUpdate out{std::vector<double>(n), std::vector<double>(n, 0.0)};
    for (std::size_t k = 0; k < n; ++k) {
        const double f = forcing.empty() ? p.forcing : forcing[k];
        const double rate = psi_prime(r_n[k], p) + g_reaction(r_n[k], c_trace[k], s_trace[k], p) - f;
        const double trial = r_n[k] - dt * rate;
        if (p.constraint_mode == ConstraintMode::Box) {
            const BoxProjection proj = project_box(trial, dt, p);
            out.r[k] = proj.r;
            out.xi[k] = proj.xi;
        } else {
            out.r[k] = trial;
        }
    }
    return out;
}

}  // namespace sulphsim
