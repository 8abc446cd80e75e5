#include "sulphsim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace sulphsim {

std::size_t InvariantReport::count(const std::string& check) const {
    return static_cast<std::size_t>(std::count_if(violations_.begin(), violations_.end(),
                                                  [&](const Violation& v) { return v.check == check; }));
}

double InvariantReport::worst(const std::string& check) const {
    double w = 0.0;
    for (const Violation& v : violations_) {
        if (v.check == check) w = std::max(w, v.magnitude);
    }
    return w;
}

void InvariantReport::append(StepSummary summary, std::vector<Violation> found) {
    steps_.push_back(summary);
    violations_.insert(violations_.end(), found.begin(), found.end());
}

void audit_step(InvariantReport& report, int step, const FieldState& state, const PhysParams& p,
                const BalanceTerms* balance, const AuditOptions& opts, const FieldState* previous) {
    StepSummary sum;
    sum.step = step;
    sum.t = state.t;
    std::vector<Violation> found;
    // one entry per check: the worst node
    auto flag = [&](const char* check, std::size_t node, double magnitude) {
        for (Violation& v : found) {
            if (v.check == check) {
                if (magnitude > v.magnitude) {
                    v.node = node;
                    v.magnitude = magnitude;
                }
                return;
            }
        }
        found.push_back({check, step, node, magnitude});
    };

    if (!state.s.empty()) {
        sum.s_min = *std::min_element(state.s.begin(), state.s.end());
        sum.s_max = *std::max_element(state.s.begin(), state.s.end());
    }
    if (!state.c.empty()) {
        sum.c_min = *std::min_element(state.c.begin(), state.c.end());
        sum.c_max = *std::max_element(state.c.begin(), state.c.end());
    }
    if (!state.r.empty()) {
        sum.r_min = *std::min_element(state.r.begin(), state.r.end());
        sum.r_max = *std::max_element(state.r.begin(), state.r.end());
    }

    for (std::size_t k = 0; k < state.s.size(); ++k) {
        const double s = state.s[k];
        if (s < -opts.s_tol) flag("s_floor", k, -s);
        if (opts.check_ceiling && s > p.S0 + opts.s_tol) flag("s_ceiling", k, s - p.S0);
    }
    for (std::size_t k = 0; k < state.c.size(); ++k) {
        const double c = state.c[k];
        if (c < -opts.c_tol) flag("c_bounds", k, -c);
        if (c > p.C0 + opts.c_tol) flag("c_bounds", k, c - p.C0);
        if (previous != nullptr && c > previous->c[k]) flag("c_monotone", k, c - previous->c[k]);
    }
    for (std::size_t e = 0; e < state.r.size(); ++e) {
        const double r = state.r[e];
        if (r < -opts.r_tol) flag("r_floor", e, -r);
        if (p.constraint_mode == ConstraintMode::Box && r > p.R0 + opts.r_tol) flag("r_box", e, r - p.R0);
    }
    if (balance != nullptr) {
        sum.balance_residual = balance->residual();
        sum.balance_relative = balance->relative();
        if (sum.balance_relative > opts.balance_tol) flag("balance", 0, sum.balance_relative);
    }

    if (opts.strict && !found.empty()) {
        const Violation first = found.front();
        report.append(sum, std::move(found));
        std::ostringstream msg;
        msg << "invariant '" << first.check << "' violated at step " << first.step << ", index "
            << first.node << ", magnitude " << first.magnitude;
        throw InvariantViolation(msg.str(), first);
    }
    report.append(sum, std::move(found));
}

namespace {

/// Centered difference in the interior, one-sided on the boundary.
double derivative(std::span<const double> f, const Grid2D& grid, int i, int j, bool along_x1) {
    const int n = along_x1 ? grid.nx() : grid.ny();
    const int k = along_x1 ? i : j;
    const double h = along_x1 ? grid.hx() : grid.hy();
    auto at = [&](int m) { return along_x1 ? f[grid.index(m, j)] : f[grid.index(i, m)]; };
    if (k == 0) return (at(1) - at(0)) / h;
    if (k == n - 1) return (at(n - 1) - at(n - 2)) / h;
    return (at(k + 1) - at(k - 1)) / (2.0 * h);
}

}  // namespace

double energy_E1(const FieldState& state, const Grid2D& grid, const BoundaryTrace& trace,
                 const PhysParams& p) {
    double bulk = 0.0;
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            const std::size_t k = grid.index(i, j);
            const double s = state.s[k];
            const double c = state.c[k];
            const double phi = porosity(c, p);
            const double gx = derivative(state.s, grid, i, j, true);
            const double gy = derivative(state.s, grid, i, j, false);
            const double density = 0.5 * phi * (gx * gx + gy * gy) + p.lambda * c * phi * s * s / 2.0 -
                                   p.lambda * p.B * phi * c * s * s * s / 3.0;
            bulk += grid.node_weight(i, j) * density;
        }
    }
    double boundary = 0.0;
    for (std::size_t e = 0; e < trace.size(); ++e) {
        const double d = state.s[trace.nodes[e]] - p.sbar;
        boundary += trace.weights[e] * 0.5 * nu_eval(state.r[e], p) * d * d;
    }
    return bulk + boundary;
}

double energy_E2(const FieldState& state, const Grid2D& /*grid*/, const BoundaryTrace& trace,
                 const PhysParams& p, std::span<const double> forcing) {
    double total = 0.0;
    for (std::size_t e = 0; e < trace.size(); ++e) {
        const double r = state.r[e];
        if (p.constraint_mode == ConstraintMode::Box && (r < 0.0 || r > p.R0)) {
            return std::numeric_limits<double>::infinity();
        }
        const std::size_t k = trace.nodes[e];
        const double f = forcing.empty() ? p.forcing : forcing[e];
        total += trace.weights[e] * (psi(r, p) + ghat(r, state.c[k], state.s[k], p) - f * r);
    }
    return total;
}

ManufacturedSolution standard_manufactured(const PhysParams& p) {
    constexpr double pi = std::numbers::pi;
    ManufacturedSolution ms;
    ms.s = [](double x1, double x2, double t) {
        return std::exp(-t) * std::cos(pi * x1) * std::cos(pi * x2);
    };
    ms.c = [C0 = p.C0](double x1, double, double t) {
        return C0 * (0.5 + 0.25 * std::cos(pi * x1) * std::exp(-t));
    };
    ms.r = [rl = p.rl](double, double x2, double t) {
        return rl * (0.5 + 0.25 * std::sin(pi * x2)) * (1.0 - std::exp(-t));
    };
    ms.source = [p](double x1, double x2, double t) {
        const double e = std::exp(-t);
        const double c1 = std::cos(pi * x1), s1 = std::sin(pi * x1);
        const double c2 = std::cos(pi * x2);
        const double s = e * c1 * c2;
        const double c = p.C0 * (0.5 + 0.25 * c1 * e);
        const double phi = p.A + p.B * c;
        const double phi_t = p.B * (-0.25 * p.C0 * c1 * e);
        const double phi_x1 = p.B * (-0.25 * p.C0 * pi * s1 * e);
        const double s_x1 = -pi * s1 * c2 * e;
        const double laplacian = -2.0 * pi * pi * s;
        // d_t(phi s) - div(phi grad s) + lambda phi c s
        return phi_t * s - phi * s - (phi_x1 * s_x1 + phi * laplacian) + p.lambda * phi * c * s;
    };
    ms.phi_dn_s = [p](Edge edge, double x1, double x2, double t) {
        const double e = std::exp(-t);
        const double c = p.C0 * (0.5 + 0.25 * std::cos(pi * x1) * e);
        const double phi = p.A + p.B * c;
        const double s_x1 = -pi * std::sin(pi * x1) * std::cos(pi * x2) * e;
        const double s_x2 = -pi * std::cos(pi * x1) * std::sin(pi * x2) * e;
        switch (edge) {
        case Edge::Left: return -phi * s_x1;
        case Edge::Right: return phi * s_x1;
        case Edge::Bottom: return -phi * s_x2;
        case Edge::Top: return phi * s_x2;
        }
        return 0.0;
    };
    return ms;
}

ManufacturedSolution constant_manufactured(const PhysParams& p, double value) {
    ManufacturedSolution ms;
    const double c = 0.5 * p.C0;
    const double phi = p.A + p.B * c;
    ms.s = [value](double, double, double) { return value; };
    ms.c = [c](double, double, double) { return c; };
    ms.r = [rl = p.rl](double, double, double) { return 0.5 * rl; };
    ms.source = [lambda = p.lambda, phi, c, value](double, double, double) {
        return lambda * phi * c * value;
    };
    ms.phi_dn_s = [](Edge, double, double, double) { return 0.0; };
    return ms;
}

MmsLevelResult run_mms_level(const ManufacturedSolution& ms, const PhysParams& p, int n, double dt,
                             double t_final, double cg_rel_tol) {
    EdgeTags all_exposed{{EdgeTag::Exposed, EdgeTag::Exposed, EdgeTag::Exposed, EdgeTag::Exposed}};
    const Grid2D grid = build_grid(n, n, all_exposed);
    const BoundaryTrace trace = exposed_trace(grid);
    const std::size_t nodes = grid.size();
    const int steps = static_cast<int>(std::lround(t_final / dt));

    auto sample = [&](const std::function<double(double, double, double)>& f, double t) {
        std::vector<double> v(nodes);
        for (int j = 0; j < grid.ny(); ++j) {
            for (int i = 0; i < grid.nx(); ++i) v[grid.index(i, j)] = f(grid.x1(i), grid.x2(j), t);
        }
        return v;
    };

    FieldState state;
    state.s = sample(ms.s, 0.0);
    state.c = sample(ms.c, 0.0);
    std::vector<double> r(trace.size()), flux(trace.size());
    for (int step = 1; step <= steps; ++step) {
        const double t = step * dt;
        std::vector<double> c_new = sample(ms.c, t);
        std::vector<double> source = sample(ms.source, t);
        for (std::size_t e = 0; e < trace.size(); ++e) {
            const double x1 = trace.x1[e], x2 = trace.x2[e];
            r[e] = ms.r(x1, x2, t);
            flux[e] = ms.phi_dn_s(trace.edge[e], x1, x2, t) + nu_eval(r[e], p) * (ms.s(x1, x2, t) - p.sbar);
        }
        const LinearSystem sys =
            assemble_s_system(grid, trace, state, c_new, r, dt, p, AssemblyHooks{source, flux});
        CgResult sol = cg_solve(sys, state.s, cg_rel_tol);
        state.s = std::move(sol.x);
        state.c = std::move(c_new);
        state.t = t;
    }

    MmsLevelResult out;
    out.n = n;
    out.dt = dt;
    out.steps = steps;
    const double t_end = steps * dt;
    double sq = 0.0;
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            const double e = state.s[grid.index(i, j)] - ms.s(grid.x1(i), grid.x2(j), t_end);
            sq += grid.node_weight(i, j) * e * e;
            out.err_max = std::max(out.err_max, std::abs(e));
        }
    }
    out.err_l2 = std::sqrt(sq);
    return out;
}

void fill_orders(ConvergenceTable& table, double refinement_ratio) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
        ConvergenceRow& row = table.rows[k];
        if (k == 0) {
            row.order_l2 = row.order_max = nan;
            continue;
        }
        const ConvergenceRow& coarse = table.rows[k - 1];
        row.order_l2 = std::log(coarse.err_l2 / row.err_l2) / std::log(refinement_ratio);
        row.order_max = std::log(coarse.err_max / row.err_max) / std::log(refinement_ratio);
    }
}

ConvergenceTable mms_convergence(MmsStudy study, int levels, const MmsOptions& opts) {
    if (levels < 3) throw std::invalid_argument("mms_convergence: at least 3 levels required");
    const ManufacturedSolution ms = standard_manufactured(opts.params);
    ConvergenceTable table;
    table.study = study;
    for (int level = 0; level < levels; ++level) {
        MmsLevelResult res;
        double h_or_dt = 0.0;
        if (study == MmsStudy::Spatial) {
            const int n = (opts.spatial_base_n - 1) * (1 << level) + 1;
            res = run_mms_level(ms, opts.params, n, opts.spatial_dt, opts.t_final, opts.cg_rel_tol);
            h_or_dt = 1.0 / (n - 1);
        } else {
            const double dt = opts.temporal_base_dt / (1 << level);
            res = run_mms_level(ms, opts.params, opts.temporal_n, dt, opts.t_final, opts.cg_rel_tol);
            h_or_dt = dt;
        }
        table.rows.push_back({level, h_or_dt, res.err_l2, res.err_max, 0.0, 0.0});
    }
    fill_orders(table);
    return table;
}

void ConvergenceTable::write_csv(std::ostream& os) const {
    const auto old_precision = os.precision(17);
    os << "level,h_or_dt,err_L2,err_max,order_L2,order_max\n";
    for (const ConvergenceRow& row : rows) {
        os << row.level << ',' << row.h_or_dt << ',' << row.err_l2 << ',' << row.err_max << ','
           << row.order_l2 << ',' << row.order_max << '\n';
    }
    os.precision(old_precision);
}

}  // namespace sulphsim
