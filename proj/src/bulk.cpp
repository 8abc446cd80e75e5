#include "sulphsim/bulk.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sulphsim/surface.hpp"

namespace sulphsim {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
    return sum;
}

double norm2(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument(std::string("assemble_s_system: non-finite ") + what);
        }
    }
}

}  // namespace

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) sum += val[k] * x[col[k]];
        y[i] = sum;
    }
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
    return d;
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
    const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
    const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return val[static_cast<std::size_t>(it - col.begin())];
}

bool CsrMatrix::is_symmetric(double tol) const {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            const double other = at(col[k], i);
            if (std::abs(val[k] - other) > tol * std::max(std::abs(val[k]), std::abs(other))) {
                return false;
            }
        }
    }
    return true;
}

double c_update_exact(double c_n, double s_frozen, double dt, const PhysParams& p) {
    // A c / ((A + B c) e^x - B c) rewritten as c / (1 + (A + B c)/A (e^x - 1)),
    // which returns c_n bit-exactly for x = 0 and never exceeds c_n for x >= 0.
    const double x = p.lambda * p.A * s_frozen * dt;
    return c_n / (1.0 + (p.A + p.B * c_n) / p.A * std::expm1(x));
}

LinearSystem assemble_s_system(const Grid2D& grid, const BoundaryTrace& trace,
                               const FieldState& state_old, std::span<const double> c_new,
                               std::span<const double> r_new, double dt, const PhysParams& p,
                               const AssemblyHooks& hooks) {
    const std::size_t n = grid.size();
    if (state_old.s.size() != n || state_old.c.size() != n || c_new.size() != n) {
        throw std::invalid_argument("assemble_s_system: nodal field size does not match grid");
    }
    if (r_new.size() != trace.size()) {
        throw std::invalid_argument("assemble_s_system: rugosity size does not match trace");
    }
    if (!hooks.source.empty() && hooks.source.size() != n) {
        throw std::invalid_argument("assemble_s_system: source size does not match grid");
    }
    if (!hooks.robin_flux.empty() && hooks.robin_flux.size() != trace.size()) {
        throw std::invalid_argument("assemble_s_system: robin data size does not match trace");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("assemble_s_system: dt must be positive");
    require_finite(state_old.s, "s");
    require_finite(state_old.c, "c_old");
    require_finite(c_new, "c_new");
    require_finite(r_new, "r");
    require_finite(hooks.source, "source");
    require_finite(hooks.robin_flux, "robin data");

    std::vector<double> phi_new(n);
    for (std::size_t k = 0; k < n; ++k) phi_new[k] = porosity(c_new[k], p);

    LinearSystem sys;
    CsrMatrix& m = sys.matrix;
    m.n = n;
    m.row_ptr.reserve(n + 1);
    m.col.reserve(5 * n);
    m.val.reserve(5 * n);
    sys.rhs.assign(n, 0.0);

    // Robin exchange collected per node; a corner shared by two exposed edges
    // receives both contributions.
    std::vector<double> robin_diag(n, 0.0);
    for (std::size_t e = 0; e < trace.size(); ++e) {
        const std::size_t k = trace.nodes[e];
        const double nu = nu_eval(r_new[e], p);
        robin_diag[k] += trace.weights[e] * nu;
        sys.rhs[k] += trace.weights[e] * nu * p.sbar;
        if (!hooks.robin_flux.empty()) sys.rhs[k] += trace.weights[e] * hooks.robin_flux[e];
    }

    const int nx = grid.nx();
    const int ny = grid.ny();
    m.row_ptr.push_back(0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = grid.index(i, j);
            const double w = grid.node_weight(i, j);
            const double phi_old = porosity(state_old.c[k], p);
            double diag = w * (phi_new[k] / dt + p.lambda * phi_new[k] * c_new[k]) + robin_diag[k];
            double offsum = 0.0;

            // face coefficient: mean porosity times face length over spacing
            auto coupling = [&](std::size_t other, double face_len, double h) {
                return 0.5 * (phi_new[k] + phi_new[other]) * face_len / h;
            };
            double a_south = 0.0, a_west = 0.0, a_east = 0.0, a_north = 0.0;
            if (j > 0) a_south = coupling(grid.index(i, j - 1), grid.wx(i), grid.hy());
            if (i > 0) a_west = coupling(grid.index(i - 1, j), grid.wy(j), grid.hx());
            if (i < nx - 1) a_east = coupling(grid.index(i + 1, j), grid.wy(j), grid.hx());
            if (j < ny - 1) a_north = coupling(grid.index(i, j + 1), grid.wx(i), grid.hy());
            offsum = a_south + a_west + a_east + a_north;
            diag += offsum;

            if (j > 0) {
                m.col.push_back(grid.index(i, j - 1));
                m.val.push_back(-a_south);
            }
            if (i > 0) {
                m.col.push_back(grid.index(i - 1, j));
                m.val.push_back(-a_west);
            }
            m.col.push_back(k);
            m.val.push_back(diag);
            if (i < nx - 1) {
                m.col.push_back(grid.index(i + 1, j));
                m.val.push_back(-a_east);
            }
            if (j < ny - 1) {
                m.col.push_back(grid.index(i, j + 1));
                m.val.push_back(-a_north);
            }
            m.row_ptr.push_back(m.col.size());

            sys.rhs[k] += w * phi_old * state_old.s[k] / dt;
            if (!hooks.source.empty()) sys.rhs[k] += w * hooks.source[k];
            if (diag < offsum) sys.diagonally_dominant = false;
        }
    }
    return sys;
}

CgResult cg_solve(const LinearSystem& sys, std::span<const double> x0, double rel_tol, int max_iter) {
    const CsrMatrix& a = sys.matrix;
    const std::size_t n = a.n;
    if (sys.rhs.size() != n || (!x0.empty() && x0.size() != n)) {
        throw std::invalid_argument("cg_solve: dimension mismatch");
    }
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw std::invalid_argument("cg_solve: rel_tol must lie in (0, 1)");
    if (max_iter <= 0) max_iter = static_cast<int>(10 * n);

    CgResult out;
    const double bnorm = norm2(sys.rhs);
    if (bnorm == 0.0) {
        out.x.assign(n, 0.0);
        return out;
    }
    const double target = rel_tol * bnorm;

    out.x = x0.empty() ? std::vector<double>(n, 0.0) : std::vector<double>(x0.begin(), x0.end());
    std::vector<double> inv_diag = a.diagonal();
    for (double& d : inv_diag) {
        if (!(d > 0.0)) throw SolverError("cg_solve: non-positive diagonal entry", {});
        d = 1.0 / d;
    }

    std::vector<double> r(n), z(n), dir(n), q(n);
    a.multiply(out.x, q);
    for (std::size_t k = 0; k < n; ++k) r[k] = sys.rhs[k] - q[k];
    double rnorm = norm2(r);
    std::vector<double> history{rnorm};

    for (std::size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
    dir = z;
    double rz = dot(r, z);

    while (rnorm > target && out.iterations < max_iter) {
        a.multiply(dir, q);
        const double curvature = dot(dir, q);
        if (!(curvature > 0.0)) {
            throw SolverError("cg_solve: matrix is not positive definite", history);
        }
        const double alpha = rz / curvature;
        for (std::size_t k = 0; k < n; ++k) {
            out.x[k] += alpha * dir[k];
            r[k] -= alpha * q[k];
        }
        ++out.iterations;
        rnorm = norm2(r);
        if (rnorm <= target) {
            // confirm against the true residual; the recurrence drifts
            a.multiply(out.x, q);
            for (std::size_t k = 0; k < n; ++k) r[k] = sys.rhs[k] - q[k];
            rnorm = norm2(r);
        }
        history.push_back(rnorm);
        if (rnorm <= target) break;
        for (std::size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t k = 0; k < n; ++k) dir[k] = z[k] + beta * dir[k];
    }
    out.residual = rnorm;
    if (rnorm > target) {
        std::ostringstream msg;
        msg << "cg_solve: no convergence after " << out.iterations << " iterations, residual "
            << rnorm << " > " << target;
        throw SolverError(msg.str(), std::move(history));
    }
    return out;
}

double BalanceTerms::scale() const {
    return std::max({std::abs(storage_new), std::abs(storage_old), std::abs(reaction),
                     std::abs(inflow), std::abs(source)});
}

double BalanceTerms::relative() const {
    const double sc = scale();
    return sc > 0.0 ? std::abs(residual()) / sc : std::abs(residual());
}

BalanceTerms balance_terms(const Grid2D& grid, const BoundaryTrace& trace,
                           const FieldState& state_old, const FieldState& state_new, double dt,
                           const PhysParams& p, const AssemblyHooks& hooks) {
    BalanceTerms b;
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            const std::size_t k = grid.index(i, j);
            const double w = grid.node_weight(i, j);
            const double phi_new = porosity(state_new.c[k], p);
            b.storage_new += w * phi_new * state_new.s[k] / dt;
            b.storage_old += w * porosity(state_old.c[k], p) * state_old.s[k] / dt;
            b.reaction += p.lambda * w * phi_new * state_new.c[k] * state_new.s[k];
            if (!hooks.source.empty()) b.source += w * hooks.source[k];
        }
    }
    for (std::size_t e = 0; e < trace.size(); ++e) {
        const double s = state_new.s[trace.nodes[e]];
        double flux = nu_eval(state_new.r[e], p) * (p.sbar - s);
        if (!hooks.robin_flux.empty()) flux += hooks.robin_flux[e];
        b.inflow += trace.weights[e] * flux;
    }
    return b;
}

FieldState step(const FieldState& state, double dt, const Grid2D& grid, const BoundaryTrace& trace,
                const PhysParams& p, const StepOptions& opts, StepReport* report) {
    const std::size_t n = grid.size();
    const std::size_t m = trace.size();
    if (state.s.size() != n || state.c.size() != n || state.r.size() != m) {
        throw std::invalid_argument("step: state does not match grid");
    }
    if (opts.picard_iters < 1) throw std::invalid_argument("step: picard_iters must be >= 1");

    FieldState next;
    next.t = state.t + dt;
    next.c.resize(n);
    next.s = state.s;
    std::vector<double> s_frozen = state.s;
    std::vector<double> c_trace(m), s_trace(m);
    StepReport rep;

    for (int pass = 0; pass < opts.picard_iters; ++pass) {
        // kinetics see the nonnegative part of s; tiny negatives are solver noise
        for (std::size_t k = 0; k < n; ++k) {
            next.c[k] = c_update_exact(state.c[k], std::max(s_frozen[k], 0.0), dt, p);
        }
        for (std::size_t e = 0; e < m; ++e) {
            c_trace[e] = next.c[trace.nodes[e]];
            s_trace[e] = std::max(s_frozen[trace.nodes[e]], 0.0);
        }
        RugosityUpdate ru = step_r(state.r, c_trace, s_trace, dt, p);
        next.r = std::move(ru.r);
        next.xi = std::move(ru.xi);

        const LinearSystem sys = assemble_s_system(grid, trace, state, next.c, next.r, dt, p);
        CgResult sol = cg_solve(sys, next.s, opts.cg_rel_tol);
        rep.cg_iterations += sol.iterations;
        rep.cg_residual = sol.residual;
        rep.diagonally_dominant = rep.diagonally_dominant && sys.diagonally_dominant;
        next.s = std::move(sol.x);
        s_frozen = next.s;
    }
    if (report != nullptr) {
        rep.balance = balance_terms(grid, trace, state, next, dt, p);
        *report = rep;
    }
    return next;
}

}  // namespace sulphsim
