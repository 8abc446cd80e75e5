#pragma once

/// @file bulk.hpp
/// @brief Time integration of the bulk unknowns.
///
/// The calcite density c is advanced with the closed-form solution of its
/// kinetics at frozen SO2 concentration. The SO2 concentration s is advanced
/// with backward Euler on a vertex-centered finite-volume discretization:
/// every row is integrated over the dual cell of its node, which makes the
/// matrix symmetric and an M-matrix. Robin exchange acts on exposed edges,
/// isolated edges carry a zero flux.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sulphsim/grid.hpp"
#include "sulphsim/model.hpp"

namespace sulphsim {

struct FieldState {
    double t = 0.0;
    std::vector<double> s;   ///< nodal SO2 concentration
    std::vector<double> c;   ///< nodal calcite density
    std::vector<double> r;   ///< rugosity per exposed-trace entry
    std::vector<double> xi;  ///< constraint multiplier per exposed-trace entry
};

/// Compressed-row sparse matrix.
struct CsrMatrix {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col;
    std::vector<double> val;

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> diagonal() const;
    /// Entry (i, j), zero when not stored.
    double at(std::size_t i, std::size_t j) const;
    bool is_symmetric(double tol = 0.0) const;
};

struct LinearSystem {
    CsrMatrix matrix;
    std::vector<double> rhs;
    /// Weak diagonal dominance of every row with strict dominance in at least one.
    bool diagonally_dominant = true;
};

/// Exact solution of dc/dt = -lambda (A + B c) c s over dt with s frozen.
double c_update_exact(double c_n, double s_frozen, double dt, const PhysParams& p);

/// Optional verification hooks of the s-assembly.
struct AssemblyHooks {
    /// Volumetric source per node; empty means none.
    std::span<const double> source;
    /// Additive boundary flux per exposed-trace entry:
    /// phi d_n s = -nu(r) (s - sbar) + robin_flux.
    std::span<const double> robin_flux;
};

/// Backward-Euler system for s^{n+1} with coefficients phi(c_new), nu(r_new).
/// Throws std::invalid_argument on size mismatch or non-finite input.
LinearSystem assemble_s_system(const Grid2D& grid, const BoundaryTrace& trace,
                               const FieldState& state_old, std::span<const double> c_new,
                               std::span<const double> r_new, double dt, const PhysParams& p,
                               const AssemblyHooks& hooks = {});

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::vector<double> residual_history)
        : std::runtime_error(what), residuals_(std::move(residual_history)) {}

    const std::vector<double>& residual_history() const { return residuals_; }

private:
    std::vector<double> residuals_;
};

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double residual = 0.0;  ///< ||b - A x||_2
};

/// Jacobi-preconditioned conjugate gradients. Stops when
/// ||b - A x||_2 <= rel_tol ||b||_2. max_iter <= 0 selects 10 n.
/// Throws SolverError if the tolerance is not met.
CgResult cg_solve(const LinearSystem& sys, std::span<const double> x0, double rel_tol = 1e-10,
                  int max_iter = 0);

/// Terms of the discrete integral balance of one s-step, all integrated
/// with the dual-cell and trace weights.
struct BalanceTerms {
    double storage_new = 0.0;  ///< sum w phi(c^{n+1}) s^{n+1} / dt
    double storage_old = 0.0;  ///< sum w phi(c^n) s^n / dt
    double reaction = 0.0;     ///< lambda sum w phi c s
    double inflow = 0.0;       ///< sum w_e (nu (sbar - s) + robin_flux)
    double source = 0.0;       ///< sum w f

    double residual() const { return storage_new - storage_old + reaction - inflow - source; }
    double scale() const;
    /// |residual| / scale, or |residual| when every term vanishes.
    double relative() const;
};

BalanceTerms balance_terms(const Grid2D& grid, const BoundaryTrace& trace,
                           const FieldState& state_old, const FieldState& state_new, double dt,
                           const PhysParams& p, const AssemblyHooks& hooks = {});

struct StepOptions {
    int picard_iters = 2;
    double cg_rel_tol = 1e-10;
};

struct StepReport {
    int cg_iterations = 0;
    double cg_residual = 0.0;
    bool diagonally_dominant = true;
    BalanceTerms balance;
};

/// Advances the state by dt. Each Picard pass freezes s, updates c exactly,
/// steps r with the traces of the new c and the frozen s, then solves for s.
FieldState step(const FieldState& state, double dt, const Grid2D& grid, const BoundaryTrace& trace,
                const PhysParams& p, const StepOptions& opts = {}, StepReport* report = nullptr);

}  // namespace sulphsim
