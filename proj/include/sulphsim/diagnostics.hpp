#pragma once

/// @file diagnostics.hpp
/// @brief Invariant auditing, energy functionals and manufactured-solution
/// convergence studies.

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sulphsim/bulk.hpp"
#include "sulphsim/grid.hpp"
#include "sulphsim/model.hpp"

namespace sulphsim {

struct Violation {
    std::string check;  ///< "s_floor", "s_ceiling", "c_bounds", "c_monotone", "r_floor", "r_box", "balance"
    int step = 0;
    std::size_t node = 0;  ///< node index, or trace index for r checks
    double magnitude = 0.0;
};

struct StepSummary {
    int step = 0;
    double t = 0.0;
    double s_min = 0.0, s_max = 0.0;
    double c_min = 0.0, c_max = 0.0;
    double r_min = 0.0, r_max = 0.0;
    double balance_residual = 0.0;
    double balance_relative = 0.0;
};

struct AuditOptions {
    double s_tol = 1e-10;
    double c_tol = 1e-12;
    double r_tol = 1e-12;
    double balance_tol = 1e-8;
    bool check_ceiling = true;  ///< only meaningful when B <= 1/S0 was validated
    bool strict = false;        ///< throw InvariantViolation on the first flagged step
};

class InvariantViolation : public std::runtime_error {
public:
    InvariantViolation(const std::string& what, Violation v) : std::runtime_error(what), v_(std::move(v)) {}
    const Violation& violation() const { return v_; }

private:
    Violation v_;
};

/// Append-only record of a run's invariant checks.
class InvariantReport {
public:
    const std::vector<StepSummary>& steps() const { return steps_; }
    const std::vector<Violation>& violations() const { return violations_; }
    bool passed() const { return violations_.empty(); }
    std::size_t count(const std::string& check) const;
    double worst(const std::string& check) const;

    void append(StepSummary summary, std::vector<Violation> found);

private:
    std::vector<StepSummary> steps_;
    std::vector<Violation> violations_;
};

/// Checks one accepted state. `previous` (optional) enables the c-monotonicity
/// check, `balance` (optional) the balance check. Never modifies the state.
void audit_step(InvariantReport& report, int step, const FieldState& state, const PhysParams& p,
                const BalanceTerms* balance, const AuditOptions& opts = {},
                const FieldState* previous = nullptr);

double energy_E1(const FieldState& state, const Grid2D& grid, const BoundaryTrace& trace,
                 const PhysParams& p);

/// `forcing` per trace entry; empty uses the uniform p.forcing. Returns +inf
/// for an infeasible r in Box mode.
double energy_E2(const FieldState& state, const Grid2D& grid, const BoundaryTrace& trace,
                 const PhysParams& p, std::span<const double> forcing = {});

// --- manufactured solutions --------------------------------------------------

/// Prescribed fields for a manufactured-solution run. c and r are imposed,
/// s is solved for and compared against `s`.
struct ManufacturedSolution {
    std::function<double(double x1, double x2, double t)> s;
    std::function<double(double x1, double x2, double t)> c;
    std::function<double(double x1, double x2, double t)> r;
    /// Volumetric source that makes `s` an exact solution.
    std::function<double(double x1, double x2, double t)> source;
    /// Outward normal derivative of s times phi, at a boundary point of `edge`.
    std::function<double(Edge edge, double x1, double x2, double t)> phi_dn_s;
};

/// s = e^{-t} cos(pi x1) cos(pi x2), c = C0 (0.5 + 0.25 cos(pi x1) e^{-t}),
/// r = rl (0.5 + 0.25 sin(pi x2)) (1 - e^{-t}).
ManufacturedSolution standard_manufactured(const PhysParams& p);

/// s = value everywhere, c = C0/2, r = rl/2.
ManufacturedSolution constant_manufactured(const PhysParams& p, double value);

struct MmsLevelResult {
    int n = 0;
    double dt = 0.0;
    double err_l2 = 0.0;
    double err_max = 0.0;
    int steps = 0;
};

/// Runs the scheme on an n x n grid up to t_final with all four edges exposed.
MmsLevelResult run_mms_level(const ManufacturedSolution& ms, const PhysParams& p, int n, double dt,
                             double t_final, double cg_rel_tol = 1e-10);

enum class MmsStudy { Spatial, Temporal };

struct ConvergenceRow {
    int level = 0;
    double h_or_dt = 0.0;
    double err_l2 = 0.0;
    double err_max = 0.0;
    double order_l2 = 0.0;   ///< NaN on the first row
    double order_max = 0.0;  ///< NaN on the first row
};

struct ConvergenceTable {
    MmsStudy study = MmsStudy::Spatial;
    std::vector<ConvergenceRow> rows;

    void write_csv(std::ostream& os) const;
};

struct MmsOptions {
    PhysParams params{};
    double t_final = 0.1;
    double spatial_dt = 1e-5;
    int spatial_base_n = 17;  ///< 17, 33, 65, 129, ...
    int temporal_n = 129;
    double temporal_base_dt = 0.1;
    double cg_rel_tol = 1e-10;
};

/// Throws std::invalid_argument for levels < 3; propagates SolverError.
ConvergenceTable mms_convergence(MmsStudy study, int levels, const MmsOptions& opts = {});

/// Fills the observed orders from consecutive error ratios.
void fill_orders(ConvergenceTable& table, double refinement_ratio = 2.0);

}  // namespace sulphsim
