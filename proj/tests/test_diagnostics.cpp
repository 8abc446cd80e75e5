#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "oracles.hpp"
#include "sulphsim/diagnostics.hpp"

using namespace sulphsim;

namespace {

FieldState uniform_state(const Grid2D& g, const BoundaryTrace& t, double s, double c, double r) {
    FieldState st;
    st.s.assign(g.size(), s);
    st.c.assign(g.size(), c);
    st.r.assign(t.size(), r);
    st.xi.assign(t.size(), 0.0);
    return st;
}

}  // namespace

TEST_CASE("audit: rest state passes") {
    PhysParams p;
    const Grid2D g = build_grid(5, 5);
    const BoundaryTrace t = exposed_trace(g);
    const FieldState st = uniform_state(g, t, 0.0, 1.0, 0.2);
    InvariantReport rep;
    audit_step(rep, 0, st, p, nullptr);
    audit_step(rep, 1, st, p, nullptr, {}, &st);
    CHECK(rep.passed());
    CHECK(rep.steps().size() == 2);
}

TEST_CASE("audit: flags an s overshoot with its magnitude") {
    PhysParams p;
    const Grid2D g = build_grid(5, 5);
    const BoundaryTrace t = exposed_trace(g);
    FieldState st = uniform_state(g, t, 0.5, 1.0, 0.2);
    st.s[7] = p.S0 + 0.1;
    InvariantReport rep;
    audit_step(rep, 3, st, p, nullptr);
    REQUIRE(rep.count("s_ceiling") == 1);
    CHECK(rep.violations()[0].node == 7);
    CHECK(rep.violations()[0].step == 3);
    CHECK(rep.worst("s_ceiling") == doctest::Approx(0.1));

    AuditOptions strict;
    strict.strict = true;
    InvariantReport rep2;
    CHECK_THROWS_AS(audit_step(rep2, 3, st, p, nullptr, strict), InvariantViolation);
}

TEST_CASE("audit: floors, monotonicity, box and balance") {
    PhysParams p;
    p.constraint_mode = ConstraintMode::Box;
    const Grid2D g = build_grid(4, 4);
    const BoundaryTrace t = exposed_trace(g);
    const FieldState prev = uniform_state(g, t, 0.5, 0.8, 0.2);
    FieldState st = prev;
    st.s[0] = -1e-6;
    st.c[1] = 0.9;
    st.r[0] = p.R0 + 1.0;
    st.r[1] = -0.5;
    BalanceTerms bal;
    bal.storage_new = 1.0;
    InvariantReport rep;
    audit_step(rep, 1, st, p, &bal, {}, &prev);
    CHECK(rep.count("s_floor") == 1);
    CHECK(rep.count("c_monotone") == 1);
    CHECK(rep.count("r_box") >= 1);
    CHECK(rep.count("r_floor") == 1);
    CHECK(rep.count("balance") == 1);
    CHECK(rep.worst("c_monotone") == doctest::Approx(0.1));
}

TEST_CASE("energy E1") {
    PhysParams p;
    const Grid2D g = build_grid(33, 33);
    const BoundaryTrace t = exposed_trace(g);
    SUBCASE("equilibrium with the atmosphere and no reaction") {
        p.lambda = 0.0;
        const FieldState st = uniform_state(g, t, p.sbar, 0.5, 0.3);
        CHECK(energy_E1(st, g, t, p) == 0.0);
    }
    SUBCASE("empty bulk in clean air") {
        p.sbar = 0.0;
        const FieldState st = uniform_state(g, t, 0.0, 0.5, 0.3);
        CHECK(energy_E1(st, g, t, p) == 0.0);
    }
    SUBCASE("linear profile") {
        // phi = 1, c = 1, lambda = 1, s = x1: 1/2 + 1/6
        p.A = 1.0;
        p.B = 0.0;
        p.lambda = 1.0;
        p.sbar = 0.0;
        FieldState st = uniform_state(g, t, 0.0, 1.0, 0.3);
        for (std::size_t k = 0; k < g.size(); ++k) st.s[k] = g.x1(g.i_of(k));
        CHECK(std::abs(energy_E1(st, g, t, p) - 2.0 / 3.0) <= 1e-3);
    }
}

TEST_CASE("energy E2") {
    PhysParams p;
    p.psi = {0.5, 1.0, -0.25, 0.125};
    p.forcing = 0.3;
    EdgeTags tags;
    tags[Edge::Bottom] = EdgeTag::Exposed;
    const Grid2D g = build_grid(9, 7, tags);
    const BoundaryTrace t = exposed_trace(g);
    FieldState st = uniform_state(g, t, 0.0, 0.0, 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        st.s[k] = 0.1 + 0.05 * g.i_of(k);
        st.c[k] = 1.0 - 0.02 * g.j_of(k);
    }
    for (std::size_t e = 0; e < t.size(); ++e) st.r[e] = 0.05 * e;

    double ref = 0.0;
    for (std::size_t e = 0; e < t.size(); ++e) {
        const double r = st.r[e], c = st.c[t.nodes[e]], s = st.s[t.nodes[e]];
        const double phi = p.A + p.B * c;
        const double gh = oracle::simpson(
            [&](double q) { return -phi * c * s * (1.0 + q / (1.0 + q)) * p.g; }, 0.0, r);
        const double ps = 0.5 + r - 0.25 * r * r + 0.125 * r * r * r;
        ref += t.weights[e] * (ps + gh - p.forcing * r);
    }
    CHECK(energy_E2(st, g, t, p) == doctest::Approx(ref).epsilon(1e-11));

    SUBCASE("zero rugosity") {
        p.psi = {0.0, 1.0, 0.0, 0.0};
        std::fill(st.r.begin(), st.r.end(), 0.0);
        CHECK(energy_E2(st, g, t, p) == 0.0);
    }
    SUBCASE("infeasible in box mode") {
        p.constraint_mode = ConstraintMode::Box;
        st.r[1] = p.R0 + 1.0;
        CHECK(std::isinf(energy_E2(st, g, t, p)));
    }
}

TEST_CASE("zero verification hooks leave the assembly untouched") {
    PhysParams p;
    const Grid2D g = build_grid(9, 9);
    const BoundaryTrace t = exposed_trace(g);
    FieldState st = uniform_state(g, t, 0.2, 0.9, 0.1);
    for (std::size_t k = 0; k < g.size(); ++k) st.s[k] = 0.01 * k;
    std::vector<double> c_new(g.size(), 0.85), zero_src(g.size(), 0.0), zero_flux(t.size(), 0.0);
    const LinearSystem plain = assemble_s_system(g, t, st, c_new, st.r, 1e-3, p);
    const LinearSystem hooked =
        assemble_s_system(g, t, st, c_new, st.r, 1e-3, p, AssemblyHooks{zero_src, zero_flux});
    CHECK(plain.matrix.val == hooked.matrix.val);
    CHECK(plain.rhs == hooked.rhs);
}

TEST_CASE("constant manufactured solution is reproduced to solver tolerance") {
    PhysParams p;
    const ManufacturedSolution ms = constant_manufactured(p, 0.4);
    const MmsLevelResult res = run_mms_level(ms, p, 9, 0.01, 0.05, 1e-13);
    CHECK(res.steps == 5);
    CHECK(res.err_max <= 1e-10);
}

TEST_CASE("manufactured fields are consistent") {
    PhysParams p;
    const ManufacturedSolution ms = standard_manufactured(p);
    // initial rugosity vanishes and the fields respect their bounds
    CHECK(ms.r(0.0, 0.3, 0.0) == 0.0);
    for (double t : {0.0, 0.05, 0.1}) {
        for (double x : {0.0, 0.25, 0.5, 1.0}) {
            CHECK(ms.c(x, 0.5, t) >= 0.0);
            CHECK(ms.c(x, 0.5, t) <= p.C0);
        }
    }
    // d_n s vanishes for cos(pi x) on every edge of the unit square
    CHECK(std::abs(ms.phi_dn_s(Edge::Left, 0.0, 0.3, 0.05)) <= 1e-14);
    CHECK(std::abs(ms.phi_dn_s(Edge::Top, 0.6, 1.0, 0.05)) <= 1e-14);

    // source against a finite-difference residual of the bulk equation
    const double x1 = 0.3, x2 = 0.7, t = 0.05, h = 1e-4;
    auto phi = [&](double a, double b, double tt) { return p.A + p.B * ms.c(a, b, tt); };
    auto ps = [&](double a, double b, double tt) { return phi(a, b, tt) * ms.s(a, b, tt); };
    const double dt_term = (ps(x1, x2, t + h) - ps(x1, x2, t - h)) / (2 * h);
    auto flux1 = [&](double a) {
        return phi(a, x2, t) * (ms.s(a + h, x2, t) - ms.s(a - h, x2, t)) / (2 * h);
    };
    auto flux2 = [&](double b) {
        return phi(x1, b, t) * (ms.s(x1, b + h, t) - ms.s(x1, b - h, t)) / (2 * h);
    };
    const double div = (flux1(x1 + h) - flux1(x1 - h)) / (2 * h) + (flux2(x2 + h) - flux2(x2 - h)) / (2 * h);
    const double reaction = p.lambda * phi(x1, x2, t) * ms.s(x1, x2, t) * ms.c(x1, x2, t);
    CHECK(ms.source(x1, x2, t) == doctest::Approx(dt_term - div + reaction).epsilon(1e-5));
}

TEST_CASE("observed orders") {
    ConvergenceTable table;
    table.rows = {{0, 0.1, 1.0, 2.0, 0, 0}, {1, 0.05, 0.25, 1.0, 0, 0}, {2, 0.025, 0.0625, 0.5, 0, 0}};
    fill_orders(table);
    CHECK(std::isnan(table.rows[0].order_l2));
    CHECK(table.rows[1].order_l2 == doctest::Approx(2.0));
    CHECK(table.rows[2].order_max == doctest::Approx(1.0));
    std::ostringstream os;
    table.write_csv(os);
    CHECK(os.str().rfind("level,h_or_dt,err_L2,err_max,order_L2,order_max\n", 0) == 0);
    CHECK_THROWS_AS(mms_convergence(MmsStudy::Spatial, 2), std::invalid_argument);
}
