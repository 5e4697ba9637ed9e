#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "aaroc/burgers.hpp"

using namespace aaroc;

namespace {

Parameter param(double mu) {
    Parameter p(1);
    p[0] = mu;
    return p;
}

BurgersProblem desk_problem(long n_cells = 100, double dt = 1e-4, long n_steps = 100,
                            bool convection = true) {
    return BurgersProblem(n_cells, TimeGrid(dt, n_steps), 2.0, convection);
}

} // namespace

TEST_CASE("viscosity formula") {
    CHECK(burgers_viscosity(0.0, 0.005) == Catch::Approx(0.01));
    CHECK(burgers_viscosity(0.0, 0.1) == Catch::Approx(0.2));
    CHECK(burgers_viscosity(1.0, 0.05) ==
          Catch::Approx(0.05 * (std::sin(0.01 * M_PI) + 2.0)).epsilon(1e-14));
}

TEST_CASE("initial condition matches the piecewise definition") {
    auto prob = desk_problem(120);
    Vec u0 = prob.initial_condition();
    REQUIRE(u0.size() == 121);
    CHECK(u0[0] == 2.0);
    for (Index i = 1; i <= 120; ++i) {
        const double x = prob.x_at(i);
        const double expected = (x >= -0.5 && x <= -1.0 / 3.0) ? 1.0 : 0.0;
        CHECK(u0[i] == expected);
    }
}

TEST_CASE("rhs on a constant state vanishes in the interior") {
    auto prob = desk_problem();
    Vec u = Vec::Constant(prob.n_dof(), 2.0);
    Vec r = prob.rhs(u, 0.3, param(0.07));
    for (Index i = 1; i < prob.n_dof(); ++i) CHECK(r[i] == Catch::Approx(0.0).margin(1e-13));
}

TEST_CASE("rhs convection term matches the upwind stencil on u = x") {
    auto prob = desk_problem(40);
    const double h = prob.spacing();
    Vec u(prob.n_dof());
    for (Index i = 0; i < u.size(); ++i) u[i] = prob.x_at(i) + 3.0; // keep wind positive
    Vec r = prob.rhs(u, 0.0, param(0.0));
    for (Index i : {Index(5), Index(17), Index(30)}) {
        const double fl = 0.5 * u[i] * u[i];
        const double fm = 0.5 * u[i - 1] * u[i - 1];
        // linear in x, so central diffusion contributes zero even for nu > 0
        CHECK(r[i] == Catch::Approx(-(fl - fm) / h).epsilon(1e-12));
    }
}

TEST_CASE("rhs diffusion is exact for quadratics with convection suppressed") {
    auto prob = desk_problem(50, 1e-4, 10, /*convection=*/false);
    Vec u(prob.n_dof());
    for (Index i = 0; i < u.size(); ++i) u[i] = prob.x_at(i) * prob.x_at(i);
    // nu(t) = mu (sin + 2): pick t with sin = 0 so nu = 1 when mu = 0.5
    Vec r = prob.rhs(u, 0.0, param(0.5));
    for (Index i = 1; i + 1 < u.size(); ++i) CHECK(r[i] == Catch::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("step_explicit: fixed point and zero-step identity") {
    auto prob = desk_problem();
    Vec u = Vec::Constant(prob.n_dof(), 2.0);
    Vec next = prob.step_explicit(u, 0.0, param(0.05), 1e-4);
    CHECK((next - u).cwiseAbs().maxCoeff() == Catch::Approx(0.0).margin(1e-13));
    Vec u0 = prob.initial_condition();
    Vec same = prob.step_explicit(u0, 0.0, param(0.05), 0.0);
    CHECK((same - u0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("step_explicit agrees with a brute-force stencil loop") {
    auto prob = desk_problem(80);
    const double h = prob.spacing(), dt = 1e-4, mu = 0.03, t = 0.2;
    Vec u = prob.initial_condition();
    Vec got = prob.step_explicit(u, t, param(mu), dt);
    const double nu = mu * (std::sin(0.01 * M_PI * t) + 2.0);
    const Index n = prob.n_dof() - 1;
    Vec expected(prob.n_dof());
    expected[0] = 2.0;
    auto f = [](double v) { return 0.5 * v * v; };
    for (Index i = 1; i <= n; ++i) {
        double conv;
        if (u[i] >= 0.0)
            conv = -(f(u[i]) - f(u[i - 1])) / h;
        else
            conv = -(f(i < n ? u[i + 1] : u[i]) - f(u[i])) / h;
        const double up = i < n ? u[i + 1] : u[i];
        const double diff = nu * (up - 2.0 * u[i] + u[i - 1]) / (h * h);
        expected[i] = u[i] + dt * (conv + diff);
    }
    CHECK((got - expected).cwiseAbs().maxCoeff() == Catch::Approx(0.0).margin(1e-13));
}

TEST_CASE("step_explicit flags blow-up as Diverged") {
    auto prob = desk_problem(200, 1e-2, 10);
    Vec u = prob.initial_condition();
    CHECK_THROWS_AS([&] {
        for (int k = 0; k < 2000; ++k) u = prob.step_explicit(u, 0.0, param(0.1), 1e-2);
        return u;
    }(), Diverged);
}

TEST_CASE("explicit residual convention: FOM step has zero residual") {
    auto prob = desk_problem();
    const double dt = 1e-4;
    Vec u_prev = prob.initial_condition();
    Vec u_i = prob.step_explicit(u_prev, 0.0, param(0.05), dt);
    Vec r = prob.residual(u_i, u_prev, dt, param(0.05));
    CHECK(r.cwiseAbs().maxCoeff() <= 1e-12);

    Vec u_pert = u_i;
    const Index k = 37;
    const double delta = 0.5;
    u_pert[k] += delta;
    Vec rp = prob.residual(u_pert, u_prev, dt, param(0.05));
    CHECK(rp[k] == Catch::Approx(delta / dt).epsilon(1e-12));
    rp[k] = 0.0;
    CHECK(rp.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("residual_rows equals gathered full residual") {
    auto prob = desk_problem(60);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> dist;
    for (int trial = 0; trial < 1000; ++trial) {
        Vec u_i(prob.n_dof()), u_prev(prob.n_dof());
        for (Index i = 0; i < prob.n_dof(); ++i) {
            u_i[i] = dist(rng);
            u_prev[i] = dist(rng);
        }
        std::uniform_int_distribution<Index> pick(0, prob.n_dof() - 1);
        IndexList rows;
        for (int k = 0; k < 5; ++k) rows.push_back(pick(rng));
        Vec full = prob.residual(u_i, u_prev, 0.01, param(0.02));
        Vec part = prob.residual_rows(u_i, u_prev, 0.01, param(0.02), rows);
        REQUIRE(part.size() == 5);
        for (size_t k = 0; k < rows.size(); ++k)
            CHECK(std::abs(part[static_cast<Index>(k)] - full[rows[k]]) <= 1e-13);
    }
    CHECK(prob.residual_rows(prob.initial_condition(), prob.initial_condition(), 0.01,
                             param(0.02), {})
              .size() == 0);
}

TEST_CASE("trajectory: shape, IC column, shock profile") {
    const long n_cells = 200;
    const double dt = 1e-4;
    const long n_steps = 10000;
    BurgersProblem prob(n_cells, TimeGrid(dt, n_steps));
    SnapshotMatrix traj = prob.solve_trajectory(param(0.095));
    REQUIRE(traj.rows() == n_cells + 1);
    REQUIRE(traj.cols() == n_steps + 1);
    CHECK((traj.col(0) - prob.initial_condition()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(traj.allFinite());

    // final profile: monotone non-increasing front between the inflow
    // plateau and the near-zero outflow state
    Vec uf = traj.col(n_steps);
    CHECK(uf[0] == 2.0);
    for (Index i = 1; i <= n_cells; ++i) CHECK(uf[i] <= uf[i - 1] + 1e-8);
    CHECK(uf[n_cells / 2] > 1.0);     // front has not yet passed the midpoint
    CHECK(uf[n_cells] < 0.1);         // ahead of the front the state is ~0
}

TEST_CASE("self-convergence: halved dt agrees at shared nodes to O(dt)") {
    const long n_cells = 100;
    BurgersProblem coarse(n_cells, TimeGrid(2e-4, 500));
    BurgersProblem fine(n_cells, TimeGrid(1e-4, 1000));
    SnapshotMatrix a = coarse.solve_trajectory(param(0.05));
    SnapshotMatrix b = fine.solve_trajectory(param(0.05));
    double err = 0.0;
    for (long k = 0; k <= 500; ++k)
        err = std::max(err, (a.col(k) - b.col(2 * k)).cwiseAbs().maxCoeff());
    CHECK(err < 0.02); // first-order scheme, dt = 2e-4
    CHECK(err > 0.0);
}

TEST_CASE("geim functional rows match the v/dt - P(v) oracle") {
    auto prob = desk_problem(60);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> dist;
    Vec v(prob.n_dof());
    for (Index i = 0; i < prob.n_dof(); ++i) v[i] = dist(rng);
    const double t = 0.1, dt = prob.time_grid().dt;
    const Parameter mu = param(0.04);
    IndexList rows{0, 3, 30, 59, 60};
    Vec g = prob.geim_rows(v, t, mu, rows);
    Vec rhs = prob.rhs(v, t, mu);
    for (size_t k = 0; k < rows.size(); ++k)
        CHECK(g[static_cast<Index>(k)] ==
              Catch::Approx(v[rows[k]] / dt - rhs[rows[k]]).margin(1e-11));
    Vec z = Vec::Zero(prob.n_dof());
    CHECK(prob.geim_rows(z, t, mu, rows).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cfl bound keeps forward Euler stable on the desk grid") {
    const double h = 2.0 / 200.0;
    const double dt = BurgersProblem::cfl_dt_bound(h, 2.0, 0.1 * 3.0);
    CHECK(dt > 0.0);
    BurgersProblem prob(200, TimeGrid(dt, 200));
    CHECK_NOTHROW(prob.solve_trajectory(param(0.1)));
}
