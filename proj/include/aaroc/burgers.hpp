#ifndef AAROC_BURGERS_HPP
#define AAROC_BURGERS_HPP

// 1D viscous Burgers on [-1, 1] with a time-dependent parametric
// viscosity nu(t) = mu * (sin(0.01 pi t) + 2) and a discontinuous
// initial condition. Conservative first-order upwind convection
// (flux u^2/2, wind by the sign of u), central diffusion, forward
// Euler in time. Left boundary is a Dirichlet inflow, right boundary
// zero-gradient outflow.

#include <cmath>

#include "aaroc/problem.hpp"

namespace aaroc {

inline double burgers_viscosity(double t, double mu) {
    return mu * (std::sin(0.01 * M_PI * t) + 2.0);
}

class BurgersProblem final : public FomProblem {
  public:
    BurgersProblem(long n_cells, TimeGrid grid, double inflow = 2.0, bool convection = true)
        : n_cells_(n_cells), grid_(grid), inflow_(inflow), convection_(convection),
          h_(2.0 / static_cast<double>(n_cells)) {
        if (n_cells < 2) throw ValidationError("Burgers: n_cells >= 2 required");
    }

    Index n_dof() const override { return n_cells_ + 1; }
    const TimeGrid& time_grid() const override { return grid_; }
    bool explicit_scheme() const override { return true; }
    double spacing() const { return h_; }
    double x_at(Index i) const { return -1.0 + h_ * static_cast<double>(i); }

    // Nodal reading of the discontinuous initial profile: inflow value at
    // x = -1, one on [-1/2, -1/3] inclusive, zero elsewhere.
    Vec initial_condition() const override {
        Vec u = Vec::Zero(n_dof());
        u[0] = inflow_;
        for (Index i = 1; i < n_dof(); ++i) {
            const double x = x_at(i);
            if (x >= -0.5 - 1e-14 && x <= -1.0 / 3.0 + 1e-14) u[i] = 1.0;
        }
        return u;
    }

    // Discrete spatial operator P_N(u, t; mu) at one node. Row 0 is the
    // pinned inflow (zero entry); the last node closes the stencils with
    // zero-gradient ghosts.
    double rhs_row(const Vec& u, double t, const Parameter& mu, Index r) const {
        const Index n = n_dof() - 1;
        if (r == 0) return 0.0;
        const double nu = burgers_viscosity(t, mu[0]);
        double conv = 0.0;
        if (convection_) {
            // Godunov interface fluxes: equal to plain upwinding wherever
            // the state has one sign, but Lipschitz across u = 0 (a hard
            // sign switch would make the residual discontinuous in u)
            const double ur = (r < n) ? u[r + 1] : u[r]; // zero-gradient ghost
            conv = -(godunov_flux(u[r], ur) - godunov_flux(u[r - 1], u[r])) / h_;
        }
        const double up = (r < n) ? u[r + 1] : u[r];
        const double diff = nu * (up - 2.0 * u[r] + u[r - 1]) / (h_ * h_);
        return conv + diff;
    }

    Vec rhs(const Vec& u, double t, const Parameter& mu) const {
        check_state(u);
        Vec out(n_dof());
        for (Index r = 0; r < n_dof(); ++r) out[r] = rhs_row(u, t, mu, r);
        return out;
    }

    Vec step_explicit(const Vec& u, double t, const Parameter& mu, double dt) const {
        check_state(u);
        Vec next(n_dof());
        next[0] = inflow_;
        for (Index r = 1; r < n_dof(); ++r) {
            next[r] = u[r] + dt * rhs_row(u, t, mu, r);
            if (std::abs(next[r]) > 1e8)
                throw Diverged("Burgers step diverged (CFL violation?)");
        }
        return next;
    }

    // Explicit-scheme convention: the operator is evaluated at u_prev and
    // t_{i-1}, so the FOM trajectory has residual zero and the residual is
    // linear in u_i (slope 1/dt on every row).
    Vec residual_rows(const Vec& u_i, const Vec& u_prev, double t_i, const Parameter& mu,
                      const IndexList& rows) const override {
        check_state(u_i);
        check_state(u_prev);
        const double dt = grid_.dt;
        Vec out(static_cast<Index>(rows.size()));
        for (size_t k = 0; k < rows.size(); ++k) {
            const Index r = rows[k];
            if (r < 0 || r >= n_dof()) throw IndexOutOfRange("Burgers residual row out of range");
            out[static_cast<Index>(k)] =
                (u_i[r] - u_prev[r]) / dt - rhs_row(u_prev, t_i - dt, mu, r);
        }
        return out;
    }

    Vec geim_rows(const Vec& v, double t, const Parameter& mu, const IndexList& rows) const override {
        check_state(v);
        Vec out(static_cast<Index>(rows.size()));
        for (size_t k = 0; k < rows.size(); ++k) {
            const Index r = rows[k];
            if (r < 0 || r >= n_dof()) throw IndexOutOfRange("Burgers geim row out of range");
            out[static_cast<Index>(k)] = v[r] / grid_.dt - rhs_row(v, t, mu, r);
        }
        return out;
    }

    SnapshotMatrix solve_trajectory(const Parameter& mu) const override {
        SnapshotMatrix snaps(n_dof(), grid_.n_steps + 1);
        Vec u = initial_condition();
        snaps.col(0) = u;
        for (long i = 1; i <= grid_.n_steps; ++i) {
            u = step_explicit(u, grid_.time_at(i - 1), mu, grid_.dt);
            snaps.col(i) = u;
        }
        return snaps;
    }

    // Documented forward-Euler stability bound for this discretization.
    static double cfl_dt_bound(double h, double max_u, double nu_max) {
        return 0.9 * std::min(h / max_u, h * h / (2.0 * nu_max));
    }

  private:
    static double flux(double u) { return 0.5 * u * u; }
    static double godunov_flux(double ul, double ur) {
        return std::max(flux(std::max(ul, 0.0)), flux(std::min(ur, 0.0)));
    }

    long n_cells_;
    TimeGrid grid_;
    double inflow_;
    bool convection_;
    double h_;
};

} // namespace aaroc

#endif
