#ifndef AAROC_PROBLEM_HPP
#define AAROC_PROBLEM_HPP

// Abstract full-order model: a time-dependent parametric PDE
// discretization exposing its discrete residual row-wise so the
// hyper-reduced online solver never needs full-order evaluations.

#include <cmath>
#include <memory>
#include <vector>

#include "aaroc/errors.hpp"
#include "aaroc/linalg.hpp"

namespace aaroc {

using Parameter = Vec;

struct TimeGrid {
    double dt = 0.0;
    long n_steps = 0;
    double t_final = 0.0;

    TimeGrid() = default;
    TimeGrid(double dt_, long n_steps_) : dt(dt_), n_steps(n_steps_), t_final(dt_ * static_cast<double>(n_steps_)) {
        if (dt <= 0.0 || n_steps < 0) throw ValidationError("TimeGrid: dt > 0 and n_steps >= 0 required");
    }
    static TimeGrid from_final_time(double dt, double t_final) {
        long n = std::lround(t_final / dt);
        if (std::abs(n * dt - t_final) > 1e-12 * std::max(1.0, std::abs(t_final)))
            throw ValidationError("TimeGrid: t_final is not an integer multiple of dt");
        return TimeGrid(dt, n);
    }
    double time_at(long i) const { return dt * static_cast<double>(i); }
};

// Full-order trajectory, DoF x (N_t + 1); column i is the state at t_i.
using SnapshotMatrix = Mat;

class FomProblem {
  public:
    virtual ~FomProblem() = default;

    virtual Index n_dof() const = 0;
    virtual const TimeGrid& time_grid() const = 0;
    virtual Vec initial_condition() const = 0;

    // True when the FOM marches explicitly; the discrete residual is then
    // evaluated with the spatial operator frozen at the previous state, so
    // the FOM trajectory has exactly zero residual and the online solve
    // stays linear.
    virtual bool explicit_scheme() const = 0;

    // Residual rows of the collocation-form FOM at time t_i. Cost is
    // proportional to |rows| times the stencil size.
    virtual Vec residual_rows(const Vec& u_i, const Vec& u_prev, double t_i,
                              const Parameter& mu, const IndexList& rows) const = 0;

    Vec residual(const Vec& u_i, const Vec& u_prev, double t_i, const Parameter& mu) const {
        return residual_rows(u_i, u_prev, t_i, mu, all_rows());
    }

    // GEIM interpolating functional rows: [v/dt - P_N(v, t; mu)](rows),
    // with homogeneous boundary data so the values depend on v alone.
    virtual Vec geim_rows(const Vec& v, double t, const Parameter& mu,
                          const IndexList& rows) const = 0;

    Vec geim_full(const Vec& v, double t, const Parameter& mu) const {
        return geim_rows(v, t, mu, all_rows());
    }

    // Residual rows with the convective terms linearized around `freeze`
    // (Picard); affine in u_eval. Only required for implicit problems.
    virtual Vec linearized_residual_rows(const Vec& /*u_eval*/, const Vec& /*freeze*/,
                                         const Vec& /*u_prev*/, double /*t_i*/,
                                         const Parameter& /*mu*/, const IndexList& /*rows*/) const {
        throw Error("linearized_residual_rows: not an implicit problem");
    }

    virtual SnapshotMatrix solve_trajectory(const Parameter& mu) const = 0;

    IndexList all_rows() const {
        IndexList rows(static_cast<size_t>(n_dof()));
        for (size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<Index>(i);
        return rows;
    }

  protected:
    void check_state(const Vec& u) const {
        if (u.size() != n_dof()) throw GridMismatch("state length does not match grid DoF");
    }
};

} // namespace aaroc

#endif
