#ifndef AAROC_CAVITY_HPP
#define AAROC_CAVITY_HPP

// 2D lid-driven cavity on a staggered MAC grid, parameterized by the
// Reynolds number. State layout is [u; v; p]: u on vertical cell edges
// ((nx+1) x ny), v on horizontal cell edges (nx x (ny+1)), p at cell
// centers (nx x ny). Backward Euler in time; each step solves the
// nonlinear system by Picard iteration with the convective fluxes
// linearized around the previous iterate. Wall-tangential velocities
// enter through ghost reflection; the lid drives u = lid_velocity on
// the top boundary.

#include <Eigen/Sparse>
#include <cmath>
#include <vector>

#include "aaroc/problem.hpp"

namespace aaroc {

class CavityProblem final : public FomProblem {
  public:
    CavityProblem(long nx, long ny, TimeGrid grid, double lid_velocity = 1.0,
                  double picard_tol = 1e-8, int picard_max_iter = 50)
        : nx_(nx), ny_(ny), grid_(grid), lid_(lid_velocity), picard_tol_(picard_tol),
          picard_max_(picard_max_iter), hx_(1.0 / static_cast<double>(nx)),
          hy_(1.0 / static_cast<double>(ny)) {
        if (nx < 2 || ny < 2) throw ValidationError("Cavity: nx, ny >= 2 required");
        nu_ = (nx_ + 1) * ny_;
        nv_ = nx_ * (ny_ + 1);
        np_ = nx_ * ny_;
    }

    Index n_dof() const override { return nu_ + nv_ + np_; }
    const TimeGrid& time_grid() const override { return grid_; }
    bool explicit_scheme() const override { return false; }
    double lid_velocity() const { return lid_; }

    Index iu(long i, long j) const { return j * (nx_ + 1) + i; }
    Index iv(long i, long j) const { return nu_ + j * nx_ + i; }
    Index ip(long i, long j) const { return nu_ + nv_ + j * nx_ + i; }
    Index n_u() const { return nu_; }
    Index n_v() const { return nv_; }
    Index n_p() const { return np_; }

    Vec initial_condition() const override { return Vec::Zero(n_dof()); }

    Vec residual_rows(const Vec& u_i, const Vec& u_prev, double t_i, const Parameter& mu,
                      const IndexList& rows) const override {
        check_state(u_i);
        check_state(u_prev);
        (void)t_i;
        Vec out(static_cast<Index>(rows.size()));
        for (size_t k = 0; k < rows.size(); ++k)
            out[static_cast<Index>(k)] = residual_row(u_i, u_i, u_prev, mu, rows[k], lid_, true);
        return out;
    }

    Vec linearized_residual_rows(const Vec& u_eval, const Vec& freeze, const Vec& u_prev,
                                 double t_i, const Parameter& mu,
                                 const IndexList& rows) const override {
        check_state(u_eval);
        check_state(freeze);
        check_state(u_prev);
        (void)t_i;
        Vec out(static_cast<Index>(rows.size()));
        for (size_t k = 0; k < rows.size(); ++k)
            out[static_cast<Index>(k)] = residual_row(u_eval, freeze, u_prev, mu, rows[k], lid_, true);
        return out;
    }

    // GEIM functional rows: momentum rows carry v/dt, continuity rows have
    // no time term, boundary data homogeneous (lid dropped) so the value
    // depends on v alone.
    Vec geim_rows(const Vec& v, double /*t*/, const Parameter& mu,
                  const IndexList& rows) const override {
        check_state(v);
        const Vec zero = Vec::Zero(n_dof());
        Vec out(static_cast<Index>(rows.size()));
        for (size_t k = 0; k < rows.size(); ++k)
            out[static_cast<Index>(k)] = residual_row(v, v, zero, mu, rows[k], 0.0, true);
        return out;
    }

    SnapshotMatrix solve_trajectory(const Parameter& mu) const override {
        SnapshotMatrix snaps(n_dof(), grid_.n_steps + 1);
        Vec state = initial_condition();
        snaps.col(0) = state;

        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        bool analyzed = false;
        Eigen::SparseMatrix<double> A(n_dof(), n_dof());
        Vec b(n_dof());

        for (long step = 1; step <= grid_.n_steps; ++step) {
            const Vec u_prev = state;
            Vec iterate = u_prev;
            bool converged = false;
            for (int it = 0; it < picard_max_; ++it) {
                assemble_picard(iterate, u_prev, mu, A, b);
                if (!analyzed) {
                    lu.analyzePattern(A);
                    analyzed = true;
                }
                lu.factorize(A);
                if (lu.info() != Eigen::Success)
                    throw FomFailure("cavity Picard factorization failed");
                Vec next = lu.solve(b);
                if (!next.allFinite()) throw Diverged("cavity Picard solve produced non-finite state");
                // pressure defined up to a constant: pin its mean to zero
                const double pmean = next.segment(nu_ + nv_, np_).mean();
                next.segment(nu_ + nv_, np_).array() -= pmean;
                const double delta = (next - iterate).cwiseAbs().maxCoeff();
                iterate = next;
                if (delta <= picard_tol_) {
                    converged = true;
                    break;
                }
            }
            if (!converged)
                throw PicardNotConverged("cavity Picard iteration did not converge", step, picard_max_);
            state = iterate;
            snaps.col(step) = state;
        }
        return snaps;
    }

    // DoFs a residual row reads (superset is fine); used to probe the
    // sparse Picard matrix column-by-column through the row kernel.
    IndexList row_dependencies(Index r) const {
        IndexList deps;
        if (r < nu_) {
            const long i = static_cast<long>(r % (nx_ + 1)), j = static_cast<long>(r / (nx_ + 1));
            deps.push_back(iu(i, j));
            if (i == 0 || i == nx_) return deps;
            deps.push_back(iu(i - 1, j));
            deps.push_back(iu(i + 1, j));
            if (j > 0) deps.push_back(iu(i, j - 1));
            if (j < ny_ - 1) deps.push_back(iu(i, j + 1));
            deps.push_back(iv(i - 1, j));
            deps.push_back(iv(i, j));
            deps.push_back(iv(i - 1, j + 1));
            deps.push_back(iv(i, j + 1));
            deps.push_back(ip(i - 1, j));
            deps.push_back(ip(i, j));
        } else if (r < nu_ + nv_) {
            const Index rv = r - nu_;
            const long i = static_cast<long>(rv % nx_), j = static_cast<long>(rv / nx_);
            deps.push_back(iv(i, j));
            if (j == 0 || j == ny_) return deps;
            deps.push_back(iv(i, j - 1));
            deps.push_back(iv(i, j + 1));
            if (i > 0) deps.push_back(iv(i - 1, j));
            if (i < nx_ - 1) deps.push_back(iv(i + 1, j));
            deps.push_back(iu(i, j - 1));
            deps.push_back(iu(i, j));
            deps.push_back(iu(i + 1, j - 1));
            deps.push_back(iu(i + 1, j));
            deps.push_back(ip(i, j - 1));
            deps.push_back(ip(i, j));
        } else {
            const Index rp = r - nu_ - nv_;
            const long i = static_cast<long>(rp % nx_), j = static_cast<long>(rp / nx_);
            deps.push_back(iu(i, j));
            deps.push_back(iu(i + 1, j));
            deps.push_back(iv(i, j));
            deps.push_back(iv(i, j + 1));
        }
        return deps;
    }

  private:
    // One row of the Picard-linearized residual. `eval` carries the
    // unknown, `freeze` the advecting velocity; eval == freeze gives the
    // plain nonlinear residual. `lid` is the lid velocity entering the
    // ghost reflections. Continuity rows ignore the time term.
    double residual_row(const Vec& eval, const Vec& freeze, const Vec& prev, const Parameter& mu,
                        Index r, double lid, bool with_time) const {
        if (r < 0 || r >= n_dof()) throw IndexOutOfRange("cavity residual row out of range");
        const double re = mu[0];
        const double dt = grid_.dt;

        if (r < nu_) { // x-momentum
            const long i = static_cast<long>(r % (nx_ + 1)), j = static_cast<long>(r / (nx_ + 1));
            if (i == 0 || i == nx_) return eval[r]; // wall-normal Dirichlet
            const double time = with_time ? (eval[r] - prev[r]) / dt : 0.0;

            auto uc = [&](const Vec& s, long ci) { return 0.5 * (s[iu(ci, j)] + s[iu(ci + 1, j)]); };
            const double convx = (uc(freeze, i) * uc(eval, i) - uc(freeze, i - 1) * uc(eval, i - 1)) / hx_;

            // corner averages at (i, jc): u-bar via ghost reflection, v-bar from DoFs
            auto ubar = [&](const Vec& s, long jc) {
                if (jc == 0) return 0.0;                                      // bottom wall
                if (jc == ny_) return lid;                                    // lid
                return 0.5 * (s[iu(i, jc - 1)] + s[iu(i, jc)]);
            };
            auto vbar = [&](const Vec& s, long jc) { return 0.5 * (s[iv(i - 1, jc)] + s[iv(i, jc)]); };
            const double convy = (vbar(freeze, j + 1) * ubar(eval, j + 1) -
                                  vbar(freeze, j) * ubar(eval, j)) / hy_;

            const double press = (eval[ip(i, j)] - eval[ip(i - 1, j)]) / hx_;

            const double u_up = (j < ny_ - 1) ? eval[iu(i, j + 1)] : 2.0 * lid - eval[iu(i, j)];
            const double u_dn = (j > 0) ? eval[iu(i, j - 1)] : -eval[iu(i, j)];
            const double diff =
                (eval[iu(i + 1, j)] - 2.0 * eval[r] + eval[iu(i - 1, j)]) / (hx_ * hx_) +
                (u_up - 2.0 * eval[r] + u_dn) / (hy_ * hy_);

            return time + convx + convy + press - diff / re;
        }

        if (r < nu_ + nv_) { // y-momentum
            const Index rv = r - nu_;
            const long i = static_cast<long>(rv % nx_), j = static_cast<long>(rv / nx_);
            if (j == 0 || j == ny_) return eval[r]; // wall-normal Dirichlet
            const double time = with_time ? (eval[r] - prev[r]) / dt : 0.0;

            auto vc = [&](const Vec& s, long cj) { return 0.5 * (s[iv(i, cj)] + s[iv(i, cj + 1)]); };
            const double convy = (vc(freeze, j) * vc(eval, j) - vc(freeze, j - 1) * vc(eval, j - 1)) / hy_;

            auto ubar = [&](const Vec& s, long ic) { return 0.5 * (s[iu(ic, j - 1)] + s[iu(ic, j)]); };
            auto vbar = [&](const Vec& s, long ic) {
                if (ic == 0 || ic == nx_) return 0.0; // side walls
                return 0.5 * (s[iv(ic - 1, j)] + s[iv(ic, j)]);
            };
            const double convx = (ubar(freeze, i + 1) * vbar(eval, i + 1) -
                                  ubar(freeze, i) * vbar(eval, i)) / hx_;

            const double press = (eval[ip(i, j)] - eval[ip(i, j - 1)]) / hy_;

            const double v_rt = (i < nx_ - 1) ? eval[iv(i + 1, j)] : -eval[iv(i, j)];
            const double v_lt = (i > 0) ? eval[iv(i - 1, j)] : -eval[iv(i, j)];
            const double diff =
                (v_rt - 2.0 * eval[r] + v_lt) / (hx_ * hx_) +
                (eval[iv(i, j + 1)] - 2.0 * eval[r] + eval[iv(i, j - 1)]) / (hy_ * hy_);

            return time + convx + convy + press - diff / re;
        }

        // continuity (no time term)
        const Index rp = r - nu_ - nv_;
        const long i = static_cast<long>(rp % nx_), j = static_cast<long>(rp / nx_);
        return (eval[iu(i + 1, j)] - eval[iu(i, j)]) / hx_ +
               (eval[iv(i, j + 1)] - eval[iv(i, j)]) / hy_;
    }

    // Builds A x = b equivalent to linearized_residual(x; freeze, prev) = 0,
    // with one continuity row traded for a pressure pin at cell (0, 0).
    void assemble_picard(const Vec& freeze, const Vec& u_prev, const Parameter& mu,
                         Eigen::SparseMatrix<double>& A, Vec& b) const {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<size_t>(n_dof()) * 12);
        Vec probe = Vec::Zero(n_dof());
        const Index pin = ip(0, 0);
        for (Index r = 0; r < n_dof(); ++r) {
            if (r == pin) {
                trips.emplace_back(r, pin, 1.0);
                b[r] = 0.0;
                continue;
            }
            const double base = residual_row(probe, freeze, u_prev, mu, r, lid_, true);
            for (Index d : row_dependencies(r)) {
                probe[d] = 1.0;
                const double coeff = residual_row(probe, freeze, u_prev, mu, r, lid_, true) - base;
                probe[d] = 0.0;
                if (coeff != 0.0) trips.emplace_back(r, d, coeff);
            }
            b[r] = -base;
        }
        A.setFromTriplets(trips.begin(), trips.end());
    }

    long nx_, ny_;
    TimeGrid grid_;
    double lid_;
    double picard_tol_;
    int picard_max_;
    double hx_, hy_;
    Index nu_ = 0, nv_ = 0, np_ = 0;
};

} // namespace aaroc

#endif
