#ifndef AAROC_ROM_HPP
#define AAROC_ROM_HPP

// Reduced-order machinery: reduced basis, time partition, per-segment
// collocation sets, the hyper-reduced online solver, reduced residuals
// and error indicators, and the relative-error metric.

#include <algorithm>
#include <memory>
#include <utility>
#include <vector>

#include "aaroc/linalg.hpp"
#include "aaroc/problem.hpp"

namespace aaroc {

// ---------------------------------------------------------------------------
// Time partition: contiguous near-uniform segments over step indices 1..N_t
// (index 0 is the initial condition and belongs to no segment).

struct TimePartition {
    long n_steps = 0;
    // inclusive [first, last] time-step index per segment
    std::vector<std::pair<long, long>> bounds;

    long n_segments() const { return static_cast<long>(bounds.size()); }
};

inline TimePartition partition_time(long n_steps, long n_segments) {
    if (n_segments < 1 || n_segments > n_steps)
        throw InvalidPartition("partition_time: need 1 <= n_segments <= n_steps");
    TimePartition part;
    part.n_steps = n_steps;
    const long base = n_steps / n_segments;
    const long rem = n_steps % n_segments;
    long start = 1;
    for (long j = 0; j < n_segments; ++j) {
        const long len = base + (j < rem ? 1 : 0);
        part.bounds.emplace_back(start, start + len - 1);
        start += len;
    }
    return part;
}

inline long segment_of(const TimePartition& part, long time_index) {
    if (time_index < 1 || time_index > part.n_steps)
        throw IndexOutOfRange("segment_of: time index outside 1..N_t");
    for (size_t j = 0; j < part.bounds.size(); ++j)
        if (time_index >= part.bounds[j].first && time_index <= part.bounds[j].second)
            return static_cast<long>(j);
    throw IndexOutOfRange("segment_of: index not covered");
}

// ---------------------------------------------------------------------------
// Reduced basis: orthonormal columns (modified Gram-Schmidt with one
// reorthogonalization pass) plus the upper-triangular factor linking the
// stored columns to the raw snapshots, and per-column (mu, t) provenance.

struct BasisProvenance {
    Parameter mu;
    long time_index = 0;
};

struct ReducedBasis {
    Mat V;                                 // N x n, orthonormal columns
    Mat R;                                 // n x n upper-triangular, raw = V R
    std::vector<BasisProvenance> provenance;

    Index dim() const { return V.cols(); }
    Index n_dof() const { return V.rows(); }

    // Appends a raw snapshot column. Returns false (and leaves the basis
    // unchanged) when the remainder after orthogonalization falls below
    // drop_tol relative to the snapshot norm.
    bool append(const Vec& raw, BasisProvenance prov, double drop_tol = 1e-12) {
        check_finite(raw, "basis snapshot");
        const Index n = V.cols();
        if (n == 0) {
            const double nrm = raw.norm();
            if (nrm == 0.0) return false;
            V = raw / nrm;
            R = Mat::Constant(1, 1, nrm);
            provenance = {std::move(prov)};
            return true;
        }
        if (raw.size() != V.rows()) throw DimensionMismatch("basis append: length mismatch");
        Vec w = raw;
        Vec h = V.transpose() * w;
        w.noalias() -= V * h;
        Vec h2 = V.transpose() * w;
        w.noalias() -= V * h2;
        h += h2;
        const double nrm = w.norm();
        if (nrm <= drop_tol * raw.norm()) return false;
        V.conservativeResize(Eigen::NoChange, n + 1);
        V.col(n) = w / nrm;
        Mat Rnew = Mat::Zero(n + 1, n + 1);
        Rnew.topLeftCorner(n, n) = R;
        Rnew.block(0, n, n, 1) = h;
        Rnew(n, n) = nrm;
        R = std::move(Rnew);
        provenance.push_back(std::move(prov));
        return true;
    }

    // Removes the most recently appended column (exact inverse of append).
    void pop() {
        const Index n = V.cols();
        if (n == 0) throw DimensionMismatch("basis pop: empty basis");
        V.conservativeResize(Eigen::NoChange, n - 1);
        Mat Rnew = R.topLeftCorner(n - 1, n - 1);
        R = std::move(Rnew);
        provenance.pop_back();
    }
};

inline Vec lift(const ReducedBasis& basis, const Vec& c) {
    if (c.size() != basis.dim()) throw DimensionMismatch("lift: coefficient length mismatch");
    return basis.V * c;
}

// ---------------------------------------------------------------------------
// Collocation bookkeeping. Per segment: GEIM solution points (one per
// basis vector), EIM residual points (one per residual basis vector) and
// enrichment points with the greedy iteration that added them.

struct GeimFunctionalRecord {
    long segment = 0;
    Index grid = 0;
    long time_index = 0;
    Parameter mu;
};

struct SegmentColloc {
    IndexList x_solution;              // GEIM-selected
    IndexList x_eim;                   // EIM-selected, paired with residual_basis columns
    IndexList x_enrich;                // adaptive enrichment
    std::vector<long> eim_iter;        // basis size at which each EIM point was added
    std::vector<long> enrich_iter;     // basis size at which each enrich point was added
    Mat residual_basis;                // N x |x_eim|, unit-lower-triangular at x_eim rows
    Mat sigma;                         // [sigma_i(xi_k)], records x basis columns
    std::vector<GeimFunctionalRecord> geim_records;
    IndexList selector_;               // sorted dedup union, kept current via rebuild_selector

    void rebuild_selector() {
        IndexSet seen;
        selector_.clear();
        for (const auto* list : {&x_solution, &x_eim, &x_enrich})
            for (Index x : *list)
                if (seen.insert(x).second) selector_.push_back(x);
        std::sort(selector_.begin(), selector_.end());
    }
    const IndexList& selector() const { return selector_; }
    IndexSet point_set() const {
        IndexSet s;
        for (const auto* list : {&x_solution, &x_eim, &x_enrich}) s.insert(list->begin(), list->end());
        return s;
    }
};

struct ReducedModel {
    std::shared_ptr<const FomProblem> problem;
    ReducedBasis basis;
    TimePartition partition;
    std::vector<SegmentColloc> segments;

    Index dim() const { return basis.dim(); }
    const IndexList& selector(long j) const { return segments[static_cast<size_t>(j)].selector(); }
};

// ---------------------------------------------------------------------------
// Online solve

struct OnlineSolution {
    Mat coefficients;              // n x (N_t + 1); column 0 projects the IC
    std::vector<double> eps_rr;    // size N_t + 1; eps_rr[0] = 0
    std::vector<int> picard_iters; // per step, implicit problems only
};

namespace detail {

// Restricted linear(ized) system M c = rhs equivalent to
// residual(V c, ...) = 0 on the selected rows, obtained by probing the
// affine row map with each basis column.
template <typename RowFn>
inline void probe_restricted_system(const RowFn& rows_of, const Mat& V, Mat& M, Vec& rhs) {
    const Index n = V.cols();
    const Vec zero = Vec::Zero(V.rows());
    const Vec base = rows_of(zero);
    M.resize(base.size(), n);
    for (Index k = 0; k < n; ++k) M.col(k) = rows_of(V.col(k)) - base;
    rhs = -base;
}

inline void check_full_rank(const Eigen::ColPivHouseholderQR<Mat>& qr, Index n) {
    const auto& R = qr.matrixR();
    double dmax = 0.0;
    for (Index i = 0; i < n; ++i) dmax = std::max(dmax, std::abs(R(i, i)));
    if (dmax == 0.0 || std::abs(R(n - 1, n - 1)) < 1e-12 * dmax)
        throw RankDeficient("restricted basis rows are rank deficient");
}

} // namespace detail

// One hyper-reduced time step: minimizes the restricted residual of the
// lifted reduced state over the given selector rows. Explicit problems
// need one linear least-squares solve; implicit ones run Picard in
// reduced coordinates.
inline Vec online_step(const ReducedModel& model, const Vec& c_prev, double t_i,
                       const Parameter& mu, const IndexList& selector,
                       double picard_tol = 1e-8, int picard_max = 50, int* iters_out = nullptr) {
    const auto& prob = *model.problem;
    const Mat& V = model.basis.V;
    if (static_cast<Index>(selector.size()) < V.cols())
        throw RankDeficient("online_step: selector smaller than basis dimension");
    const Vec u_prev = V * c_prev;
    Mat M;
    Vec rhs;
    if (prob.explicit_scheme()) {
        detail::probe_restricted_system(
            [&](const Vec& w) { return prob.residual_rows(w, u_prev, t_i, mu, selector); }, V, M, rhs);
        if (iters_out) *iters_out = 1;
        return solve_least_squares(M, rhs);
    }
    Vec c = c_prev;
    Vec freeze = u_prev;
    for (int it = 1; it <= picard_max; ++it) {
        detail::probe_restricted_system(
            [&](const Vec& w) {
                return prob.linearized_residual_rows(w, freeze, u_prev, t_i, mu, selector);
            },
            V, M, rhs);
        const Vec c_next = solve_least_squares(M, rhs);
        const double delta = (c_next - c).cwiseAbs().maxCoeff();
        c = c_next;
        freeze = V * c;
        if (delta <= picard_tol) {
            if (iters_out) *iters_out = it;
            return c;
        }
    }
    throw PicardNotConverged("online_step: reduced Picard iteration did not converge", -1, picard_max);
}

inline Vec reduced_residual(const ReducedModel& model, const Vec& c_i, const Vec& c_prev,
                            double t_i, const Parameter& mu, const IndexList& selector) {
    const Mat& V = model.basis.V;
    return model.problem->residual_rows(V * c_i, V * c_prev, t_i, mu, selector);
}

inline double segment_error(const Vec& residual) {
    return residual.size() == 0 ? 0.0 : residual.cwiseAbs().maxCoeff();
}

struct IndicatorTotals {
    double total = 0.0;
    std::vector<double> per_segment;
};

// Sums the per-time-step restricted residual norms over the whole time
// history, and per segment (needed by the per-segment EIM pair choice).
inline IndicatorTotals error_indicator_total(const std::vector<double>& per_time_errors,
                                             const TimePartition& part) {
    if (static_cast<long>(per_time_errors.size()) != part.n_steps + 1)
        throw MissingTimeIndex("error_indicator_total: need values for indices 1..N_t");
    IndicatorTotals out;
    out.per_segment.assign(static_cast<size_t>(part.n_segments()), 0.0);
    for (long j = 0; j < part.n_segments(); ++j) {
        double s = 0.0;
        for (long i = part.bounds[static_cast<size_t>(j)].first;
             i <= part.bounds[static_cast<size_t>(j)].second; ++i)
            s += per_time_errors[static_cast<size_t>(i)];
        out.per_segment[static_cast<size_t>(j)] = s;
        out.total += s;
    }
    return out;
}

// Marches the online solve over the whole time grid, switching the
// selector by segment, recording the restricted residual norm per step.
// Divergence of the reduced solve is not fatal during training sweeps:
// the remaining steps get a saturated indicator value so the greedy
// loop flags that parameter maximally (deterministically).
inline OnlineSolution rom_solve_trajectory(const ReducedModel& model, const Parameter& mu,
                                           bool saturate_on_divergence = false) {
    const auto& prob = *model.problem;
    const Mat& V = model.basis.V;
    const Index n = V.cols();
    const TimeGrid& tg = prob.time_grid();
    const long n_steps = tg.n_steps;
    constexpr double kSaturated = 1e300;

    OnlineSolution sol;
    sol.coefficients = Mat::Zero(n, n_steps + 1);
    sol.eps_rr.assign(static_cast<size_t>(n_steps) + 1, 0.0);
    if (!prob.explicit_scheme()) sol.picard_iters.assign(static_cast<size_t>(n_steps) + 1, 0);

    // initial reduced coefficients: least-squares projection of the IC
    const Vec u0 = prob.initial_condition();
    Eigen::HouseholderQR<Mat> qr0(V);
    sol.coefficients.col(0) = qr0.solve(u0);

    if (prob.explicit_scheme()) {
        // For explicit-convention problems the residual Jacobian in u_i is
        // time-independent, so each segment's restricted matrix is probed
        // and factorized once.
        const long n_seg = model.partition.n_segments();
        std::vector<Mat> Ms(static_cast<size_t>(n_seg));
        std::vector<Eigen::ColPivHouseholderQR<Mat>> qrs(static_cast<size_t>(n_seg));
        const Vec zero = Vec::Zero(V.rows());
        for (long j = 0; j < n_seg; ++j) {
            const IndexList& sel = model.selector(j);
            if (static_cast<Index>(sel.size()) < n)
                throw RankDeficient("rom_solve_trajectory: selector smaller than basis dimension");
            const double t_probe = tg.time_at(model.partition.bounds[static_cast<size_t>(j)].first);
            Vec base = prob.residual_rows(zero, zero, t_probe, mu, sel);
            Mat& M = Ms[static_cast<size_t>(j)];
            M.resize(static_cast<Index>(sel.size()), n);
            for (Index k = 0; k < n; ++k)
                M.col(k) = prob.residual_rows(V.col(k), zero, t_probe, mu, sel) - base;
            qrs[static_cast<size_t>(j)].compute(M);
            detail::check_full_rank(qrs[static_cast<size_t>(j)], n);
        }
        Vec u_prev(V.rows()), base, rhs, c = sol.coefficients.col(0);
        bool diverged = false;
        for (long i = 1; i <= n_steps; ++i) {
            if (diverged) {
                sol.eps_rr[static_cast<size_t>(i)] = kSaturated;
                continue;
            }
            const long j = segment_of(model.partition, i);
            const IndexList& sel = model.selector(j);
            u_prev.noalias() = V * c;
            base = prob.residual_rows(zero, u_prev, tg.time_at(i), mu, sel);
            rhs = -base;
            Vec c_next = qrs[static_cast<size_t>(j)].solve(rhs);
            if (!c_next.allFinite() || c_next.cwiseAbs().maxCoeff() > 1e100) {
                if (!saturate_on_divergence) throw Diverged("rom_solve_trajectory: reduced solve diverged");
                diverged = true;
                sol.eps_rr[static_cast<size_t>(i)] = kSaturated;
                continue;
            }
            sol.eps_rr[static_cast<size_t>(i)] =
                segment_error(Ms[static_cast<size_t>(j)] * c_next - rhs);
            c = c_next;
            sol.coefficients.col(i) = c;
        }
        return sol;
    }

    Vec c = sol.coefficients.col(0);
    bool diverged = false;
    for (long i = 1; i <= n_steps; ++i) {
        if (diverged) {
            sol.eps_rr[static_cast<size_t>(i)] = kSaturated;
            continue;
        }
        const long j = segment_of(model.partition, i);
        const IndexList& sel = model.selector(j);
        try {
            int iters = 0;
            Vec c_next = online_step(model, c, tg.time_at(i), mu, sel, 1e-8, 50, &iters);
            if (!c_next.allFinite() || c_next.cwiseAbs().maxCoeff() > 1e100) throw Diverged("reduced state blew up");
            sol.picard_iters[static_cast<size_t>(i)] = iters;
            sol.eps_rr[static_cast<size_t>(i)] =
                segment_error(reduced_residual(model, c_next, c, tg.time_at(i), mu, sel));
            c = c_next;
            sol.coefficients.col(i) = c;
        } catch (const Error&) {
            if (!saturate_on_divergence) throw;
            diverged = true;
            sol.eps_rr[static_cast<size_t>(i)] = kSaturated;
        }
    }
    return sol;
}

// Mean over test parameters of the space-time Frobenius relative error.
inline double relative_error_En(const std::vector<SnapshotMatrix>& fom_trajs,
                                const std::vector<SnapshotMatrix>& rom_trajs) {
    if (fom_trajs.size() != rom_trajs.size())
        throw ShapeMismatch("relative_error_En: list length mismatch");
    if (fom_trajs.empty()) throw ShapeMismatch("relative_error_En: empty lists");
    double acc = 0.0;
    for (size_t i = 0; i < fom_trajs.size(); ++i) {
        const auto& U = fom_trajs[i];
        const auto& Uh = rom_trajs[i];
        if (U.rows() != Uh.rows() || U.cols() != Uh.cols())
            throw ShapeMismatch("relative_error_En: trajectory shape mismatch");
        const double ref = U.norm();
        if (ref == 0.0) throw ZeroReference("relative_error_En: zero reference trajectory");
        acc += (U - Uh).norm() / ref;
    }
    return acc / static_cast<double>(fom_trajs.size());
}

// Lifts a full coefficient history to a full-order snapshot matrix.
inline SnapshotMatrix lift_trajectory(const ReducedBasis& basis, const Mat& coefficients) {
    return basis.V * coefficients;
}

} // namespace aaroc

#endif
