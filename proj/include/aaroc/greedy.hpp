#ifndef AAROC_GREEDY_HPP
#define AAROC_GREEDY_HPP

// Offline stage: greedy (mu, t) selection, GEIM/EIM collocation
// sampling per time segment, the robustness indicator, adaptive
// collocation enrichment, and adaptive uniform time partitioning with
// restart. AROC and vanilla R2-ROC are degenerate configurations of
// the same driver.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "aaroc/parallel.hpp"
#include "aaroc/rom.hpp"

namespace aaroc {

enum class OfflineMode { AAROC, AROC, R2ROC };

struct GreedyConfig {
    double gamma = 80.0;       // robustness tolerance
    long n0 = 4;               // activation index for the robustness indicator
    double p_adap = 0.2;       // top-percentile fraction for enrichment
    long n_add = 11;           // initial enrichment batch size
    long n_adap_incre = 5;     // enrichment step
    long n_adap_max = 31;      // max candidate points per enrichment loop
    long N_max = 40;           // max basis size
    long N_tpar_max = 8;       // max number of time segments
    double eps_tol = 0.0;      // indicator stopping tolerance
    uint64_t seed = 0;         // RNG seed for the first-parameter choice
    long mu1_index = -1;       // >= 0 overrides the seeded choice

    void validate() const {
        if (!(gamma > 0.0)) throw ValidationError("greedy.gamma > 0 required");
        if (n0 < 1) throw ValidationError("greedy.n0 >= 1 required");
        if (!(p_adap > 0.0 && p_adap <= 1.0)) throw ValidationError("greedy.p_adap in (0,1] required");
        if (n_add < 1) throw ValidationError("greedy.n_add >= 1 required");
        if (N_max < 1) throw ValidationError("greedy.N_max >= 1 required");
        if (N_tpar_max < 1) throw ValidationError("greedy.N_tpar_max >= 1 required");
        if (eps_tol < 0.0) throw ValidationError("greedy.eps_tol >= 0 required");
    }
};

struct IterationRecord {
    long n = 0;        // basis size during the sweep
    long n_tpar = 1;
    long mu_index = -1;
    Parameter mu;
    long t_index = -1; // -1 when the iteration terminated without a new pair
    double delta = 0.0;
    double rho = 0.0;
    std::vector<long> enrich_added; // per segment, this iteration
    long restarts = 0;
};

struct GreedyHistory {
    std::vector<IterationRecord> records;
    long restarts = 0;
};

struct OfflineArtifact {
    ReducedModel model;
    GreedyHistory history;
    long n_tpar = 1;
    long n_adap_total = 0;
    bool truncated = false;
};

// ---------------------------------------------------------------------------
// Selection primitives

// t1 maximizes the spatial spread max_x u - min_x u over all snapshot
// columns; ties go to the smallest time index.
inline long select_initial_pair(const SnapshotMatrix& snapshots) {
    if (snapshots.cols() == 0) throw EmptyCandidateSet("select_initial_pair: empty snapshot matrix");
    long best = 0;
    double best_spread = -1.0;
    for (Index i = 0; i < snapshots.cols(); ++i) {
        const double spread = snapshots.col(i).maxCoeff() - snapshots.col(i).minCoeff();
        if (spread > best_spread) {
            best_spread = spread;
            best = static_cast<long>(i);
        }
    }
    return best;
}

// Argmax of the error indicator over the training set; ties to the
// smallest training-set index.
inline std::pair<size_t, double> greedy_parameter(const std::vector<double>& indicator_values) {
    if (indicator_values.empty()) throw EmptyCandidateSet("greedy_parameter: empty training set");
    size_t best = 0;
    double best_val = indicator_values[0];
    for (size_t i = 1; i < indicator_values.size(); ++i)
        if (indicator_values[i] > best_val) {
            best_val = indicator_values[i];
            best = i;
        }
    return {best, best_val};
}

// Argmax of eps^{RR} over time indices 1..N_t, excluding already sampled
// nodes; ties to the smallest index.
inline long greedy_time(const std::vector<double>& per_time_errors,
                        const std::set<long>& already_sampled) {
    long best = -1;
    double best_val = -1.0;
    for (size_t i = 1; i < per_time_errors.size(); ++i) {
        const long ti = static_cast<long>(i);
        if (already_sampled.count(ti)) continue;
        if (per_time_errors[i] > best_val) {
            best_val = per_time_errors[i];
            best = ti;
        }
    }
    if (best < 0) throw AllTimesSampled("greedy_time: every time node already sampled");
    return best;
}

inline double robustness_indicator(double delta_n, double delta_prev, long n, long n0,
                                   bool has_prev = true) {
    if (n < n0 || !has_prev) return 0.0;
    if (delta_prev == 0.0)
        return delta_n > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return delta_n / delta_prev;
}

// Inverse-CDF sampling of collocation candidates: rank all grid indices
// ascending by |residual|, evaluate the quantile grid
// q_k = 1 - p_adap + k p_adap/(n_adap - 1) via rank = max(1, ceil(q N)),
// deduplicate, and substitute the next-higher-rank unused index for any
// collision with `excluded`.
inline IndexList inverse_cdf_points(const Vec& residual, double p_adap, long n_adap,
                                    const IndexSet& excluded) {
    const Index N = residual.size();
    if (n_adap < 1) throw ValidationError("inverse_cdf_points: n_adap >= 1 required");
    if (N == 0) throw EmptyCandidateSet("inverse_cdf_points: empty residual");
    std::vector<Index> order(static_cast<size_t>(N));
    for (Index i = 0; i < N; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        const double fa = std::abs(residual[a]), fb = std::abs(residual[b]);
        return fa != fb ? fa < fb : a < b;
    });

    IndexSet used = excluded;
    IndexList out;
    for (long k = 0; k < n_adap; ++k) {
        const double q = (n_adap == 1)
                             ? 1.0
                             : 1.0 - p_adap + static_cast<double>(k) * p_adap / static_cast<double>(n_adap - 1);
        long rank = std::max<long>(1, static_cast<long>(std::ceil(q * static_cast<double>(N) - 1e-9)));
        // substitute upward on collisions, downward once the top is exhausted
        long r = rank;
        while (r <= N && used.count(order[static_cast<size_t>(r - 1)])) ++r;
        if (r > N) {
            r = rank - 1;
            while (r >= 1 && used.count(order[static_cast<size_t>(r - 1)])) --r;
            if (r < 1) break; // every grid index is taken
        }
        const Index pick = order[static_cast<size_t>(r - 1)];
        used.insert(pick);
        out.push_back(pick);
    }
    if (out.empty()) throw EmptyCandidateSet("inverse_cdf_points: no available index");
    return out;
}

// ---------------------------------------------------------------------------
// GEIM / EIM point insertion (Algs. 1-2 equivalents, per segment)

// Adds one solution-based collocation point to segment j for the newest
// basis column, and records its interpolating functional. The small
// system treats the functionals as linear over the stored basis columns.
inline Index geim_add_point(ReducedModel& model, long j, const Parameter& mu, long time_index) {
    const auto& prob = *model.problem;
    auto& seg = model.segments[static_cast<size_t>(j)];
    const Mat& V = model.basis.V;
    const Index n_old = static_cast<Index>(seg.x_solution.size());
    const double t = prob.time_grid().time_at(time_index);

    Vec xi_tilde;
    Vec s; // sigma_i(xi_new)
    if (n_old > 0) {
        s.resize(n_old);
        for (Index i = 0; i < n_old; ++i) {
            const auto& rec = seg.geim_records[static_cast<size_t>(i)];
            s[i] = prob.geim_rows(V.col(n_old), prob.time_grid().time_at(rec.time_index), rec.mu,
                                  {rec.grid})[0];
        }
        Eigen::ColPivHouseholderQR<Mat> qr(seg.sigma);
        const auto& Rm = qr.matrixR();
        double dmax = 0.0;
        for (Index i = 0; i < n_old; ++i) dmax = std::max(dmax, std::abs(Rm(i, i)));
        if (dmax == 0.0 || std::abs(Rm(n_old - 1, n_old - 1)) < 1e-12 * dmax)
            throw SingularGeimSystem("GEIM functional matrix is singular");
        const Vec alpha = qr.solve(s);
        xi_tilde = V.col(n_old) - V.leftCols(n_old) * alpha;
    } else {
        xi_tilde = V.col(0);
    }

    const Vec g = prob.geim_full(xi_tilde, t, mu);

    // Accept a candidate point only if the extended functional matrix
    // stays unisolvent; otherwise fall back to the next-best argmax. A
    // point that passes the n x n check here can still render the
    // (n+1) x (n+1) system singular at the *next* iteration, so the
    // extension must be verified at acceptance time.
    Mat sigma = Mat::Zero(n_old + 1, n_old + 1);
    if (n_old > 0) {
        sigma.topLeftCorner(n_old, n_old) = seg.sigma;
        sigma.block(0, n_old, n_old, 1) = s;
    }
    IndexSet tried = seg.point_set();
    Index x_star = -1;
    for (int attempt = 0; attempt < 40; ++attempt) {
        Index cand = -1;
        try {
            cand = argmax_abs(g, tried);
        } catch (const EmptyCandidateSet&) {
            break;
        }
        for (Index k = 0; k <= n_old; ++k)
            sigma(n_old, k) = prob.geim_rows(V.col(k), t, mu, {cand})[0];
        Eigen::ColPivHouseholderQR<Mat> qr2(sigma);
        const auto& R2 = qr2.matrixR();
        double d2 = 0.0;
        for (Index i = 0; i <= n_old; ++i) d2 = std::max(d2, std::abs(R2(i, i)));
        if (d2 > 0.0 && std::abs(R2(n_old, n_old)) >= 1e-12 * d2) {
            x_star = cand;
            break;
        }
        tried.insert(cand);
    }
    if (x_star < 0)
        throw SingularGeimSystem("GEIM functional matrix is singular for every candidate point");

    seg.geim_records.push_back({j, x_star, time_index, mu});
    seg.x_solution.push_back(x_star);
    seg.sigma = std::move(sigma);
    seg.rebuild_selector();
    return x_star;
}

struct EimResult {
    Index point = -1;
    Vec full_residual; // pre-orthogonalization, cached for enrichment
};

// Adds one residual-based collocation point to segment j from the full
// reduced residual at the given (mu, t) pair. `coefficients` is the
// reduced trajectory of mu from the current training sweep.
inline EimResult eim_add_point(ReducedModel& model, long j, const Parameter& mu, long time_index,
                               const Mat& coefficients) {
    const auto& prob = *model.problem;
    auto& seg = model.segments[static_cast<size_t>(j)];
    const Mat& V = model.basis.V;
    const double t = prob.time_grid().time_at(time_index);

    // the coefficients may come from a sweep at a smaller basis dimension
    // (the point is chosen from the residual of the previous iteration's
    // reduced solve); lift with the matching leading columns
    const auto Vc = V.leftCols(coefficients.rows());
    const Vec u_i = Vc * coefficients.col(time_index);
    const Vec u_prev = Vc * coefficients.col(time_index - 1);
    EimResult res;
    res.full_residual = prob.residual(u_i, u_prev, t, mu);

    Vec r_tilde = res.full_residual;
    const Index m = static_cast<Index>(seg.x_eim.size());
    if (m > 0) {
        Mat M(m, m);
        for (Index i = 0; i < m; ++i)
            for (Index k = 0; k < m; ++k) M(i, k) = seg.residual_basis(seg.x_eim[static_cast<size_t>(i)], k);
        Eigen::ColPivHouseholderQR<Mat> qr(M);
        const auto& Rm = qr.matrixR();
        double dmax = 0.0;
        for (Index i = 0; i < m; ++i) dmax = std::max(dmax, std::abs(Rm(i, i)));
        if (dmax == 0.0 || std::abs(Rm(m - 1, m - 1)) < 1e-12 * dmax)
            throw SingularEimSystem("EIM interpolation matrix is singular");
        const Vec alpha = qr.solve(gather(res.full_residual, seg.x_eim));
        r_tilde.noalias() -= seg.residual_basis * alpha;
    }

    if (r_tilde.cwiseAbs().maxCoeff() <= 1e-14)
        throw DegenerateResidual("EIM: residual already captured by the stored basis");

    const Index x_star2 = argmax_abs(r_tilde, seg.point_set());
    r_tilde /= r_tilde[x_star2];

    seg.residual_basis.conservativeResize(V.rows(), m + 1);
    seg.residual_basis.col(m) = r_tilde;
    seg.x_eim.push_back(x_star2);
    seg.eim_iter.push_back(model.basis.dim());
    seg.rebuild_selector();
    res.point = x_star2;
    return res;
}

// ---------------------------------------------------------------------------
// Offline driver

using IterationObserver = std::function<void(const ReducedModel&, const IterationRecord&)>;

namespace detail {

struct SweepData {
    std::vector<double> delta;            // per training parameter
    Mat delta_seg;                        // n_seg x n_mu
    std::vector<std::vector<double>> eps; // per mu, per time index
    std::vector<Mat> coefficients;        // per mu
};

inline SweepData training_sweep(const ReducedModel& model, const std::vector<Parameter>& training) {
    SweepData data;
    const size_t m = training.size();
    data.delta.assign(m, 0.0);
    data.delta_seg = Mat::Zero(model.partition.n_segments(), static_cast<Index>(m));
    data.eps.resize(m);
    data.coefficients.resize(m);
    parallel_for_indexed(m, [&](size_t i) {
        OnlineSolution sol = rom_solve_trajectory(model, training[i], /*saturate_on_divergence=*/true);
        const IndicatorTotals totals = error_indicator_total(sol.eps_rr, model.partition);
        data.delta[i] = totals.total;
        for (long j = 0; j < model.partition.n_segments(); ++j)
            data.delta_seg(j, static_cast<Index>(i)) = totals.per_segment[static_cast<size_t>(j)];
        data.eps[i] = std::move(sol.eps_rr);
        data.coefficients[i] = std::move(sol.coefficients);
    });
    return data;
}

} // namespace detail

// Adaptive collocation enrichment: while the robustness indicator
// exceeds gamma and the candidate budget is not exhausted, sample points
// from the tail of the previous iteration's full residual per segment,
// grow the residual collocation sets, and re-run the training sweep.
// Returns I_aa = true when the indicator was driven back under gamma.
inline bool adaptive_enrich(ReducedModel& model, const GreedyConfig& config, double delta_prev,
                            bool has_prev, long n, const std::vector<Vec>& residual_cache,
                            const std::vector<Parameter>& training, detail::SweepData& sweep,
                            double& delta_n, double& rho, std::vector<long>& added_per_segment,
                            long& n_adap_total) {
    // n_adap is the cumulative size of the event's candidate set; each
    // pass only tops the per-segment enrichment up to that size, so an
    // event never adds more than n_adap_max points per segment in total
    long n_adap = config.n_add;
    std::vector<long> event_added(static_cast<size_t>(model.partition.n_segments()), 0);
    while (rho > config.gamma && n_adap <= config.n_adap_max) {
        bool any_added = false;
        for (long j = 0; j < model.partition.n_segments(); ++j) {
            const Vec& r = residual_cache[static_cast<size_t>(j)];
            if (r.size() == 0) continue;
            auto& seg = model.segments[static_cast<size_t>(j)];
            const long want = n_adap - event_added[static_cast<size_t>(j)];
            if (want <= 0) continue;
            IndexList pts;
            try {
                pts = inverse_cdf_points(r, config.p_adap, want, seg.point_set());
            } catch (const EmptyCandidateSet&) {
                continue; // segment already holds every grid index
            }
            event_added[static_cast<size_t>(j)] += static_cast<long>(pts.size());
            for (Index x : pts) {
                seg.x_enrich.push_back(x);
                seg.enrich_iter.push_back(n);
            }
            seg.rebuild_selector();
            added_per_segment[static_cast<size_t>(j)] += static_cast<long>(pts.size());
            n_adap_total += static_cast<long>(pts.size());
            any_added = true;
        }
        if (!any_added) break;
        sweep = detail::training_sweep(model, training);
        delta_n = greedy_parameter(sweep.delta).second;
        rho = robustness_indicator(delta_n, delta_prev, n, config.n0, has_prev);
        n_adap += config.n_adap_incre;
    }
    return rho <= config.gamma;
}

inline OfflineArtifact run_offline(std::shared_ptr<const FomProblem> problem,
                                   const GreedyConfig& config,
                                   const std::vector<Parameter>& training, OfflineMode mode,
                                   const IterationObserver& observer = {}) {
    config.validate();
    if (training.empty()) throw ValidationError("run_offline: empty training set");
    const TimeGrid& tg = problem->time_grid();
    if (tg.n_steps < 1) throw ValidationError("run_offline: need at least one time step");

    // FOM trajectories are cached across epochs, keyed by parameter index.
    std::map<size_t, SnapshotMatrix> fom_cache;
    auto fom_for = [&](size_t idx) -> const SnapshotMatrix& {
        auto it = fom_cache.find(idx);
        if (it != fom_cache.end()) return it->second;
        try {
            return fom_cache.emplace(idx, problem->solve_trajectory(training[idx])).first->second;
        } catch (const Error& e) {
            throw FomFailure(std::string("FOM solve failed for training parameter ") +
                             std::to_string(idx) + ": " + e.what());
        }
    };

    size_t mu1 = 0;
    if (config.mu1_index >= 0) {
        if (config.mu1_index >= static_cast<long>(training.size()))
            throw ValidationError("mu1_index outside the training set");
        mu1 = static_cast<size_t>(config.mu1_index);
    } else {
        std::mt19937_64 rng(config.seed);
        mu1 = std::uniform_int_distribution<size_t>(0, training.size() - 1)(rng);
    }

    GreedyHistory history;
    OfflineArtifact artifact;
    const long n_tpar_cap = (mode == OfflineMode::AAROC) ? config.N_tpar_max : 1;

    for (long n_tpar = 1; n_tpar <= n_tpar_cap; ++n_tpar) {
        const bool last_epoch = (n_tpar == n_tpar_cap);
        ReducedModel model;
        model.problem = problem;
        model.partition = partition_time(tg.n_steps, std::min(n_tpar, tg.n_steps));
        model.segments.assign(static_cast<size_t>(model.partition.n_segments()), SegmentColloc{});

        const SnapshotMatrix& snaps1 = fom_for(mu1);
        const long t1 = select_initial_pair(snaps1);
        if (!model.basis.append(snaps1.col(t1), {training[mu1], t1}))
            throw FomFailure("run_offline: initial snapshot is identically zero");
        std::set<std::pair<size_t, long>> sampled_pairs{{mu1, t1}};
        for (long j = 0; j < model.partition.n_segments(); ++j)
            geim_add_point(model, j, training[mu1], t1);

        std::vector<Vec> residual_cache(static_cast<size_t>(model.partition.n_segments()));
        double delta_prev = 0.0;
        bool has_prev = false;
        bool aborted = false;
        bool epoch_truncated = false;
        long n_adap_total = 0;

        while (true) {
            const long n = model.dim();
            detail::SweepData sweep = detail::training_sweep(model, training);
            double delta_n = greedy_parameter(sweep.delta).second;
            double rho = robustness_indicator(delta_n, delta_prev, n, config.n0, has_prev);

            IterationRecord rec;
            rec.n = n;
            rec.n_tpar = model.partition.n_segments();
            rec.delta = delta_n;
            rec.rho = rho;
            rec.restarts = history.restarts;
            rec.enrich_added.assign(static_cast<size_t>(model.partition.n_segments()), 0);

            // n = 1 is skipped: the restricted system is square there, so
            // the collocation residual (and hence the indicator) is
            // structurally zero and says nothing about convergence
            if (n > 1 && delta_n <= config.eps_tol) {
                history.records.push_back(rec);
                if (observer) observer(model, history.records.back());
                break; // epoch converged
            }

            bool i_aa = true;
            if (mode != OfflineMode::R2ROC && rho > config.gamma) {
                i_aa = adaptive_enrich(model, config, delta_prev, has_prev, n, residual_cache,
                                       training, sweep, delta_n, rho, rec.enrich_added,
                                       n_adap_total);
                rec.delta = delta_n;
                rec.rho = rho;
            }

            if (!i_aa && mode == OfflineMode::AAROC && !last_epoch) {
                history.records.push_back(rec);
                if (observer) observer(model, history.records.back());
                aborted = true;
                break; // restart with one more time segment
            }
            if (!i_aa) epoch_truncated = true;

            if (n >= config.N_max) {
                history.records.push_back(rec);
                if (observer) observer(model, history.records.back());
                break; // epoch complete
            }

            // greedy (mu, t) pair for the next basis vector. A pair whose
            // snapshot is linearly dependent, or whose functional breaks
            // GEIM unisolvence, does not saturate the reduced space as a
            // whole: fall back to the next-best pair (remaining time
            // argmax for the same parameter, then the next parameter by
            // indicator) before declaring the epoch saturated.
            std::vector<size_t> mu_order(training.size());
            for (size_t i = 0; i < mu_order.size(); ++i) mu_order[i] = i;
            std::stable_sort(mu_order.begin(), mu_order.end(), [&](size_t a, size_t b) {
                return sweep.delta[a] > sweep.delta[b];
            });
            bool appended = false;
            int attempts = 0;
            for (size_t oi = 0; oi < mu_order.size() && !appended && attempts < 100; ++oi) {
                const size_t mi = mu_order[oi];
                // a slowly-moving trajectory can be locally low-rank, so a
                // single parameter may reject many consecutive time argmaxes;
                // cap the tries per parameter so the fallback reaches the
                // next-best parameters instead of draining the budget here
                int mu_attempts = 0;
                while (!appended && attempts < 100 && mu_attempts < 5) {
                    std::set<long> sampled_times;
                    for (const auto& [pi, ti] : sampled_pairs)
                        if (pi == mi) sampled_times.insert(ti);
                    long t_next = -1;
                    try {
                        t_next = greedy_time(sweep.eps[mi], sampled_times);
                    } catch (const AllTimesSampled&) {
                        break; // this parameter is exhausted, move on
                    }
                    ++attempts;
                    ++mu_attempts;
                    sampled_pairs.emplace(mi, t_next);
                    rec.mu_index = static_cast<long>(mi);
                    rec.mu = training[mi];
                    rec.t_index = t_next;

                    const SnapshotMatrix& snaps = fom_for(mi);
                    if (!model.basis.append(snaps.col(t_next), {training[mi], t_next}))
                        continue; // dependent snapshot: try the next pair

                    long geim_done = 0;
                    try {
                        for (long j = 0; j < model.partition.n_segments(); ++j) {
                            geim_add_point(model, j, training[mi], t_next);
                            ++geim_done;
                        }
                        appended = true;
                    } catch (const SingularGeimSystem&) {
                        // undo the partial extension and try the next pair
                        for (long j = 0; j < geim_done; ++j) {
                            auto& seg = model.segments[static_cast<size_t>(j)];
                            seg.x_solution.pop_back();
                            seg.geim_records.pop_back();
                            const Index m = seg.sigma.rows() - 1;
                            Mat shrunk = seg.sigma.topLeftCorner(m, m);
                            seg.sigma = std::move(shrunk);
                            seg.rebuild_selector();
                        }
                        model.basis.pop();
                    }
                }
            }
            if (!appended) {
                // every candidate pair is dependent or non-unisolvent:
                // the reduced space really is saturated for this epoch
                history.records.push_back(rec);
                if (observer) observer(model, history.records.back());
                break;
            }

            // per-segment EIM pair (sub-indicator argmax, then time within
            // the segment), full residual cached for later enrichment
            for (long j = 0; j < model.partition.n_segments(); ++j) {
                Index best_mu = 0;
                double best_val = sweep.delta_seg(j, 0);
                for (Index i = 1; i < sweep.delta_seg.cols(); ++i)
                    if (sweep.delta_seg(j, i) > best_val) {
                        best_val = sweep.delta_seg(j, i);
                        best_mu = i;
                    }
                // best_val may be structurally zero (square restricted
                // system at n = 1): the full residual still carries
                // information, so proceed; a residual that is genuinely
                // captured already raises DegenerateResidual below
                const auto [lo, hi] = model.partition.bounds[static_cast<size_t>(j)];
                long t_eim = lo;
                double t_best = sweep.eps[static_cast<size_t>(best_mu)][static_cast<size_t>(lo)];
                for (long i = lo + 1; i <= hi; ++i)
                    if (sweep.eps[static_cast<size_t>(best_mu)][static_cast<size_t>(i)] > t_best) {
                        t_best = sweep.eps[static_cast<size_t>(best_mu)][static_cast<size_t>(i)];
                        t_eim = i;
                    }
                try {
                    EimResult er = eim_add_point(model, j, training[static_cast<size_t>(best_mu)],
                                                 t_eim, sweep.coefficients[static_cast<size_t>(best_mu)]);
                    residual_cache[static_cast<size_t>(j)] = std::move(er.full_residual);
                } catch (const DegenerateResidual&) {
                    // residual already captured in this segment: skip the point
                }
            }

            history.records.push_back(rec);
            if (observer) observer(model, history.records.back());
            delta_prev = delta_n;
            has_prev = true;
        }

        if (!aborted) {
            artifact.model = std::move(model);
            artifact.history = std::move(history);
            artifact.n_tpar = artifact.model.partition.n_segments();
            artifact.n_adap_total = n_adap_total;
            artifact.truncated = epoch_truncated;
            return artifact;
        }
        history.restarts += 1;
    }
    throw BudgetExhausted("run_offline: no epoch completed"); // unreachable: final epoch always completes
}

// Rebuilds the reduced model as it stood when the basis had size n
// within the final epoch; the greedy history fully determines every
// intermediate collocation set.
inline ReducedModel reconstruct_at(const OfflineArtifact& artifact, long n) {
    const ReducedModel& full = artifact.model;
    if (n < 1 || n > full.dim()) throw ValidationError("reconstruct_at: n outside 1..N_max");
    ReducedModel out;
    out.problem = full.problem;
    out.partition = full.partition;
    out.basis.V = full.basis.V.leftCols(n);
    out.basis.R = full.basis.R.topLeftCorner(n, n);
    out.basis.provenance.assign(full.basis.provenance.begin(), full.basis.provenance.begin() + n);
    out.segments.resize(full.segments.size());
    for (size_t j = 0; j < full.segments.size(); ++j) {
        const auto& src = full.segments[j];
        auto& dst = out.segments[j];
        const size_t ns = std::min<size_t>(static_cast<size_t>(n), src.x_solution.size());
        dst.x_solution.assign(src.x_solution.begin(), src.x_solution.begin() + ns);
        dst.geim_records.assign(src.geim_records.begin(), src.geim_records.begin() + ns);
        dst.sigma = src.sigma.topLeftCorner(static_cast<Index>(ns), static_cast<Index>(ns));
        size_t ne = 0;
        while (ne < src.x_eim.size() && src.eim_iter[ne] <= n) ++ne;
        dst.x_eim.assign(src.x_eim.begin(), src.x_eim.begin() + ne);
        dst.eim_iter.assign(src.eim_iter.begin(), src.eim_iter.begin() + ne);
        if (ne > 0) dst.residual_basis = src.residual_basis.leftCols(static_cast<Index>(ne));
        for (size_t k = 0; k < src.x_enrich.size(); ++k)
            if (src.enrich_iter[k] <= n) {
                dst.x_enrich.push_back(src.x_enrich[k]);
                dst.enrich_iter.push_back(src.enrich_iter[k]);
            }
        dst.rebuild_selector();
    }
    return out;
}

} // namespace aaroc

#endif
