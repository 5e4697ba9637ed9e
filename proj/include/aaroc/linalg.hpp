#ifndef AAROC_LINALG_HPP
#define AAROC_LINALG_HPP

// Dense linear algebra and selection utilities shared by all modules.
// Backed by Eigen; everything here is a pure function over its inputs.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <unordered_set>
#include <vector>

#include "aaroc/errors.hpp"

namespace aaroc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd; // column-major by default
using Index = Eigen::Index;
using IndexList = std::vector<Index>;
using IndexSet = std::unordered_set<Index>;

inline void check_finite(const Vec& v, const char* what = "vector") {
    if (!v.allFinite())
        throw Error(std::string(what) + " contains NaN/Inf entries");
}

inline void check_finite(const Mat& m, const char* what = "matrix") {
    if (!m.allFinite())
        throw Error(std::string(what) + " contains NaN/Inf entries");
}

// Minimizes ||A x - b||_2 via column-pivoted Householder QR.
// Throws RankDeficient when a diagonal factor of R falls below
// 1e-12 relative to the largest one.
inline Vec solve_least_squares(const Mat& A, const Vec& b) {
    const Index m = A.rows(), n = A.cols();
    if (n < 1 || m < n)
        throw DimensionMismatch("solve_least_squares requires m >= n >= 1");
    if (b.size() != m)
        throw DimensionMismatch("solve_least_squares: b length mismatch");
    Eigen::ColPivHouseholderQR<Mat> qr(A);
    const auto& R = qr.matrixR();
    double dmax = 0.0;
    for (Index i = 0; i < n; ++i) dmax = std::max(dmax, std::abs(R(i, i)));
    if (dmax == 0.0 || std::abs(R(n - 1, n - 1)) < 1e-12 * dmax)
        throw RankDeficient("restricted system is rank deficient");
    return qr.solve(b);
}

// Smallest index i not in `excluded` with |v_i| maximal over the
// non-excluded indices.
inline Index argmax_abs(const Vec& v, const IndexSet& excluded = {}) {
    Index best = -1;
    double best_val = -1.0;
    for (Index i = 0; i < v.size(); ++i) {
        if (excluded.count(i)) continue;
        const double a = std::abs(v[i]);
        if (a > best_val) {
            best_val = a;
            best = i;
        }
    }
    if (best < 0) throw EmptyCandidateSet("argmax_abs: all indices excluded");
    return best;
}

inline Vec gather(const Vec& v, const IndexList& rows) {
    Vec out(static_cast<Index>(rows.size()));
    for (size_t k = 0; k < rows.size(); ++k) {
        const Index r = rows[k];
        if (r < 0 || r >= v.size())
            throw IndexOutOfRange("gather: row index out of range");
        out[static_cast<Index>(k)] = v[r];
    }
    return out;
}

} // namespace aaroc

#endif
