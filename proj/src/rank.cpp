#include "mangen/rank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mangen {

double default_rank_tolerance(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    const double largest = a.cwiseAbs().maxCoeff();
    return static_cast<double>(std::max(a.rows(), a.cols())) * std::numeric_limits<double>::epsilon() * largest;
}

RankReport numeric_rank(const Matrix& a, std::optional<double> tolerance) {
    if (!a.allFinite()) throw ArgumentError("numeric_rank needs finite entries");
    RankReport r;
    r.rows = static_cast<int>(a.rows());
    r.cols = static_cast<int>(a.cols());
    r.tolerance = tolerance.value_or(default_rank_tolerance(a));
    if (r.tolerance < 0.0) throw ArgumentError("rank tolerance must be non-negative");

    Matrix work = a;
    const Eigen::Index steps = std::min(a.rows(), a.cols());
    r.min_retained_pivot = 0.0;
    for (Eigen::Index k = 0; k < steps; ++k) {
        Eigen::Index pr = 0, pc = 0;
        const double pivot = work.bottomRightCorner(work.rows() - k, work.cols() - k).cwiseAbs().maxCoeff(&pr, &pc);
        // Remaining pivots are bounded by this one, so the first rejection ends the count.
        if (!(pivot > r.tolerance)) {
            r.largest_rejected_pivot = pivot;
            break;
        }
        pr += k;
        pc += k;
        work.row(k).swap(work.row(pr));
        work.col(k).swap(work.col(pc));
        r.min_retained_pivot = std::abs(work(k, k));
        ++r.numeric_rank;
        const Eigen::Index below = work.rows() - k - 1, right = work.cols() - k - 1;
        if (below > 0 && right > 0) {
            const Vector factors = work.col(k).tail(below) / work(k, k);
            work.bottomRightCorner(below, right).noalias() -= factors * work.row(k).tail(right);
        }
    }
    r.full_rank = r.numeric_rank == static_cast<int>(steps);
    return r;
}

double spectral_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

} // namespace mangen
