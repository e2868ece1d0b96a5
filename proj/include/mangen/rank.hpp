#pragma once

#include "mangen/core.hpp"

#include <optional>

namespace mangen {

struct RankReport {
    int numeric_rank = 0;
    double tolerance = 0.0;
    bool full_rank = false;           // numeric_rank == min(rows, cols)
    double min_retained_pivot = 0.0;  // 0 when the rank is 0
    double largest_rejected_pivot = 0.0;
    int rows = 0;
    int cols = 0;
};

/// Gaussian elimination with complete pivoting. A pivot counts toward the
/// rank when its magnitude exceeds the tolerance; the default tolerance is
/// max(rows, cols) * eps * max|entry|.
RankReport numeric_rank(const Matrix& a, std::optional<double> tolerance = std::nullopt);

/// Default tolerance used by numeric_rank.
double default_rank_tolerance(const Matrix& a);

/// Largest singular value.
double spectral_norm(const Matrix& a);

} // namespace mangen
