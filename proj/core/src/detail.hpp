#pragma once

// Helpers shared by the optimization formulations. Not installed.

#include <vector>

#include "ccopf/network.hpp"
#include "ccopf/qp.hpp"

namespace ccopf::detail {

/// Rows of the reduced Laplacian as (column + offset, value) lists.
inline std::vector<qp::RowEntries> reduced_rows(const SparseMatrix& bhat, Eigen::Index offset) {
    std::vector<qp::RowEntries> rows(static_cast<std::size_t>(bhat.rows()));
    for (Eigen::Index k = 0; k < bhat.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(bhat, k); it; ++it) {
            rows[static_cast<std::size_t>(it.row())].emplace_back(it.col() + offset, it.value());
        }
    }
    return rows;
}

/// Flow difference row beta * (x_from - x_to) on angle variables starting at
/// `offset`; the slack bus has no variable.
inline qp::RowEntries angle_difference(const Line& l, int slack, Eigen::Index offset, double sign) {
    qp::RowEntries row;
    if (l.from != slack) row.emplace_back(offset + l.from, sign * l.susceptance);
    if (l.to != slack) row.emplace_back(offset + l.to, -sign * l.susceptance);
    return row;
}

/// Gaussian exceedance probability of limit by a quantity with the given mean
/// and standard deviation; degenerate spreads use an indicator with a small
/// tolerance relative to the limit.
double exceedance(double mean, double std, double limit);

}  // namespace ccopf::detail
