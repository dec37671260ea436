#pragma once

#include <cstddef>
#include <vector>

namespace hades {

// Singular values of a dense rows x cols matrix (row-major), sorted
// descending. One-sided Jacobi with tolerance 1e-12, at most 100 sweeps.
std::vector<double> singular_values(const std::vector<double>& a,
                                    std::size_t rows, std::size_t cols);

}  // namespace hades
