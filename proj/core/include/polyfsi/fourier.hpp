#pragma once

#include <vector>

namespace polyfsi {

/// Dense spectral differentiation matrix for n uniformly spaced samples of a
/// periodic function with the given period. Row-major n x n.
std::vector<double> spectral_diff_matrix(int n, double period);

/// Apply a row-major n x n matrix to a vector.
std::vector<double> apply_dense(const std::vector<double>& m, const std::vector<double>& x);

}  // namespace polyfsi
