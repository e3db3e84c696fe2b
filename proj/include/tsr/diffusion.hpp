#pragma once

#include "tsr/types.hpp"

namespace tsr {

// Local-scaling Gaussian kernel: A_ij = exp(-d_ij^2 / (sigma_i sigma_j)),
// sigma_i = distance to the kernel_k-th nearest neighbor of i (smallest
// positive row distance if that is zero). A_ii = 1.
Matrix affinity_from_distance(const Matrix& dist, int kernel_k = 7);

// Locally constrained diffusion: P = row-stochastic normalization of A
// restricted to each row's knn_w strongest neighbors (self included), then
// W <- P W P^T for `iters` steps starting from W = A. Larger output = more
// similar.
Matrix lcdp(const Matrix& affinity, int knn_w = 10, int iters = 20);

// Runs lcdp on the principal submatrix given by `subset` (ascending gallery
// indices). knn_w shrinks to |subset| - 1 when the subset is too small.
Matrix constrained_lcdp(const Matrix& affinity, const std::vector<int>& subset, int knn_w = 10,
                        int iters = 20);

} // namespace tsr
