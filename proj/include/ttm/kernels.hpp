// Copyright 2026 The ttm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

// Hot inner loops, each in two variants: a `_serial` reference and an `_omp`
// parallel version. Every output element is computed by an independent serial
// subcomputation, so the two variants are bit-identical for any thread count
// (tests/test_kernels.cpp asserts exact equality; bench/ times both). The
// undecorated name dispatches on ttm::parallel::enabled().

namespace ttm::kernels {

/// Thresholded Jaccard similarity of two distributions over the same
/// vocabulary: J(A,B) with A = {w : a[w] > c}, B likewise; 1 when both sets
/// are empty.
double jaccard_similarity(const std::vector<double>& a, const std::vector<double>& b, double c);

/// rows(a) x rows(b) matrix of jaccard_similarity values, row-major.
std::vector<double> jaccard_matrix_serial(const std::vector<std::vector<double>>& a,
                                          const std::vector<std::vector<double>>& b, double c);
std::vector<double> jaccard_matrix_omp(const std::vector<std::vector<double>>& a,
                                       const std::vector<std::vector<double>>& b, double c);
std::vector<double> jaccard_matrix(const std::vector<std::vector<double>>& a,
                                   const std::vector<std::vector<double>>& b, double c);

/// Draws B multinomial samples of size n from the normalized positive
/// reference vector and returns each sample's cosine similarity against the
/// reference. Sample b uses the independent stream derive_seed(seed, {b}),
/// so the result does not depend on evaluation order.
std::vector<double> bootstrap_cosines_serial(const std::vector<double>& reference, std::int64_t n,
                                             int samples, std::uint64_t seed);
std::vector<double> bootstrap_cosines_omp(const std::vector<double>& reference, std::int64_t n,
                                          int samples, std::uint64_t seed);
std::vector<double> bootstrap_cosines(const std::vector<double>& reference, std::int64_t n,
                                      int samples, std::uint64_t seed);

/// d x d cross-product A^T * B of two n x d row-major matrices.
std::vector<double> crossprod_serial(const std::vector<double>& a, const std::vector<double>& b,
                                     std::size_t n, std::size_t d);
std::vector<double> crossprod_omp(const std::vector<double>& a, const std::vector<double>& b,
                                  std::size_t n, std::size_t d);
std::vector<double> crossprod(const std::vector<double>& a, const std::vector<double>& b,
                              std::size_t n, std::size_t d);

/// Lower empirical quantile: smallest x with F_hat(x) >= q.
double lower_quantile(std::vector<double> values, double q);

}  // namespace ttm::kernels
