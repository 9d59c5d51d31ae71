/*
 * Copyright 2026 The adlab Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "adlab/error.hpp"
#include "detector_models.hpp"

namespace adlab::detail {
namespace {

constexpr std::size_t kNoSkip = std::numeric_limits<std::size_t>::max();
// Keeps densities finite when a point has k or more exact duplicates.
constexpr double kDensityEpsilon = 1e-10;

}  // namespace

double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return std::sqrt(s);
}

LofModel LofModel::fit(const Matrix& X, const LofParams& params) {
  const std::size_t n = X.rows();
  if (params.k < 1 || params.k + 1 > n) {
    throw InvalidArgument("LOF: k = " + std::to_string(params.k) + " is out of range for " +
                          std::to_string(n) + " training rows (need 1 <= k <= n - 1)");
  }
  bool all_same = true;
  for (std::size_t i = 1; i < n && all_same; ++i) {
    all_same = std::equal(X.row(i).begin(), X.row(i).end(), X.row(0).begin());
  }
  if (all_same) throw InvalidArgument("LOF: all training rows are identical");

  LofModel m;
  m.k_ = params.k;
  m.train_ = X;
  m.k_distance_.resize(n);
  std::vector<std::vector<std::size_t>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i) nbrs[i] = m.neighborhood(X.row(i), i, &m.k_distance_[i]);
  m.lrd_.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.lrd_[i] = m.local_density(X.row(i), nbrs[i]);
  return m;
}

std::vector<std::size_t> LofModel::neighborhood(std::span<const double> q, std::size_t skip,
                                                double* kdist) const {
  const std::size_t n = train_.rows();
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i != skip) d.emplace_back(euclidean(q, train_.row(i)), i);
  }
  std::sort(d.begin(), d.end());
  const double kd = d[k_ - 1].first;
  if (kdist) *kdist = kd;
  std::vector<std::size_t> out;
  for (const auto& [dist, idx] : d) {
    if (dist > kd) break;
    out.push_back(idx);
  }
  return out;
}

double LofModel::local_density(std::span<const double> q,
                               const std::vector<std::size_t>& nbrs) const {
  double sum = 0.0;
  for (auto o : nbrs) sum += std::max(k_distance_[o], euclidean(q, train_.row(o)));
  return 1.0 / (sum / static_cast<double>(nbrs.size()) + kDensityEpsilon);
}

std::vector<double> LofModel::score(const Matrix& X) const {
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto nbrs = neighborhood(X.row(i), kNoSkip, nullptr);
    const double lrd_q = local_density(X.row(i), nbrs);
    double sum = 0.0;
    for (auto o : nbrs) sum += lrd_[o];
    out[i] = sum / static_cast<double>(nbrs.size()) / lrd_q;
  }
  return out;
}

void LofModel::save(BinWriter& w) const {
  w.u64(k_);
  w.u64(train_.rows());
  w.f64s(train_.data());
  w.f64s(k_distance_);
  w.f64s(lrd_);
}

LofModel LofModel::load(BinReader& r, std::size_t dim) {
  LofModel m;
  m.k_ = r.u64();
  const auto n = r.u64();
  auto data = r.f64s();
  if (m.k_ < 1 || m.k_ + 1 > n || data.size() != n * dim) throw DataError("LOF model: bad sizes");
  m.train_ = Matrix(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) m.train_(i, j) = data[i * dim + j];
  }
  m.k_distance_ = r.f64s();
  m.lrd_ = r.f64s();
  if (m.k_distance_.size() != n || m.lrd_.size() != n) throw DataError("LOF model: bad sizes");
  return m;
}

}  // namespace adlab::detail
