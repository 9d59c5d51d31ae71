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

#include "adlab/error.hpp"
#include "detector_models.hpp"

namespace adlab::detail {

double adjusted_skewness(std::span<const double> v) {
  const auto n = static_cast<double>(v.size());
  if (v.size() < 3) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double x : v) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (m2 <= 0.0) return 0.0;
  const double g1 = m3 / std::pow(m2, 1.5);
  return g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
}

EcodModel EcodModel::fit(const Matrix& X) {
  EcodModel m;
  m.n_ = X.rows();
  m.sorted_.resize(X.cols());
  m.skew_.resize(X.cols());
  std::vector<double> column(X.rows());
  for (std::size_t j = 0; j < X.cols(); ++j) {
    for (std::size_t i = 0; i < X.rows(); ++i) column[i] = X(i, j);
    m.skew_[j] = adjusted_skewness(column);
    std::sort(column.begin(), column.end());
    m.sorted_[j] = column;
  }
  return m;
}

EcodModel::Outlyingness EcodModel::outlyingness(std::span<const double> x) const {
  const double n = static_cast<double>(n_);
  const double floor = 1.0 / n;
  Outlyingness o;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto& s = sorted_[j];
    const auto le = static_cast<double>(std::upper_bound(s.begin(), s.end(), x[j]) - s.begin());
    const auto ge = static_cast<double>(s.end() - std::lower_bound(s.begin(), s.end(), x[j]));
    const double left = -std::log(std::max(le / n, floor));
    const double right = -std::log(std::max(ge / n, floor));
    o.left += left;
    o.right += right;
    o.automatic += skew_[j] < 0.0 ? left : right;
  }
  return o;
}

std::vector<double> EcodModel::score(const Matrix& X) const {
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto o = outlyingness(X.row(i));
    out[i] = std::max({o.left, o.right, o.automatic});
  }
  return out;
}

void EcodModel::save(BinWriter& w) const {
  w.u64(n_);
  w.f64s(skew_);
  for (const auto& s : sorted_) w.f64s(s);
}

EcodModel EcodModel::load(BinReader& r, std::size_t dim) {
  EcodModel m;
  m.n_ = r.u64();
  m.skew_ = r.f64s();
  if (m.n_ == 0 || m.skew_.size() != dim) throw DataError("ECOD model: inconsistent sizes");
  m.sorted_.resize(dim);
  for (auto& s : m.sorted_) {
    s = r.f64s();
    if (s.size() != m.n_ || !std::is_sorted(s.begin(), s.end())) {
      throw DataError("ECOD model: corrupt column");
    }
  }
  return m;
}

}  // namespace adlab::detail
