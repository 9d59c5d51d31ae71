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
#include <numeric>
#include <thread>

#include "adlab/error.hpp"
#include "adlab/random.hpp"
#include "detector_models.hpp"
#include "parallel.hpp"

namespace adlab::detail {
namespace {

constexpr double kEulerGamma = 0.5772156649;

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, std::size_t depth_limit, Rng& rng)
      : X_(X), depth_limit_(depth_limit), rng_(rng) {}

  IForestModel::Tree build(std::vector<std::size_t> rows) {
    tree_.clear();
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  std::uint64_t grow(std::vector<std::size_t>& rows, std::size_t depth) {
    const std::uint64_t id = tree_.size();
    tree_.push_back({-1, 0.0, 0, 0, rows.size()});
    if (depth >= depth_limit_ || rows.size() <= 1) return id;

    std::vector<std::size_t> candidates;
    std::vector<double> lo, hi;
    for (std::size_t j = 0; j < X_.cols(); ++j) {
      double mn = X_(rows[0], j);
      double mx = mn;
      for (auto r : rows) {
        mn = std::min(mn, X_(r, j));
        mx = std::max(mx, X_(r, j));
      }
      if (mn < mx) {
        candidates.push_back(j);
        lo.push_back(mn);
        hi.push_back(mx);
      }
    }
    if (candidates.empty()) return id;
    const std::size_t pick = rng_.uniform_index(candidates.size());
    const std::size_t feature = candidates[pick];
    double split = rng_.uniform_range(lo[pick], hi[pick]);
    std::vector<std::size_t> left, right;
    for (auto r : rows) (X_(r, feature) <= split ? left : right).push_back(r);
    if (left.empty() || right.empty()) {
      // Rounding put the split on the boundary; fall back to the midpoint.
      split = lo[pick] + (hi[pick] - lo[pick]) / 2;
      left.clear();
      right.clear();
      for (auto r : rows) (X_(r, feature) <= split ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const auto l = grow(left, depth + 1);
    const auto rt = grow(right, depth + 1);
    tree_[id].feature = static_cast<std::int64_t>(feature);
    tree_[id].threshold = split;
    tree_[id].left = l;
    tree_[id].right = rt;
    return id;
  }

  const Matrix& X_;
  std::size_t depth_limit_;
  Rng& rng_;
  IForestModel::Tree tree_;
};

}  // namespace

double iforest_c(double m) {
  if (m <= 1.0) return 0.0;
  return 2.0 * (std::log(m - 1.0) + kEulerGamma) - 2.0 * (m - 1.0) / m;
}

IForestModel IForestModel::fit(const Matrix& X, const IForestParams& params, std::uint64_t seed) {
  if (X.rows() < 2) throw InvalidArgument("IForest needs at least 2 training rows");
  if (params.n_trees == 0 || params.max_samples == 0) {
    throw InvalidArgument("IForest needs n_trees > 0 and max_samples > 0");
  }
  IForestModel m;
  m.psi_ = std::min(params.max_samples, X.rows());
  const auto depth_limit =
      static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(m.psi_))));
  m.trees_.resize(params.n_trees);
  const int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bounded_parallel_for(params.n_trees, threads, [&](std::size_t t) {
    Rng rng(seed + t);
    std::vector<std::size_t> idx(X.rows());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < m.psi_; ++i) {
      std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
    }
    idx.resize(m.psi_);
    TreeBuilder builder(X, depth_limit, rng);
    m.trees_[t] = builder.build(std::move(idx));
  });
  return m;
}

double IForestModel::path_length(const Tree& tree, std::span<const double> x) const {
  std::size_t node = 0;
  double depth = 0.0;
  while (tree[node].feature >= 0) {
    const auto& nd = tree[node];
    node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    depth += 1.0;
  }
  return depth + iforest_c(static_cast<double>(tree[node].size));
}

std::vector<double> IForestModel::score(const Matrix& X) const {
  const double norm = iforest_c(static_cast<double>(psi_));
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double total = 0.0;
    for (const auto& tree : trees_) total += path_length(tree, X.row(i));
    const double mean = total / static_cast<double>(trees_.size());
    out[i] = std::pow(2.0, -mean / norm);
  }
  return out;
}

void IForestModel::save(BinWriter& w) const {
  w.u64(psi_);
  w.u64(trees_.size());
  for (const auto& tree : trees_) {
    w.u64(tree.size());
    for (const auto& n : tree) {
      w.u64(static_cast<std::uint64_t>(n.feature));
      w.f64(n.threshold);
      w.u64(n.left);
      w.u64(n.right);
      w.u64(n.size);
    }
  }
}

IForestModel IForestModel::load(BinReader& r, std::size_t dim) {
  IForestModel m;
  m.psi_ = r.u64();
  const auto n_trees = r.u64();
  if (m.psi_ < 2 || n_trees == 0 || n_trees > (1u << 24)) {
    throw DataError("IForest model: implausible header");
  }
  m.trees_.resize(n_trees);
  for (auto& tree : m.trees_) {
    const auto n_nodes = r.u64();
    if (n_nodes == 0 || n_nodes > 2 * m.psi_) throw DataError("IForest model: bad node count");
    tree.resize(n_nodes);
    for (std::size_t idx = 0; idx < tree.size(); ++idx) {
      auto& n = tree[idx];
      n.feature = static_cast<std::int64_t>(r.u64());
      n.threshold = r.f64();
      n.left = r.u64();
      n.right = r.u64();
      n.size = r.u64();
      if (n.feature >= 0 && (static_cast<std::uint64_t>(n.feature) >= dim || n.left <= idx ||
                             n.right <= idx || n.left >= n_nodes || n.right >= n_nodes)) {
        throw DataError("IForest model: corrupt node");
      }
    }
  }
  return m;
}

}  // namespace adlab::detail
