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

#include "adlab/error.hpp"
#include "adlab/random.hpp"
#include "detector_models.hpp"

namespace adlab::detail {
namespace {

// Stream offset of the shuffling generator.
constexpr std::uint64_t kShuffleStream = 0x9E3779B97F4A7C15ull;

}  // namespace

Autoencoder::Autoencoder(std::size_t dim, const AeParams& params, std::uint64_t seed)
    : dim_(dim), hp_(params), seed_(seed) {
  if (dim == 0 || hp_.hidden1 == 0 || hp_.hidden2 == 0) {
    throw InvalidArgument("AE: layer widths must be positive");
  }
  if (hp_.batch_size == 0 || !(hp_.learning_rate > 0.0)) {
    throw InvalidArgument("AE: batch_size and learning_rate must be positive");
  }
  build_layers();
  Rng rng(seed);
  for (const auto& layer : layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    for (std::size_t i = 0; i < layer.in * layer.out; ++i) {
      params_[layer.w_offset + i] = rng.uniform_range(-limit, limit);
    }
  }
}

void Autoencoder::build_layers() {
  const std::size_t widths[] = {dim_, hp_.hidden1, hp_.hidden2, hp_.hidden1, dim_};
  std::size_t offset = 0;
  layers_.clear();
  for (std::size_t l = 0; l + 1 < std::size(widths); ++l) {
    Layer layer;
    layer.in = widths[l];
    layer.out = widths[l + 1];
    layer.w_offset = offset;
    offset += layer.in * layer.out;
    layer.b_offset = offset;
    offset += layer.out;
    layer.relu = l + 2 < std::size(widths);
    layers_.push_back(layer);
  }
  params_.assign(offset, 0.0);
}

void Autoencoder::set_parameters(std::vector<double> p) {
  if (p.size() != params_.size()) throw InvalidArgument("AE: parameter vector has wrong length");
  params_ = std::move(p);
}

void Autoencoder::forward(std::span<const double> x,
                          std::vector<std::vector<double>>& acts) const {
  acts.resize(layers_.size() + 1);
  acts[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    auto& out = acts[l + 1];
    out.assign(L.out, 0.0);
    const double* W = params_.data() + L.w_offset;
    const double* b = params_.data() + L.b_offset;
    const auto& in = acts[l];
    for (std::size_t o = 0; o < L.out; ++o) {
      double z = b[o];
      const double* w = W + o * L.in;
      for (std::size_t i = 0; i < L.in; ++i) z += w[i] * in[i];
      out[o] = L.relu ? std::max(0.0, z) : z;
    }
  }
}

double Autoencoder::loss(const Matrix& X, std::span<const std::size_t> rows) const {
  std::vector<std::vector<double>> acts;
  double total = 0.0;
  for (auto r : rows) {
    forward(X.row(r), acts);
    for (std::size_t j = 0; j < dim_; ++j) {
      const double e = acts.back()[j] - X(r, j);
      total += e * e;
    }
  }
  return total / static_cast<double>(rows.size() * dim_);
}

double Autoencoder::loss_and_gradient(const Matrix& X, std::span<const std::size_t> rows,
                                      std::vector<double>& grad) const {
  grad.assign(params_.size(), 0.0);
  const double scale = 1.0 / static_cast<double>(rows.size() * dim_);
  std::vector<std::vector<double>> acts;
  std::vector<double> delta, prev;
  double total = 0.0;
  for (auto r : rows) {
    forward(X.row(r), acts);
    delta.assign(dim_, 0.0);
    for (std::size_t j = 0; j < dim_; ++j) {
      const double e = acts.back()[j] - X(r, j);
      total += e * e;
      delta[j] = 2.0 * e * scale;
    }
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const auto& L = layers_[l];
      const auto& in = acts[l];
      double* gW = grad.data() + L.w_offset;
      double* gb = grad.data() + L.b_offset;
      const double* W = params_.data() + L.w_offset;
      for (std::size_t o = 0; o < L.out; ++o) {
        gb[o] += delta[o];
        for (std::size_t i = 0; i < L.in; ++i) gW[o * L.in + i] += delta[o] * in[i];
      }
      if (l == 0) break;
      prev.assign(L.in, 0.0);
      for (std::size_t o = 0; o < L.out; ++o) {
        for (std::size_t i = 0; i < L.in; ++i) prev[i] += W[o * L.in + i] * delta[o];
      }
      // The input of this layer is the ReLU output of the one below.
      for (std::size_t i = 0; i < L.in; ++i) {
        if (in[i] <= 0.0) prev[i] = 0.0;
      }
      delta.swap(prev);
    }
  }
  return total * scale;
}

void Autoencoder::train(const Matrix& X) {
  if (X.rows() == 0) throw InvalidArgument("AE: empty training matrix");
  std::vector<std::size_t> all(X.rows());
  std::iota(all.begin(), all.end(), 0);
  loss_history_.clear();
  loss_history_.push_back(loss(X, all));
  if (!std::isfinite(loss_history_.back())) throw DataError("AE: initial loss is not finite");
  Rng rng(seed_ + kShuffleStream);
  std::vector<std::size_t> order = all;
  std::vector<double> grad;
  for (std::size_t epoch = 0; epoch < hp_.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    for (std::size_t start = 0; start < order.size(); start += hp_.batch_size) {
      const std::size_t end = std::min(order.size(), start + hp_.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      const double l = loss_and_gradient(X, batch, grad);
      if (!std::isfinite(l)) {
        throw DataError("AE training diverged: non-finite loss in epoch " + std::to_string(epoch + 1) +
                        " (learning rate " + std::to_string(hp_.learning_rate) + ")");
      }
      for (std::size_t p = 0; p < params_.size(); ++p) params_[p] -= hp_.learning_rate * grad[p];
    }
    loss_history_.push_back(loss(X, all));
    if (!std::isfinite(loss_history_.back())) {
      throw DataError("AE training diverged: non-finite loss after epoch " + std::to_string(epoch + 1));
    }
  }
}

std::vector<double> Autoencoder::reconstruction_errors(const Matrix& X) const {
  std::vector<double> out(X.rows());
  std::vector<std::vector<double>> acts;
  for (std::size_t r = 0; r < X.rows(); ++r) {
    forward(X.row(r), acts);
    double s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      const double e = acts.back()[j] - X(r, j);
      s += e * e;
    }
    out[r] = s / static_cast<double>(dim_);
  }
  return out;
}

void Autoencoder::save(BinWriter& w) const {
  w.u64(hp_.hidden1);
  w.u64(hp_.hidden2);
  w.u64(hp_.epochs);
  w.u64(hp_.batch_size);
  w.f64(hp_.learning_rate);
  w.u64(seed_);
  w.f64s(params_);
}

Autoencoder Autoencoder::load(BinReader& r, std::size_t dim) {
  AeParams hp;
  hp.hidden1 = r.u64();
  hp.hidden2 = r.u64();
  hp.epochs = r.u64();
  hp.batch_size = r.u64();
  hp.learning_rate = r.f64();
  const auto seed = r.u64();
  if (hp.hidden1 == 0 || hp.hidden2 == 0 || hp.hidden1 > (1u << 16) || hp.hidden2 > (1u << 16)) {
    throw DataError("AE model: implausible layer widths");
  }
  Autoencoder ae(dim, hp, seed);
  auto p = r.f64s();
  if (p.size() != ae.params_.size()) throw DataError("AE model: parameter count mismatch");
  ae.params_ = std::move(p);
  return ae;
}

}  // namespace adlab::detail
