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

#ifndef ADLAB_SRC_DETECTOR_MODELS_HPP_
#define ADLAB_SRC_DETECTOR_MODELS_HPP_

#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "adlab/detectors.hpp"

namespace adlab::detail {

class BinWriter {
 public:
  explicit BinWriter(std::ostream& out) : out_(out) {}
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(std::span<const double> v);  // u64 length prefix
  void u64s(std::span<const std::uint64_t> v);

 private:
  std::ostream& out_;
};

class BinReader {
 public:
  explicit BinReader(std::istream& in) : in_(in) {}
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::vector<double> f64s();
  std::vector<std::uint64_t> u64s();

 private:
  void read(void* dst, std::size_t n);
  std::istream& in_;
};

class DetectorModel {
 public:
  virtual ~DetectorModel() = default;
  // Rows are already validated against train_dim.
  virtual std::vector<double> score(const Matrix& X) const = 0;
  virtual void save(BinWriter& w) const = 0;
};

// ---------------------------------------------------------------------------

class EcodModel : public DetectorModel {
 public:
  static EcodModel fit(const Matrix& X);

  struct Outlyingness {
    double left = 0.0;
    double right = 0.0;
    double automatic = 0.0;
  };
  Outlyingness outlyingness(std::span<const double> x) const;

  std::vector<double> score(const Matrix& X) const override;
  void save(BinWriter& w) const override;
  static EcodModel load(BinReader& r, std::size_t dim);

  const std::vector<double>& skewness() const { return skew_; }

 private:
  std::size_t n_ = 0;
  std::vector<std::vector<double>> sorted_;  // per dimension
  std::vector<double> skew_;
};

// Adjusted Fisher-Pearson sample skewness; 0 when n < 3 or variance is 0.
double adjusted_skewness(std::span<const double> v);

// ---------------------------------------------------------------------------

// c(m) = 2 H(m-1) - 2(m-1)/m with H(i) = ln(i) + Euler's constant; 0 for m <= 1.
double iforest_c(double m);

class IForestModel : public DetectorModel {
 public:
  struct Node {
    // feature < 0 marks a leaf.
    std::int64_t feature = -1;
    double threshold = 0.0;
    std::uint64_t left = 0;
    std::uint64_t right = 0;
    std::uint64_t size = 0;
  };
  using Tree = std::vector<Node>;

  static IForestModel fit(const Matrix& X, const IForestParams& params, std::uint64_t seed);

  double path_length(const Tree& tree, std::span<const double> x) const;
  std::vector<double> score(const Matrix& X) const override;
  void save(BinWriter& w) const override;
  static IForestModel load(BinReader& r, std::size_t dim);

  std::size_t subsample_size() const { return psi_; }
  const std::vector<Tree>& trees() const { return trees_; }

 private:
  std::size_t psi_ = 0;
  std::vector<Tree> trees_;
};

// ---------------------------------------------------------------------------

class LofModel : public DetectorModel {
 public:
  static LofModel fit(const Matrix& X, const LofParams& params);

  std::vector<double> score(const Matrix& X) const override;
  void save(BinWriter& w) const override;
  static LofModel load(BinReader& r, std::size_t dim);

  const std::vector<double>& k_distance() const { return k_distance_; }
  const std::vector<double>& lrd() const { return lrd_; }

 private:
  // Train neighborhood of a query: all train points within the k-th smallest
  // distance. `skip` excludes one train row (the query itself).
  std::vector<std::size_t> neighborhood(std::span<const double> q, std::size_t skip,
                                        double* kdist) const;
  double local_density(std::span<const double> q, const std::vector<std::size_t>& nbrs) const;

  std::size_t k_ = 0;
  Matrix train_;
  std::vector<double> k_distance_;
  std::vector<double> lrd_;
};

double euclidean(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------

// d -> h1 -> h2 -> h1 -> d, ReLU on hidden layers, linear output, MSE loss.
class Autoencoder : public DetectorModel {
 public:
  Autoencoder(std::size_t dim, const AeParams& params, std::uint64_t seed);

  std::size_t dim() const { return dim_; }
  std::size_t parameter_count() const { return params_.size(); }
  const std::vector<double>& parameters() const { return params_; }
  void set_parameters(std::vector<double> p);

  // Mean squared error over the given rows and all columns.
  double loss(const Matrix& X, std::span<const std::size_t> rows) const;
  // Loss and its gradient with respect to parameters().
  double loss_and_gradient(const Matrix& X, std::span<const std::size_t> rows,
                           std::vector<double>& grad) const;

  // Runs params.epochs of shuffled mini-batch SGD. Records the full-data loss
  // before training and after every epoch. Throws DataError on divergence.
  void train(const Matrix& X);
  const std::vector<double>& loss_history() const { return loss_history_; }

  std::vector<double> reconstruction_errors(const Matrix& X) const;

  std::vector<double> score(const Matrix& X) const override { return reconstruction_errors(X); }
  void save(BinWriter& w) const override;
  static Autoencoder load(BinReader& r, std::size_t dim);

 private:
  struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t w_offset = 0;  // out x in, row-major
    std::size_t b_offset = 0;
    bool relu = false;
  };
  void build_layers();
  void forward(std::span<const double> x, std::vector<std::vector<double>>& acts) const;

  std::size_t dim_ = 0;
  AeParams hp_;
  std::uint64_t seed_ = 0;
  std::vector<Layer> layers_;
  std::vector<double> params_;
  std::vector<double> loss_history_;
};

}  // namespace adlab::detail

#endif  // ADLAB_SRC_DETECTOR_MODELS_HPP_
