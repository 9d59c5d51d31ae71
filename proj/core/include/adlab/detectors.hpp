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

#ifndef ADLAB_DETECTORS_HPP_
#define ADLAB_DETECTORS_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace adlab {

// Dense row-major matrix of finite doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  // Builds from equal-length rows; throws InvalidArgument when ragged.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Embedding rows with their sample ids.
struct EmbeddingMatrix {
  Matrix values;
  std::vector<std::string> ids;
};

enum class DetectorKind { kEcod, kIForest, kLof, kAe };

// "ECOD", "IForest", "LOF", "AE".
const char* to_string(DetectorKind kind);
// Case-insensitive inverse of to_string; throws InvalidArgument otherwise.
DetectorKind parse_detector_kind(const std::string& name);

struct IForestParams {
  std::size_t n_trees = 100;
  std::size_t max_samples = 256;
};

struct LofParams {
  std::size_t k = 20;
};

struct AeParams {
  std::size_t hidden1 = 64;
  std::size_t hidden2 = 32;
  std::size_t epochs = 50;
  std::size_t batch_size = 4;
  double learning_rate = 1e-3;
};

struct DetectorParams {
  IForestParams iforest;
  LofParams lof;
  AeParams ae;
};

namespace detail {
class DetectorModel;
}

// A trained detector. Immutable after fit; score() may run concurrently.
class FittedDetector {
 public:
  FittedDetector(DetectorKind kind, std::size_t train_dim, std::uint64_t seed,
                 std::shared_ptr<const detail::DetectorModel> model);

  DetectorKind kind() const { return kind_; }
  std::size_t train_dim() const { return train_dim_; }
  std::uint64_t seed() const { return seed_; }

  // Higher is more anomalous. Throws InvalidArgument when X.cols() differs
  // from train_dim() and DataError for non-finite input.
  std::vector<double> score(const Matrix& X) const;

  // Binary file: "ADLDET", uint32 version, uint8 kind, uint64 seed,
  // uint64 train_dim, then the kind's parameters (little-endian).
  void save(const std::filesystem::path& path) const;
  static FittedDetector load(const std::filesystem::path& path);

  const detail::DetectorModel& model() const { return *model_; }

 private:
  DetectorKind kind_;
  std::size_t train_dim_;
  std::uint64_t seed_;
  std::shared_ptr<const detail::DetectorModel> model_;
};

// Deterministic for fixed (X_train, params, seed). Throws InvalidArgument on
// empty or zero-width input, DataError on non-finite values, and per-kind
// errors (LOF: k outside [1, n-1] or all rows identical; IForest: n < 2;
// AE: divergence).
FittedDetector fit(DetectorKind kind, const Matrix& X_train, const DetectorParams& params = {},
                   std::uint64_t seed = 42);

std::vector<double> ecod_score(const FittedDetector& fitted, const Matrix& X_test);
std::vector<double> iforest_score(const FittedDetector& fitted, const Matrix& X_test);
std::vector<double> lof_score(const FittedDetector& fitted, const Matrix& X_test);
std::vector<double> ae_fit_score(const Matrix& X_train, const Matrix& X_test,
                                 const AeParams& params = {}, std::uint64_t seed = 42);

// "id,score" CSV with shortest round-trip values.
void write_scores_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                      std::span<const double> scores);

}  // namespace adlab

#endif  // ADLAB_DETECTORS_HPP_
