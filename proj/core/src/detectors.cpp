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

#include "adlab/detectors.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "adlab/error.hpp"
#include "detector_models.hpp"
#include "text.hpp"

namespace adlab {

static_assert(std::endian::native == std::endian::little,
              "detector files are written in host order, which must be little-endian");

namespace {

constexpr char kMagic[6] = {'A', 'D', 'L', 'D', 'E', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

void check_finite(const Matrix& X, const char* what) {
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t j = 0; j < X.cols(); ++j) {
      if (!std::isfinite(X(i, j))) {
        throw DataError(std::string(what) + ": non-finite value at row " + std::to_string(i) +
                        ", column " + std::to_string(j));
      }
    }
  }
}

}  // namespace

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) {
      throw InvalidArgument("Matrix::from_rows: row " + std::to_string(i) + " has " +
                            std::to_string(rows[i].size()) + " columns, expected " +
                            std::to_string(m.cols()));
    }
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

const char* to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::kEcod: return "ECOD";
    case DetectorKind::kIForest: return "IForest";
    case DetectorKind::kLof: return "LOF";
    case DetectorKind::kAe: return "AE";
  }
  return "?";
}

DetectorKind parse_detector_kind(const std::string& name) {
  const std::string f = text::fold(name);
  if (f == "ecod") return DetectorKind::kEcod;
  if (f == "iforest") return DetectorKind::kIForest;
  if (f == "lof") return DetectorKind::kLof;
  if (f == "ae") return DetectorKind::kAe;
  throw InvalidArgument("unknown detector '" + name + "' (expected ECOD, IForest, LOF or AE)");
}

// ---------------------------------------------------------------------------

namespace detail {

void BinWriter::u8(std::uint8_t v) { out_.write(reinterpret_cast<const char*>(&v), 1); }
void BinWriter::u32(std::uint32_t v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
void BinWriter::u64(std::uint64_t v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
void BinWriter::f64(double v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
void BinWriter::f64s(std::span<const double> v) {
  u64(v.size());
  out_.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}
void BinWriter::u64s(std::span<const std::uint64_t> v) {
  u64(v.size());
  out_.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(std::uint64_t)));
}

void BinReader::read(void* dst, std::size_t n) {
  if (!in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n))) {
    throw DataError("detector file is truncated");
  }
}
std::uint8_t BinReader::u8() { std::uint8_t v; read(&v, 1); return v; }
std::uint32_t BinReader::u32() { std::uint32_t v; read(&v, sizeof v); return v; }
std::uint64_t BinReader::u64() { std::uint64_t v; read(&v, sizeof v); return v; }
double BinReader::f64() { double v; read(&v, sizeof v); return v; }
std::vector<double> BinReader::f64s() {
  const auto n = u64();
  if (n > (std::uint64_t{1} << 32)) throw DataError("detector file: implausible array length");
  std::vector<double> v(n);
  read(v.data(), n * sizeof(double));
  return v;
}
std::vector<std::uint64_t> BinReader::u64s() {
  const auto n = u64();
  if (n > (std::uint64_t{1} << 32)) throw DataError("detector file: implausible array length");
  std::vector<std::uint64_t> v(n);
  read(v.data(), n * sizeof(std::uint64_t));
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------

FittedDetector::FittedDetector(DetectorKind kind, std::size_t train_dim, std::uint64_t seed,
                               std::shared_ptr<const detail::DetectorModel> model)
    : kind_(kind), train_dim_(train_dim), seed_(seed), model_(std::move(model)) {}

std::vector<double> FittedDetector::score(const Matrix& X) const {
  if (X.rows() > 0 && X.cols() != train_dim_) {
    throw InvalidArgument(std::string(to_string(kind_)) + ": test matrix has " +
                          std::to_string(X.cols()) + " columns, model was trained on " +
                          std::to_string(train_dim_));
  }
  check_finite(X, "score");
  return model_->score(X);
}

FittedDetector fit(DetectorKind kind, const Matrix& X_train, const DetectorParams& params,
                   std::uint64_t seed) {
  if (X_train.rows() == 0) throw InvalidArgument("fit: training matrix is empty");
  if (X_train.cols() == 0) throw InvalidArgument("fit: training matrix has zero columns");
  check_finite(X_train, "fit");
  std::shared_ptr<const detail::DetectorModel> model;
  switch (kind) {
    case DetectorKind::kEcod:
      model = std::make_shared<detail::EcodModel>(detail::EcodModel::fit(X_train));
      break;
    case DetectorKind::kIForest:
      model = std::make_shared<detail::IForestModel>(
          detail::IForestModel::fit(X_train, params.iforest, seed));
      break;
    case DetectorKind::kLof:
      model = std::make_shared<detail::LofModel>(detail::LofModel::fit(X_train, params.lof));
      break;
    case DetectorKind::kAe: {
      auto ae = std::make_shared<detail::Autoencoder>(X_train.cols(), params.ae, seed);
      ae->train(X_train);
      model = std::move(ae);
      break;
    }
  }
  return FittedDetector(kind, X_train.cols(), seed, std::move(model));
}

namespace {

std::vector<double> score_as(DetectorKind expected, const FittedDetector& fitted,
                             const Matrix& X) {
  if (fitted.kind() != expected) {
    throw InvalidArgument(std::string("expected a fitted ") + to_string(expected) +
                          " detector, got " + to_string(fitted.kind()));
  }
  return fitted.score(X);
}

}  // namespace

std::vector<double> ecod_score(const FittedDetector& fitted, const Matrix& X_test) {
  return score_as(DetectorKind::kEcod, fitted, X_test);
}

std::vector<double> iforest_score(const FittedDetector& fitted, const Matrix& X_test) {
  return score_as(DetectorKind::kIForest, fitted, X_test);
}

std::vector<double> lof_score(const FittedDetector& fitted, const Matrix& X_test) {
  return score_as(DetectorKind::kLof, fitted, X_test);
}

std::vector<double> ae_fit_score(const Matrix& X_train, const Matrix& X_test,
                                 const AeParams& params, std::uint64_t seed) {
  DetectorParams p;
  p.ae = params;
  return fit(DetectorKind::kAe, X_train, p, seed).score(X_test);
}

void FittedDetector::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  detail::BinWriter w(out);
  w.u32(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(kind_));
  w.u64(seed_);
  w.u64(train_dim_);
  model_->save(w);
  if (!out) throw IoError("write failed: " + path.string());
}

FittedDetector FittedDetector::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw DataError(path.string() + ": not a detector file");
  }
  detail::BinReader r(in);
  const auto version = r.u32();
  if (version != kFormatVersion) {
    throw DataError(path.string() + ": unsupported detector format version " +
                    std::to_string(version));
  }
  const auto tag = r.u8();
  if (tag > static_cast<std::uint8_t>(DetectorKind::kAe)) {
    throw DataError(path.string() + ": unknown detector kind tag " + std::to_string(tag));
  }
  const auto kind = static_cast<DetectorKind>(tag);
  const auto seed = r.u64();
  const auto dim = r.u64();
  if (dim == 0 || dim > (1u << 20)) throw DataError(path.string() + ": implausible dimension");
  std::shared_ptr<const detail::DetectorModel> model;
  switch (kind) {
    case DetectorKind::kEcod:
      model = std::make_shared<detail::EcodModel>(detail::EcodModel::load(r, dim));
      break;
    case DetectorKind::kIForest:
      model = std::make_shared<detail::IForestModel>(detail::IForestModel::load(r, dim));
      break;
    case DetectorKind::kLof:
      model = std::make_shared<detail::LofModel>(detail::LofModel::load(r, dim));
      break;
    case DetectorKind::kAe:
      model = std::make_shared<detail::Autoencoder>(detail::Autoencoder::load(r, dim));
      break;
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError(path.string() + ": trailing bytes after model");
  }
  return FittedDetector(kind, dim, seed, std::move(model));
}

void write_scores_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                      std::span<const double> scores) {
  if (ids.size() != scores.size()) throw InvalidArgument("write_scores_csv: length mismatch");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "id,score\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const bool quote = ids[i].find_first_of(",\"\n") != std::string::npos;
    if (quote) {
      out << '"';
      for (char c : ids[i]) out << (c == '"' ? "\"\"" : std::string(1, c));
      out << '"';
    } else {
      out << ids[i];
    }
    out << ',' << text::format_double(scores[i]) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace adlab
