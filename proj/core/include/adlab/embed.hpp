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

#ifndef ADLAB_EMBED_HPP_
#define ADLAB_EMBED_HPP_

#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "adlab/hash.hpp"
#include "adlab/llm.hpp"

namespace adlab {

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

// Throws DataError unless the vector is non-empty and finite.
void validate_embedding(const EmbeddingVector& v, const std::string& what);

// SHA-256 of model_id || 0x00 || utf8(text).
Sha256Digest embedding_cache_key(const std::string& model_id, const std::string& text);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts,
                                     const std::string& model_id) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_embed(texts, model_id);
  }

  // Number of embed() requests issued so far.
  std::size_t calls() const { return calls_.load(std::memory_order_relaxed); }

 protected:
  virtual std::vector<EmbeddingVector> do_embed(std::span<const std::string> texts,
                                                const std::string& model_id) = 0;

 private:
  std::atomic<std::size_t> calls_{0};
};

// Serves vectors recorded in <dir>/embeddings.tsv, one record per line:
//   <64 hex chars of embedding_cache_key>\t<v0> <v1> ... <vd-1>
// Values use shortest round-trip decimal notation.
class FixtureEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit FixtureEmbeddingProvider(const std::filesystem::path& dir);

  static void write_fixture(const std::filesystem::path& dir, const std::string& model_id,
                            std::span<const std::string> texts,
                            std::span<const EmbeddingVector> vectors);

 protected:
  std::vector<EmbeddingVector> do_embed(std::span<const std::string> texts,
                                        const std::string& model_id) override;

 private:
  std::unordered_map<std::string, EmbeddingVector> by_key_;
};

// OpenAI-compatible /embeddings endpoint (POST {"model", "input": [...]}).
class LiveEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit LiveEmbeddingProvider(LiveEndpointConfig config) : config_(std::move(config)) {}

  static std::vector<EmbeddingVector> parse_response_body(const std::string& body,
                                                          std::size_t expected);

 protected:
  std::vector<EmbeddingVector> do_embed(std::span<const std::string> texts,
                                        const std::string& model_id) override;

 private:
  LiveEndpointConfig config_;
};

// Append-only binary key-value file.
//   header: "ADLABEMB" then uint32 version (1)
//   record: 32-byte key, uint32 dim, dim x float64
// All integers and floats little-endian. A truncated or inconsistent file is
// reported as DataError ("cache corruption"). Concurrent readers are allowed;
// writers are serialized.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path path);

  std::optional<EmbeddingVector> get(const Sha256Digest& key) const;
  void put(const Sha256Digest& key, const EmbeddingVector& v);
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::map<Sha256Digest, EmbeddingVector> entries_;
};

struct EmbedOptions {
  std::size_t batch_size = 64;
  int max_in_flight = 4;
};

// Embeds texts in input order. The cache (when given) is consulted before the
// provider and filled afterwards; only missing texts reach the provider.
// Throws DataError when vectors in one call disagree on dimension.
std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts,
                                         const std::string& model_id, EmbeddingProvider& provider,
                                         EmbeddingCache* cache = nullptr,
                                         const EmbedOptions& options = {});

// CSV matrix: optional header row starting with "id", then one row per
// sample: id,v0,v1,... . Every row must have the same width and finite
// values; ids must be unique.
std::map<std::string, EmbeddingVector> import_embeddings(const std::filesystem::path& path);

// Writes the CSV format read by import_embeddings; values round-trip exactly.
void export_embeddings(const std::filesystem::path& path, std::span<const std::string> ids,
                       std::span<const EmbeddingVector> vectors);

}  // namespace adlab

#endif  // ADLAB_EMBED_HPP_
