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

#include "adlab/embed.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "http_client.hpp"
#include "json.hpp"
#include "parallel.hpp"
#include "text.hpp"

namespace adlab {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "the embedding cache format assumes a little-endian host");

namespace {

constexpr char kCacheMagic[8] = {'A', 'D', 'L', 'A', 'B', 'E', 'M', 'B'};
constexpr std::uint32_t kCacheVersion = 1;
// Guards against reading a garbage dimension from a damaged file.
constexpr std::uint32_t kMaxDim = 1u << 20;

double parse_double(std::string_view tok, const std::string& where) {
  tok = text::trim(tok);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    // from_chars rejects "nan"/"inf" spellings with a sign; report uniformly.
    if (tok == "nan" || tok == "NaN" || tok == "-nan" || tok == "inf" || tok == "-inf") {
      throw DataError(where + ": non-finite value '" + std::string(tok) + "'");
    }
    throw DataError(where + ": cannot parse number '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v)) throw DataError(where + ": non-finite value '" + std::string(tok) + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Sha256Digest digest_from_hex(std::string_view hex, const std::string& where) {
  if (hex.size() != 64) throw DataError(where + ": key must be 64 hex characters");
  Sha256Digest d{};
  for (std::size_t i = 0; i < 32; ++i) {
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(hex.data() + 2 * i, hex.data() + 2 * i + 2, v, 16);
    if (ec != std::errc{} || ptr != hex.data() + 2 * i + 2) {
      throw DataError(where + ": invalid hex key");
    }
    d[i] = static_cast<std::uint8_t>(v);
  }
  return d;
}

}  // namespace

void validate_embedding(const EmbeddingVector& v, const std::string& what) {
  if (v.values.empty()) throw DataError(what + ": empty embedding");
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    if (!std::isfinite(v.values[i])) {
      throw DataError(what + ": non-finite value at dimension " + std::to_string(i));
    }
  }
}

Sha256Digest embedding_cache_key(const std::string& model_id, const std::string& t) {
  std::string material = model_id;
  material.push_back('\0');
  material += t;
  return sha256(material);
}

// ---------------------------------------------------------------------------
// Fixture provider

FixtureEmbeddingProvider::FixtureEmbeddingProvider(const std::filesystem::path& dir) {
  const auto path = dir / "embeddings.tsv";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding fixture " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(where + ": expected <key>\\t<values>");
    const auto key = to_hex(digest_from_hex(line.substr(0, tab), where));
    EmbeddingVector v;
    std::istringstream vs(line.substr(tab + 1));
    std::string tok;
    while (vs >> tok) v.values.push_back(parse_double(tok, where));
    validate_embedding(v, where);
    by_key_[key] = std::move(v);
  }
}

void FixtureEmbeddingProvider::write_fixture(const std::filesystem::path& dir,
                                             const std::string& model_id,
                                             std::span<const std::string> texts,
                                             std::span<const EmbeddingVector> vectors) {
  if (texts.size() != vectors.size()) {
    throw InvalidArgument("write_fixture: texts and vectors differ in length");
  }
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "embeddings.tsv", std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / "embeddings.tsv").string());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out << to_hex(embedding_cache_key(model_id, texts[i])) << '\t';
    for (std::size_t k = 0; k < vectors[i].values.size(); ++k) {
      if (k) out << ' ';
      out << text::format_double(vectors[i].values[k]);
    }
    out << '\n';
  }
}

std::vector<EmbeddingVector> FixtureEmbeddingProvider::do_embed(std::span<const std::string> texts,
                                                                const std::string& model_id) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    const auto key = to_hex(embedding_cache_key(model_id, t));
    auto it = by_key_.find(key);
    if (it == by_key_.end()) {
      throw DataError("embedding fixture has no vector for key " + key);
    }
    out.push_back(it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Live provider

std::vector<EmbeddingVector> LiveEmbeddingProvider::parse_response_body(const std::string& body,
                                                                        std::size_t expected) {
  std::vector<EmbeddingVector> out(expected);
  std::vector<bool> seen(expected, false);
  try {
    const json j = json::parse(body);
    const auto& data = j.at("data");
    if (data.size() != expected) {
      throw TransportError("embeddings endpoint returned " + std::to_string(data.size()) +
                           " vectors for " + std::to_string(expected) + " inputs");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& item = data[i];
      const std::size_t idx = item.contains("index") ? item["index"].get<std::size_t>() : i;
      if (idx >= expected || seen[idx]) throw TransportError("embeddings endpoint: bad index");
      seen[idx] = true;
      out[idx].values = item.at("embedding").get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw TransportError(std::string("unexpected embeddings payload: ") + e.what());
  }
  return out;
}

std::vector<EmbeddingVector> LiveEmbeddingProvider::do_embed(std::span<const std::string> texts,
                                                             const std::string& model_id) {
  const json body = {{"model", model_id},
                     {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const std::string payload = body.dump();
  const std::string response =
      detail::with_retries(config_.max_attempts, config_.initial_backoff, [&] {
        auto res = detail::post_json(config_.base_url, "/embeddings", payload, config_.api_key,
                                     config_.timeout);
        if (res.status < 200 || res.status >= 300) {
          throw TransportError("HTTP " + std::to_string(res.status) + ": " +
                               res.body.substr(0, 200));
        }
        return res.body;
      });
  return parse_response_body(response, texts.size());
}

// ---------------------------------------------------------------------------
// Cache

EmbeddingCache::EmbeddingCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;
  const auto corrupt = [&](const std::string& why) {
    return DataError("cache corruption in " + path_.string() + ": " + why);
  };
  char magic[8];
  std::uint32_t version = 0;
  if (!in.read(magic, sizeof magic)) {
    if (in.gcount() == 0) return;  // empty file
    throw corrupt("truncated header");
  }
  if (std::memcmp(magic, kCacheMagic, sizeof magic) != 0) throw corrupt("bad magic");
  if (!in.read(reinterpret_cast<char*>(&version), sizeof version)) throw corrupt("truncated header");
  if (version != kCacheVersion) throw corrupt("unsupported version " + std::to_string(version));
  for (std::size_t rec = 0;; ++rec) {
    Sha256Digest key{};
    in.read(reinterpret_cast<char*>(key.data()), key.size());
    if (in.gcount() == 0 && in.eof()) break;
    if (in.gcount() != static_cast<std::streamsize>(key.size())) {
      throw corrupt("truncated key in record " + std::to_string(rec));
    }
    std::uint32_t dim = 0;
    if (!in.read(reinterpret_cast<char*>(&dim), sizeof dim)) {
      throw corrupt("truncated dimension in record " + std::to_string(rec));
    }
    if (dim == 0 || dim > kMaxDim) throw corrupt("implausible dimension in record " + std::to_string(rec));
    EmbeddingVector v;
    v.values.resize(dim);
    if (!in.read(reinterpret_cast<char*>(v.values.data()),
                 static_cast<std::streamsize>(dim * sizeof(double)))) {
      throw corrupt("truncated vector in record " + std::to_string(rec));
    }
    for (double x : v.values) {
      if (!std::isfinite(x)) throw corrupt("non-finite value in record " + std::to_string(rec));
    }
    entries_[key] = std::move(v);
  }
}

std::optional<EmbeddingVector> EmbeddingCache::get(const Sha256Digest& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

void EmbeddingCache::put(const Sha256Digest& key, const EmbeddingVector& v) {
  validate_embedding(v, "embedding cache put");
  std::unique_lock lock(mu_);
  if (entries_.contains(key)) return;
  const bool fresh = !std::filesystem::exists(path_) || std::filesystem::file_size(path_) == 0;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to embedding cache " + path_.string());
  if (fresh) {
    out.write(kCacheMagic, sizeof kCacheMagic);
    out.write(reinterpret_cast<const char*>(&kCacheVersion), sizeof kCacheVersion);
  }
  const auto dim = static_cast<std::uint32_t>(v.values.size());
  out.write(reinterpret_cast<const char*>(key.data()), key.size());
  out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  out.write(reinterpret_cast<const char*>(v.values.data()),
            static_cast<std::streamsize>(v.values.size() * sizeof(double)));
  out.flush();
  if (!out) throw IoError("write failed: " + path_.string());
  entries_[key] = v;
}

// ---------------------------------------------------------------------------

std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts,
                                         const std::string& model_id, EmbeddingProvider& provider,
                                         EmbeddingCache* cache, const EmbedOptions& options) {
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) throw InvalidArgument("embed_batch: empty text at index " + std::to_string(i));
  }
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<bool> have(texts.size(), false);
  std::vector<Sha256Digest> keys(texts.size());
  // Misses are deduplicated by key; repeated texts take one request slot.
  std::map<Sha256Digest, std::vector<std::size_t>> missing;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    keys[i] = embedding_cache_key(model_id, texts[i]);
    if (cache) {
      if (auto hit = cache->get(keys[i])) {
        out[i] = std::move(*hit);
        have[i] = true;
        continue;
      }
    }
    missing[keys[i]].push_back(i);
  }
  std::vector<std::size_t> unique_missing;
  unique_missing.reserve(missing.size());
  {
    // Keep first-appearance order for the request payloads.
    std::set<Sha256Digest> queued;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (!have[i] && queued.insert(keys[i]).second) unique_missing.push_back(i);
    }
  }
  const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
  const std::size_t n_chunks = (unique_missing.size() + batch - 1) / batch;
  std::vector<std::vector<EmbeddingVector>> results(n_chunks);
  detail::bounded_parallel_for(n_chunks, options.max_in_flight, [&](std::size_t c) {
    const std::size_t begin = c * batch;
    const std::size_t end = std::min(unique_missing.size(), begin + batch);
    std::vector<std::string> chunk;
    chunk.reserve(end - begin);
    for (std::size_t k = begin; k < end; ++k) chunk.push_back(texts[unique_missing[k]]);
    auto vecs = provider.embed(chunk, model_id);
    if (vecs.size() != chunk.size()) {
      throw DataError("embedding provider returned " + std::to_string(vecs.size()) +
                      " vectors for " + std::to_string(chunk.size()) + " texts");
    }
    for (std::size_t k = 0; k < vecs.size(); ++k) {
      validate_embedding(vecs[k], "embedding for text " + std::to_string(unique_missing[begin + k]));
    }
    results[c] = std::move(vecs);
  });
  for (std::size_t c = 0; c < n_chunks; ++c) {
    for (std::size_t k = 0; k < results[c].size(); ++k) {
      const std::size_t first = unique_missing[c * batch + k];
      for (auto i : missing[keys[first]]) {
        out[i] = results[c][k];
        have[i] = true;
      }
      if (cache) cache->put(keys[first], results[c][k]);
    }
  }
  if (!out.empty()) {
    const std::size_t dim = out.front().dim();
    for (std::size_t i = 1; i < out.size(); ++i) {
      if (out[i].dim() != dim) {
        throw DataError("embed_batch: dimension mismatch (" + std::to_string(dim) + " vs " +
                        std::to_string(out[i].dim()) + " at index " + std::to_string(i) + ")");
      }
    }
  }
  return out;
}

std::map<std::string, EmbeddingVector> import_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::string, EmbeddingVector> out;
  std::optional<std::size_t> width;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (line_no == 1 && text::trim(fields[0]) == "id") continue;
    const std::string where = path.string() + ": row " + std::to_string(line_no);
    if (fields.size() < 2) throw DataError(where + ": needs an id and at least one value");
    if (width && fields.size() != *width) {
      throw DataError(where + ": ragged row (" + std::to_string(fields.size() - 1) +
                      " values, expected " + std::to_string(*width - 1) + ")");
    }
    width = fields.size();
    EmbeddingVector v;
    v.values.reserve(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) v.values.push_back(parse_double(fields[k], where));
    std::string id = fields[0];
    if (!out.emplace(id, std::move(v)).second) throw DataError(where + ": duplicate id '" + id + "'");
  }
  return out;
}

void export_embeddings(const std::filesystem::path& path, std::span<const std::string> ids,
                       std::span<const EmbeddingVector> vectors) {
  if (ids.size() != vectors.size()) throw InvalidArgument("export_embeddings: length mismatch");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const std::size_t dim = vectors.empty() ? 0 : vectors.front().dim();
  out << "id";
  for (std::size_t k = 0; k < dim; ++k) out << ",d" << k;
  out << '\n';
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (vectors[i].dim() != dim) throw InvalidArgument("export_embeddings: ragged vectors");
    out << csv_quote(ids[i]);
    for (double x : vectors[i].values) out << ',' << text::format_double(x);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace adlab
