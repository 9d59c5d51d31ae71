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

#include "adlab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "adlab/error.hpp"
#include "json.hpp"
#include "text.hpp"

namespace adlab {

using nlohmann::json;

namespace {

struct ClassCounts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

ClassCounts check_inputs(std::span<const double> scores, std::span<const int> labels,
                         const char* who) {
  if (scores.size() != labels.size()) {
    throw InvalidArgument(std::string(who) + ": scores and labels differ in length");
  }
  ClassCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw InvalidArgument(std::string(who) + ": non-finite score at index " + std::to_string(i));
    }
    if (labels[i] == 1) {
      ++c.pos;
    } else if (labels[i] == 0) {
      ++c.neg;
    } else {
      throw InvalidArgument(std::string(who) + ": label must be 0 or 1");
    }
  }
  if (c.pos == 0 || c.neg == 0) {
    throw InvalidArgument(std::string(who) + ": both classes must be present");
  }
  return c;
}

std::vector<std::size_t> order_by_score(std::span<const double> scores, bool descending) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return descending ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  return idx;
}

std::string fmt4(double v) { return text::format_fixed(v, 4); }

std::string signed4(double v) { return (v >= 0 ? "+" : "") + fmt4(v); }

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << body;
  if (!out) throw IoError("write failed: " + path.string());
}

// CSV quoting for method and dataset names.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
  const auto counts = check_inputs(scores, labels, "auroc");
  const auto idx = order_by_score(scores, /*descending=*/false);
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    // Ranks are 1-based; tied block [i, j] shares the mean rank.
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[idx[k]] == 1) pos_rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(counts.pos);
  const double nn = static_cast<double>(counts.neg);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
  const auto counts = check_inputs(scores, labels, "auprc");
  const auto idx = order_by_score(scores, /*descending=*/true);
  const double np = static_cast<double>(counts.pos);
  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) tp += labels[idx[k]] == 1 ? 1 : 0;
    const double recall = static_cast<double>(tp) / np;
    const double precision = static_cast<double>(tp) / static_cast<double>(j + 1);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j + 1;
  }
  return ap;
}

MetricPair evaluate(std::span<const double> scores, std::span<const int> labels) {
  return MetricPair{auroc(scores, labels), auprc(scores, labels)};
}

DeltaColor classify_delta(double delta) {
  if (delta >= kDeltaColorThreshold) return DeltaColor::kGreen;
  if (delta <= -kDeltaColorThreshold) return DeltaColor::kRed;
  return DeltaColor::kNone;
}

const char* to_string(DeltaColor c) {
  switch (c) {
    case DeltaColor::kGreen:
      return "green";
    case DeltaColor::kRed:
      return "red";
    case DeltaColor::kNone:
      break;
  }
  return "none";
}

DeltaCell make_delta_cell(double value, double baseline) {
  const double delta = value - baseline;
  return DeltaCell{value, delta, classify_delta(delta)};
}

void ResultTable::set(const std::string& method, const std::string& dataset, MetricPair m) {
  if (std::find(methods_.begin(), methods_.end(), method) == methods_.end()) {
    methods_.push_back(method);
  }
  if (std::find(datasets_.begin(), datasets_.end(), dataset) == datasets_.end()) {
    datasets_.push_back(dataset);
  }
  cells_[{method, dataset}] = m;
}

std::optional<MetricPair> ResultTable::get(const std::string& method,
                                           const std::string& dataset) const {
  auto it = cells_.find({method, dataset});
  if (it == cells_.end()) return std::nullopt;
  return it->second;
}

DeltaTable delta_table(const ResultTable& current, const ResultTable& baseline) {
  DeltaTable out;
  out.methods = current.methods();
  out.datasets = current.datasets();
  out.baseline_provenance = baseline.provenance;
  std::size_t matched = 0;
  for (const auto& m : current.methods()) {
    for (const auto& d : current.datasets()) {
      const auto cur = current.get(m, d);
      if (!cur) continue;
      const auto base = baseline.get(m, d);
      if (!base) {
        throw InvalidArgument("delta_table: baseline has no cell for (" + m + ", " + d + ")");
      }
      out.cells[{m, d}] = DeltaPair{make_delta_cell(cur->auroc, base->auroc),
                                    make_delta_cell(cur->auprc, base->auprc)};
      ++matched;
    }
  }
  std::size_t baseline_cells = 0;
  for (const auto& m : baseline.methods()) {
    for (const auto& d : baseline.datasets()) baseline_cells += baseline.get(m, d) ? 1 : 0;
  }
  if (baseline_cells != matched) {
    throw InvalidArgument("delta_table: baseline has cells absent from the current table");
  }
  return out;
}

std::string render_report(const ResultTable& table, ReportFormat format) {
  std::ostringstream os;
  switch (format) {
    case ReportFormat::kMarkdown: {
      if (!table.provenance.empty()) os << "<!-- " << table.provenance << " -->\n";
      os << "| Method |";
      for (const auto& d : table.datasets()) os << ' ' << d << " AUROC | " << d << " AUPRC |";
      os << "\n|---|";
      for (std::size_t i = 0; i < table.datasets().size(); ++i) os << "---:|---:|";
      os << '\n';
      for (const auto& m : table.methods()) {
        os << "| " << m << " |";
        for (const auto& d : table.datasets()) {
          if (auto c = table.get(m, d)) {
            os << ' ' << fmt4(c->auroc) << " | " << fmt4(c->auprc) << " |";
          } else {
            os << " - | - |";
          }
        }
        os << '\n';
      }
      break;
    }
    case ReportFormat::kCsv: {
      os << "method";
      for (const auto& d : table.datasets()) {
        os << ',' << csv_field(d + " AUROC") << ',' << csv_field(d + " AUPRC");
      }
      os << '\n';
      for (const auto& m : table.methods()) {
        os << csv_field(m);
        for (const auto& d : table.datasets()) {
          if (auto c = table.get(m, d)) {
            os << ',' << text::format_double(c->auroc) << ',' << text::format_double(c->auprc);
          } else {
            os << ",,";
          }
        }
        os << '\n';
      }
      break;
    }
    case ReportFormat::kJson: {
      json rows = json::array();
      for (const auto& m : table.methods()) {
        for (const auto& d : table.datasets()) {
          if (auto c = table.get(m, d)) {
            rows.push_back({{"method", m}, {"dataset", d}, {"auroc", c->auroc}, {"auprc", c->auprc}});
          }
        }
      }
      json j = {{"kind", "metrics"},
                {"provenance", table.provenance},
                {"methods", table.methods()},
                {"datasets", table.datasets()},
                {"rows", rows}};
      os << j.dump(2) << '\n';
      break;
    }
  }
  return os.str();
}

std::string render_delta_report(const DeltaTable& table, ReportFormat format) {
  std::ostringstream os;
  const auto cell_md = [](const DeltaCell& c) {
    std::string s = fmt4(c.value) + " (" + signed4(c.delta) + ")";
    if (c.color == DeltaColor::kGreen) s += " ▲";
    if (c.color == DeltaColor::kRed) s += " ▼";
    return s;
  };
  switch (format) {
    case ReportFormat::kMarkdown: {
      os << "<!-- deltas relative to: " << table.baseline_provenance
         << "; changes below 0.03 are not marked -->\n";
      os << "| Method |";
      for (const auto& d : table.datasets) os << ' ' << d << " AUROC | " << d << " AUPRC |";
      os << "\n|---|";
      for (std::size_t i = 0; i < table.datasets.size(); ++i) os << "---:|---:|";
      os << '\n';
      for (const auto& m : table.methods) {
        os << "| " << m << " |";
        for (const auto& d : table.datasets) {
          auto it = table.cells.find({m, d});
          if (it == table.cells.end()) {
            os << " - | - |";
          } else {
            os << ' ' << cell_md(it->second.auroc) << " | " << cell_md(it->second.auprc) << " |";
          }
        }
        os << '\n';
      }
      break;
    }
    case ReportFormat::kCsv: {
      os << "method,dataset,metric,value,delta,color\n";
      for (const auto& m : table.methods) {
        for (const auto& d : table.datasets) {
          auto it = table.cells.find({m, d});
          if (it == table.cells.end()) continue;
          for (const auto& [name, c] :
               {std::pair{"AUROC", it->second.auroc}, std::pair{"AUPRC", it->second.auprc}}) {
            os << csv_field(m) << ',' << csv_field(d) << ',' << name << ','
               << text::format_double(c.value) << ',' << text::format_double(c.delta) << ','
               << to_string(c.color) << '\n';
          }
        }
      }
      break;
    }
    case ReportFormat::kJson: {
      json rows = json::array();
      const auto cell_json = [](const DeltaCell& c) {
        return json{{"value", c.value}, {"delta", c.delta}, {"color", to_string(c.color)}};
      };
      for (const auto& m : table.methods) {
        for (const auto& d : table.datasets) {
          auto it = table.cells.find({m, d});
          if (it == table.cells.end()) continue;
          rows.push_back({{"method", m},
                          {"dataset", d},
                          {"auroc", cell_json(it->second.auroc)},
                          {"auprc", cell_json(it->second.auprc)}});
        }
      }
      json j = {{"kind", "delta"},
                {"baseline_provenance", table.baseline_provenance},
                {"color_threshold", kDeltaColorThreshold},
                {"rows", rows}};
      os << j.dump(2) << '\n';
      break;
    }
  }
  return os.str();
}

void emit_report(const ResultTable& table, ReportFormat format, const std::filesystem::path& path) {
  write_file(path, render_report(table, format));
}

void emit_delta_report(const DeltaTable& table, ReportFormat format,
                       const std::filesystem::path& path) {
  write_file(path, render_delta_report(table, format));
}

ResultTable parse_result_table_json(const std::string& json_text) {
  ResultTable t;
  try {
    const json j = json::parse(json_text);
    if (j.value("kind", "") != "metrics") throw DataError("not a metrics report");
    t.provenance = j.value("provenance", "");
    for (const auto& r : j.at("rows")) {
      t.set(r.at("method").get<std::string>(), r.at("dataset").get<std::string>(),
            MetricPair{r.at("auroc").get<double>(), r.at("auprc").get<double>()});
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("metrics report: ") + e.what());
  }
  return t;
}

ResultTable read_result_table_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_result_table_json(ss.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace adlab
