// Copyright 2026 The weaklabel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// Leaderboard-style scoring: corpus-pooled WER/CER per dataset and relative
// error-rate reduction tables.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "weaklabel/manifest.hpp"
#include "weaklabel/parallel.hpp"
#include "weaklabel/textmetrics.hpp"

namespace weaklabel {

/// Benchmark column order used for printed tables.
inline const std::vector<std::string>& standard_datasets() {
  static const std::vector<std::string> kColumns = {"SADA",         "Common Voice", "MASC (clean)",
                                                    "MASC (noisy)", "Casablanca",   "MGB-2"};
  return kColumns;
}

struct EvalPair {
  std::string utterance_id;
  std::string reference;
  std::string prediction;
  std::string dataset_tag;
};

inline EvalPair eval_pair_from_json(const Json& j) {
  return {detail::require(j, "utterance_id").get<std::string>(), detail::require(j, "reference").get<std::string>(),
          detail::require(j, "prediction").get<std::string>(), detail::require(j, "dataset_tag").get<std::string>()};
}

inline Json to_json(const EvalPair& p) {
  return Json{{"utterance_id", p.utterance_id},
              {"reference", p.reference},
              {"prediction", p.prediction},
              {"dataset_tag", p.dataset_tag}};
}

inline std::vector<EvalPair> read_eval_pairs(const std::filesystem::path& path) {
  std::vector<EvalPair> out;
  for_each_jsonl(path, [&](std::size_t, const Json& j) { out.push_back(eval_pair_from_json(j)); });
  return out;
}

// ---------------------------------------------------------------------------
// Model reports
// ---------------------------------------------------------------------------

struct DatasetRates {
  std::string dataset;
  /// Percent, unrounded.
  double wer = 0;
  double cer = 0;
};

struct ModelReport {
  std::string model_name;
  std::vector<DatasetRates> datasets;
  /// Averages as printed by the source, if any; only checked, never used.
  std::optional<double> stated_average_wer;
  std::optional<double> stated_average_cer;

  double average_wer() const { return mean(&DatasetRates::wer); }
  double average_cer() const { return mean(&DatasetRates::cer); }

  std::vector<std::string> columns() const {
    std::vector<std::string> c;
    for (const auto& d : datasets) c.push_back(d.dataset);
    return c;
  }
  const DatasetRates* find(const std::string& dataset) const {
    for (const auto& d : datasets) {
      if (d.dataset == dataset) return &d;
    }
    return nullptr;
  }

 private:
  double mean(double DatasetRates::*field) const {
    if (datasets.empty()) throw UsageError("report '" + model_name + "' has no datasets");
    double sum = 0;
    for (const auto& d : datasets) sum += d.*field;
    return sum / static_cast<double>(datasets.size());
  }
};

inline constexpr double kAverageTolerance = 0.005;

/// Empty iff each stated average matches the recomputed one within rounding.
inline std::vector<std::string> check_averages(const ModelReport& r) {
  std::vector<std::string> v;
  auto check = [&](const std::optional<double>& stated, double computed, const char* what) {
    if (stated && std::fabs(*stated - computed) > kAverageTolerance + 1e-9) {
      std::ostringstream os;
      os << r.model_name << ": stated average " << what << ' ' << *stated << " differs from mean of cells " << computed;
      v.push_back(os.str());
    }
  };
  check(r.stated_average_wer, r.average_wer(), "WER");
  check(r.stated_average_cer, r.average_cer(), "CER");
  return v;
}

inline Json to_json(const ModelReport& r) {
  Json ds = Json::array();
  for (const auto& d : r.datasets) ds.push_back(Json{{"dataset", d.dataset}, {"wer", d.wer}, {"cer", d.cer}});
  return Json{{"model", r.model_name},
              {"datasets", std::move(ds)},
              {"average", Json{{"wer", r.average_wer()}, {"cer", r.average_cer()}}}};
}

/// The report cut down to `columns`, in that order. Stated averages no longer
/// apply once a column is removed and are dropped.
inline ModelReport restrict_to_columns(const ModelReport& r, const std::vector<std::string>& columns) {
  ModelReport out;
  out.model_name = r.model_name;
  for (const auto& c : columns) {
    const auto* d = r.find(c);
    if (!d) throw ValidationError("report '" + r.model_name + "' has no column '" + c + "'");
    out.datasets.push_back(*d);
  }
  if (out.datasets.size() == r.datasets.size()) {
    out.stated_average_wer = r.stated_average_wer;
    out.stated_average_cer = r.stated_average_cer;
  }
  return out;
}

/// `{"model", "datasets": [{"dataset", "wer", "cer"}], "average"?: {"wer", "cer"}}`.
/// A stated average off by more than rounding is rejected.
inline ModelReport model_report_from_json(const Json& j) {
  ModelReport r;
  r.model_name = detail::require(j, "model").get<std::string>();
  std::set<std::string> seen;
  for (const auto& d : detail::require(j, "datasets")) {
    DatasetRates x{detail::require(d, "dataset").get<std::string>(), detail::require(d, "wer").get<double>(),
                   detail::require(d, "cer").get<double>()};
    if (!seen.insert(x.dataset).second) throw ValidationError("duplicate dataset '" + x.dataset + "'");
    if (!(x.wer >= 0) || !(x.cer >= 0)) throw ValidationError("error rates must be non-negative");
    r.datasets.push_back(std::move(x));
  }
  if (r.datasets.empty()) throw ValidationError("report '" + r.model_name + "' has no datasets");
  if (auto it = j.find("average"); it != j.end() && !it->is_null()) {
    if (it->contains("wer")) r.stated_average_wer = (*it)["wer"].get<double>();
    if (it->contains("cer")) r.stated_average_cer = (*it)["cer"].get<double>();
  }
  auto bad = check_averages(r);
  if (!bad.empty()) throw ValidationError(bad.front());
  return r;
}

/// A JSON object holding one report or an array of them.
inline std::vector<ModelReport> load_model_reports(const std::filesystem::path& path) {
  Json j = load_json_file(path);
  std::vector<ModelReport> out;
  if (j.is_array()) {
    for (const auto& r : j) out.push_back(model_report_from_json(r));
  } else {
    out.push_back(model_report_from_json(j));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scoring pairs
// ---------------------------------------------------------------------------

struct DatasetTotals {
  std::string dataset;
  std::size_t utterances = 0;
  std::size_t word_errors = 0;
  std::size_t reference_words = 0;
  std::size_t char_errors = 0;
  std::size_t reference_chars = 0;
};

struct PairEvaluation {
  ModelReport report;
  std::vector<DatasetTotals> totals;
  std::vector<std::string> warnings;
};

/// Total edit distance over total reference length per dataset, in percent.
/// With `datasets` given, output follows that order, missing datasets are
/// omitted with a warning and pairs tagged otherwise are ignored with a warning.
inline PairEvaluation evaluate_pairs(const std::vector<EvalPair>& pairs, const NormalizationPolicy& policy,
                                     const std::vector<std::string>& datasets = {}, std::string model_name = "model",
                                     std::size_t workers = 1) {
  std::vector<std::string> order = datasets;
  std::map<std::string, std::vector<const EvalPair*>> by_tag;
  for (const auto& p : pairs) {
    if (normalize(p.reference, policy, UnitKind::word).empty())
      throw ValidationError("utterance '" + p.utterance_id + "' has an empty reference");
    auto [it, inserted] = by_tag.try_emplace(p.dataset_tag);
    if (inserted && datasets.empty()) order.push_back(p.dataset_tag);
    it->second.push_back(&p);
  }
  PairEvaluation out;
  out.report.model_name = std::move(model_name);
  if (!datasets.empty()) {
    for (const auto& [tag, v] : by_tag) {
      if (std::find(datasets.begin(), datasets.end(), tag) == datasets.end())
        out.warnings.push_back("ignoring " + std::to_string(v.size()) + " pair(s) tagged '" + tag + "'");
    }
  }
  std::vector<std::string> present;
  for (const auto& d : order) {
    if (by_tag.count(d)) present.push_back(d);
    else out.warnings.push_back("dataset '" + d + "' has no pairs; omitted");
  }
  ordered_parallel_for<DatasetTotals>(
      present.size(), workers,
      [&](std::size_t i) {
        DatasetTotals t{present[i], 0, 0, 0, 0, 0};
        for (const EvalPair* p : by_tag.at(present[i])) {
          ++t.utterances;
          auto rw = normalize(p->reference, policy, UnitKind::word);
          auto rc = normalize(p->reference, policy, UnitKind::character);
          t.word_errors += levenshtein(rw, normalize(p->prediction, policy, UnitKind::word));
          t.char_errors += levenshtein(rc, normalize(p->prediction, policy, UnitKind::character));
          t.reference_words += rw.size();
          t.reference_chars += rc.size();
        }
        return t;
      },
      [&](std::size_t, DatasetTotals&& t) {
        out.report.datasets.push_back({t.dataset, 100.0 * static_cast<double>(t.word_errors) / static_cast<double>(t.reference_words),
                                       100.0 * static_cast<double>(t.char_errors) / static_cast<double>(t.reference_chars)});
        out.totals.push_back(std::move(t));
      });
  return out;
}

// ---------------------------------------------------------------------------
// Reduction tables
// ---------------------------------------------------------------------------

inline const std::string kAverageColumn = "Average";

struct ReductionCell {
  std::string dataset;
  double baseline_wer = 0, ours_wer = 0, werr = 0;
  double baseline_cer = 0, ours_cer = 0, cerr = 0;
  /// Which baseline model supplied each baseline value.
  std::string wer_source, cer_source;
};

struct ReductionTable {
  std::string baseline_name;
  std::string ours_name;
  /// Per-dataset cells followed by the Average cell.
  std::vector<ReductionCell> cells;

  const ReductionCell& at(const std::string& dataset) const {
    for (const auto& c : cells) {
      if (c.dataset == dataset) return c;
    }
    throw UsageError("no column '" + dataset + "' in reduction table");
  }
};

namespace detail {

inline void require_same_columns(const ModelReport& a, const ModelReport& b) {
  auto ca = a.columns(), cb = b.columns();
  std::sort(ca.begin(), ca.end());
  std::sort(cb.begin(), cb.end());
  if (ca != cb) throw ValidationError("reports '" + a.model_name + "' and '" + b.model_name + "' have different dataset columns");
}

}  // namespace detail

/// Column-wise reduction. The Average column compares the two reports' mean
/// rates, not the mean of per-column reductions.
inline ReductionTable reduction_table(const ModelReport& baseline, const ModelReport& ours) {
  detail::require_same_columns(baseline, ours);
  ReductionTable t{baseline.model_name, ours.model_name, {}};
  for (const auto& b : baseline.datasets) {
    const auto* o = ours.find(b.dataset);
    t.cells.push_back({b.dataset, b.wer, o->wer, rate_reduction(b.wer, o->wer), b.cer, o->cer,
                       rate_reduction(b.cer, o->cer), baseline.model_name, baseline.model_name});
  }
  t.cells.push_back({kAverageColumn, baseline.average_wer(), ours.average_wer(),
                     rate_reduction(baseline.average_wer(), ours.average_wer()), baseline.average_cer(),
                     ours.average_cer(), rate_reduction(baseline.average_cer(), ours.average_cer()),
                     baseline.model_name, baseline.model_name});
  return t;
}

/// Like reduction_table, but every cell (the Average included) compares against
/// the lowest rate any baseline reaches in that column.
inline ReductionTable reduction_against_best(const std::vector<ModelReport>& baselines, const ModelReport& ours) {
  if (baselines.empty()) throw UsageError("no baseline reports");
  for (const auto& b : baselines) detail::require_same_columns(b, ours);
  ReductionTable t{"best baseline", ours.model_name, {}};
  auto best = [&](auto value) {
    const ModelReport* arg = &baselines.front();
    for (const auto& b : baselines) {
      if (value(b) < value(*arg)) arg = &b;
    }
    return std::pair{value(*arg), arg->model_name};
  };
  auto cell = [&](const std::string& name, double ow, double oc, auto wer_of, auto cer_of) {
    auto [bw, sw] = best(wer_of);
    auto [bc, sc] = best(cer_of);
    return ReductionCell{name, bw, ow, rate_reduction(bw, ow), bc, oc, rate_reduction(bc, oc), sw, sc};
  };
  for (const auto& o : ours.datasets) {
    t.cells.push_back(cell(o.dataset, o.wer, o.cer, [&](const ModelReport& b) { return b.find(o.dataset)->wer; },
                           [&](const ModelReport& b) { return b.find(o.dataset)->cer; }));
  }
  t.cells.push_back(cell(kAverageColumn, ours.average_wer(), ours.average_cer(),
                         [](const ModelReport& b) { return b.average_wer(); },
                         [](const ModelReport& b) { return b.average_cer(); }));
  return t;
}

inline Json to_json(const ReductionTable& t) {
  Json cells = Json::array();
  for (const auto& c : t.cells) {
    cells.push_back(Json{{"dataset", c.dataset},
                         {"baseline_wer", c.baseline_wer},
                         {"ours_wer", c.ours_wer},
                         {"werr", c.werr},
                         {"baseline_cer", c.baseline_cer},
                         {"ours_cer", c.ours_cer},
                         {"cerr", c.cerr},
                         {"wer_source", c.wer_source},
                         {"cer_source", c.cer_source}});
  }
  return Json{{"baseline", t.baseline_name}, {"ours", t.ours_name}, {"cells", std::move(cells)}};
}

// ---------------------------------------------------------------------------
// Expected-value diffs
// ---------------------------------------------------------------------------

enum class RateMetric { werr, cerr };

inline std::string_view to_string(RateMetric m) { return m == RateMetric::werr ? "WERR" : "CERR"; }

struct ExpectedCell {
  std::string dataset;
  RateMetric metric;
  double value;
};

struct CellDiff {
  std::string dataset;
  RateMetric metric;
  double computed = 0;
  double expected = 0;
  bool matches = false;
};

/// `{"<dataset>": {"werr": x, "cerr": y}, ...}`.
inline std::vector<ExpectedCell> expected_cells_from_json(const Json& j) {
  std::vector<ExpectedCell> out;
  for (const auto& [dataset, v] : j.items()) {
    if (v.contains("werr")) out.push_back({dataset, RateMetric::werr, v["werr"].get<double>()});
    if (v.contains("cerr")) out.push_back({dataset, RateMetric::cerr, v["cerr"].get<double>()});
  }
  return out;
}

inline std::vector<CellDiff> compare_to_expected(const ReductionTable& t, const std::vector<ExpectedCell>& expected,
                                                 double tolerance = 0.05) {
  std::vector<CellDiff> out;
  for (const auto& e : expected) {
    const auto& c = t.at(e.dataset);
    double v = e.metric == RateMetric::werr ? c.werr : c.cerr;
    out.push_back({e.dataset, e.metric, v, e.value, std::fabs(v - e.value) <= tolerance + 1e-9});
  }
  return out;
}

inline Json to_json(const CellDiff& d) {
  return Json{{"dataset", d.dataset},
              {"metric", std::string(to_string(d.metric))},
              {"computed", d.computed},
              {"expected", d.expected},
              {"difference", d.computed - d.expected},
              {"matches", d.matches}};
}

// ---------------------------------------------------------------------------
// Text tables
// ---------------------------------------------------------------------------

/// Half-up to two decimals, for display only.
inline std::string format_rate(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << round_half_up(v, 2);
  return os.str();
}

namespace detail {

inline std::size_t display_width(const std::string& s) { return unicode::decode_utf8(s).size(); }

inline std::string render(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], display_width(r[i]));
  }
  std::ostringstream os;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) os << " | ";
      std::size_t pad = width[i] - display_width(r[i]);
      if (i == 0) os << r[i] << std::string(pad, ' ');
      else os << std::string(pad, ' ') << r[i];
    }
    os << '\n';
  }
  return os.str();
}

/// Standard columns first, then any others in their given order.
inline std::vector<std::string> display_order(const std::vector<std::string>& columns) {
  std::vector<std::string> out;
  for (const auto& c : standard_datasets()) {
    if (std::find(columns.begin(), columns.end(), c) != columns.end()) out.push_back(c);
  }
  for (const auto& c : columns) {
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

}  // namespace detail

/// One row per model plus the Average column.
inline std::string format_rate_table(const std::vector<ModelReport>& reports, bool cer) {
  if (reports.empty()) return {};
  auto cols = detail::display_order(reports.front().columns());
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{cer ? "CER" : "WER"};
  head.insert(head.end(), cols.begin(), cols.end());
  head.push_back(kAverageColumn);
  rows.push_back(head);
  for (const auto& r : reports) {
    std::vector<std::string> row{r.model_name};
    for (const auto& c : cols) {
      const auto* d = r.find(c);
      row.push_back(d ? format_rate(cer ? d->cer : d->wer) : "-");
    }
    row.push_back(format_rate(cer ? r.average_cer() : r.average_wer()));
    rows.push_back(std::move(row));
  }
  return detail::render(rows);
}

inline std::string format_reduction_table(const ReductionTable& t) {
  std::vector<std::string> cols;
  for (const auto& c : t.cells) {
    if (c.dataset != kAverageColumn) cols.push_back(c.dataset);
  }
  cols = detail::display_order(cols);
  cols.push_back(kAverageColumn);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{""}, werr{"WERR"}, cerr{"CERR"};
  for (const auto& c : cols) {
    const auto& cell = t.at(c);
    head.push_back(c);
    werr.push_back(format_rate(cell.werr));
    cerr.push_back(format_rate(cell.cerr));
  }
  rows.push_back(head);
  rows.push_back(werr);
  rows.push_back(cerr);
  return detail::render(rows);
}

}  // namespace weaklabel
