#pragma once

#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "srl/conll.hpp"
#include "srl/error.hpp"
#include "srl/evaluator.hpp"
#include "srl/utf8.hpp"

namespace srl {

/// Bundles everything the targeted analyses consume: the evaluation corpus,
/// its frames, and one model's predictions aligned to those frames.
struct AnalysisInput {
  const std::vector<Sentence>* corpus = nullptr;
  const std::vector<Frame>* frames = nullptr;
  const Predictions* predictions = nullptr;

  void check() const {
    if (corpus == nullptr || frames == nullptr || predictions == nullptr)
      throw DataError("analysis input is incomplete");
    if (frames->size() != predictions->size())
      throw DataError("analysis: frame/prediction count mismatch");
  }
};

/// Selects token positions of a frame; analyses are position filters over
/// the shared counting kernel below.
using TokenFilter =
    std::function<bool(const Sentence&, const Frame&, std::size_t)>;

/// EvalReport restricted to the selected token positions.
inline EvalReport targeted_f1(const AnalysisInput& input,
                              const TokenFilter& filter) {
  input.check();
  EvalReport report;
  for (std::size_t i = 0; i < input.frames->size(); ++i) {
    const Frame& frame = (*input.frames)[i];
    const Sentence& sent = (*input.corpus)[frame.sentence_index];
    const auto& pred = (*input.predictions)[i];
    if (pred.size() != frame.gold_labels.size())
      throw DataError("analysis: prediction length mismatch in frame " +
                      std::to_string(i));
    for (std::size_t t = 0; t < frame.gold_labels.size(); ++t) {
      if (!filter(sent, frame, t)) continue;
      const bool gold_arg = frame.gold_labels[t] != kNonRole;
      const bool pred_arg = pred[t] != kNonRole;
      if (gold_arg) ++report.gold;
      if (pred_arg) ++report.predicted;
      if (gold_arg && pred_arg && frame.gold_labels[t] == pred[t])
        ++report.correct;
    }
  }
  return report;
}

struct BucketRow {
  std::string key;
  EvalReport report;
  std::size_t support = 0;  // gold argument tokens in the bucket
};

struct BucketReport {
  std::string name;
  std::vector<BucketRow> rows;
};

namespace detail {

inline BucketRow make_row(const AnalysisInput& input, const std::string& key,
                          const TokenFilter& filter) {
  BucketRow row;
  row.key = key;
  row.report = targeted_f1(input, filter);
  row.support = row.report.gold;
  return row;
}

}  // namespace detail

/// Tokens strictly between argument and predicate; adjacency counts as 0.
inline std::size_t predicate_distance(std::size_t token,
                                      std::size_t predicate) {
  const std::size_t gap =
      token > predicate ? token - predicate : predicate - token;
  return gap == 0 ? 0 : gap - 1;
}

/// Targeted F1 per predicate-argument distance bin. Positions beyond the
/// last bin land in an explicit overflow row, so the partition stays
/// exhaustive.
inline BucketReport distance_bins(
    const AnalysisInput& input,
    const std::vector<std::pair<std::size_t, std::size_t>>& bins = {
        {0, 4}, {5, 9}, {10, 14}, {15, 19}}) {
  input.check();
  BucketReport report;
  report.name = "distance";
  for (const auto& [lo, hi] : bins) {
    report.rows.push_back(detail::make_row(
        input, std::to_string(lo) + "-" + std::to_string(hi),
        [lo = lo, hi = hi](const Sentence&, const Frame& f, std::size_t t) {
          const std::size_t d = predicate_distance(t, f.predicate_index);
          return d >= lo && d <= hi;
        }));
  }
  const std::size_t last = bins.empty() ? 0 : bins.back().second;
  report.rows.push_back(detail::make_row(
      input, ">" + std::to_string(last),
      [&bins, last](const Sentence&, const Frame& f, std::size_t t) {
        const std::size_t d = predicate_distance(t, f.predicate_index);
        for (const auto& [lo, hi] : bins)
          if (d >= lo && d <= hi) return false;
        return d > last;
      }));
  return report;
}

/// Targeted F1 per morphological-feature-count bin (gold features).
/// Tokens with zero features are reported in a separate excluded row.
inline BucketReport feature_count_bins(
    const AnalysisInput& input,
    const std::vector<std::pair<std::size_t, std::size_t>>& bins = {
        {1, 2}, {3, 4}, {5, 6}}) {
  input.check();
  BucketReport report;
  report.name = "feature_count";
  auto count_of = [](const Sentence& s, std::size_t t) {
    return s.tokens[t].feats.size();
  };
  for (const auto& [lo, hi] : bins) {
    report.rows.push_back(detail::make_row(
        input, std::to_string(lo) + "-" + std::to_string(hi),
        [lo = lo, hi = hi, &count_of](const Sentence& s, const Frame&,
                                      std::size_t t) {
          const std::size_t c = count_of(s, t);
          return c >= lo && c <= hi;
        }));
  }
  const std::size_t last = bins.empty() ? 0 : bins.back().second;
  report.rows.push_back(detail::make_row(
      input, ">" + std::to_string(last),
      [last, &count_of](const Sentence& s, const Frame&, std::size_t t) {
        return count_of(s, t) > last;
      }));
  report.rows.push_back(detail::make_row(
      input, "0",
      [&count_of](const Sentence& s, const Frame&, std::size_t t) {
        return count_of(s, t) == 0;
      }));
  return report;
}

/// Surface forms observed in training with at least two distinct gold
/// feature sets (lowercased form matching).
inline std::set<std::string> ambiguous_forms(
    const std::vector<Sentence>& train_sentences) {
  std::map<std::string, std::set<std::string>> featsets;
  for (const Sentence& s : train_sentences) {
    for (const Token& t : s.tokens) {
      std::string key;
      for (const auto& f : t.feats) key += f + "|";
      featsets[utf8::to_lower(t.form)].insert(key);
    }
  }
  std::set<std::string> out;
  for (const auto& [form, sets] : featsets)
    if (sets.size() >= 2) out.insert(form);
  return out;
}

/// Contextual-ambiguity partition: eval tokens whose form was seen in
/// training with >= 2 feature sets vs exactly one. Forms never seen in
/// training default to the non-ambiguous bucket; `exclude_unseen` moves
/// them to their own row instead.
inline BucketReport ambiguity_buckets(
    const std::vector<Sentence>& train_sentences, const AnalysisInput& input,
    bool exclude_unseen = false) {
  input.check();
  const std::set<std::string> ambiguous = ambiguous_forms(train_sentences);
  std::set<std::string> seen;
  for (const Sentence& s : train_sentences)
    for (const Token& t : s.tokens) seen.insert(utf8::to_lower(t.form));

  BucketReport report;
  report.name = "ambiguity";
  auto form_of = [](const Sentence& s, std::size_t t) {
    return utf8::to_lower(s.tokens[t].form);
  };
  report.rows.push_back(detail::make_row(
      input, "ambiguous",
      [&](const Sentence& s, const Frame&, std::size_t t) {
        return ambiguous.count(form_of(s, t)) != 0;
      }));
  report.rows.push_back(detail::make_row(
      input, "non-ambiguous",
      [&](const Sentence& s, const Frame&, std::size_t t) {
        const std::string form = form_of(s, t);
        if (ambiguous.count(form) != 0) return false;
        if (exclude_unseen && seen.count(form) == 0) return false;
        return true;
      }));
  if (exclude_unseen) {
    report.rows.push_back(detail::make_row(
        input, "unseen",
        [&](const Sentence& s, const Frame&, std::size_t t) {
          return seen.count(form_of(s, t)) == 0;
        }));
  }
  return report;
}

inline bool sentence_has_marker(const Sentence& s, const std::string& marker) {
  for (const Token& t : s.tokens)
    for (const std::string& f : t.feats)
      if (f == marker) return true;
  return false;
}

/// Sentence-level partition: frames of sentences containing a derivation
/// marker vs frames of simple sentences.
inline BucketReport derivation_buckets(const AnalysisInput& input,
                                       const std::string& db_marker = "DB") {
  input.check();
  BucketReport report;
  report.name = "derivation";
  report.rows.push_back(detail::make_row(
      input, "derivational",
      [&db_marker](const Sentence& s, const Frame&, std::size_t) {
        return sentence_has_marker(s, db_marker);
      }));
  report.rows.push_back(detail::make_row(
      input, "simple",
      [&db_marker](const Sentence& s, const Frame&, std::size_t) {
        return !sentence_has_marker(s, db_marker);
      }));
  return report;
}

/// Morphological-complexity proxy:
/// 100 * |forms with >= 2 feature sets| / |distinct forms|.
inline double complexity_proxy(const std::vector<Sentence>& train_sentences) {
  std::map<std::string, std::set<std::string>> featsets;
  for (const Sentence& s : train_sentences) {
    for (const Token& t : s.tokens) {
      std::string key;
      for (const auto& f : t.feats) key += f + "|";
      featsets[utf8::to_lower(t.form)].insert(key);
    }
  }
  if (featsets.empty()) throw DataError("complexity proxy over an empty corpus");
  std::size_t ambiguous = 0;
  for (const auto& [form, sets] : featsets)
    if (sets.size() >= 2) ++ambiguous;
  return 100.0 * static_cast<double>(ambiguous) /
         static_cast<double>(featsets.size());
}

// ---------------------------------------------------------------------------
// Plot-data emission
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace detail

/// Column-oriented table for one bucket report. Supported formats: "tsv"
/// and "csv". Empty buckets print NA scores.
inline std::string emit_plot_data(const BucketReport& report,
                                  const std::string& format = "tsv") {
  char sep;
  if (format == "tsv") {
    sep = '\t';
  } else if (format == "csv") {
    sep = ',';
  } else {
    throw ConfigError("unsupported plot format: " + format + " (tsv|csv)");
  }
  std::string out = "bucket";
  for (const char* col :
       {"precision", "recall", "f1", "correct", "predicted", "gold",
        "support"})
    out += sep + std::string(col);
  out += "\n";
  for (const BucketRow& row : report.rows) {
    out += row.key;
    if (row.support == 0 && row.report.predicted == 0) {
      out += sep + std::string("NA") + sep + "NA" + sep + "NA";
    } else {
      out += sep + detail::fmt2(row.report.precision()) + sep +
             detail::fmt2(row.report.recall()) + sep +
             detail::fmt2(row.report.f1());
    }
    out += sep + std::to_string(row.report.correct) + sep +
           std::to_string(row.report.predicted) + sep +
           std::to_string(row.report.gold) + sep +
           std::to_string(row.support) + "\n";
  }
  return out;
}

/// Table for a learning curve: (n_sentences, f1) rows.
inline std::string emit_curve_data(
    const std::vector<std::pair<std::size_t, double>>& points,
    const std::string& format = "tsv") {
  char sep;
  if (format == "tsv") {
    sep = '\t';
  } else if (format == "csv") {
    sep = ',';
  } else {
    throw ConfigError("unsupported plot format: " + format + " (tsv|csv)");
  }
  std::string out = std::string("n_sentences") + sep + "f1\n";
  for (const auto& [n, f1] : points)
    out += std::to_string(n) + sep + detail::fmt2(f1) + "\n";
  return out;
}

}  // namespace srl
