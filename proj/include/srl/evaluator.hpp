#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "srl/conll.hpp"
#include "srl/error.hpp"

namespace srl {

/// Argument-labeling counts. A prediction is correct iff the gold label at
/// that token is a real role and matches it; predicate sense is never
/// scored. Percentages follow the usual conventions (0 when undefined).
struct EvalReport {
  std::size_t correct = 0;
  std::size_t predicted = 0;  // non-nonrole predictions
  std::size_t gold = 0;       // non-nonrole gold labels

  double precision() const {
    return predicted == 0
               ? 0.0
               : 100.0 * static_cast<double>(correct) /
                     static_cast<double>(predicted);
  }
  double recall() const {
    return gold == 0 ? 0.0
                     : 100.0 * static_cast<double>(correct) /
                           static_cast<double>(gold);
  }
  double f1() const {
    const double p = precision();
    const double r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }

  void add(const EvalReport& other) {
    correct += other.correct;
    predicted += other.predicted;
    gold += other.gold;
  }
};

using Predictions = std::vector<std::vector<std::string>>;

inline void tally(const std::vector<std::string>& gold,
                  const std::vector<std::string>& predicted,
                  EvalReport& report) {
  if (gold.size() != predicted.size())
    throw DataError("prediction length " + std::to_string(predicted.size()) +
                    " does not match frame length " +
                    std::to_string(gold.size()));
  for (std::size_t t = 0; t < gold.size(); ++t) {
    const bool gold_arg = gold[t] != kNonRole;
    const bool pred_arg = predicted[t] != kNonRole;
    if (gold_arg) ++report.gold;
    if (pred_arg) ++report.predicted;
    if (gold_arg && pred_arg && gold[t] == predicted[t]) ++report.correct;
  }
}

inline EvalReport score(const std::vector<Frame>& gold_frames,
                        const Predictions& predictions) {
  if (gold_frames.size() != predictions.size())
    throw DataError("frame/prediction count mismatch");
  EvalReport report;
  for (std::size_t i = 0; i < gold_frames.size(); ++i)
    tally(gold_frames[i].gold_labels, predictions[i], report);
  return report;
}

/// Id-based variant used on the training path. A gold id of -1 marks a role
/// outside the label set: it counts as a gold argument the model can never
/// hit.
inline EvalReport score_ids(const std::vector<std::vector<int>>& gold,
                            const std::vector<std::vector<int>>& predicted,
                            int nonrole_index) {
  if (gold.size() != predicted.size())
    throw DataError("frame/prediction count mismatch");
  EvalReport report;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != predicted[i].size())
      throw DataError("prediction length mismatch in frame " +
                      std::to_string(i));
    for (std::size_t t = 0; t < gold[i].size(); ++t) {
      const bool gold_arg = gold[i][t] != nonrole_index;
      const bool pred_arg = predicted[i][t] != nonrole_index;
      if (gold_arg) ++report.gold;
      if (pred_arg) ++report.predicted;
      if (gold_arg && pred_arg && gold[i][t] == predicted[i][t])
        ++report.correct;
    }
  }
  return report;
}

/// Improvement over the word baseline: 100 * (subword - word) / word.
inline double iow(double subword_f1, double word_f1) {
  if (word_f1 == 0.0) throw NumericError("iow: word baseline F1 is zero");
  return 100.0 * (subword_f1 - word_f1) / word_f1;
}

/// Improvement of morphology over the best character model.
inline double ioc(double morph_f1, double best_char_f1) {
  if (best_char_f1 == 0.0)
    throw NumericError("ioc: best character F1 is zero");
  return 100.0 * (morph_f1 - best_char_f1) / best_char_f1;
}

/// Improvement of the best ensemble over the best of its member models.
inline double iob(const std::vector<double>& ensemble_f1s,
                  const std::vector<double>& member_f1s) {
  if (ensemble_f1s.empty() || member_f1s.empty())
    throw DataError("iob: empty score list");
  const double best_ensemble =
      *std::max_element(ensemble_f1s.begin(), ensemble_f1s.end());
  const double best_member =
      *std::max_element(member_f1s.begin(), member_f1s.end());
  if (best_member == 0.0) throw NumericError("iob: best member F1 is zero");
  return 100.0 * (best_ensemble - best_member) / best_member;
}

}  // namespace srl
