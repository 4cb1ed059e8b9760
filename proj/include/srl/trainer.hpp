#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "srl/checkpoint.hpp"
#include "srl/conll.hpp"
#include "srl/error.hpp"
#include "srl/evaluator.hpp"
#include "srl/model.hpp"
#include "srl/rng.hpp"
#include "srl/subword.hpp"

namespace srl {

struct TrainConfig {
  double initial_lr = 1.0;
  std::size_t lr_halving_patience = 3;   // epochs without dev improvement
  std::size_t early_stop_patience = 10;  // epochs without dev improvement
  std::size_t max_epochs = 50;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  std::size_t eval_every = 1;  // dev evaluation cadence, in epochs

  void validate() const {
    if (initial_lr <= 0.0) throw ConfigError("initial_lr must be positive");
    if (lr_halving_patience < 1 || early_stop_patience < 1)
      throw ConfigError("patience values must be >= 1");
    if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  }
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean frame loss
  double dev_f1 = -1.0;     // negative when the epoch was not evaluated
  double lr = 0.0;
  bool halved = false;
  bool improved = false;
  double wall_ms = 0.0;  // in-memory only; never written to artifacts
};

namespace detail {

inline std::string fmt(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace detail

struct TrainLog {
  std::vector<EpochRecord> records;
  std::size_t best_epoch = 0;
  double best_dev_f1 = 0.0;
  std::vector<std::size_t> halving_epochs;

  /// Line-oriented text table. Deterministic: wall time is excluded.
  std::string table() const {
    std::string out = "epoch\ttrain_loss\tdev_f1\tlr\thalved\timproved\n";
    for (const EpochRecord& r : records) {
      out += std::to_string(r.epoch) + "\t" +
             detail::fmt(r.train_loss, "%.6f") + "\t" +
             (r.dev_f1 < 0 ? std::string("-")
                           : detail::fmt(r.dev_f1, "%.4f")) +
             "\t" + detail::fmt(r.lr, "%.8g") + "\t" +
             (r.halved ? "1" : "0") + "\t" + (r.improved ? "1" : "0") + "\n";
    }
    return out;
  }

  std::string key_values() const {
    std::string out;
    out += "epochs=" + std::to_string(records.size()) + "\n";
    out += "best_epoch=" + std::to_string(best_epoch) + "\n";
    out += "best_dev_f1=" + detail::fmt(best_dev_f1, "%.4f") + "\n";
    std::string h;
    for (std::size_t e : halving_epochs) h += (h.empty() ? "" : ",") + std::to_string(e);
    out += "halvings=" + h + "\n";
    out += "final_lr=" +
           detail::fmt(records.empty() ? 0.0 : records.back().lr, "%.8g") +
           "\n";
    return out;
  }
};

/// Decodes model predictions into label strings for the given frames.
template <typename T>
inline Predictions predict_labels(const ModelParams<T>& params,
                                  const std::vector<EncodedFrame>& frames,
                                  const LabelSet& labels) {
  Predictions out;
  out.reserve(frames.size());
  for (const EncodedFrame& f : frames) {
    const std::vector<int> ids = predict(params, f);
    std::vector<std::string> row;
    row.reserve(ids.size());
    for (int id : ids) row.push_back(labels.labels[static_cast<std::size_t>(id)]);
    out.push_back(std::move(row));
  }
  return out;
}

/// End-to-end scoring of a model on a corpus (string-level, so roles
/// missing from the training label set still count as gold).
template <typename T>
inline EvalReport evaluate_model(const ModelParams<T>& params,
                                 const Vocabulary& vocab,
                                 const LabelSet& labels,
                                 const std::vector<Sentence>& corpus,
                                 const std::vector<Frame>& frames) {
  const FrameEncoder encoder(vocab, labels, params.config);
  const auto encoded = encoder.encode_all(corpus, frames);
  return score(frames, predict_labels(params, encoded, labels));
}

/// Full optimizer state; everything needed to continue a run exactly.
template <typename T = float>
struct TrainState {
  ModelParams<T> params;
  ModelParams<T> best_params;
  bool has_best = false;
  std::size_t epoch = 0;  // completed epochs
  double lr = 0.0;
  std::size_t since_improve = 0;
  std::size_t since_improve_lr = 0;
  double best_f1 = -1.0;
  std::size_t best_epoch = 0;
  bool stopped = false;
  TrainLog log;
};

template <typename T = float>
struct TrainResult {
  ModelParams<T> params;  // checkpoint of the best dev-F1 epoch
  TrainLog log;
};

template <typename T = float>
inline TrainState<T> init_train_state(const ModelConfig& model_config,
                                      const TrainConfig& train_config,
                                      std::size_t vocab_size,
                                      std::size_t n_labels) {
  train_config.validate();
  TrainState<T> state;
  state.params =
      ModelParams<T>::initialized(model_config, vocab_size, n_labels);
  state.lr = train_config.initial_lr;
  return state;
}

/// Runs epochs until max_epochs or early stopping. Epoch-level shuffling is
/// seeded per (seed, epoch), so a resumed state walks the same schedule as
/// an uninterrupted run.
template <typename T>
inline void continue_training(TrainState<T>& state,
                              const TrainConfig& train_config,
                              const std::vector<EncodedFrame>& train_frames,
                              const std::vector<EncodedFrame>& dev_frames,
                              int nonrole_index) {
  train_config.validate();
  if (train_frames.empty()) throw DataError("training set has no frames");
  ModelParams<T> grads = state.params.zeros_like();
  const auto grad_tensors = grads.tensors();
  const auto param_tensors = state.params.tensors();
  std::vector<const nn::Tensor<T>*> grad_view(grad_tensors.begin(),
                                              grad_tensors.end());

  std::vector<std::vector<int>> dev_gold;
  dev_gold.reserve(dev_frames.size());
  for (const EncodedFrame& f : dev_frames) dev_gold.push_back(f.gold);

  std::vector<std::size_t> order(train_frames.size());
  while (!state.stopped && state.epoch < train_config.max_epochs) {
    const std::size_t epoch = state.epoch + 1;
    const auto started = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(mix_seed(train_config.seed, epoch));
    shuffle_rng.shuffle(order);

    double total_loss = 0.0;
    for (std::size_t idx : order) {
      const EncodedFrame& frame = train_frames[idx];
      const FrameTrace<T> trace = forward_frame(state.params, frame);
      const double loss = static_cast<double>(trace_loss(trace, frame.gold));
      if (!std::isfinite(loss))
        throw NumericError("training diverged (non-finite loss) at epoch " +
                           std::to_string(epoch));
      for (nn::Tensor<T>* g : grad_tensors) g->fill(T{0});
      backward_frame(state.params, frame, trace, grads);
      nn::clip_gradients(grad_tensors, train_config.clip_norm);
      nn::sgd_step(param_tensors, grad_view, state.lr);
      total_loss += loss;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = total_loss / static_cast<double>(train_frames.size());
    record.lr = state.lr;

    const bool evaluate = epoch % train_config.eval_every == 0;
    if (evaluate && !dev_frames.empty()) {
      std::vector<std::vector<int>> dev_pred;
      dev_pred.reserve(dev_frames.size());
      for (const EncodedFrame& f : dev_frames)
        dev_pred.push_back(predict(state.params, f));
      record.dev_f1 = score_ids(dev_gold, dev_pred, nonrole_index).f1();
      if (record.dev_f1 > state.best_f1) {
        state.best_f1 = record.dev_f1;
        state.best_epoch = epoch;
        state.best_params = state.params;
        state.has_best = true;
        state.since_improve = 0;
        state.since_improve_lr = 0;
        record.improved = true;
      } else {
        ++state.since_improve;
        ++state.since_improve_lr;
      }
    } else {
      ++state.since_improve;
      ++state.since_improve_lr;
    }

    if (!record.improved &&
        state.since_improve_lr >= train_config.lr_halving_patience) {
      state.lr /= 2.0;
      state.since_improve_lr = 0;
      record.halved = true;
      state.log.halving_epochs.push_back(epoch);
    }
    record.wall_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - started)
            .count();
    state.log.records.push_back(record);
    state.log.best_epoch = state.best_epoch;
    state.log.best_dev_f1 = state.has_best ? state.best_f1 : 0.0;
    state.epoch = epoch;
    if (state.since_improve >= train_config.early_stop_patience)
      state.stopped = true;
  }
}

/// The full recipe: seeded init, per-epoch shuffling, SGD with clipping,
/// dev-driven halving and early stopping. Returns the best-dev checkpoint.
template <typename T = float>
inline TrainResult<T> train(const ModelConfig& model_config,
                            const TrainConfig& train_config,
                            const std::vector<Sentence>& train_corpus,
                            const std::vector<Sentence>& dev_corpus,
                            const Vocabulary& vocab, const LabelSet& labels) {
  const FrameEncoder encoder(vocab, labels, model_config);
  const auto train_frames =
      encoder.encode_all(train_corpus, extract_frames(train_corpus));
  const auto dev_frames =
      encoder.encode_all(dev_corpus, extract_frames(dev_corpus));
  TrainState<T> state = init_train_state<T>(model_config, train_config,
                                            vocab.size(), labels.size());
  continue_training(state, train_config, train_frames, dev_frames,
                    static_cast<int>(labels.nonrole_index));
  TrainResult<T> result{state.has_best ? state.best_params : state.params,
                        state.log};
  return result;
}

// ---------------------------------------------------------------------------
// Train-state serialization (resume support)
// ---------------------------------------------------------------------------

inline Checkpoint make_state_checkpoint(const TrainState<float>& state,
                                        const LabelSet& labels,
                                        const std::string& vocab_fp) {
  Checkpoint ckpt = make_model_checkpoint(state.params, labels, vocab_fp);
  ckpt.meta["kind"] = "train_state";
  ckpt.meta["epoch"] = std::to_string(state.epoch);
  ckpt.meta["lr"] = detail::fmt(state.lr, "%.17g");
  ckpt.meta["since_improve"] = std::to_string(state.since_improve);
  ckpt.meta["since_improve_lr"] = std::to_string(state.since_improve_lr);
  ckpt.meta["best_f1"] = detail::fmt(state.best_f1, "%.17g");
  ckpt.meta["best_epoch"] = std::to_string(state.best_epoch);
  ckpt.meta["has_best"] = state.has_best ? "1" : "0";
  ckpt.meta["stopped"] = state.stopped ? "1" : "0";
  for (std::size_t i = 0; i < state.log.records.size(); ++i) {
    const EpochRecord& r = state.log.records[i];
    ckpt.meta["log." + std::to_string(i)] =
        std::to_string(r.epoch) + " " + detail::fmt(r.train_loss, "%.17g") +
        " " + detail::fmt(r.dev_f1, "%.17g") + " " +
        detail::fmt(r.lr, "%.17g") + " " + (r.halved ? "1" : "0") + " " +
        (r.improved ? "1" : "0");
  }
  std::string h;
  for (std::size_t e : state.log.halving_epochs)
    h += (h.empty() ? "" : ",") + std::to_string(e);
  ckpt.meta["halvings"] = h;
  if (state.has_best) {
    std::size_t i = 0;
    const_cast<ModelParams<float>&>(state.best_params)
        .for_each([&](const std::string& name, nn::Tensor<float>& t) {
          ckpt.params.emplace_back("best/" + name, t);
          ++i;
        });
  }
  return ckpt;
}

inline TrainState<float> load_train_state(const Checkpoint& ckpt) {
  if (ckpt.require("kind") != "train_state")
    throw DataError("checkpoint is not a train state");
  Checkpoint model_part;
  model_part.meta = ckpt.meta;
  model_part.meta["kind"] = "model";
  Checkpoint best_part = model_part;
  for (const auto& [name, tensor] : ckpt.params) {
    if (name.rfind("best/", 0) == 0)
      best_part.params.emplace_back(name.substr(5), tensor);
    else
      model_part.params.emplace_back(name, tensor);
  }
  TrainState<float> state;
  state.params = from_model_checkpoint(model_part).params;
  state.has_best = ckpt.require("has_best") == "1";
  if (state.has_best)
    state.best_params = from_model_checkpoint(best_part).params;
  state.epoch = std::stoul(ckpt.require("epoch"));
  state.lr = std::stod(ckpt.require("lr"));
  state.since_improve = std::stoul(ckpt.require("since_improve"));
  state.since_improve_lr = std::stoul(ckpt.require("since_improve_lr"));
  state.best_f1 = std::stod(ckpt.require("best_f1"));
  state.best_epoch = std::stoul(ckpt.require("best_epoch"));
  state.stopped = ckpt.require("stopped") == "1";
  for (std::size_t i = 0;; ++i) {
    auto it = ckpt.meta.find("log." + std::to_string(i));
    if (it == ckpt.meta.end()) break;
    std::istringstream ss(it->second);
    EpochRecord r;
    int halved = 0, improved = 0;
    ss >> r.epoch >> r.train_loss >> r.dev_f1 >> r.lr >> halved >> improved;
    r.halved = halved != 0;
    r.improved = improved != 0;
    state.log.records.push_back(r);
  }
  for (const std::string& tok :
       srl::detail::split(ckpt.require("halvings"), ','))
    if (!tok.empty())
      state.log.halving_epochs.push_back(std::stoul(tok));
  state.log.best_epoch = state.best_epoch;
  state.log.best_dev_f1 = state.has_best ? state.best_f1 : 0.0;
  return state;
}

// ---------------------------------------------------------------------------
// Data-size and curve-fit experiments
// ---------------------------------------------------------------------------

struct CurvePoint {
  std::size_t n_sentences = 0;
  double f1 = 0.0;
};

/// Trains fresh models on growing prefixes of the training corpus and
/// scores each on the evaluation corpus.
template <typename T = float>
inline std::vector<CurvePoint> learning_curve(
    const ModelConfig& model_config, const TrainConfig& train_config,
    const std::vector<Sentence>& train_corpus, std::size_t chunk_size,
    const std::vector<Sentence>& dev_corpus,
    const std::vector<Sentence>& eval_corpus, std::size_t vocab_min_freq = 1) {
  if (chunk_size == 0) throw ConfigError("chunk_size must be >= 1");
  if (train_corpus.empty()) throw DataError("empty training corpus");
  const std::size_t n = train_corpus.size();
  const std::size_t points = (n + chunk_size - 1) / chunk_size;
  const auto eval_frames = extract_frames(eval_corpus);
  std::vector<CurvePoint> curve;
  for (std::size_t k = 1; k <= points; ++k) {
    const std::size_t take = std::min(k * chunk_size, n);
    const std::vector<Sentence> sub(train_corpus.begin(),
                                    train_corpus.begin() + take);
    const Vocabulary vocab = build_vocab(sub, model_config.rho, vocab_min_freq,
                                         model_config.column_mode);
    const LabelSet labels = build_label_set(extract_frames(sub));
    const TrainResult<T> result =
        train<T>(model_config, train_config, sub, dev_corpus, vocab, labels);
    const EvalReport report =
        evaluate_model(result.params, vocab, labels, eval_corpus, eval_frames);
    curve.push_back({take, report.f1()});
  }
  return curve;
}

/// Least-squares fit of f1 = a*ln(n) + b; `a` approximates the growth speed.
inline std::pair<double, double> fit_log_curve(
    const std::vector<CurvePoint>& points) {
  if (points.size() < 2)
    throw DataError("log-curve fit needs at least 2 points");
  double su = 0, sy = 0, suu = 0, suy = 0;
  const double n = static_cast<double>(points.size());
  for (const CurvePoint& p : points) {
    if (p.n_sentences == 0)
      throw DataError("log-curve fit needs positive x values");
    const double u = std::log(static_cast<double>(p.n_sentences));
    su += u;
    sy += p.f1;
    suu += u * u;
    suy += u * p.f1;
  }
  const double denom = n * suu - su * su;
  if (std::abs(denom) < 1e-12)
    throw DataError("log-curve fit is degenerate (all x equal)");
  const double a = (n * suy - su * sy) / denom;
  const double b = (sy - a * su) / n;
  return {a, b};
}

}  // namespace srl
