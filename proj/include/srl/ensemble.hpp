#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "srl/checkpoint.hpp"
#include "srl/conll.hpp"
#include "srl/error.hpp"
#include "srl/model.hpp"
#include "srl/nnet.hpp"
#include "srl/rng.hpp"

namespace srl {

/// Per-token log-probability rows for every frame of one model on one
/// evaluation set; the interchange type between base models and ensembles.
struct ModelDistributions {
  std::vector<nn::Tensor<float>> frames;  // each: n_tokens x n_labels
  std::vector<std::string> labels;
  std::map<std::string, std::string> meta;

  std::size_t n_labels() const { return labels.size(); }
};

template <typename T>
inline ModelDistributions compute_distributions(
    const ModelParams<T>& params, const std::vector<EncodedFrame>& frames,
    const LabelSet& labels) {
  ModelDistributions out;
  out.labels = labels.labels;
  out.frames.reserve(frames.size());
  for (const EncodedFrame& f : frames) {
    const auto logps = label_distributions(params, f);
    nn::Tensor<float> rec =
        nn::Tensor<float>::matrix(logps.size(), labels.size());
    for (std::size_t t = 0; t < logps.size(); ++t)
      for (std::size_t l = 0; l < labels.size(); ++l)
        rec(t, l) = static_cast<float>(logps[t][l]);
    out.frames.push_back(std::move(rec));
  }
  return out;
}

/// Serialized as a checkpoint container: one record per frame
/// ("frame.<id>", shape n_tokens x n_labels, little-endian float32 log
/// probabilities) plus the label set and compatibility fingerprints.
inline void save_distributions(const std::string& path,
                               const ModelDistributions& dists) {
  Checkpoint ckpt;
  ckpt.meta = dists.meta;
  ckpt.meta["kind"] = "distributions";
  ckpt.meta["labels"] = detail::join_labels(LabelSet{dists.labels, 0, 0});
  ckpt.meta["n_frames"] = std::to_string(dists.frames.size());
  for (std::size_t i = 0; i < dists.frames.size(); ++i)
    ckpt.params.emplace_back("frame." + std::to_string(i), dists.frames[i]);
  ckpt.write_file(path);
}

inline ModelDistributions load_distributions(const std::string& path) {
  const Checkpoint ckpt = Checkpoint::read_file(path);
  if (ckpt.require("kind") != "distributions")
    throw DataError(path + " is not a distribution dump");
  ModelDistributions out;
  out.meta = ckpt.meta;
  out.labels = detail::split(ckpt.require("labels"), '\t');
  const std::size_t n = std::stoul(ckpt.require("n_frames"));
  out.frames.resize(n);
  std::size_t seen = 0;
  for (const auto& [name, tensor] : ckpt.params) {
    if (name.rfind("frame.", 0) != 0)
      throw DataError("distribution dump: unexpected record " + name);
    const std::size_t id = std::stoul(name.substr(6));
    if (id >= n) throw DataError("distribution dump: frame id out of range");
    if (tensor.cols() != out.labels.size())
      throw DataError("distribution dump: label width mismatch");
    out.frames[id] = tensor;
    ++seen;
  }
  if (seen != n) throw DataError("distribution dump: missing frames");
  return out;
}

namespace detail {

inline void check_aligned(const std::vector<ModelDistributions>& models) {
  if (models.size() < 2)
    throw DataError("ensembling needs at least two base models");
  for (std::size_t m = 1; m < models.size(); ++m) {
    if (models[m].labels != models[0].labels)
      throw DataError("ensemble members use different label sets");
    if (models[m].frames.size() != models[0].frames.size())
      throw DataError("ensemble members cover different frame counts");
    for (std::size_t i = 0; i < models[m].frames.size(); ++i)
      if (models[m].frames[i].rows() != models[0].frames[i].rows())
        throw DataError("ensemble members disagree on frame " +
                        std::to_string(i) + " length");
  }
}

inline int argmax_row(const nn::Tensor<float>& rec, std::size_t t) {
  std::size_t best = 0;
  for (std::size_t l = 1; l < rec.cols(); ++l)
    if (rec(t, l) > rec(t, best)) best = l;
  return static_cast<int>(best);
}

}  // namespace detail

/// Base models must differ only in their input representation: identical
/// training recipe, data and seeds, as recorded in the dump fingerprints.
inline void check_ensemble_compatibility(
    const std::vector<ModelDistributions>& models) {
  detail::check_aligned(models);
  for (const char* key : {"train_fingerprint", "test_fingerprint"}) {
    auto it0 = models[0].meta.find(key);
    if (it0 == models[0].meta.end()) continue;
    for (std::size_t m = 1; m < models.size(); ++m) {
      auto it = models[m].meta.find(key);
      if (it == models[m].meta.end() || it->second != it0->second)
        throw DataError(std::string("ensemble members disagree on ") + key +
                        ": " + it0->second + " vs " +
                        (it == models[m].meta.end() ? "<missing>"
                                                    : it->second));
    }
  }
}

/// AVG: per token, the elementwise mean of the models' log-probability
/// vectors, decoded by argmax (ties to the lowest label index).
inline std::vector<std::vector<int>> average_combine(
    const std::vector<ModelDistributions>& models) {
  detail::check_aligned(models);
  std::vector<std::vector<int>> decisions;
  decisions.reserve(models[0].frames.size());
  const double inv = 1.0 / static_cast<double>(models.size());
  for (std::size_t i = 0; i < models[0].frames.size(); ++i) {
    const std::size_t n_tokens = models[0].frames[i].rows();
    const std::size_t n_labels = models[0].frames[i].cols();
    std::vector<int> row;
    row.reserve(n_tokens);
    for (std::size_t t = 0; t < n_tokens; ++t) {
      std::size_t best = 0;
      double best_v = 0.0;
      for (std::size_t l = 0; l < n_labels; ++l) {
        double mean = 0.0;
        for (const ModelDistributions& m : models) mean += m.frames[i](t, l);
        mean *= inv;
        if (l == 0 || mean > best_v) {
          best_v = mean;
          best = l;
        }
      }
      row.push_back(static_cast<int>(best));
    }
    decisions.push_back(std::move(row));
  }
  return decisions;
}

/// Stacked-generalization combiner: one hidden linear layer with sigmoid
/// activation over the concatenated base log-probabilities, then a linear
/// softmax head over the label set.
struct StackerParams {
  std::size_t n_models = 0;
  std::size_t n_labels = 0;
  std::size_t hidden = 64;
  nn::Tensor<float> w1, b1;  // hidden x (n_models * n_labels)
  nn::Tensor<float> w2, b2;  // n_labels x hidden

  static StackerParams initialized(std::size_t n_models, std::size_t n_labels,
                                   std::size_t hidden, std::uint64_t seed) {
    StackerParams p;
    p.n_models = n_models;
    p.n_labels = n_labels;
    p.hidden = hidden;
    Rng rng(mix_seed(seed, 0x57ac));
    p.w1 = nn::orthogonal_init<float>(hidden, n_models * n_labels, rng);
    p.b1 = nn::Tensor<float>::vector(hidden);
    p.w2 = nn::orthogonal_init<float>(n_labels, hidden, rng);
    p.b2 = nn::Tensor<float>::vector(n_labels);
    return p;
  }

  std::size_t input_width() const { return n_models * n_labels; }
};

struct StackerTrainConfig {
  double lr = 0.02;
  std::size_t epochs = 25;
  std::size_t hidden = 64;
  std::uint64_t seed = 1;
};

namespace detail {

inline nn::Tensor<float> stacker_input(
    const std::vector<ModelDistributions>& models, std::size_t frame,
    std::size_t t) {
  const std::size_t L = models[0].labels.size();
  nn::Tensor<float> x = nn::Tensor<float>::vector(models.size() * L);
  for (std::size_t m = 0; m < models.size(); ++m)
    for (std::size_t l = 0; l < L; ++l)
      x[m * L + l] = models[m].frames[frame](t, l);
  return x;
}

struct StackerForward {
  nn::Tensor<float> act;   // sigmoid hidden
  nn::Tensor<float> logp;  // log softmax output
};

inline StackerForward stacker_forward(const StackerParams& p,
                                      const nn::Tensor<float>& x) {
  if (x.size() != p.input_width())
    throw DataError("stacker input width mismatch: got " +
                    std::to_string(x.size()) + ", expected " +
                    std::to_string(p.input_width()));
  StackerForward f;
  f.act = nn::linear(p.w1, p.b1, x);
  for (std::size_t i = 0; i < f.act.size(); ++i)
    f.act[i] = nn::sigmoid(f.act[i]);
  f.logp = nn::log_softmax(nn::linear(p.w2, p.b2, f.act));
  return f;
}

}  // namespace detail

/// Trains the combiner on precomputed base-model distributions against gold
/// label ids (-1 entries are skipped), token by token with Adam.
inline StackerParams train_stacker(
    const std::vector<ModelDistributions>& models,
    const std::vector<std::vector<int>>& gold,
    const StackerTrainConfig& config = {}) {
  detail::check_aligned(models);
  if (gold.size() != models[0].frames.size())
    throw DataError("stacker training: gold frame count mismatch");
  const std::size_t L = models[0].labels.size();
  StackerParams p = StackerParams::initialized(models.size(), L, config.hidden,
                                               config.seed);
  nn::AdamState<float> adam;
  nn::Tensor<float> gw1 = nn::Tensor<float>::matrix(p.w1.rows(), p.w1.cols());
  nn::Tensor<float> gb1 = nn::Tensor<float>::vector(p.b1.size());
  nn::Tensor<float> gw2 = nn::Tensor<float>::matrix(p.w2.rows(), p.w2.cols());
  nn::Tensor<float> gb2 = nn::Tensor<float>::vector(p.b2.size());
  const std::vector<nn::Tensor<float>*> params = {&p.w1, &p.b1, &p.w2, &p.b2};
  const std::vector<const nn::Tensor<float>*> grads = {&gw1, &gb1, &gw2, &gb2};

  std::vector<std::pair<std::size_t, std::size_t>> tokens;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != models[0].frames[i].rows())
      throw DataError("stacker training: gold length mismatch in frame " +
                      std::to_string(i));
    for (std::size_t t = 0; t < gold[i].size(); ++t)
      if (gold[i][t] >= 0) tokens.emplace_back(i, t);
  }
  if (tokens.empty()) throw DataError("stacker training: no labeled tokens");

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng rng(mix_seed(config.seed, 0xe90c + epoch));
    auto order = tokens;
    rng.shuffle(order);
    for (const auto& [i, t] : order) {
      const nn::Tensor<float> x = detail::stacker_input(models, i, t);
      const detail::StackerForward f = detail::stacker_forward(p, x);
      const auto g = static_cast<std::size_t>(gold[i][t]);
      nn::Tensor<float> dz = nn::nll_softmax_backward(f.logp, g);
      gw2.fill(0.0f);
      gb2.fill(0.0f);
      gw1.fill(0.0f);
      gb1.fill(0.0f);
      nn::outer_add(dz, f.act, gw2);
      nn::add(dz, gb2);
      nn::Tensor<float> da = nn::Tensor<float>::vector(p.hidden);
      nn::matvec_transposed_add(p.w2, dz, da);
      for (std::size_t k = 0; k < da.size(); ++k)
        da[k] *= f.act[k] * (1.0f - f.act[k]);
      nn::outer_add(da, x, gw1);
      nn::add(da, gb1);
      nn::adam_step(adam, params, grads, config.lr);
    }
  }
  return p;
}

/// SG decode: per-token stacker forward pass, argmax with ties to the
/// lowest label index.
inline std::vector<std::vector<int>> stacked_combine(
    const StackerParams& stacker,
    const std::vector<ModelDistributions>& models) {
  detail::check_aligned(models);
  if (stacker.input_width() != models.size() * models[0].labels.size())
    throw DataError("stacker width does not match the model set");
  std::vector<std::vector<int>> decisions;
  decisions.reserve(models[0].frames.size());
  for (std::size_t i = 0; i < models[0].frames.size(); ++i) {
    std::vector<int> row;
    const std::size_t n_tokens = models[0].frames[i].rows();
    row.reserve(n_tokens);
    for (std::size_t t = 0; t < n_tokens; ++t) {
      const auto f =
          detail::stacker_forward(stacker, detail::stacker_input(models, i, t));
      std::size_t best = 0;
      for (std::size_t l = 1; l < f.logp.size(); ++l)
        if (f.logp[l] > f.logp[best]) best = l;
      row.push_back(static_cast<int>(best));
    }
    decisions.push_back(std::move(row));
  }
  return decisions;
}

/// Maps decoded label ids back to strings for scoring.
inline Predictions decisions_to_labels(
    const std::vector<std::vector<int>>& decisions,
    const std::vector<std::string>& labels) {
  Predictions out;
  out.reserve(decisions.size());
  for (const auto& row : decisions) {
    std::vector<std::string> srow;
    srow.reserve(row.size());
    for (int id : row) srow.push_back(labels.at(static_cast<std::size_t>(id)));
    out.push_back(std::move(srow));
  }
  return out;
}

}  // namespace srl
