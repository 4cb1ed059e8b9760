#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srl/conll.hpp"
#include "srl/error.hpp"
#include "srl/nnet.hpp"
#include "srl/rng.hpp"
#include "srl/subword.hpp"

namespace srl {

struct ModelConfig {
  RhoKind rho = RhoKind::chars;
  std::size_t embedding_size = 200;  // subword embedding == word vector size
  std::size_t hidden_size = 200;     // both bi-LSTMs
  std::size_t layers = 1;            // labeler bi-LSTM depth (1 or 2)
  std::size_t flag_size = 1;         // predicate flag width
  ColumnMode column_mode = ColumnMode::gold;
  std::uint64_t seed = 1;

  void validate() const {
    if (embedding_size == 0 || hidden_size == 0 || flag_size == 0)
      throw ConfigError("model sizes must be >= 1");
    if (layers < 1 || layers > 2)
      throw ConfigError("layers must be 1 or 2");
  }

  bool uses_composition() const { return rho != RhoKind::word; }
};

/// All learnable arrays. The composition stack only exists for subword
/// units; the whole-word baseline is a plain embedding lookup feeding the
/// same labeler.
template <typename T>
struct ModelParams {
  ModelConfig config;
  std::size_t vocab_size = 0;
  std::size_t n_labels = 0;

  nn::Tensor<T> embeddings;  // vocab x embedding_size

  nn::LstmParams<T> comp_fwd, comp_bwd;           // embedding -> hidden
  nn::Tensor<T> w_comp_fwd, w_comp_bwd, b_comp;   // embedding x hidden (+bias)

  struct Layer {
    nn::LstmParams<T> fwd, bwd;
  };
  std::vector<Layer> layers;

  nn::Tensor<T> w_out, b_out;  // labels x 2*hidden (+bias)

  static ModelParams sized(const ModelConfig& config, std::size_t vocab_size,
                           std::size_t n_labels) {
    config.validate();
    ModelParams p;
    p.config = config;
    p.vocab_size = vocab_size;
    p.n_labels = n_labels;
    const std::size_t e = config.embedding_size;
    const std::size_t h = config.hidden_size;
    p.embeddings = nn::Tensor<T>::matrix(vocab_size, e);
    if (config.uses_composition()) {
      p.comp_fwd = nn::LstmParams<T>::sized(e, h);
      p.comp_bwd = nn::LstmParams<T>::sized(e, h);
      p.w_comp_fwd = nn::Tensor<T>::matrix(e, h);
      p.w_comp_bwd = nn::Tensor<T>::matrix(e, h);
      p.b_comp = nn::Tensor<T>::vector(e);
    }
    std::size_t in = e + config.flag_size;
    for (std::size_t l = 0; l < config.layers; ++l) {
      p.layers.push_back({nn::LstmParams<T>::sized(in, h),
                          nn::LstmParams<T>::sized(in, h)});
      in = 2 * h;
    }
    p.w_out = nn::Tensor<T>::matrix(n_labels, 2 * h);
    p.b_out = nn::Tensor<T>::vector(n_labels);
    return p;
  }

  /// Seeded initialization: orthogonal weight matrices, zero biases
  /// (forget-gate bias one), small Gaussian embeddings.
  static ModelParams initialized(const ModelConfig& config,
                                 std::size_t vocab_size,
                                 std::size_t n_labels) {
    ModelParams p = sized(config, vocab_size, n_labels);
    Rng rng(mix_seed(config.seed, 0x5e1));
    nn::gaussian_fill(p.embeddings, rng, 0.1);
    if (config.uses_composition()) {
      nn::init_lstm(p.comp_fwd, rng);
      nn::init_lstm(p.comp_bwd, rng);
      nn::orthogonal_fill(p.w_comp_fwd, rng);
      nn::orthogonal_fill(p.w_comp_bwd, rng);
      p.b_comp.fill(T{0});
    }
    for (Layer& layer : p.layers) {
      nn::init_lstm(layer.fwd, rng);
      nn::init_lstm(layer.bwd, rng);
    }
    nn::orthogonal_fill(p.w_out, rng);
    p.b_out.fill(T{0});
    return p;
  }

  ModelParams zeros_like() const {
    return sized(config, vocab_size, n_labels);
  }

  template <typename F>
  void for_each(F&& f) {
    f("emb", embeddings);
    if (config.uses_composition()) {
      comp_fwd.for_each("comp_fwd", f);
      comp_bwd.for_each("comp_bwd", f);
      f("w_comp_fwd", w_comp_fwd);
      f("w_comp_bwd", w_comp_bwd);
      f("b_comp", b_comp);
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const std::string base = "layer" + std::to_string(l);
      layers[l].fwd.for_each(base + ".fwd", f);
      layers[l].bwd.for_each(base + ".bwd", f);
    }
    f("w_out", w_out);
    f("b_out", b_out);
  }

  template <typename F>
  void for_each(F&& f) const {
    const_cast<ModelParams*>(this)->for_each(
        [&](const std::string& n, nn::Tensor<T>& t) {
          f(n, static_cast<const nn::Tensor<T>&>(t));
        });
  }

  std::vector<nn::Tensor<T>*> tensors() {
    std::vector<nn::Tensor<T>*> out;
    for_each([&](const std::string&, nn::Tensor<T>& t) { out.push_back(&t); });
    return out;
  }

  template <typename U>
  ModelParams<U> cast() const {
    ModelParams<U> out = ModelParams<U>::sized(config, vocab_size, n_labels);
    auto src = const_cast<ModelParams*>(this)->tensors();
    auto dst = out.tensors();
    for (std::size_t i = 0; i < src.size(); ++i)
      *dst[i] = src[i]->template cast<U>();
    return out;
  }
};

/// A frame with every token reduced to vocabulary ids and every gold label
/// reduced to a label-set index (-1 when the label is unknown).
struct EncodedFrame {
  std::size_t frame_id = 0;
  std::size_t sentence_index = 0;
  std::size_t predicate_index = 0;
  std::vector<std::vector<std::size_t>> unit_ids;  // per token
  std::vector<int> gold;
};

class FrameEncoder {
 public:
  FrameEncoder(const Vocabulary& vocab, const LabelSet& labels,
               const ModelConfig& config)
      : vocab_(vocab), labels_(labels), config_(config) {}

  EncodedFrame encode(const std::vector<Sentence>& corpus, const Frame& frame,
                      std::size_t frame_id = 0) const {
    const Sentence& sent = corpus.at(frame.sentence_index);
    EncodedFrame out;
    out.frame_id = frame_id;
    out.sentence_index = frame.sentence_index;
    out.predicate_index = frame.predicate_index;
    out.unit_ids.reserve(sent.tokens.size());
    for (const Token& t : sent.tokens)
      out.unit_ids.push_back(
          vocab_.encode(apply_rho(config_.rho, t, config_.column_mode)));
    out.gold.reserve(frame.gold_labels.size());
    for (const std::string& l : frame.gold_labels)
      out.gold.push_back(labels_.index_of(l));
    return out;
  }

  std::vector<EncodedFrame> encode_all(const std::vector<Sentence>& corpus,
                                       const std::vector<Frame>& frames) const {
    std::vector<EncodedFrame> out;
    out.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i)
      out.push_back(encode(corpus, frames[i], i));
    return out;
  }

 private:
  const Vocabulary& vocab_;
  const LabelSet& labels_;
  ModelConfig config_;
};

template <typename T>
struct WordTrace {
  std::vector<nn::Tensor<T>> units;  // embedded subword vectors
  nn::BiLstmTrace<T> comp;
  nn::Tensor<T> vec;  // composed word vector (embedding_size)
  std::size_t word_id = 0;
};

template <typename T>
struct FrameTrace {
  std::vector<WordTrace<T>> words;
  std::vector<nn::Tensor<T>> xs;             // [word vector; predicate flag]
  std::vector<nn::BiLstmTrace<T>> layers;
  std::vector<nn::Tensor<T>> logp;           // per-token log-distribution
};

namespace detail {

template <typename T>
inline nn::Tensor<T> embedding_row(const ModelParams<T>& p, std::size_t id) {
  if (id >= p.vocab_size)
    throw DataError("unit id " + std::to_string(id) +
                    " out of vocabulary range " + std::to_string(p.vocab_size));
  nn::Tensor<T> row = nn::Tensor<T>::vector(p.config.embedding_size);
  const T* src = p.embeddings.data() + id * p.config.embedding_size;
  for (std::size_t i = 0; i < row.size(); ++i) row[i] = src[i];
  return row;
}

}  // namespace detail

/// Embeds the unit sequence, runs the composition bi-LSTM and combines the
/// two final states:  w = W_f * hs_f + W_b * hs_b + b.
template <typename T>
inline WordTrace<T> encode_word(const ModelParams<T>& p,
                                const std::vector<std::size_t>& unit_ids) {
  if (unit_ids.empty()) throw DataError("encode_word: empty unit sequence");
  WordTrace<T> w;
  if (!p.config.uses_composition()) {
    w.word_id = unit_ids.front();
    w.vec = detail::embedding_row(p, w.word_id);
    return w;
  }
  w.units.reserve(unit_ids.size());
  for (std::size_t id : unit_ids)
    w.units.push_back(detail::embedding_row(p, id));
  w.comp = nn::bilstm_forward(p.comp_fwd, p.comp_bwd, w.units);
  w.vec = p.b_comp;
  nn::matvec_add(p.w_comp_fwd, w.comp.final_fwd(), w.vec);
  nn::matvec_add(p.w_comp_bwd, w.comp.final_bwd(), w.vec);
  return w;
}

/// Whole-word baseline lookup.
template <typename T>
inline nn::Tensor<T> encode_word_wholeword(const ModelParams<T>& p,
                                           std::size_t word_id) {
  return detail::embedding_row(p, word_id);
}

/// x_t = [w_t ; pf_t] with pf_t = 1 at the predicate position, 0 elsewhere.
template <typename T>
inline std::vector<nn::Tensor<T>> build_inputs(
    const std::vector<nn::Tensor<T>>& word_vectors,
    std::size_t predicate_index, std::size_t flag_size = 1) {
  if (predicate_index >= word_vectors.size())
    throw DataError("predicate index out of range");
  std::vector<nn::Tensor<T>> xs;
  xs.reserve(word_vectors.size());
  for (std::size_t t = 0; t < word_vectors.size(); ++t) {
    const nn::Tensor<T>& w = word_vectors[t];
    nn::Tensor<T> x = nn::Tensor<T>::vector(w.size() + flag_size);
    for (std::size_t i = 0; i < w.size(); ++i) x[i] = w[i];
    const T flag = t == predicate_index ? T{1} : T{0};
    for (std::size_t i = 0; i < flag_size; ++i) x[w.size() + i] = flag;
    xs.push_back(std::move(x));
  }
  return xs;
}

template <typename T>
inline FrameTrace<T> forward_frame(const ModelParams<T>& p,
                                   const EncodedFrame& frame) {
  if (frame.unit_ids.empty()) throw DataError("forward_frame: empty frame");
  FrameTrace<T> trace;
  std::vector<nn::Tensor<T>> vecs;
  vecs.reserve(frame.unit_ids.size());
  for (const auto& ids : frame.unit_ids) {
    trace.words.push_back(encode_word(p, ids));
    vecs.push_back(trace.words.back().vec);
  }
  trace.xs = build_inputs(vecs, frame.predicate_index, p.config.flag_size);

  const std::size_t n = trace.xs.size();
  const std::size_t h = p.config.hidden_size;
  const std::vector<nn::Tensor<T>>* inputs = &trace.xs;
  std::vector<nn::Tensor<T>> stacked;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    trace.layers.push_back(
        nn::bilstm_forward(p.layers[l].fwd, p.layers[l].bwd, *inputs));
    if (l + 1 < p.layers.size()) {
      stacked.clear();
      stacked.reserve(n);
      for (std::size_t t = 0; t < n; ++t) {
        nn::Tensor<T> cat = nn::Tensor<T>::vector(2 * h);
        const nn::Tensor<T>& hf = trace.layers[l].h_fwd(t);
        const nn::Tensor<T>& hb = trace.layers[l].h_bwd(t);
        for (std::size_t i = 0; i < h; ++i) {
          cat[i] = hf[i];
          cat[h + i] = hb[i];
        }
        stacked.push_back(std::move(cat));
      }
      inputs = &stacked;
    }
  }

  const nn::BiLstmTrace<T>& top = trace.layers.back();
  trace.logp.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    nn::Tensor<T> cat = nn::Tensor<T>::vector(2 * h);
    const nn::Tensor<T>& hf = top.h_fwd(t);
    const nn::Tensor<T>& hb = top.h_bwd(t);
    for (std::size_t i = 0; i < h; ++i) {
      cat[i] = hf[i];
      cat[h + i] = hb[i];
    }
    trace.logp.push_back(nn::log_softmax(nn::linear(p.w_out, p.b_out, cat)));
  }
  return trace;
}

/// Per-token log-probability vectors over the label set.
template <typename T>
inline std::vector<nn::Tensor<T>> label_distributions(
    const ModelParams<T>& p, const EncodedFrame& frame) {
  return forward_frame(p, frame).logp;
}

/// Sum of per-token negative log likelihoods (nonrole positions included).
template <typename T>
inline T trace_loss(const FrameTrace<T>& trace, const std::vector<int>& gold) {
  if (gold.size() != trace.logp.size())
    throw DataError("gold label sequence length mismatch");
  T loss{0};
  for (std::size_t t = 0; t < gold.size(); ++t) {
    if (gold[t] < 0)
      throw DataError("gold label not in label set at token " +
                      std::to_string(t + 1));
    loss += nn::nll_from_log(trace.logp[t], static_cast<std::size_t>(gold[t]));
  }
  return loss;
}

template <typename T>
inline T sequence_loss(const ModelParams<T>& p, const EncodedFrame& frame) {
  return trace_loss(forward_frame(p, frame), frame.gold);
}

/// Per-token argmax labels; ties resolve to the lowest label index.
template <typename T>
inline std::vector<int> decode_argmax(const std::vector<nn::Tensor<T>>& logp) {
  std::vector<int> out;
  out.reserve(logp.size());
  for (const nn::Tensor<T>& lp : logp) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < lp.size(); ++i)
      if (lp[i] > lp[best]) best = i;
    out.push_back(static_cast<int>(best));
  }
  return out;
}

template <typename T>
inline std::vector<int> predict(const ModelParams<T>& p,
                                const EncodedFrame& frame) {
  return decode_argmax(forward_frame(p, frame).logp);
}

/// Reverse-mode pass for one frame. Gradients accumulate into `grads`,
/// which must be zero-initialized (or carry a minibatch's running sums).
template <typename T>
inline void backward_frame(const ModelParams<T>& p, const EncodedFrame& frame,
                           const FrameTrace<T>& trace, ModelParams<T>& grads) {
  const std::size_t n = trace.xs.size();
  const std::size_t h = p.config.hidden_size;
  const std::size_t e = p.config.embedding_size;

  // Output layer and top-layer state gradients.
  std::vector<nn::Tensor<T>> dh_fwd(n, nn::Tensor<T>::vector(h));
  std::vector<nn::Tensor<T>> dh_bwd(n, nn::Tensor<T>::vector(h));
  const nn::BiLstmTrace<T>& top = trace.layers.back();
  for (std::size_t t = 0; t < n; ++t) {
    if (frame.gold[t] < 0)
      throw DataError("gold label not in label set at token " +
                      std::to_string(t + 1));
    nn::Tensor<T> dz = nn::nll_softmax_backward(
        trace.logp[t], static_cast<std::size_t>(frame.gold[t]));
    nn::Tensor<T> cat = nn::Tensor<T>::vector(2 * h);
    const nn::Tensor<T>& hf = top.h_fwd(t);
    const nn::Tensor<T>& hb = top.h_bwd(t);
    for (std::size_t i = 0; i < h; ++i) {
      cat[i] = hf[i];
      cat[h + i] = hb[i];
    }
    nn::outer_add(dz, cat, grads.w_out);
    nn::add(dz, grads.b_out);
    nn::Tensor<T> dcat = nn::Tensor<T>::vector(2 * h);
    nn::matvec_transposed_add(p.w_out, dz, dcat);
    for (std::size_t i = 0; i < h; ++i) {
      dh_fwd[t][i] += dcat[i];
      dh_bwd[t][i] += dcat[h + i];
    }
  }

  // Down through the labeler stack.
  std::vector<nn::Tensor<T>> dx;
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    const std::size_t in_size = p.layers[l].fwd.input_size;
    dx.assign(n, nn::Tensor<T>::vector(in_size));
    nn::bilstm_backward(p.layers[l].fwd, p.layers[l].bwd, trace.layers[l],
                        dh_fwd, dh_bwd, grads.layers[l].fwd,
                        grads.layers[l].bwd, dx);
    if (l > 0) {
      for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < h; ++i) {
          dh_fwd[t][i] = dx[t][i];
          dh_bwd[t][i] = dx[t][h + i];
        }
      }
    }
  }

  // Word vectors: flag dimensions are inputs, not parameters.
  for (std::size_t t = 0; t < n; ++t) {
    nn::Tensor<T> dvec = nn::Tensor<T>::vector(e);
    for (std::size_t i = 0; i < e; ++i) dvec[i] = dx[t][i];
    const WordTrace<T>& w = trace.words[t];
    if (!p.config.uses_composition()) {
      T* row = grads.embeddings.data() + w.word_id * e;
      for (std::size_t i = 0; i < e; ++i) row[i] += dvec[i];
      continue;
    }
    nn::outer_add(dvec, w.comp.final_fwd(), grads.w_comp_fwd);
    nn::outer_add(dvec, w.comp.final_bwd(), grads.w_comp_bwd);
    nn::add(dvec, grads.b_comp);

    const std::size_t units = w.units.size();
    std::vector<nn::Tensor<T>> dhf(units, nn::Tensor<T>::vector(h));
    std::vector<nn::Tensor<T>> dhb(units, nn::Tensor<T>::vector(h));
    nn::matvec_transposed_add(p.w_comp_fwd, dvec, dhf[units - 1]);
    nn::matvec_transposed_add(p.w_comp_bwd, dvec, dhb[0]);
    std::vector<nn::Tensor<T>> dunits(units, nn::Tensor<T>::vector(e));
    nn::bilstm_backward(p.comp_fwd, p.comp_bwd, w.comp, dhf, dhb,
                        grads.comp_fwd, grads.comp_bwd, dunits);
    for (std::size_t u = 0; u < units; ++u) {
      T* row = grads.embeddings.data() + frame.unit_ids[t][u] * e;
      for (std::size_t i = 0; i < e; ++i) row[i] += dunits[u][i];
    }
  }
}

}  // namespace srl
