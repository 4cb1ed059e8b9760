#include <gtest/gtest.h>

#include <cmath>

#include "srl/model.hpp"
#include "srl/synth.hpp"

namespace {

using namespace srl;
using nn::Tensor;

ModelConfig small_config(RhoKind rho, std::size_t layers = 1) {
  ModelConfig c;
  c.rho = rho;
  c.embedding_size = 5;
  c.hidden_size = 4;
  c.layers = layers;
  c.seed = 42;
  return c;
}

EncodedFrame toy_frame() {
  EncodedFrame f;
  f.unit_ids = {{1, 2, 3}, {2, 4}, {5, 1, 2, 3}};
  f.predicate_index = 1;
  f.gold = {0, 1, 0};
  return f;
}

TEST(EncodeWord, DeterministicAndPure) {
  const auto params =
      ModelParams<float>::initialized(small_config(RhoKind::chars), 8, 3);
  const std::vector<std::size_t> ids = {1, 3, 2};
  const auto a = encode_word(params, ids);
  const auto b = encode_word(params, ids);
  EXPECT_EQ(a.vec, b.vec);
  EXPECT_EQ(a.vec.size(), params.config.embedding_size);
}

TEST(EncodeWord, SingleUnitTokenWorks) {
  const auto params =
      ModelParams<float>::initialized(small_config(RhoKind::chars), 8, 3);
  const auto w = encode_word(params, {4});
  EXPECT_EQ(w.vec.size(), 5u);
  EXPECT_TRUE(w.vec.finite());
}

TEST(EncodeWord, OutOfRangeIdRejected) {
  const auto params =
      ModelParams<float>::initialized(small_config(RhoKind::chars), 8, 3);
  EXPECT_THROW(encode_word(params, {8}), DataError);
}

TEST(EncodeWord, WholeWordIsEmbeddingLookup) {
  const auto params =
      ModelParams<float>::initialized(small_config(RhoKind::word), 8, 3);
  const auto vec = encode_word_wholeword(params, 3);
  for (std::size_t i = 0; i < 5; ++i)
    EXPECT_FLOAT_EQ(vec[i], params.embeddings(3, i));
  // Unseen forms encode to the unk id and hit the unk row.
  const auto unk = encode_word_wholeword(params, Vocabulary::kUnkId);
  for (std::size_t i = 0; i < 5; ++i)
    EXPECT_FLOAT_EQ(unk[i], params.embeddings(0, i));
}

TEST(BuildInputs, FlagSumsToOneAcrossSentence) {
  std::vector<Tensor<float>> vecs(4, Tensor<float>::vector(3));
  const auto xs = build_inputs(vecs, 2, 1);
  float total = 0.0f;
  for (const auto& x : xs) total += x[3];
  EXPECT_FLOAT_EQ(total, 1.0f);
  EXPECT_FLOAT_EQ(xs[2][3], 1.0f);
}

TEST(BuildInputs, TwoFramesDifferOnlyInFlagPosition) {
  std::vector<Tensor<float>> vecs(3, Tensor<float>::vector(2));
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t i = 0; i < 2; ++i)
      vecs[t][i] = static_cast<float>(t * 2 + i);
  const auto a = build_inputs(vecs, 0, 1);
  const auto b = build_inputs(vecs, 2, 1);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t i = 0; i < 2; ++i)
      EXPECT_FLOAT_EQ(a[t][i], b[t][i]);
  EXPECT_NE(a[0][2], b[0][2]);
}

TEST(BuildInputs, PredicateIndexOutOfRangeRejected) {
  std::vector<Tensor<float>> vecs(2, Tensor<float>::vector(2));
  EXPECT_THROW(build_inputs(vecs, 2, 1), DataError);
}

TEST(LabelDistributions, OnePerTokenAllValidSimplex) {
  const auto params =
      ModelParams<float>::initialized(small_config(RhoKind::chars), 8, 3);
  const auto logps = label_distributions(params, toy_frame());
  ASSERT_EQ(logps.size(), 3u);
  for (const auto& lp : logps) {
    ASSERT_EQ(lp.size(), 3u);
    double sum = 0;
    for (std::size_t i = 0; i < lp.size(); ++i) {
      sum += std::exp(static_cast<double>(lp[i]));
      EXPECT_LE(lp[i], 0.0f);
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(SequenceLoss, UniformUntrainedModelMatchesClosedForm) {
  // All-zero parameters give uniform distributions over the 4 labels.
  auto params = ModelParams<float>::sized(small_config(RhoKind::chars), 8, 4);
  EncodedFrame f;
  f.unit_ids = {{1}, {2}, {3}, {4}, {5}};
  f.predicate_index = 0;
  f.gold = {0, 1, 2, 3, 0};
  const double loss = sequence_loss(params, f);
  EXPECT_NEAR(loss, 5.0 * std::log(4.0), 1e-5);
}

TEST(SequenceLoss, NonNegative) {
  const auto params =
      ModelParams<float>::initialized(small_config(RhoKind::chars), 8, 3);
  EXPECT_GE(sequence_loss(params, toy_frame()), 0.0f);
}

TEST(SequenceLoss, UnknownGoldLabelRejected) {
  const auto params =
      ModelParams<float>::initialized(small_config(RhoKind::chars), 8, 3);
  EncodedFrame f = toy_frame();
  f.gold[1] = -1;
  EXPECT_THROW(sequence_loss(params, f), DataError);
}

TEST(Predict, ArgmaxWithLowestIndexTieBreak) {
  std::vector<Tensor<float>> logp;
  auto mk = [](std::initializer_list<float> vals) {
    Tensor<float> t = Tensor<float>::vector(vals.size());
    std::size_t i = 0;
    for (float v : vals) t[i++] = v;
    return t;
  };
  logp.push_back(mk({std::log(0.1f), std::log(0.7f), std::log(0.2f)}));
  logp.push_back(mk({-1.0f, -1.0f, -2.0f}));  // tie between 0 and 1
  const auto ids = decode_argmax(logp);
  EXPECT_EQ(ids[0], 1);
  EXPECT_EQ(ids[1], 0);
}

TEST(Predict, DeterministicAcrossCalls) {
  const auto params =
      ModelParams<float>::initialized(small_config(RhoKind::chars), 8, 3);
  const auto frame = toy_frame();
  EXPECT_EQ(predict(params, frame), predict(params, frame));
}

TEST(Predict, PerFrameIndependence) {
  const auto params =
      ModelParams<float>::initialized(small_config(RhoKind::chars), 8, 3);
  const auto frame = toy_frame();
  const auto alone = predict(params, frame);
  // Evaluate other frames in between; the prediction must not move.
  EncodedFrame other;
  other.unit_ids = {{7, 6}, {5}};
  other.predicate_index = 0;
  other.gold = {0, 0};
  predict(params, other);
  EXPECT_EQ(predict(params, frame), alone);
}

// Central finite differences over every parameter group on a 3-token,
// 2-label, hidden-size-4 instance (64-bit shadow mode).
void check_full_model(const ModelConfig& config) {
  auto params = ModelParams<double>::initialized(config, 8, 2);
  EncodedFrame frame;
  frame.unit_ids = {{1, 2, 3}, {2, 4}, {5, 1, 2, 3}};
  frame.predicate_index = 1;
  frame.gold = {0, 1, 0};

  auto grads = params.zeros_like();
  const auto trace = forward_frame(params, frame);
  backward_frame(params, frame, trace, grads);

  std::vector<std::pair<std::string, Tensor<double>*>> tensors;
  std::vector<std::pair<std::string, const Tensor<double>*>> analytic;
  params.for_each([&](const std::string& n, Tensor<double>& t) {
    tensors.emplace_back(n, &t);
  });
  grads.for_each([&](const std::string& n, Tensor<double>& t) {
    analytic.emplace_back(n, &t);
  });
  auto loss = [&]() {
    return static_cast<double>(sequence_loss(params, frame));
  };
  const auto result = nn::finite_difference_check(tensors, analytic, loss);
  EXPECT_LT(result.max_rel_error, 1e-4)
      << result.worst_name << " analytic " << result.worst_analytic
      << " numeric " << result.worst_numeric;
  EXPECT_GT(result.checked, 0u);
}

TEST(GradCheck, CharModelAllParameterGroups) {
  ModelConfig c = small_config(RhoKind::chars);
  c.embedding_size = 3;
  check_full_model(c);
}

TEST(GradCheck, WordModelEmbeddingPath) {
  ModelConfig c = small_config(RhoKind::word);
  c.embedding_size = 3;
  check_full_model(c);
}

TEST(GradCheck, TwoLayerLabeler) {
  ModelConfig c = small_config(RhoKind::chars, 2);
  c.embedding_size = 3;
  check_full_model(c);
}

TEST(FrameEncoder, PredictedModeIgnoresGoldColumns) {
  SynthSpec spec;
  spec.sentences = 30;
  auto corpus = generate_synthetic(spec, 19);
  const auto frames = extract_frames(corpus);

  ModelConfig config = small_config(RhoKind::morph);
  config.column_mode = ColumnMode::predicted;
  const Vocabulary vocab =
      build_vocab(corpus, config.rho, 1, config.column_mode);
  const LabelSet labels = build_label_set(frames);
  const auto params =
      ModelParams<float>::initialized(config, vocab.size(), labels.size());
  const FrameEncoder encoder(vocab, labels, config);
  const auto before = encoder.encode_all(corpus, frames);

  // Corrupt every gold lemma/feat column; predicted-mode behavior must not
  // move at all.
  for (Sentence& s : corpus)
    for (Token& t : s.tokens) {
      t.lemma = "CORRUPTED";
      t.feats = {"Bogus", "Junk"};
    }
  const auto after = encoder.encode_all(corpus, frames);
  ASSERT_EQ(before.size(), after.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(before[i].unit_ids, after[i].unit_ids);
    EXPECT_EQ(predict(params, before[i]), predict(params, after[i]));
  }
}

TEST(ModelParams, CastRoundTripsThroughDouble) {
  const auto params =
      ModelParams<float>::initialized(small_config(RhoKind::chars), 8, 3);
  const auto shadow = params.cast<double>();
  auto back = shadow.cast<float>();
  auto a = const_cast<ModelParams<float>&>(params).tensors();
  auto b = back.tensors();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(*a[i], *b[i]);
}

TEST(ModelParams, LayerCountValidated) {
  ModelConfig c = small_config(RhoKind::chars, 3);
  EXPECT_THROW(ModelParams<float>::sized(c, 8, 3), ConfigError);
}

}  // namespace
