#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "srl/checkpoint.hpp"

namespace {

using namespace srl;

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = (std::filesystem::temp_directory_path() /
            ("srl_ckpt_test_" + name + "_" + std::to_string(::getpid())))
               .string();
  }
  ~TempFile() { std::remove(path.c_str()); }
};

ModelParams<float> sample_params() {
  ModelConfig config;
  config.rho = RhoKind::char3;
  config.embedding_size = 6;
  config.hidden_size = 5;
  config.layers = 2;
  config.seed = 9;
  return ModelParams<float>::initialized(config, 11, 4);
}

LabelSet sample_labels() {
  LabelSet set;
  set.labels = {"_", "A0", "A1", "AM-TMP"};
  set.nonrole_index = 0;
  return set;
}

TEST(Checkpoint, ModelRoundTripsBitExact) {
  const auto params = sample_params();
  const auto labels = sample_labels();
  TempFile file("roundtrip");
  save_model_file(file.path, params, labels, "abc123", {{"note", "x"}});
  LoadedModel loaded = load_model_file(file.path);

  EXPECT_EQ(loaded.labels.labels, labels.labels);
  EXPECT_EQ(loaded.meta.at("vocab_fingerprint"), "abc123");
  EXPECT_EQ(loaded.meta.at("note"), "x");
  EXPECT_EQ(loaded.params.config.rho, params.config.rho);
  EXPECT_EQ(loaded.params.config.layers, 2u);

  auto a = const_cast<ModelParams<float>&>(params).tensors();
  auto b = loaded.params.tensors();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(*a[i], *b[i]);
}

TEST(Checkpoint, WriteIsDeterministic) {
  const auto params = sample_params();
  std::ostringstream a, b;
  make_model_checkpoint(params, sample_labels(), "fp").write(a);
  make_model_checkpoint(params, sample_labels(), "fp").write(b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Checkpoint, ShapeMismatchRejected) {
  Checkpoint ckpt = make_model_checkpoint(sample_params(), sample_labels(), "fp");
  for (auto& [name, tensor] : ckpt.params) {
    if (name == "w_out") tensor = nn::Tensor<float>::matrix(2, 2);
  }
  EXPECT_THROW(from_model_checkpoint(ckpt), DataError);
}

TEST(Checkpoint, MissingRecordRejected) {
  Checkpoint ckpt = make_model_checkpoint(sample_params(), sample_labels(), "fp");
  ckpt.params.pop_back();
  EXPECT_THROW(from_model_checkpoint(ckpt), DataError);
}

TEST(Checkpoint, UnknownRecordRejected) {
  Checkpoint ckpt = make_model_checkpoint(sample_params(), sample_labels(), "fp");
  ckpt.params.emplace_back("mystery", nn::Tensor<float>::vector(3));
  EXPECT_THROW(from_model_checkpoint(ckpt), DataError);
}

TEST(Checkpoint, BadMagicRejected) {
  std::istringstream in("NOTACKPT 9\n");
  EXPECT_THROW(Checkpoint::read(in), DataError);
}

TEST(Checkpoint, TruncatedDataRejected) {
  std::ostringstream out;
  make_model_checkpoint(sample_params(), sample_labels(), "fp").write(out);
  std::string bytes = out.str();
  bytes.resize(bytes.size() / 2);
  std::istringstream in(bytes);
  EXPECT_THROW(Checkpoint::read(in), DataError);
}

TEST(Checkpoint, MetaValuesSurviveEscaping) {
  Checkpoint ckpt;
  ckpt.meta["kind"] = "model";
  ckpt.meta["tricky"] = "tab\there\nnewline\\slash";
  std::stringstream ss;
  ckpt.write(ss);
  const Checkpoint back = Checkpoint::read(ss);
  EXPECT_EQ(back.meta.at("tricky"), "tab\there\nnewline\\slash");
}

TEST(Fingerprint, StableAndContentSensitive) {
  EXPECT_EQ(fingerprint("abc"), fingerprint("abc"));
  EXPECT_NE(fingerprint("abc"), fingerprint("abd"));
  EXPECT_EQ(fingerprint("abc").size(), 16u);
}

TEST(Fingerprint, VocabularyFingerprintTracksContent) {
  Vocabulary a, b;
  a.add("x");
  b.add("x");
  EXPECT_EQ(vocab_fingerprint(a), vocab_fingerprint(b));
  b.add("y");
  EXPECT_NE(vocab_fingerprint(a), vocab_fingerprint(b));
}

}  // namespace
