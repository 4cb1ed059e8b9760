#include <gtest/gtest.h>

#include <map>
#include <set>

#include "srl/conll.hpp"
#include "srl/synth.hpp"

namespace {

using namespace srl;

TEST(SynthSpec, LoadsKeyValueFile) {
  std::istringstream in(
      "# toy corpus\n"
      "sentences = 42\n"
      "roles=3\n"
      "ambiguity_rate = 0.25\n"
      "max_len = 9\n");
  const SynthSpec spec = load_synth_spec(in);
  EXPECT_EQ(spec.sentences, 42u);
  EXPECT_EQ(spec.roles, 3u);
  EXPECT_DOUBLE_EQ(spec.ambiguity_rate, 0.25);
  EXPECT_EQ(spec.max_len, 9u);
}

TEST(SynthSpec, UnknownKeyRejected) {
  std::istringstream in("bogus = 1\n");
  EXPECT_THROW(load_synth_spec(in), ParseError);
}

TEST(SynthSpec, InvalidRatesRejected) {
  SynthSpec spec;
  spec.ambiguity_rate = 1.5;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = SynthSpec{};
  spec.derivation_rate = -0.1;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = SynthSpec{};
  spec.min_len = 9;
  spec.max_len = 3;
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Generator, SameSeedSameCorpus) {
  SynthSpec spec;
  spec.sentences = 50;
  spec.ambiguity_rate = 0.2;
  spec.derivation_rate = 0.3;
  spec.novel_stem_rate = 0.2;
  const SynthCorpus a = generate_synthetic_corpus(spec, 99);
  const SynthCorpus b = generate_synthetic_corpus(spec, 99);
  EXPECT_EQ(write_conll09(a.train.sentences), write_conll09(b.train.sentences));
  EXPECT_EQ(write_conll09(a.dev.sentences), write_conll09(b.dev.sentences));
  EXPECT_EQ(write_conll09(a.test.sentences), write_conll09(b.test.sentences));
  EXPECT_EQ(a.ambiguous_forms, b.ambiguous_forms);
}

TEST(Generator, DifferentSeedsDiffer) {
  SynthSpec spec;
  spec.sentences = 30;
  EXPECT_NE(write_conll09(generate_synthetic(spec, 1)),
            write_conll09(generate_synthetic(spec, 2)));
}

TEST(Generator, ZeroAmbiguityMeansOneFeatureSetPerForm) {
  SynthSpec spec;
  spec.sentences = 300;
  spec.ambiguity_rate = 0.0;
  const auto corpus = generate_synthetic(spec, 13);
  std::map<std::string, std::set<std::string>> featsets;
  for (const Sentence& s : corpus)
    for (const Token& t : s.tokens) {
      std::string key;
      for (const auto& f : t.feats) key += f + "|";
      featsets[t.form].insert(key);
    }
  for (const auto& [form, sets] : featsets)
    EXPECT_EQ(sets.size(), 1u) << form;
}

TEST(Generator, PlantedAmbiguityShowsUp) {
  SynthSpec spec;
  spec.sentences = 400;
  spec.roles = 4;
  spec.ambiguity_rate = 0.25;
  spec.arg_rate = 0.7;
  const SynthCorpus corpus = generate_synthetic_corpus(spec, 29);
  EXPECT_EQ(corpus.planted_ambiguous_stems.size(), 10u);  // 0.25 * 40 stems
  EXPECT_FALSE(corpus.ambiguous_forms.empty());
  // Every emitted ambiguous form belongs to a planted stem + "in" suffix.
  for (const std::string& form : corpus.ambiguous_forms) {
    bool matches = false;
    for (const std::string& stem : corpus.planted_ambiguous_stems)
      matches = matches || form == stem + "in";
    EXPECT_TRUE(matches) << form;
  }
  // Brute-force recount over the emitted train split agrees.
  std::map<std::string, std::set<std::string>> featsets;
  for (const Sentence& s : corpus.train.sentences)
    for (const Token& t : s.tokens) {
      std::string key;
      for (const auto& f : t.feats) key += f + "|";
      featsets[t.form].insert(key);
    }
  std::set<std::string> recount;
  for (const auto& [form, sets] : featsets)
    if (sets.size() >= 2) recount.insert(form);
  EXPECT_EQ(recount, corpus.ambiguous_forms);
}

TEST(Generator, DerivedSentenceFractionTracksRate) {
  SynthSpec spec;
  spec.sentences = 1000;
  spec.derivation_rate = 0.3;
  const SynthCorpus corpus = generate_synthetic_corpus(spec, 31);
  // Count sentences containing a DB-marked token.
  std::size_t derived = 0;
  for (const Sentence& s : corpus.train.sentences) {
    bool has_db = false;
    for (const Token& t : s.tokens)
      for (const auto& f : t.feats)
        if (f == "DB") has_db = true;
    if (has_db) ++derived;
  }
  EXPECT_EQ(derived, corpus.train.derived_sentences);
  const double fraction = static_cast<double>(derived) / 1000.0;
  EXPECT_NEAR(fraction, 0.3, 0.03);
}

TEST(Generator, ZeroDerivationRateMeansNoMarkers) {
  SynthSpec spec;
  spec.sentences = 100;
  spec.derivation_rate = 0.0;
  const SynthCorpus corpus = generate_synthetic_corpus(spec, 5);
  EXPECT_EQ(corpus.train.derived_sentences, 0u);
  for (const Sentence& s : corpus.train.sentences)
    for (const Token& t : s.tokens)
      for (const auto& f : t.feats) EXPECT_NE(f, "DB");
}

TEST(Generator, OutputIsValidConll) {
  SynthSpec spec;
  spec.sentences = 80;
  spec.ambiguity_rate = 0.2;
  spec.derivation_rate = 0.2;
  spec.max_preds = 3;
  const auto corpus = generate_synthetic(spec, 37);
  // Reparse enforces every Token/Sentence invariant.
  const auto reparsed = parse_conll09(write_conll09(corpus));
  EXPECT_EQ(reparsed, corpus);
  for (const Sentence& s : corpus) {
    for (const Token& t : s.tokens)
      EXPECT_EQ(t.apreds.size(), s.predicates.size());
  }
}

TEST(Generator, RolesAreSuffixDetermined) {
  SynthSpec spec;
  spec.sentences = 200;
  spec.ambiguity_rate = 0.0;
  const auto corpus = generate_synthetic(spec, 53);
  // With no homograph planting, form suffix -> role must be a function.
  std::map<std::string, std::set<std::string>> role_by_form;
  for (const Sentence& s : corpus) {
    for (std::size_t p = 0; p < s.predicates.size(); ++p) {
      for (const Token& t : s.tokens)
        if (t.apreds[p] != "_") role_by_form[t.form].insert(t.apreds[p]);
    }
  }
  for (const auto& [form, roles] : role_by_form)
    EXPECT_EQ(roles.size(), 1u) << form;
}

TEST(Generator, SplitsAreDisjoint) {
  SynthSpec spec;
  spec.sentences = 100;
  const SynthCorpus corpus = generate_synthetic_corpus(spec, 61);
  auto signatures = [](const std::vector<Sentence>& split) {
    std::set<std::string> sigs;
    for (const Sentence& s : split) {
      std::string sig;
      for (const Token& t : s.tokens) sig += t.form + " ";
      sigs.insert(sig);
    }
    return sigs;
  };
  const auto train = signatures(corpus.train.sentences);
  const auto dev = signatures(corpus.dev.sentences);
  const auto test = signatures(corpus.test.sentences);
  for (const auto& sig : dev) EXPECT_EQ(train.count(sig), 0u);
  for (const auto& sig : test) {
    EXPECT_EQ(train.count(sig), 0u);
    EXPECT_EQ(dev.count(sig), 0u);
  }
}

TEST(Generator, PfeatNoiseCreatesPredictedGoldGap) {
  SynthSpec spec;
  spec.sentences = 100;
  spec.pfeat_noise = 0.3;
  const auto corpus = generate_synthetic(spec, 67);
  std::size_t differing = 0;
  for (const Sentence& s : corpus)
    for (const Token& t : s.tokens)
      if (t.pfeats != t.feats) ++differing;
  EXPECT_GT(differing, 0u);
}

}  // namespace
