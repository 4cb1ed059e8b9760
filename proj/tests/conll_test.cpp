#include <gtest/gtest.h>

#include <sstream>

#include "srl/conll.hpp"
#include "srl/synth.hpp"

namespace {

using namespace srl;

// 2 tokens, second is the predicate come.01, token 1 is its A0.
const char* kMinimalBlock =
    "1\tDogs\tdog\tdog\tN\tN\tNum=p\tNum=p\t2\t2\tSBJ\tSBJ\t_\t_\tA0\n"
    "2\tcome\tcome\tcome\tV\tV\t_\t_\t0\t0\tROOT\tROOT\tY\tcome.01\t_\n"
    "\n";

TEST(ParseConll09, MinimalWellFormedBlock) {
  const auto sentences = parse_conll09(std::string(kMinimalBlock));
  ASSERT_EQ(sentences.size(), 1u);
  const Sentence& s = sentences[0];
  ASSERT_EQ(s.tokens.size(), 2u);
  ASSERT_EQ(s.predicates.size(), 1u);
  EXPECT_EQ(s.predicates[0], 1u);
  EXPECT_EQ(s.tokens[0].form, "Dogs");
  EXPECT_EQ(s.tokens[0].apreds, std::vector<std::string>{"A0"});
  EXPECT_TRUE(s.tokens[1].fillpred);
  EXPECT_EQ(s.tokens[1].pred, "come.01");
  EXPECT_EQ(s.tokens[0].feats, std::vector<std::string>{"Num=p"});
}

TEST(ParseConll09, BlankInputGivesEmptyCorpus) {
  EXPECT_TRUE(parse_conll09(std::string("")).empty());
  EXPECT_TRUE(parse_conll09(std::string("\n\n")).empty());
}

TEST(ParseConll09, MissingApredColumnReportsLineNumber) {
  const std::string text =
      "1\ta\ta\ta\tN\tN\t_\t_\t0\t0\tD\tD\t_\t_\t_\n"
      "2\tb\tb\tb\tN\tN\t_\t_\t0\t0\tD\tD\t_\t_\n"  // 14 cols, missing APRED
      "3\tc\tc\tc\tV\tV\t_\t_\t0\t0\tD\tD\tY\tc.01\t_\n"
      "\n";
  try {
    parse_conll09(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParseConll09, FewerThan14ColumnsRejected) {
  EXPECT_THROW(parse_conll09(std::string("1\ta\tb\n\n")), ParseError);
}

TEST(ParseConll09, NonIntegerIdRejected) {
  const std::string text =
      "x\ta\ta\ta\tN\tN\t_\t_\t0\t0\tD\tD\t_\t_\n\n";
  EXPECT_THROW(parse_conll09(text), ParseError);
}

TEST(ParseConll09, NonContiguousIdsRejected) {
  const std::string text =
      "1\ta\ta\ta\tN\tN\t_\t_\t0\t0\tD\tD\t_\t_\n"
      "3\tb\tb\tb\tN\tN\t_\t_\t0\t0\tD\tD\t_\t_\n"
      "\n";
  EXPECT_THROW(parse_conll09(text), ParseError);
}

TEST(ParseConll09, FillpredPredMismatchRejected) {
  const std::string text =
      "1\ta\ta\ta\tN\tN\t_\t_\t0\t0\tD\tD\tY\t_\n\n";
  EXPECT_THROW(parse_conll09(text), ParseError);
}

TEST(ParseConll09, PredicateCountMustMatchApredColumns) {
  // One predicate but two APRED columns.
  const std::string text =
      "1\ta\ta\ta\tN\tN\t_\t_\t0\t0\tD\tD\tY\ta.01\t_\t_\n\n";
  EXPECT_THROW(parse_conll09(text), ParseError);
}

TEST(WriteConll09, RoundTripOfMinimalBlock) {
  const auto sentences = parse_conll09(std::string(kMinimalBlock));
  const std::string written = write_conll09(sentences);
  EXPECT_EQ(written, kMinimalBlock);
  EXPECT_EQ(parse_conll09(written), sentences);
}

TEST(WriteConll09, TwoPredicatesCarryTwoApredColumns) {
  Sentence s;
  for (int i = 1; i <= 3; ++i) {
    Token t;
    t.id = i;
    t.form = t.lemma = t.plemma = "w" + std::to_string(i);
    t.pos = t.ppos = "V";
    t.deprel = t.pdeprel = "D";
    if (i != 2) {
      t.fillpred = true;
      t.pred = t.form + ".01";
    }
    t.apreds = {"_", "_"};
    s.tokens.push_back(t);
  }
  s.predicates = {0, 2};
  const std::string out = write_conll09({s});
  std::istringstream lines(out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 15);  // 16 columns
  EXPECT_EQ(parse_conll09(out), std::vector<Sentence>{s});
}

TEST(WriteConll09, RandomSyntheticCorpusRoundTrips) {
  SynthSpec spec;
  spec.sentences = 100;
  spec.dev_sentences = 0;
  spec.test_sentences = 0;
  spec.ambiguity_rate = 0.2;
  spec.derivation_rate = 0.2;
  const auto corpus = generate_synthetic(spec, 7);
  ASSERT_EQ(corpus.size(), 100u);
  const std::string text = write_conll09(corpus);
  EXPECT_EQ(parse_conll09(text), corpus);
  EXPECT_EQ(write_conll09(parse_conll09(text)), text);
}

TEST(ExtractFrames, OnePerPredicate) {
  Sentence s = parse_conll09(std::string(kMinimalBlock))[0];
  // Add a second predicate.
  s.tokens[0].fillpred = true;
  s.tokens[0].pred = "dog.01";
  s.tokens[0].apreds = {"_", "A0"};
  s.tokens[1].apreds = {"A1", "_"};
  s.predicates = {0, 1};
  const auto frames = extract_frames({s});
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_EQ(frames[0].predicate_index, 0u);
  EXPECT_EQ(frames[0].gold_labels, (std::vector<std::string>{"_", "A1"}));
  EXPECT_EQ(frames[1].predicate_index, 1u);
  EXPECT_EQ(frames[1].gold_labels, (std::vector<std::string>{"A0", "_"}));
}

TEST(ExtractFrames, NoPredicatesNoFrames) {
  const std::string text =
      "1\ta\ta\ta\tN\tN\t_\t_\t0\t0\tD\tD\t_\t_\n\n";
  EXPECT_TRUE(extract_frames(parse_conll09(text)).empty());
}

TEST(ExtractFrames, TotalEqualsPredicateSum) {
  SynthSpec spec;
  spec.sentences = 60;
  spec.max_preds = 3;
  const auto corpus = generate_synthetic(spec, 11);
  std::size_t predicates = 0;
  for (const Sentence& s : corpus) predicates += s.predicates.size();
  EXPECT_EQ(extract_frames(corpus).size(), predicates);
}

TEST(AbbreviateMwe, PaperExample) {
  MweAbbreviator abbr;
  EXPECT_EQ(abbr.abbreviate("Confederación_Francesa_del_Trabajo"),
            "CFdT");
  EXPECT_EQ(abbr.table().at("CFdT"), "Confederación_Francesa_del_Trabajo");
}

TEST(AbbreviateMwe, TokenWithoutJoinerUnchanged) {
  MweAbbreviator abbr;
  EXPECT_EQ(abbr.abbreviate("hablo"), "hablo");
  EXPECT_TRUE(abbr.table().empty());
}

TEST(AbbreviateMwe, LowercaseParts) {
  MweAbbreviator abbr;
  EXPECT_EQ(abbr.abbreviate("a_b_c"), "abc");
}

TEST(AbbreviateMwe, CollisionsGetNumericSuffix) {
  MweAbbreviator abbr;
  EXPECT_EQ(abbr.abbreviate("Casa_Blanca"), "CB");
  EXPECT_EQ(abbr.abbreviate("Cruz_Bella"), "CB2");
  EXPECT_EQ(abbr.abbreviate("Casa_Blanca"), "CB");  // same form, same key
  EXPECT_EQ(abbr.table().at("CB2"), "Cruz_Bella");
}

TEST(AbbreviateMwe, AppliesToSentenceForms) {
  Sentence s = parse_conll09(std::string(kMinimalBlock))[0];
  s.tokens[0].form = "Confederación_Francesa_del_Trabajo";
  const auto table = abbreviate_mwe(s);
  EXPECT_EQ(s.tokens[0].form, "CFdT");
  EXPECT_EQ(table.size(), 1u);
}

TEST(BuildLabelSet, ThresholdAffectsReportingOnly) {
  std::vector<Frame> frames;
  Frame f;
  for (int i = 0; i < 12; ++i) f.gold_labels.push_back("A0");
  for (int i = 0; i < 11; ++i) f.gold_labels.push_back("A1");
  for (int i = 0; i < 2; ++i) f.gold_labels.push_back("AM");
  f.gold_labels.push_back("_");
  frames.push_back(f);
  const LabelSet set = build_label_set(frames, 10);
  EXPECT_EQ(set.reported_role_count, 2u);
  ASSERT_EQ(set.size(), 4u);
  EXPECT_EQ(set.labels[0], "_");
  EXPECT_EQ(set.labels[1], "A0");
  EXPECT_EQ(set.labels[2], "A1");
  EXPECT_EQ(set.labels[3], "AM");
  EXPECT_EQ(set.nonrole_index, 0u);
}

TEST(BuildLabelSet, NonroleOnlyWhenNoRoles) {
  Frame f;
  f.gold_labels = {"_", "_"};
  const LabelSet set = build_label_set({f});
  EXPECT_EQ(set.labels, std::vector<std::string>{"_"});
}

TEST(BuildLabelSet, EmptyInputRejected) {
  EXPECT_THROW(build_label_set({}), DataError);
}

TEST(BuildLabelSet, FrequencyThenLexicographicOrder) {
  Frame f;
  f.gold_labels = {"B", "A", "A", "C", "C"};
  const LabelSet set = build_label_set({f});
  EXPECT_EQ(set.labels, (std::vector<std::string>{"_", "A", "C", "B"}));
}

TEST(BuildLabelSet, SyntheticRolesMatchGenerator) {
  SynthSpec spec;
  spec.sentences = 150;
  spec.roles = 5;
  spec.arg_rate = 0.7;
  const auto corpus = generate_synthetic(spec, 3);
  const LabelSet set = build_label_set(extract_frames(corpus));
  // Roles A0..A4 plus nonrole.
  EXPECT_EQ(set.size(), 6u);
  for (const char* role : {"A0", "A1", "A2", "A3", "A4"})
    EXPECT_NE(set.index_of(role), -1) << role;
}

TEST(CorpusStats, CountsAddUp) {
  SynthSpec spec;
  spec.sentences = 40;
  const auto corpus = generate_synthetic(spec, 5);
  const CorpusStats st = corpus_stats(corpus);
  EXPECT_EQ(st.sentences, 40u);
  std::size_t tokens = 0, preds = 0;
  for (const Sentence& s : corpus) {
    tokens += s.tokens.size();
    preds += s.predicates.size();
  }
  EXPECT_EQ(st.tokens, tokens);
  EXPECT_EQ(st.predicates, preds);
}

}  // namespace
