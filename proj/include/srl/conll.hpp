#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "srl/error.hpp"
#include "srl/utf8.hpp"

namespace srl {

// Which annotation columns feed the pipeline: the gold ones (LEMMA/FEAT)
// or the automatically predicted ones (PLEMMA/PFEAT).
enum class ColumnMode { gold, predicted };

inline const char* to_string(ColumnMode m) {
  return m == ColumnMode::gold ? "gold" : "predicted";
}

inline ColumnMode column_mode_from_string(const std::string& s) {
  if (s == "gold") return ColumnMode::gold;
  if (s == "predicted") return ColumnMode::predicted;
  throw ConfigError("unknown column mode: " + s);
}

// The label used for tokens that are not arguments of the current predicate.
inline const std::string kNonRole = "_";

/// One CoNLL-09 row. `feats`/`pfeats` hold the "|"-split FEAT values;
/// `apreds` holds one role string per predicate of the sentence, with "_"
/// meaning "not an argument of that predicate".
struct Token {
  int id = 0;  // 1-based position within the sentence
  std::string form;
  std::string lemma;
  std::string plemma;
  std::string pos;
  std::string ppos;
  std::vector<std::string> feats;
  std::vector<std::string> pfeats;
  int head = 0;
  int phead = 0;
  std::string deprel;
  std::string pdeprel;
  bool fillpred = false;
  std::string pred;  // empty when the token is not a predicate
  std::vector<std::string> apreds;

  const std::string& active_lemma(ColumnMode m) const {
    return m == ColumnMode::gold ? lemma : plemma;
  }
  const std::vector<std::string>& active_feats(ColumnMode m) const {
    return m == ColumnMode::gold ? feats : pfeats;
  }

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::vector<std::size_t> predicates;  // 0-based token indices, in order

  bool operator==(const Sentence&) const = default;
};

/// One (sentence, predicate) labeling instance. `gold_labels` is the
/// predicate's APRED column over all tokens, with "_" kept as the nonrole
/// symbol.
struct Frame {
  std::size_t sentence_index = 0;
  std::size_t predicate_index = 0;  // 0-based token index
  std::vector<std::string> gold_labels;
};

/// Ordered label inventory. Index 0 is always the nonrole symbol; roles
/// follow by descending training frequency, ties broken lexicographically.
struct LabelSet {
  std::vector<std::string> labels;
  std::size_t nonrole_index = 0;
  // Number of distinct roles occurring strictly more than `min_count`
  // times when the set was built. Reporting only; all roles stay labels.
  std::size_t reported_role_count = 0;

  std::size_t size() const { return labels.size(); }

  int index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return static_cast<int>(i);
    return -1;
  }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::vector<std::string> split_feats(const std::string& field) {
  if (field == "_" || field.empty()) return {};
  return split(field, '|');
}

inline std::string join_feats(const std::vector<std::string>& feats) {
  if (feats.empty()) return "_";
  std::string out = feats[0];
  for (std::size_t i = 1; i < feats.size(); ++i) out += "|" + feats[i];
  return out;
}

inline int parse_int(const std::string& s, std::size_t line,
                     const char* what) {
  if (s.empty()) throw ParseError(line, std::string("empty ") + what);
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    throw ParseError(line, std::string("non-integer ") + what + ": " + s);
  }
  if (pos != s.size())
    throw ParseError(line, std::string("non-integer ") + what + ": " + s);
  return v;
}

}  // namespace detail

/// Parses CoNLL-09 data: 14 tab-separated columns plus one APRED column per
/// predicate, blank-line-separated sentences. Throws ParseError (with the
/// offending line number) on malformed rows, non-contiguous ids, or an
/// APRED/predicate-count mismatch.
inline std::vector<Sentence> parse_conll09(std::istream& in) {
  std::vector<Sentence> sentences;
  std::vector<Token> tokens;
  std::size_t line_no = 0;
  std::size_t block_start_line = 0;
  std::size_t block_cols = 0;

  auto finish_sentence = [&]() {
    if (tokens.empty()) return;
    Sentence sent;
    sent.tokens = std::move(tokens);
    tokens.clear();
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
      const Token& t = sent.tokens[i];
      if (t.id != static_cast<int>(i) + 1)
        throw ParseError(block_start_line + i,
                         "non-contiguous token id " + std::to_string(t.id) +
                             " (expected " + std::to_string(i + 1) + ")");
      if (t.fillpred) sent.predicates.push_back(i);
    }
    const std::size_t apred_cols = block_cols - 14;
    if (sent.predicates.size() != apred_cols)
      throw ParseError(block_start_line,
                       "sentence has " + std::to_string(sent.predicates.size()) +
                           " predicates but " + std::to_string(apred_cols) +
                           " APRED columns");
    sentences.push_back(std::move(sent));
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish_sentence();
      continue;
    }
    const auto cols = detail::split(line, '\t');
    if (cols.size() < 14)
      throw ParseError(line_no, "expected >= 14 columns, got " +
                                    std::to_string(cols.size()));
    if (tokens.empty()) {
      block_start_line = line_no;
      block_cols = cols.size();
    } else if (cols.size() != block_cols) {
      throw ParseError(line_no, "row has " + std::to_string(cols.size()) +
                                    " columns but sentence started with " +
                                    std::to_string(block_cols));
    }
    Token t;
    t.id = detail::parse_int(cols[0], line_no, "id");
    t.form = cols[1];
    t.lemma = cols[2];
    t.plemma = cols[3];
    t.pos = cols[4];
    t.ppos = cols[5];
    t.feats = detail::split_feats(cols[6]);
    t.pfeats = detail::split_feats(cols[7]);
    t.head = detail::parse_int(cols[8], line_no, "head");
    t.phead = detail::parse_int(cols[9], line_no, "phead");
    t.deprel = cols[10];
    t.pdeprel = cols[11];
    if (cols[12] == "Y") {
      t.fillpred = true;
    } else if (cols[12] == "_") {
      t.fillpred = false;
    } else {
      throw ParseError(line_no, "FILLPRED must be Y or _, got " + cols[12]);
    }
    t.pred = cols[13] == "_" ? std::string() : cols[13];
    if (t.fillpred != !t.pred.empty())
      throw ParseError(line_no, "FILLPRED/PRED mismatch for token " +
                                    std::to_string(t.id));
    for (std::size_t c = 14; c < cols.size(); ++c) t.apreds.push_back(cols[c]);
    tokens.push_back(std::move(t));
  }
  finish_sentence();
  return sentences;
}

inline std::vector<Sentence> parse_conll09(const std::string& text) {
  std::istringstream in(text);
  return parse_conll09(in);
}

/// Writes sentences back to CoNLL-09. Output of this writer parses back to
/// an equal corpus; files it produced round-trip byte-identically.
inline void write_conll09(const std::vector<Sentence>& sentences,
                          std::ostream& out) {
  for (const Sentence& sent : sentences) {
    for (const Token& t : sent.tokens) {
      out << t.id << '\t' << t.form << '\t' << t.lemma << '\t' << t.plemma
          << '\t' << t.pos << '\t' << t.ppos << '\t'
          << detail::join_feats(t.feats) << '\t'
          << detail::join_feats(t.pfeats) << '\t' << t.head << '\t' << t.phead
          << '\t' << t.deprel << '\t' << t.pdeprel << '\t'
          << (t.fillpred ? "Y" : "_") << '\t'
          << (t.pred.empty() ? "_" : t.pred);
      for (const std::string& a : t.apreds) out << '\t' << a;
      out << '\n';
    }
    out << '\n';
  }
}

inline std::string write_conll09(const std::vector<Sentence>& sentences) {
  std::ostringstream out;
  write_conll09(sentences, out);
  return out.str();
}

/// One Frame per (sentence, predicate) pair, in corpus order.
inline std::vector<Frame> extract_frames(const std::vector<Sentence>& sentences) {
  std::vector<Frame> frames;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const Sentence& sent = sentences[s];
    for (std::size_t p = 0; p < sent.predicates.size(); ++p) {
      Frame f;
      f.sentence_index = s;
      f.predicate_index = sent.predicates[p];
      f.gold_labels.reserve(sent.tokens.size());
      for (const Token& t : sent.tokens) f.gold_labels.push_back(t.apreds[p]);
      frames.push_back(std::move(f));
    }
  }
  return frames;
}

/// Rewrites multiword-expression forms ("Confederación_Francesa_del_Trabajo")
/// as the concatenated initials of their parts ("CFdT"), keeping each part's
/// capitalization. Distinct forms that collide on the same abbreviation get
/// a numeric suffix. The table maps abbreviation -> original form.
class MweAbbreviator {
 public:
  explicit MweAbbreviator(std::string joiner = "_")
      : joiner_(std::move(joiner)) {}

  std::string abbreviate(const std::string& form) {
    if (auto it = by_form_.find(form); it != by_form_.end()) return it->second;
    const auto parts = detail::split(form, joiner_.empty() ? '_' : joiner_[0]);
    std::vector<std::string> nonempty;
    for (const auto& p : parts)
      if (!p.empty()) nonempty.push_back(p);
    if (nonempty.size() < 2) return form;
    std::string abbr;
    for (const auto& p : nonempty) {
      const auto cps = utf8::decode(p);
      utf8::append(abbr, cps.front());
    }
    std::string unique = abbr;
    for (int k = 2; table_.count(unique) != 0; ++k)
      unique = abbr + std::to_string(k);
    table_[unique] = form;
    by_form_[form] = unique;
    return unique;
  }

  void apply(Sentence& sentence) {
    for (Token& t : sentence.tokens) t.form = abbreviate(t.form);
  }

  void apply(std::vector<Sentence>& sentences) {
    for (Sentence& s : sentences) apply(s);
  }

  const std::map<std::string, std::string>& table() const { return table_; }

 private:
  std::string joiner_;
  std::map<std::string, std::string> table_;    // abbreviation -> original
  std::map<std::string, std::string> by_form_;  // original -> abbreviation
};

/// Abbreviates MWEs in one sentence; returns the abbreviation table.
inline std::map<std::string, std::string> abbreviate_mwe(
    Sentence& sentence, const std::string& joiner = "_") {
  MweAbbreviator abbr(joiner);
  abbr.apply(sentence);
  return abbr.table();
}

/// Builds the label inventory from gold frames. The nonrole symbol sits at
/// index 0; roles follow by frequency (desc), then lexicographically.
/// `min_count` only sets `reported_role_count` (roles seen more than
/// `min_count` times); rare roles are never dropped.
inline LabelSet build_label_set(const std::vector<Frame>& frames,
                                std::size_t min_count = 10) {
  if (frames.empty()) throw DataError("cannot build a label set from zero frames");
  std::map<std::string, std::size_t> counts;
  for (const Frame& f : frames)
    for (const std::string& l : f.gold_labels)
      if (l != kNonRole) ++counts[l];
  std::vector<std::pair<std::string, std::size_t>> ordered(counts.begin(),
                                                           counts.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  LabelSet set;
  set.labels.push_back(kNonRole);
  set.nonrole_index = 0;
  for (const auto& [label, count] : ordered) {
    set.labels.push_back(label);
    if (count > min_count) ++set.reported_role_count;
  }
  return set;
}

/// Corpus statistics in the shape of the usual dataset tables.
struct CorpusStats {
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  std::size_t predicates = 0;
  std::size_t roles_above_threshold = 0;
  std::size_t distinct_roles = 0;
};

inline CorpusStats corpus_stats(const std::vector<Sentence>& sentences,
                                std::size_t min_count = 10) {
  CorpusStats st;
  st.sentences = sentences.size();
  for (const Sentence& s : sentences) {
    st.tokens += s.tokens.size();
    st.predicates += s.predicates.size();
  }
  const auto frames = extract_frames(sentences);
  if (!frames.empty()) {
    const LabelSet set = build_label_set(frames, min_count);
    st.roles_above_threshold = set.reported_role_count;
    st.distinct_roles = set.size() - 1;
  }
  return st;
}

}  // namespace srl
