#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "srl/conll.hpp"
#include "srl/error.hpp"
#include "srl/rng.hpp"

namespace srl {

/// Synthetic-corpus parameters. The generated language is agglutinative in
/// miniature: noun stems take a role-specific suffix, the suffix determines
/// the argument's semantic role, and gold FEAT columns carry the matching
/// case tag. Arguments attach to their nearest predicate, so the full label
/// sequence is recoverable from the surface string plus the predicate flag.
struct SynthSpec {
  std::size_t stems = 40;         // training stem inventory size
  std::size_t novel_stems = 12;   // held-out stems used only for eval OOV
  std::size_t roles = 4;          // role inventory A0..A{roles-1}
  std::size_t sentences = 200;    // train split
  std::size_t dev_sentences = 50;
  std::size_t test_sentences = 50;
  std::size_t min_len = 5;
  std::size_t max_len = 12;
  std::size_t min_preds = 1;
  std::size_t max_preds = 2;
  double arg_rate = 0.6;        // P(non-predicate token is an argument)
  double ambiguity_rate = 0.0;  // fraction of stems given a homograph form
  double derivation_rate = 0.0; // P(sentence contains a DB-marked token)
  double novel_stem_rate = 0.0; // P(test token uses a held-out stem)
  double pfeat_noise = 0.0;     // P(PFEAT case tag differs from gold)

  void validate() const {
    auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (!rate_ok(arg_rate)) throw ConfigError("arg_rate must be in [0,1]");
    if (!rate_ok(ambiguity_rate))
      throw ConfigError("ambiguity_rate must be in [0,1]");
    if (!rate_ok(derivation_rate))
      throw ConfigError("derivation_rate must be in [0,1]");
    if (!rate_ok(novel_stem_rate))
      throw ConfigError("novel_stem_rate must be in [0,1]");
    if (!rate_ok(pfeat_noise)) throw ConfigError("pfeat_noise must be in [0,1]");
    if (roles == 0) throw ConfigError("roles must be >= 1");
    if (stems < roles) throw ConfigError("need at least one stem per role");
    if (min_len == 0 || min_len > max_len)
      throw ConfigError("sentence length range is empty");
    if (min_preds == 0 || min_preds > max_preds)
      throw ConfigError("predicate count range is empty");
    if (min_preds > min_len)
      throw ConfigError("min_preds exceeds the shortest sentence");
    if (ambiguity_rate > 0.0 && roles < 3)
      throw ConfigError("ambiguity planting needs at least 3 roles");
    if (novel_stem_rate > 0.0 && novel_stems == 0)
      throw ConfigError("novel_stem_rate > 0 requires novel_stems > 0");
  }
};

inline SynthSpec load_synth_spec(std::istream& in) {
  SynthSpec spec;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw ParseError(line_no, "expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "stems") spec.stems = std::stoul(value);
      else if (key == "novel_stems") spec.novel_stems = std::stoul(value);
      else if (key == "roles") spec.roles = std::stoul(value);
      else if (key == "sentences") spec.sentences = std::stoul(value);
      else if (key == "dev_sentences") spec.dev_sentences = std::stoul(value);
      else if (key == "test_sentences") spec.test_sentences = std::stoul(value);
      else if (key == "min_len") spec.min_len = std::stoul(value);
      else if (key == "max_len") spec.max_len = std::stoul(value);
      else if (key == "min_preds") spec.min_preds = std::stoul(value);
      else if (key == "max_preds") spec.max_preds = std::stoul(value);
      else if (key == "arg_rate") spec.arg_rate = std::stod(value);
      else if (key == "ambiguity_rate") spec.ambiguity_rate = std::stod(value);
      else if (key == "derivation_rate") spec.derivation_rate = std::stod(value);
      else if (key == "novel_stem_rate") spec.novel_stem_rate = std::stod(value);
      else if (key == "pfeat_noise") spec.pfeat_noise = std::stod(value);
      else throw ParseError(line_no, "unknown key: " + key);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError(line_no, "bad value for " + key + ": " + value);
    }
  }
  return spec;
}

inline SynthSpec load_synth_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read synth spec: " + path);
  return load_synth_spec(in);
}

struct SynthSplit {
  std::vector<Sentence> sentences;
  std::size_t tokens = 0;
  std::size_t derived_sentences = 0;  // sentences containing a DB token
  std::size_t novel_tokens = 0;       // tokens drawn from the held-out pool
};

struct SynthCorpus {
  SynthSplit train;
  SynthSplit dev;
  SynthSplit test;
  std::set<std::string> planted_ambiguous_stems;
  // Forms the train split actually emitted with >= 2 distinct feature sets.
  std::set<std::string> ambiguous_forms;
};

namespace detail {

class SynthGenerator {
 public:
  SynthGenerator(const SynthSpec& spec, std::uint64_t seed)
      : spec_(spec), inv_rng_(mix_seed(seed, 0)) {
    spec_.validate();
    build_inventory();
    seed_ = seed;
  }

  SynthCorpus generate() {
    SynthCorpus corpus;
    corpus.planted_ambiguous_stems = ambiguous_stems_;
    Rng train_rng(mix_seed(seed_, 1));
    corpus.train = make_split(train_rng, spec_.sentences, 0.0, false);
    record_train_observations(corpus.train);
    Rng dev_rng(mix_seed(seed_, 2));
    corpus.dev = make_split(dev_rng, spec_.dev_sentences, 0.0, true);
    Rng test_rng(mix_seed(seed_, 3));
    corpus.test =
        make_split(test_rng, spec_.test_sentences, spec_.novel_stem_rate, true);
    for (const auto& [form, sets] : train_featsets_)
      if (sets.size() >= 2) corpus.ambiguous_forms.insert(form);
    return corpus;
  }

 private:
  static constexpr const char* kVerbSuffix = "di";
  static constexpr const char* kDerivSuffix = "lik";
  static constexpr const char* kHomographSuffix = "in";

  void build_inventory() {
    static const char* kCases[] = {"Loc", "Dat", "Abl", "Gen", "Ins",
                                   "Acc", "Ben", "Com", "Ess", "Par"};
    static const char* kSuffixes[] = {"da", "ye", "den", "nin", "le",
                                      "si", "ce", "ta", "mu", "ki"};
    for (std::size_t k = 0; k < spec_.roles; ++k) {
      role_names_.push_back("A" + std::to_string(k));
      role_cases_.push_back(k < 10 ? kCases[k] : "Case" + std::to_string(k));
      role_suffixes_.push_back(k < 10 ? kSuffixes[k]
                                      : "z" + std::to_string(k) + "u");
    }
    if (spec_.ambiguity_rate > 0.0) {
      // The last two roles share one surface suffix; which of the two
      // applies is determined by the argument's side of the predicate.
      homograph_before_ = spec_.roles - 2;
      homograph_after_ = spec_.roles - 1;
      role_suffixes_[homograph_before_] = kHomographSuffix;
      role_suffixes_[homograph_after_] = kHomographSuffix;
    }
    all_suffixes_ = role_suffixes_;
    all_suffixes_.push_back("");
    all_suffixes_.push_back(kVerbSuffix);
    all_suffixes_.push_back(kDerivSuffix);

    std::set<std::string> forms;
    auto add_stems = [&](std::vector<std::string>& out, std::size_t n) {
      while (out.size() < n) {
        const std::string stem = random_stem();
        std::vector<std::string> candidate;
        bool clash = false;
        for (const auto& suf : all_suffixes_) {
          const std::string f = stem + suf;
          if (forms.count(f)) {
            clash = true;
            break;
          }
          candidate.push_back(f);
        }
        if (clash) continue;
        forms.insert(candidate.begin(), candidate.end());
        out.push_back(stem);
      }
    };
    add_stems(train_stems_, spec_.stems);
    add_stems(novel_stems_, spec_.novel_stems);

    const auto n_ambiguous = static_cast<std::size_t>(
        std::llround(spec_.ambiguity_rate * static_cast<double>(spec_.stems)));
    for (std::size_t i = 0; i < n_ambiguous; ++i)
      ambiguous_stems_.insert(train_stems_[i]);
  }

  std::string random_stem() {
    static const char* kConsonants[] = {"b", "d", "g", "k", "l", "m", "n",
                                        "p", "r", "s", "t", "v", "y", "z"};
    static const char* kVowels[] = {"a", "e", "i", "o", "u", "ö",
                                    "ü"};
    const std::size_t syllables = 2 + inv_rng_.index(2);
    std::string stem;
    for (std::size_t i = 0; i < syllables; ++i) {
      stem += kConsonants[inv_rng_.index(14)];
      stem += kVowels[inv_rng_.index(7)];
    }
    return stem;
  }

  void record_train_observations(const SynthSplit& train) {
    for (const Sentence& s : train.sentences) {
      for (const Token& t : s.tokens) {
        std::string key;
        for (const auto& f : t.feats) key += f + "|";
        train_featsets_[t.form].insert(key);
        train_forms_.insert(t.form);
      }
    }
  }

  // Token categories within a sentence under construction.
  struct Slot {
    enum Kind { filler, predicate, argument, derived } kind = filler;
    std::size_t serving = 0;  // predicate index (into pred_positions)
    std::size_t role = 0;
  };

  SynthSplit make_split(Rng& rng, std::size_t n_sentences, double novel_rate,
                        bool restrict_to_seen) {
    SynthSplit split;
    for (std::size_t si = 0; si < n_sentences; ++si) {
      Sentence sent;
      bool derived = false;
      std::size_t novel = 0;
      for (int attempt = 0; attempt < 100; ++attempt) {
        derived = false;
        novel = 0;
        sent = make_sentence(rng, novel_rate, restrict_to_seen, derived, novel);
        const std::string sig = signature(sent);
        if (seen_sentences_.insert(sig).second) break;
      }
      split.tokens += sent.tokens.size();
      split.novel_tokens += novel;
      if (derived) ++split.derived_sentences;
      split.sentences.push_back(std::move(sent));
    }
    return split;
  }

  static std::string signature(const Sentence& s) {
    std::string sig;
    for (const Token& t : s.tokens) sig += t.form + " ";
    return sig;
  }

  Sentence make_sentence(Rng& rng, double novel_rate, bool restrict_to_seen,
                         bool& derived_out, std::size_t& novel_out) {
    const auto length = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(spec_.min_len),
                        static_cast<std::int64_t>(spec_.max_len)));
    auto n_preds = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(spec_.min_preds),
                        static_cast<std::int64_t>(spec_.max_preds)));
    if (n_preds > length) n_preds = length;

    std::vector<std::size_t> positions(length);
    for (std::size_t i = 0; i < length; ++i) positions[i] = i;
    rng.shuffle(positions);
    std::vector<std::size_t> pred_positions(positions.begin(),
                                            positions.begin() + n_preds);
    std::sort(pred_positions.begin(), pred_positions.end());
    std::set<std::size_t> pred_set(pred_positions.begin(),
                                   pred_positions.end());

    std::vector<Slot> slots(length);
    for (std::size_t p = 0; p < pred_positions.size(); ++p) {
      slots[pred_positions[p]].kind = Slot::predicate;
      slots[pred_positions[p]].serving = p;
    }

    // Derivation is decided per sentence; one non-predicate slot carries it.
    std::vector<std::size_t> free_slots;
    for (std::size_t i = 0; i < length; ++i)
      if (!pred_set.count(i)) free_slots.push_back(i);
    if (!free_slots.empty() && rng.bernoulli(spec_.derivation_rate)) {
      slots[free_slots[rng.index(free_slots.size())]].kind = Slot::derived;
      derived_out = true;
    }

    for (std::size_t i : free_slots) {
      if (slots[i].kind == Slot::derived) continue;
      if (!rng.bernoulli(spec_.arg_rate)) continue;
      slots[i].kind = Slot::argument;
      slots[i].serving = attached_predicate(i, pred_positions);
      slots[i].role = sample_role(rng, i, pred_positions[slots[i].serving]);
    }

    Sentence sent;
    sent.tokens.resize(length);
    for (std::size_t i = 0; i < length; ++i) {
      Token& t = sent.tokens[i];
      t.id = static_cast<int>(i) + 1;
      const Slot& slot = slots[i];
      const bool can_be_novel = novel_rate > 0.0 &&
                                slot.kind != Slot::predicate &&
                                rng.bernoulli(novel_rate);
      switch (slot.kind) {
        case Slot::predicate: {
          const std::string stem =
              pick_stem(rng, kVerbSuffix, restrict_to_seen, false);
          t.form = stem + kVerbSuffix;
          t.lemma = stem;
          t.pos = "V";
          t.feats = {"Verb", "Past"};
          t.fillpred = true;
          t.pred = stem + ".01";
          t.head = 0;
          t.deprel = "ROOT";
          break;
        }
        case Slot::argument: {
          const std::string& suffix = role_suffixes_[slot.role];
          const bool homograph = spec_.ambiguity_rate > 0.0 &&
                                 (slot.role == homograph_before_ ||
                                  slot.role == homograph_after_);
          const std::string stem =
              pick_stem(rng, suffix, restrict_to_seen && !can_be_novel,
                        can_be_novel, homograph);
          t.form = stem + suffix;
          t.lemma = stem;
          t.pos = "N";
          t.feats = {"Noun", role_cases_[slot.role]};
          t.head = static_cast<int>(pred_positions[slot.serving]) + 1;
          t.deprel = "ARG";
          break;
        }
        case Slot::derived: {
          const std::string stem =
              pick_stem(rng, kDerivSuffix, restrict_to_seen && !can_be_novel,
                        can_be_novel);
          t.form = stem + kDerivSuffix;
          t.lemma = stem;
          t.pos = "N";
          t.feats = {"Noun", "Nom", "DB", "Adj"};
          t.head = static_cast<int>(pred_positions[0]) + 1;
          t.deprel = "MOD";
          break;
        }
        case Slot::filler: {
          const std::string stem =
              pick_stem(rng, "", restrict_to_seen && !can_be_novel,
                        can_be_novel);
          t.form = stem;
          t.lemma = stem;
          t.pos = "N";
          t.feats = {"Noun", "Nom"};
          t.head = static_cast<int>(pred_positions[0]) + 1;
          t.deprel = "MOD";
          break;
        }
      }
      if (can_be_novel) ++novel_out;
      t.plemma = t.lemma;
      t.ppos = t.pos;
      t.pfeats = t.feats;
      if (spec_.pfeat_noise > 0.0 && t.pos == "N" &&
          rng.bernoulli(spec_.pfeat_noise) && t.pfeats.size() >= 2) {
        t.pfeats[1] = "Err";
      }
      t.phead = t.head;
      t.pdeprel = t.deprel;
      t.apreds.assign(n_preds, kNonRole);
      if (slot.kind == Slot::argument)
        t.apreds[slot.serving] = role_names_[slot.role];
    }
    sent.predicates = pred_positions;
    return sent;
  }

  // Verb-final attachment: an argument serves the next predicate to its
  // right, or the last predicate when none follows.
  static std::size_t attached_predicate(
      std::size_t pos, const std::vector<std::size_t>& pred_positions) {
    for (std::size_t p = 0; p < pred_positions.size(); ++p)
      if (pred_positions[p] > pos) return p;
    return pred_positions.size() - 1;
  }

  // Homograph roles are position-determined: the "before" role only occurs
  // left of its predicate and the "after" role only right of it, so the
  // sequence stays fully learnable from context.
  std::size_t sample_role(Rng& rng, std::size_t pos, std::size_t pred_pos) {
    std::vector<std::size_t> pool;
    for (std::size_t k = 0; k < spec_.roles; ++k) {
      if (spec_.ambiguity_rate > 0.0) {
        if (k == homograph_before_ && pos > pred_pos) continue;
        if (k == homograph_after_ && pos < pred_pos) continue;
      }
      pool.push_back(k);
    }
    return pool[rng.index(pool.size())];
  }

  std::string pick_stem(Rng& rng, const std::string& suffix,
                        bool restrict_to_seen, bool novel,
                        bool homograph = false) {
    if (novel) return novel_stems_[rng.index(novel_stems_.size())];
    const std::vector<std::string>& pool =
        homograph ? ambiguous_pool() : train_stems_;
    for (int attempt = 0; attempt < 200; ++attempt) {
      const std::string& stem = pool[rng.index(pool.size())];
      if (!restrict_to_seen || train_forms_.count(stem + suffix)) return stem;
    }
    return pool[rng.index(pool.size())];
  }

  const std::vector<std::string>& ambiguous_pool() {
    if (ambiguous_pool_.empty())
      ambiguous_pool_.assign(ambiguous_stems_.begin(), ambiguous_stems_.end());
    return ambiguous_pool_;
  }

  SynthSpec spec_;
  std::uint64_t seed_ = 0;
  Rng inv_rng_;
  std::vector<std::string> role_names_;
  std::vector<std::string> role_cases_;
  std::vector<std::string> role_suffixes_;
  std::vector<std::string> all_suffixes_;
  std::vector<std::string> train_stems_;
  std::vector<std::string> novel_stems_;
  std::set<std::string> ambiguous_stems_;
  std::vector<std::string> ambiguous_pool_;
  std::set<std::string> train_forms_;
  std::map<std::string, std::set<std::string>> train_featsets_;
  std::set<std::string> seen_sentences_;
  std::size_t homograph_before_ = 0;
  std::size_t homograph_after_ = 0;
};

}  // namespace detail

/// Generates the full train/dev/test triple, deterministically per seed.
inline SynthCorpus generate_synthetic_corpus(const SynthSpec& spec,
                                             std::uint64_t seed) {
  detail::SynthGenerator gen(spec, seed);
  return gen.generate();
}

/// The training split alone (the other splits exist but are discarded).
inline std::vector<Sentence> generate_synthetic(const SynthSpec& spec,
                                                std::uint64_t seed) {
  return generate_synthetic_corpus(spec, seed).train.sentences;
}

}  // namespace srl
