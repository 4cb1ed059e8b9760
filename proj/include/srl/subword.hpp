#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "srl/conll.hpp"
#include "srl/error.hpp"
#include "srl/utf8.hpp"

namespace srl {

// Subword segmentation choices: whole words (lower bound), characters,
// character trigrams, or lemma + morphological tags (upper bound).
enum class RhoKind { word, chars, char3, morph };

inline const char* to_string(RhoKind k) {
  switch (k) {
    case RhoKind::word: return "word";
    case RhoKind::chars: return "char";
    case RhoKind::char3: return "char3";
    case RhoKind::morph: return "morph";
  }
  return "?";
}

inline RhoKind rho_from_string(const std::string& s) {
  if (s == "word") return RhoKind::word;
  if (s == "char") return RhoKind::chars;
  if (s == "char3") return RhoKind::char3;
  if (s == "morph") return RhoKind::morph;
  throw ConfigError("unknown subword unit: " + s + " (word|char|char3|morph)");
}

/// Lowercases the token and wraps it in the boundary symbols "<" and ">".
inline std::string normalize(const std::string& token) {
  if (token.empty()) throw DataError("cannot normalize an empty token");
  return "<" + utf8::to_lower(token) + ">";
}

/// One unit per Unicode scalar value of the normalized token, boundary
/// symbols included:  available -> < a v a i l a b l e >
inline std::vector<std::string> rho_char(const std::string& token) {
  const auto cps = utf8::decode(normalize(token));
  std::vector<std::string> units;
  units.reserve(cps.size());
  for (char32_t cp : cps) {
    std::string u;
    utf8::append(u, cp);
    units.push_back(std::move(u));
  }
  return units;
}

/// Sliding window of width 3 over the normalized token:
/// available -> <av ava vai ail ila lab abl ble le>
/// A normalized form shorter than the window is emitted whole.
inline std::vector<std::string> rho_char3(const std::string& token) {
  const auto cps = utf8::decode(normalize(token));
  std::vector<std::string> units;
  if (cps.size() < 3) {
    units.push_back(utf8::encode(cps));
    return units;
  }
  units.reserve(cps.size() - 2);
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    std::string u;
    utf8::append(u, cps[i]);
    utf8::append(u, cps[i + 1]);
    utf8::append(u, cps[i + 2]);
    units.push_back(std::move(u));
  }
  return units;
}

/// Lemma followed by the morphological tags, one unit each:
/// boyundaki -> boy Noun A3sg P3sg Loc DB Adj
/// The lemma is lowercased; tags are kept verbatim (key=value stays whole).
inline std::vector<std::string> rho_morph(const Token& token,
                                          ColumnMode mode = ColumnMode::gold) {
  std::vector<std::string> units;
  const auto& feats = token.active_feats(mode);
  units.reserve(1 + feats.size());
  units.push_back(utf8::to_lower(token.active_lemma(mode)));
  for (const std::string& f : feats) units.push_back(f);
  return units;
}

/// Single whole-word unit: the lowercased surface form.
inline std::vector<std::string> rho_word(const std::string& token) {
  return {utf8::to_lower(token)};
}

inline std::vector<std::string> apply_rho(RhoKind kind, const Token& token,
                                          ColumnMode mode = ColumnMode::gold) {
  switch (kind) {
    case RhoKind::word: return rho_word(token.form);
    case RhoKind::chars: return rho_char(token.form);
    case RhoKind::char3: return rho_char3(token.form);
    case RhoKind::morph: return rho_morph(token, mode);
  }
  throw ConfigError("bad rho kind");
}

/// Unit inventory with a reserved unknown id at index 0. Ids are assigned by
/// frequency (desc) with lexicographic tiebreak, so builds are deterministic.
class Vocabulary {
 public:
  static constexpr std::size_t kUnkId = 0;

  Vocabulary() { id_to_unit_.push_back("<UNK>"); }

  std::size_t add(const std::string& unit) {
    auto it = unit_to_id_.find(unit);
    if (it != unit_to_id_.end()) return it->second;
    const std::size_t id = id_to_unit_.size();
    id_to_unit_.push_back(unit);
    unit_to_id_.emplace(unit, id);
    return id;
  }

  std::size_t encode(const std::string& unit) const {
    auto it = unit_to_id_.find(unit);
    return it == unit_to_id_.end() ? kUnkId : it->second;
  }

  std::vector<std::size_t> encode(const std::vector<std::string>& units) const {
    std::vector<std::size_t> ids;
    ids.reserve(units.size());
    for (const auto& u : units) ids.push_back(encode(u));
    return ids;
  }

  const std::string& decode(std::size_t id) const {
    if (id >= id_to_unit_.size())
      throw DataError("vocabulary id out of range: " + std::to_string(id));
    return id_to_unit_[id];
  }

  bool contains(const std::string& unit) const {
    return unit_to_id_.count(unit) != 0;
  }

  std::size_t size() const { return id_to_unit_.size(); }
  std::size_t unk_id() const { return kUnkId; }

  // One unit per line, line number == id; the unknown sentinel is line 0.
  // Backslash, tab, CR and LF are escaped so any unit stays one line.
  void save(std::ostream& out) const {
    for (const std::string& u : id_to_unit_) out << escape(u) << '\n';
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write vocabulary file: " + path);
    save(out);
  }

  static Vocabulary load(std::istream& in) {
    Vocabulary v;
    v.id_to_unit_.clear();
    std::string line;
    while (std::getline(in, line)) v.id_to_unit_.push_back(unescape(line));
    if (v.id_to_unit_.empty())
      throw DataError("vocabulary file is empty");
    for (std::size_t i = 1; i < v.id_to_unit_.size(); ++i)
      v.unit_to_id_.emplace(v.id_to_unit_[i], i);
    return v;
  }

  static Vocabulary load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read vocabulary file: " + path);
    return load(in);
  }

  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '\\': out += "\\\\"; break;
        case '\t': out += "\\t"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        default: out += c;
      }
    }
    return out;
  }

  static std::string unescape(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] != '\\' || i + 1 == s.size()) {
        out += s[i];
        continue;
      }
      switch (s[++i]) {
        case 't': out += '\t'; break;
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        default: out += s[i];
      }
    }
    return out;
  }

 private:
  std::unordered_map<std::string, std::size_t> unit_to_id_;
  std::vector<std::string> id_to_unit_;
};

/// Builds a vocabulary over the units produced by `kind` on the training
/// corpus. Units seen fewer than `min_freq` times are left out and encode
/// to the unknown id.
inline Vocabulary build_vocab(const std::vector<Sentence>& corpus,
                              RhoKind kind, std::size_t min_freq = 1,
                              ColumnMode mode = ColumnMode::gold) {
  if (corpus.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const Sentence& s : corpus)
    for (const Token& t : s.tokens)
      for (const std::string& u : apply_rho(kind, t, mode)) ++counts[u];
  std::vector<std::pair<std::string, std::size_t>> ordered;
  ordered.reserve(counts.size());
  for (const auto& kv : counts)
    if (kv.second >= min_freq) ordered.push_back(kv);
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (const auto& [unit, count] : ordered) v.add(unit);
  return v;
}

/// Whole-word out-of-vocabulary percentage of `eval` against the training
/// form inventory. Forms are compared lowercased.
inline double oov_rate(const std::set<std::string>& train_forms,
                       const std::vector<Sentence>& eval) {
  std::size_t total = 0;
  std::size_t unseen = 0;
  for (const Sentence& s : eval) {
    for (const Token& t : s.tokens) {
      ++total;
      if (train_forms.count(utf8::to_lower(t.form)) == 0) ++unseen;
    }
  }
  if (total == 0) throw DataError("oov_rate over an empty evaluation set");
  return 100.0 * static_cast<double>(unseen) / static_cast<double>(total);
}

inline std::set<std::string> form_inventory(const std::vector<Sentence>& corpus) {
  std::set<std::string> forms;
  for (const Sentence& s : corpus)
    for (const Token& t : s.tokens) forms.insert(utf8::to_lower(t.form));
  return forms;
}

}  // namespace srl
