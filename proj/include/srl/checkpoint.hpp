#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "srl/conll.hpp"
#include "srl/error.hpp"
#include "srl/model.hpp"
#include "srl/subword.hpp"
#include "srl/tensor.hpp"

namespace srl {

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

inline std::string fingerprint(const std::string& bytes) {
  return hex64(fnv1a64(bytes));
}

inline std::string vocab_fingerprint(const Vocabulary& vocab) {
  std::ostringstream ss;
  vocab.save(ss);
  return fingerprint(ss.str());
}

inline std::string labels_fingerprint(const LabelSet& labels) {
  std::string joined;
  for (const auto& l : labels.labels) joined += l + "\t";
  return fingerprint(joined);
}

inline std::string corpus_fingerprint(const std::vector<Sentence>& corpus) {
  return fingerprint(write_conll09(corpus));
}

// ---------------------------------------------------------------------------
// Container: text metadata header followed by named float32 records.
//
//   SRLCKPT 1
//   meta <count>
//   <key>\t<value>            (count lines; values are escape()d)
//   params <count>
//   <name> <rank> <dims...>   then rank-product * 4 bytes, little-endian
//   end
// ---------------------------------------------------------------------------

struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, nn::Tensor<float>>> params;

  const std::string& require(const std::string& key) const {
    auto it = meta.find(key);
    if (it == meta.end())
      throw DataError("checkpoint is missing metadata key: " + key);
    return it->second;
  }

  void write(std::ostream& out) const {
    out << "SRLCKPT 1\n";
    out << "meta " << meta.size() << "\n";
    for (const auto& [k, v] : meta)
      out << k << '\t' << Vocabulary::escape(v) << '\n';
    out << "params " << params.size() << "\n";
    for (const auto& [name, tensor] : params) {
      out << name << ' ' << tensor.rank();
      for (std::size_t d : tensor.shape()) out << ' ' << d;
      out << '\n';
      for (std::size_t i = 0; i < tensor.size(); ++i) {
        std::uint32_t bits;
        const float f = tensor[i];
        std::memcpy(&bits, &f, 4);
        const char bytes[4] = {static_cast<char>(bits & 0xFF),
                               static_cast<char>((bits >> 8) & 0xFF),
                               static_cast<char>((bits >> 16) & 0xFF),
                               static_cast<char>((bits >> 24) & 0xFF)};
        out.write(bytes, 4);
      }
      out << '\n';
    }
    out << "end\n";
  }

  void write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    write(out);
    if (!out) throw DataError("failed writing checkpoint: " + path);
  }

  static Checkpoint read(std::istream& in) {
    Checkpoint ckpt;
    std::string line;
    auto next_line = [&](const char* what) {
      if (!std::getline(in, line))
        throw DataError(std::string("truncated checkpoint: expected ") + what);
      return line;
    };
    if (next_line("magic") != "SRLCKPT 1")
      throw DataError("not a checkpoint file (bad magic)");
    std::istringstream hdr(next_line("meta header"));
    std::string word;
    std::size_t count = 0;
    hdr >> word >> count;
    if (word != "meta") throw DataError("checkpoint: expected meta header");
    for (std::size_t i = 0; i < count; ++i) {
      next_line("meta entry");
      const auto tab = line.find('\t');
      if (tab == std::string::npos)
        throw DataError("checkpoint: malformed meta line: " + line);
      ckpt.meta[line.substr(0, tab)] =
          Vocabulary::unescape(line.substr(tab + 1));
    }
    std::istringstream phdr(next_line("params header"));
    phdr >> word >> count;
    if (word != "params") throw DataError("checkpoint: expected params header");
    for (std::size_t i = 0; i < count; ++i) {
      std::istringstream rec(next_line("param record"));
      std::string name;
      std::size_t rank = 0;
      rec >> name >> rank;
      std::vector<std::size_t> shape(rank);
      for (std::size_t d = 0; d < rank; ++d) rec >> shape[d];
      if (!rec) throw DataError("checkpoint: malformed param record: " + line);
      nn::Tensor<float> tensor(shape);
      std::vector<char> raw(tensor.size() * 4);
      in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
      if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw DataError("checkpoint: truncated data for " + name);
      for (std::size_t k = 0; k < tensor.size(); ++k) {
        const auto b = [&](std::size_t j) {
          return static_cast<std::uint32_t>(
              static_cast<unsigned char>(raw[k * 4 + j]));
        };
        const std::uint32_t bits = b(0) | (b(1) << 8) | (b(2) << 16) |
                                   (b(3) << 24);
        float f;
        std::memcpy(&f, &bits, 4);
        tensor[k] = f;
      }
      char nl;
      in.read(&nl, 1);  // record separator
      ckpt.params.emplace_back(name, std::move(tensor));
    }
    if (next_line("end marker") != "end")
      throw DataError("checkpoint: missing end marker");
    return ckpt;
  }

  static Checkpoint read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read checkpoint: " + path);
    return read(in);
  }
};

// ---------------------------------------------------------------------------
// Model checkpoints
// ---------------------------------------------------------------------------

namespace detail {

inline void meta_from_config(const ModelConfig& c,
                             std::map<std::string, std::string>& meta) {
  meta["rho"] = to_string(c.rho);
  meta["embedding_size"] = std::to_string(c.embedding_size);
  meta["hidden_size"] = std::to_string(c.hidden_size);
  meta["layers"] = std::to_string(c.layers);
  meta["flag_size"] = std::to_string(c.flag_size);
  meta["column_mode"] = to_string(c.column_mode);
  meta["seed"] = std::to_string(c.seed);
}

inline ModelConfig config_from_meta(const Checkpoint& ckpt) {
  ModelConfig c;
  c.rho = rho_from_string(ckpt.require("rho"));
  c.embedding_size = std::stoul(ckpt.require("embedding_size"));
  c.hidden_size = std::stoul(ckpt.require("hidden_size"));
  c.layers = std::stoul(ckpt.require("layers"));
  c.flag_size = std::stoul(ckpt.require("flag_size"));
  c.column_mode = column_mode_from_string(ckpt.require("column_mode"));
  c.seed = std::stoull(ckpt.require("seed"));
  return c;
}

inline std::string join_labels(const LabelSet& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.labels.size(); ++i)
    out += (i ? "\t" : "") + labels.labels[i];
  return out;
}

inline LabelSet labels_from_meta(const Checkpoint& ckpt) {
  LabelSet set;
  set.labels = srl::detail::split(ckpt.require("labels"), '\t');
  set.nonrole_index = std::stoul(ckpt.require("nonrole_index"));
  if (set.labels.empty() || set.nonrole_index >= set.labels.size())
    throw DataError("checkpoint: invalid label set");
  return set;
}

template <typename T>
inline void collect_params(ModelParams<T>& p, Checkpoint& ckpt) {
  p.for_each([&](const std::string& name, nn::Tensor<T>& t) {
    ckpt.params.emplace_back(name, t.template cast<float>());
  });
}

}  // namespace detail

/// Serializes model parameters with enough metadata to rebuild and validate
/// them: model config, label set, vocabulary fingerprint, caller extras.
inline Checkpoint make_model_checkpoint(
    const ModelParams<float>& params, const LabelSet& labels,
    const std::string& vocab_fp,
    const std::map<std::string, std::string>& extra = {}) {
  Checkpoint ckpt;
  ckpt.meta["kind"] = "model";
  detail::meta_from_config(params.config, ckpt.meta);
  ckpt.meta["vocab_size"] = std::to_string(params.vocab_size);
  ckpt.meta["n_labels"] = std::to_string(params.n_labels);
  ckpt.meta["labels"] = detail::join_labels(labels);
  ckpt.meta["nonrole_index"] = std::to_string(labels.nonrole_index);
  ckpt.meta["vocab_fingerprint"] = vocab_fp;
  for (const auto& [k, v] : extra) ckpt.meta[k] = v;
  detail::collect_params(const_cast<ModelParams<float>&>(params), ckpt);
  return ckpt;
}

struct LoadedModel {
  ModelParams<float> params;
  LabelSet labels;
  std::map<std::string, std::string> meta;
};

/// Rebuilds a model from a checkpoint, validating every record's shape
/// against the stored config. Unknown or missing records are errors.
inline LoadedModel from_model_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.require("kind") != "model")
    throw DataError("checkpoint is not a model checkpoint");
  LoadedModel loaded;
  const ModelConfig config = detail::config_from_meta(ckpt);
  loaded.labels = detail::labels_from_meta(ckpt);
  const auto vocab_size = std::stoul(ckpt.require("vocab_size"));
  const auto n_labels = std::stoul(ckpt.require("n_labels"));
  if (n_labels != loaded.labels.size())
    throw DataError("checkpoint: label count does not match label set");
  loaded.params = ModelParams<float>::sized(config, vocab_size, n_labels);
  loaded.meta = ckpt.meta;

  std::map<std::string, const nn::Tensor<float>*> records;
  for (const auto& [name, tensor] : ckpt.params) {
    if (!records.emplace(name, &tensor).second)
      throw DataError("checkpoint: duplicate record " + name);
  }
  std::size_t used = 0;
  loaded.params.for_each([&](const std::string& name, nn::Tensor<float>& t) {
    auto it = records.find(name);
    if (it == records.end())
      throw DataError("checkpoint: missing record " + name);
    if (it->second->shape() != t.shape())
      throw DataError("checkpoint: record " + name + " has shape " +
                      it->second->shape_string() + ", expected " +
                      t.shape_string());
    t = *it->second;
    ++used;
  });
  if (used != records.size())
    throw DataError("checkpoint: contains unknown records");
  return loaded;
}

inline void save_model_file(const std::string& path,
                            const ModelParams<float>& params,
                            const LabelSet& labels, const std::string& vocab_fp,
                            const std::map<std::string, std::string>& extra = {}) {
  make_model_checkpoint(params, labels, vocab_fp, extra).write_file(path);
}

inline LoadedModel load_model_file(const std::string& path) {
  return from_model_checkpoint(Checkpoint::read_file(path));
}

}  // namespace srl
