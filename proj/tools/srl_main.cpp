// srl: subword semantic-role-labeling toolkit.
//
// Subcommands: synth, stats, mwe, train, eval, compare, ensemble, analyze.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "srl/srl.hpp"

namespace fs = std::filesystem;

namespace {

bool quiet_logging() {
  const char* v = std::getenv("SRL_LOG");
  return v != nullptr && std::string(v) == "quiet";
}

void log_line(const std::string& msg) {
  if (!quiet_logging()) std::cerr << msg << "\n";
}

std::string fmt(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::vector<srl::Sentence> read_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw srl::DataError("cannot read corpus file: " + path);
  return srl::parse_conll09(in);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw srl::DataError("cannot write file: " + path);
  out << content;
  if (!out) throw srl::DataError("failed writing file: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw srl::DataError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using KvList = std::vector<std::pair<std::string, std::string>>;

std::string kv_text(const KvList& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::map<std::string, std::string> read_kv(const std::string& path) {
  std::map<std::string, std::string> out;
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos)
      out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

double report_f1(const std::string& path) {
  const auto kv = read_kv(path);
  auto it = kv.find("f1");
  if (it == kv.end())
    throw srl::DataError("report file has no f1 entry: " + path);
  return std::stod(it->second);
}

// ---------------------------------------------------------------------------
// Shared option bundles
// ---------------------------------------------------------------------------

struct ModelFlags {
  std::string rho = "char";
  std::string column_mode = "gold";
  std::size_t embedding_size = 200;
  std::size_t hidden_size = 200;
  std::size_t layers = 1;
  std::size_t flag_size = 1;
  std::uint64_t seed = 1;

  srl::ModelConfig to_config() const {
    srl::ModelConfig c;
    c.rho = srl::rho_from_string(rho);
    c.column_mode = srl::column_mode_from_string(column_mode);
    c.embedding_size = embedding_size;
    c.hidden_size = hidden_size;
    c.layers = layers;
    c.flag_size = flag_size;
    c.seed = seed;
    c.validate();
    return c;
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--rho", rho, "Subword unit: word|char|char3|morph");
    cmd->add_option("--column-mode", column_mode,
                    "Morphology source: gold|predicted");
    cmd->add_option("--embedding-size", embedding_size, "Subword embedding size");
    cmd->add_option("--hidden-size", hidden_size, "bi-LSTM hidden size");
    cmd->add_option("--layers", layers, "Labeler bi-LSTM layers (1 or 2)");
    cmd->add_option("--flag-size", flag_size, "Predicate flag width");
    cmd->add_option("--seed", seed, "Random seed");
  }
};

struct TrainFlags {
  double lr = 1.0;
  std::size_t lr_patience = 3;
  std::size_t stop_patience = 10;
  std::size_t max_epochs = 50;
  double clip_norm = 5.0;
  std::size_t eval_every = 1;
  std::size_t min_freq = 1;

  srl::TrainConfig to_config(std::uint64_t seed) const {
    srl::TrainConfig c;
    c.initial_lr = lr;
    c.lr_halving_patience = lr_patience;
    c.early_stop_patience = stop_patience;
    c.max_epochs = max_epochs;
    c.clip_norm = clip_norm;
    c.eval_every = eval_every;
    c.seed = seed;
    c.validate();
    return c;
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--lr", lr, "Initial learning rate");
    cmd->add_option("--lr-patience", lr_patience,
                    "Epochs without dev improvement before halving the lr");
    cmd->add_option("--stop-patience", stop_patience,
                    "Epochs without dev improvement before stopping");
    cmd->add_option("--max-epochs", max_epochs, "Epoch budget");
    cmd->add_option("--clip-norm", clip_norm, "Global gradient-norm clip");
    cmd->add_option("--eval-every", eval_every, "Dev evaluation cadence");
    cmd->add_option("--min-freq", min_freq, "Vocabulary frequency cutoff");
  }
};

std::string train_fingerprint(const srl::ModelConfig& mc,
                              const srl::TrainConfig& tc,
                              const std::string& corpus_fp,
                              const std::string& labels_fp) {
  // rho and column_mode are the input representation and stay out: ensemble
  // members must differ in exactly that.
  std::string canon = corpus_fp + "|" + labels_fp + "|";
  canon += std::to_string(mc.embedding_size) + "|" +
           std::to_string(mc.hidden_size) + "|" + std::to_string(mc.layers) +
           "|" + std::to_string(mc.flag_size) + "|" + std::to_string(mc.seed) +
           "|";
  canon += fmt(tc.initial_lr, "%.17g") + "|" +
           std::to_string(tc.lr_halving_patience) + "|" +
           std::to_string(tc.early_stop_patience) + "|" +
           std::to_string(tc.max_epochs) + "|" + fmt(tc.clip_norm, "%.17g") +
           "|" + std::to_string(tc.seed) + "|" +
           std::to_string(tc.eval_every);
  return srl::fingerprint(canon);
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string spec_path;
  std::string out_dir;
  std::uint64_t seed = 1;
};

void run_synth(const SynthArgs& args) {
  const srl::SynthSpec spec = srl::load_synth_spec_file(args.spec_path);
  spec.validate();
  const srl::SynthCorpus corpus = srl::generate_synthetic_corpus(spec, args.seed);
  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  write_text((dir / "train.conll").string(),
             srl::write_conll09(corpus.train.sentences));
  write_text((dir / "dev.conll").string(),
             srl::write_conll09(corpus.dev.sentences));
  write_text((dir / "test.conll").string(),
             srl::write_conll09(corpus.test.sentences));
  KvList meta = {
      {"seed", std::to_string(args.seed)},
      {"spec", args.spec_path},
      {"train_sentences", std::to_string(corpus.train.sentences.size())},
      {"dev_sentences", std::to_string(corpus.dev.sentences.size())},
      {"test_sentences", std::to_string(corpus.test.sentences.size())},
      {"train_derived_sentences",
       std::to_string(corpus.train.derived_sentences)},
      {"test_novel_tokens", std::to_string(corpus.test.novel_tokens)},
      {"test_tokens", std::to_string(corpus.test.tokens)},
      {"ambiguous_forms", std::to_string(corpus.ambiguous_forms.size())},
  };
  write_text((dir / "synth.meta").string(), kv_text(meta));
  log_line("synth: wrote train/dev/test under " + args.out_dir);
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

struct StatsArgs {
  std::string data_path;
  std::string train_path;  // optional, for OOV%
  std::size_t min_count = 10;
  std::string out_path;    // optional; stdout otherwise
};

void run_stats(const StatsArgs& args) {
  const auto corpus = read_corpus(args.data_path);
  const srl::CorpusStats st = srl::corpus_stats(corpus, args.min_count);
  KvList kv = {
      {"sentences", std::to_string(st.sentences)},
      {"tokens", std::to_string(st.tokens)},
      {"predicates", std::to_string(st.predicates)},
      {"roles_above_" + std::to_string(args.min_count),
       std::to_string(st.roles_above_threshold)},
      {"distinct_roles", std::to_string(st.distinct_roles)},
  };
  if (!corpus.empty())
    kv.emplace_back("complexity_proxy",
                    fmt(srl::complexity_proxy(corpus), "%.2f"));
  if (!args.train_path.empty()) {
    const auto train = read_corpus(args.train_path);
    kv.emplace_back(
        "oov_rate",
        fmt(srl::oov_rate(srl::form_inventory(train), corpus), "%.2f"));
  }
  const std::string text = kv_text(kv);
  if (args.out_path.empty())
    std::cout << text;
  else
    write_text(args.out_path, text);
}

// ---------------------------------------------------------------------------
// mwe
// ---------------------------------------------------------------------------

struct MweArgs {
  std::string input;
  std::string output;
  std::string table_out;
  std::string table_in;
  std::string joiner = "_";
};

void run_mwe(const MweArgs& args) {
  auto corpus = read_corpus(args.input);
  srl::MweAbbreviator abbr(args.joiner);
  if (!args.table_in.empty()) {
    // Replay an existing table so train/test share abbreviations.
    std::istringstream in(read_text(args.table_in));
    std::string line;
    while (std::getline(in, line)) {
      const auto tab = line.find('\t');
      if (tab != std::string::npos) abbr.abbreviate(line.substr(tab + 1));
    }
  }
  abbr.apply(corpus);
  write_text(args.output, srl::write_conll09(corpus));
  if (!args.table_out.empty()) {
    std::string table;
    for (const auto& [short_form, original] : abbr.table())
      table += short_form + "\t" + original + "\n";
    write_text(args.table_out, table);
  }
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string train_path;
  std::string dev_path;
  std::string out_dir;
  ModelFlags model;
  TrainFlags trainer;
  std::string resume_path;
  bool save_state = false;
};

void run_train(const TrainArgs& args) {
  const srl::ModelConfig mc = args.model.to_config();
  const srl::TrainConfig tc = args.trainer.to_config(args.model.seed);
  const auto train_corpus = read_corpus(args.train_path);
  const auto dev_corpus = read_corpus(args.dev_path);
  if (train_corpus.empty()) throw srl::DataError("training corpus is empty");

  const auto train_frames = srl::extract_frames(train_corpus);
  const srl::LabelSet labels = srl::build_label_set(train_frames);
  const srl::Vocabulary vocab = srl::build_vocab(
      train_corpus, mc.rho, args.trainer.min_freq, mc.column_mode);
  const std::string vocab_fp = srl::vocab_fingerprint(vocab);
  const std::string corpus_fp = srl::corpus_fingerprint(train_corpus);
  const std::string labels_fp = srl::labels_fingerprint(labels);
  const std::string train_fp = train_fingerprint(mc, tc, corpus_fp, labels_fp);

  const srl::FrameEncoder encoder(vocab, labels, mc);
  const auto train_encoded = encoder.encode_all(train_corpus, train_frames);
  const auto dev_frames = srl::extract_frames(dev_corpus);
  const auto dev_encoded = encoder.encode_all(dev_corpus, dev_frames);

  srl::TrainState<float> state;
  if (args.resume_path.empty()) {
    state = srl::init_train_state<float>(mc, tc, vocab.size(), labels.size());
  } else {
    state = srl::load_train_state(srl::Checkpoint::read_file(args.resume_path));
    log_line("train: resumed from " + args.resume_path + " at epoch " +
             std::to_string(state.epoch));
  }
  srl::continue_training(state, tc, train_encoded, dev_encoded,
                         static_cast<int>(labels.nonrole_index));
  for (const srl::EpochRecord& r : state.log.records)
    log_line("epoch " + std::to_string(r.epoch) + " loss " +
             fmt(r.train_loss, "%.4f") + " dev_f1 " +
             (r.dev_f1 < 0 ? "-" : fmt(r.dev_f1, "%.2f")) + " lr " +
             fmt(r.lr, "%.4g"));

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  vocab.save((dir / "vocab.txt").string());

  const srl::ModelParams<float>& best =
      state.has_best ? state.best_params : state.params;
  std::map<std::string, std::string> extra = {
      {"train_fingerprint", train_fp},
      {"train_corpus_fingerprint", corpus_fp},
      {"best_epoch", std::to_string(state.best_epoch)},
      {"best_dev_f1", fmt(state.log.best_dev_f1, "%.4f")},
  };
  srl::save_model_file((dir / "model.ckpt").string(), best, labels, vocab_fp,
                       extra);
  write_text((dir / "train.tsv").string(), state.log.table());

  KvList meta = {
      {"train", args.train_path},
      {"dev", args.dev_path},
      {"rho", args.model.rho},
      {"column_mode", args.model.column_mode},
      {"embedding_size", std::to_string(mc.embedding_size)},
      {"hidden_size", std::to_string(mc.hidden_size)},
      {"layers", std::to_string(mc.layers)},
      {"flag_size", std::to_string(mc.flag_size)},
      {"seed", std::to_string(mc.seed)},
      {"initial_lr", fmt(tc.initial_lr, "%.8g")},
      {"lr_halving_patience", std::to_string(tc.lr_halving_patience)},
      {"early_stop_patience", std::to_string(tc.early_stop_patience)},
      {"max_epochs", std::to_string(tc.max_epochs)},
      {"clip_norm", fmt(tc.clip_norm, "%.8g")},
      {"eval_every", std::to_string(tc.eval_every)},
      {"min_freq", std::to_string(args.trainer.min_freq)},
      {"vocab_size", std::to_string(vocab.size())},
      {"labels", std::to_string(labels.size())},
      {"train_fingerprint", train_fp},
      {"vocab_fingerprint", vocab_fp},
  };
  std::string meta_text = kv_text(meta) + state.log.key_values();
  write_text((dir / "train.meta").string(), meta_text);
  if (args.save_state)
    srl::make_state_checkpoint(state, labels, vocab_fp)
        .write_file((dir / "state.ckpt").string());
  log_line("train: best dev F1 " + fmt(state.log.best_dev_f1, "%.2f") +
           " at epoch " + std::to_string(state.best_epoch));
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string vocab;
  std::string test_path;
  std::string out_path;
  std::string dump_dists;
  std::string column_mode;  // empty: use the checkpoint's
};

void run_eval(const EvalArgs& args) {
  srl::LoadedModel model = srl::load_model_file(args.checkpoint);
  std::string vocab_path = args.vocab;
  if (vocab_path.empty())
    vocab_path = (fs::path(args.checkpoint).parent_path() / "vocab.txt").string();
  const srl::Vocabulary vocab = srl::Vocabulary::load_file(vocab_path);
  const std::string vocab_fp = srl::vocab_fingerprint(vocab);
  const std::string expected_fp = model.meta.at("vocab_fingerprint");
  if (vocab_fp != expected_fp)
    throw srl::DataError("vocabulary fingerprint mismatch: checkpoint expects " +
                         expected_fp + ", " + vocab_path + " has " + vocab_fp);

  if (!args.column_mode.empty())
    model.params.config.column_mode =
        srl::column_mode_from_string(args.column_mode);

  const auto test_corpus = read_corpus(args.test_path);
  const auto test_frames = srl::extract_frames(test_corpus);
  const std::string test_fp = srl::corpus_fingerprint(test_corpus);
  const srl::FrameEncoder encoder(vocab, model.labels, model.params.config);
  const auto encoded = encoder.encode_all(test_corpus, test_frames);
  const srl::Predictions predictions =
      srl::predict_labels(model.params, encoded, model.labels);
  const srl::EvalReport report = srl::score(test_frames, predictions);

  KvList kv = {
      {"kind", "eval_report"},
      {"test", args.test_path},
      {"rho", model.meta.at("rho")},
      {"column_mode", srl::to_string(model.params.config.column_mode)},
      {"correct", std::to_string(report.correct)},
      {"predicted", std::to_string(report.predicted)},
      {"gold", std::to_string(report.gold)},
      {"precision", fmt(report.precision(), "%.4f")},
      {"recall", fmt(report.recall(), "%.4f")},
      {"f1", fmt(report.f1(), "%.4f")},
      {"test_fingerprint", test_fp},
  };
  if (auto it = model.meta.find("train_fingerprint"); it != model.meta.end())
    kv.emplace_back("train_fingerprint", it->second);
  write_text(args.out_path, kv_text(kv));
  std::cout << "P " << fmt(report.precision(), "%.2f") << " R "
            << fmt(report.recall(), "%.2f") << " F1 "
            << fmt(report.f1(), "%.2f") << "\n";

  if (!args.dump_dists.empty()) {
    srl::ModelDistributions dists =
        srl::compute_distributions(model.params, encoded, model.labels);
    dists.meta["rho"] = model.meta.at("rho");
    dists.meta["column_mode"] =
        srl::to_string(model.params.config.column_mode);
    dists.meta["test_fingerprint"] = test_fp;
    dists.meta["nonrole_index"] = std::to_string(model.labels.nonrole_index);
    if (auto it = model.meta.find("train_fingerprint"); it != model.meta.end())
      dists.meta["train_fingerprint"] = it->second;
    srl::save_distributions(args.dump_dists, dists);
  }
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string word_report;
  std::string char_report;
  std::string char3_report;
  std::string morph_report;
  std::vector<std::string> ensemble_reports;
  std::string out_path;
};

void run_compare(const CompareArgs& args) {
  std::string out = "model\tf1\tiow\tioc\tiob\n";
  const bool has_word = !args.word_report.empty();
  const double word = has_word ? report_f1(args.word_report) : 0.0;
  double best_char = 0.0;
  std::vector<double> members;

  auto row = [&](const std::string& name, double f1, bool is_char) {
    std::string line = name + "\t" + fmt(f1, "%.2f") + "\t";
    line += (has_word && name != "word") ? fmt(srl::iow(f1, word), "%.2f")
                                         : std::string("-");
    line += "\t-\t-\n";
    if (is_char) best_char = std::max(best_char, f1);
    members.push_back(f1);
    out += line;
  };
  if (has_word) row("word", word, false);
  if (!args.char_report.empty()) row("char", report_f1(args.char_report), true);
  if (!args.char3_report.empty())
    row("char3", report_f1(args.char3_report), true);
  if (!args.morph_report.empty()) {
    const double morph = report_f1(args.morph_report);
    std::string line = "morph\t" + fmt(morph, "%.2f") + "\t";
    line += has_word ? fmt(srl::iow(morph, word), "%.2f") : std::string("-");
    line += "\t";
    line += best_char > 0.0 ? fmt(srl::ioc(morph, best_char), "%.2f")
                            : std::string("-");
    line += "\t-\n";
    members.push_back(morph);
    out += line;
  }
  if (!args.ensemble_reports.empty()) {
    if (members.empty())
      throw srl::DataError("iob needs at least one base-model report");
    std::vector<double> ensembles;
    for (const std::string& path : args.ensemble_reports)
      ensembles.push_back(report_f1(path));
    const double iob_value = srl::iob(ensembles, members);
    for (std::size_t i = 0; i < ensembles.size(); ++i) {
      out += "ensemble" + std::to_string(i + 1) + "\t" +
             fmt(ensembles[i], "%.2f") + "\t-\t-\t" + fmt(iob_value, "%.2f") +
             "\n";
    }
  }
  if (args.out_path.empty())
    std::cout << out;
  else
    write_text(args.out_path, out);
}

// ---------------------------------------------------------------------------
// ensemble
// ---------------------------------------------------------------------------

struct EnsembleArgs {
  std::string mode = "avg";
  std::vector<std::string> dist_paths;
  std::string gold_path;
  std::string out_path;
  std::vector<std::string> train_dist_paths;
  std::string train_gold_path;
  std::uint64_t stacker_seed = 1;
  std::size_t stacker_epochs = 25;
  double stacker_lr = 0.02;
  std::size_t stacker_hidden = 64;
};

srl::LabelSet labelset_from_dump(const srl::ModelDistributions& d) {
  srl::LabelSet set;
  set.labels = d.labels;
  auto it = d.meta.find("nonrole_index");
  set.nonrole_index = it != d.meta.end() ? std::stoul(it->second) : 0;
  return set;
}

std::vector<std::vector<int>> gold_ids_for(
    const std::vector<srl::Frame>& frames, const srl::LabelSet& labels) {
  std::vector<std::vector<int>> out;
  out.reserve(frames.size());
  for (const srl::Frame& f : frames) {
    std::vector<int> row;
    row.reserve(f.gold_labels.size());
    for (const std::string& l : f.gold_labels) row.push_back(labels.index_of(l));
    out.push_back(std::move(row));
  }
  return out;
}

void run_ensemble(const EnsembleArgs& args) {
  if (args.dist_paths.size() < 2)
    throw srl::ConfigError("ensemble needs at least two --dists files");
  std::vector<srl::ModelDistributions> models;
  for (const std::string& p : args.dist_paths)
    models.push_back(srl::load_distributions(p));
  srl::check_ensemble_compatibility(models);

  const auto gold_corpus = read_corpus(args.gold_path);
  const auto gold_frames = srl::extract_frames(gold_corpus);
  if (gold_frames.size() != models[0].frames.size())
    throw srl::DataError("gold corpus has " +
                         std::to_string(gold_frames.size()) +
                         " frames but dumps have " +
                         std::to_string(models[0].frames.size()));
  const std::string gold_fp = srl::corpus_fingerprint(gold_corpus);
  if (auto it = models[0].meta.find("test_fingerprint");
      it != models[0].meta.end() && it->second != gold_fp)
    throw srl::DataError("gold corpus fingerprint " + gold_fp +
                         " does not match dump test fingerprint " + it->second);
  const srl::LabelSet labels = labelset_from_dump(models[0]);

  std::vector<std::vector<int>> decisions;
  if (args.mode == "avg") {
    decisions = srl::average_combine(models);
  } else if (args.mode == "sg") {
    if (args.train_dist_paths.size() != args.dist_paths.size() ||
        args.train_gold_path.empty())
      throw srl::ConfigError(
          "sg mode needs --train-dists for every member plus --train-gold "
          "(stacker training data)");
    std::vector<srl::ModelDistributions> train_models;
    for (const std::string& p : args.train_dist_paths)
      train_models.push_back(srl::load_distributions(p));
    srl::check_ensemble_compatibility(train_models);
    const auto sg_corpus = read_corpus(args.train_gold_path);
    const auto sg_frames = srl::extract_frames(sg_corpus);
    srl::StackerTrainConfig sc;
    sc.seed = args.stacker_seed;
    sc.epochs = args.stacker_epochs;
    sc.lr = args.stacker_lr;
    sc.hidden = args.stacker_hidden;
    const srl::StackerParams stacker =
        srl::train_stacker(train_models, gold_ids_for(sg_frames, labels), sc);
    decisions = srl::stacked_combine(stacker, models);
  } else {
    throw srl::ConfigError("unknown ensemble mode: " + args.mode + " (avg|sg)");
  }

  const srl::Predictions combined =
      srl::decisions_to_labels(decisions, labels.labels);
  const srl::EvalReport report = srl::score(gold_frames, combined);

  std::vector<double> member_f1;
  for (const srl::ModelDistributions& m : models) {
    std::vector<std::vector<int>> ids;
    ids.reserve(m.frames.size());
    for (std::size_t i = 0; i < m.frames.size(); ++i) {
      std::vector<int> row;
      for (std::size_t t = 0; t < m.frames[i].rows(); ++t) {
        std::size_t best = 0;
        for (std::size_t l = 1; l < m.frames[i].cols(); ++l)
          if (m.frames[i](t, l) > m.frames[i](t, best)) best = l;
        row.push_back(static_cast<int>(best));
      }
      ids.push_back(std::move(row));
    }
    member_f1.push_back(
        srl::score(gold_frames, srl::decisions_to_labels(ids, labels.labels))
            .f1());
  }
  const double iob_value = srl::iob({report.f1()}, member_f1);

  KvList kv = {
      {"kind", "ensemble_report"},
      {"mode", args.mode},
      {"members", std::to_string(models.size())},
      {"correct", std::to_string(report.correct)},
      {"predicted", std::to_string(report.predicted)},
      {"gold", std::to_string(report.gold)},
      {"precision", fmt(report.precision(), "%.4f")},
      {"recall", fmt(report.recall(), "%.4f")},
      {"f1", fmt(report.f1(), "%.4f")},
      {"iob", fmt(iob_value, "%.4f")},
  };
  for (std::size_t m = 0; m < member_f1.size(); ++m)
    kv.emplace_back("member" + std::to_string(m + 1) + "_f1",
                    fmt(member_f1[m], "%.4f"));
  write_text(args.out_path, kv_text(kv));
  std::cout << args.mode << " F1 " << fmt(report.f1(), "%.2f") << " IOB "
            << fmt(iob_value, "%.2f") << "\n";
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string name;
  std::string checkpoint;
  std::string vocab;
  std::string dists;
  std::string test_path;
  std::string train_path;
  std::string out_path;
  std::string format = "tsv";
  bool exclude_unseen = false;
};

const std::vector<std::string> kAnalysisNames = {
    "distance", "featcount", "ambiguity", "derivation", "complexity",
    "targeted"};

void run_analyze(const AnalyzeArgs& args) {
  bool known = false;
  for (const std::string& n : kAnalysisNames) known = known || n == args.name;
  if (!known) {
    std::string names;
    for (const std::string& n : kAnalysisNames)
      names += (names.empty() ? "" : ", ") + n;
    throw srl::ConfigError("unknown analysis: " + args.name +
                           " (valid: " + names + ")");
  }

  if (args.name == "complexity") {
    if (args.train_path.empty())
      throw srl::ConfigError("complexity needs --train");
    const double proxy = srl::complexity_proxy(read_corpus(args.train_path));
    write_text(args.out_path, "complexity_proxy\n" + fmt(proxy, "%.2f") + "\n");
    std::cout << "complexity_proxy " << fmt(proxy, "%.2f") << "\n";
    return;
  }

  const auto test_corpus = read_corpus(args.test_path);
  const auto test_frames = srl::extract_frames(test_corpus);
  srl::Predictions predictions;
  if (!args.dists.empty()) {
    const srl::ModelDistributions dump = srl::load_distributions(args.dists);
    if (dump.frames.size() != test_frames.size())
      throw srl::DataError("distribution dump does not cover the test set");
    std::vector<std::vector<int>> ids;
    for (std::size_t i = 0; i < dump.frames.size(); ++i) {
      std::vector<int> row;
      for (std::size_t t = 0; t < dump.frames[i].rows(); ++t) {
        std::size_t best = 0;
        for (std::size_t l = 1; l < dump.frames[i].cols(); ++l)
          if (dump.frames[i](t, l) > dump.frames[i](t, best)) best = l;
        row.push_back(static_cast<int>(best));
      }
      ids.push_back(std::move(row));
    }
    predictions = srl::decisions_to_labels(ids, dump.labels);
  } else if (!args.checkpoint.empty()) {
    srl::LoadedModel model = srl::load_model_file(args.checkpoint);
    std::string vocab_path = args.vocab;
    if (vocab_path.empty())
      vocab_path =
          (fs::path(args.checkpoint).parent_path() / "vocab.txt").string();
    const srl::Vocabulary vocab = srl::Vocabulary::load_file(vocab_path);
    if (srl::vocab_fingerprint(vocab) != model.meta.at("vocab_fingerprint"))
      throw srl::DataError("vocabulary fingerprint mismatch");
    const srl::FrameEncoder encoder(vocab, model.labels, model.params.config);
    predictions = srl::predict_labels(
        model.params, encoder.encode_all(test_corpus, test_frames),
        model.labels);
  } else {
    throw srl::ConfigError("analyze needs --checkpoint or --dists");
  }

  const srl::AnalysisInput input{&test_corpus, &test_frames, &predictions};
  srl::BucketReport report;
  if (args.name == "distance") {
    report = srl::distance_bins(input);
  } else if (args.name == "featcount") {
    report = srl::feature_count_bins(input);
  } else if (args.name == "derivation") {
    report = srl::derivation_buckets(input);
  } else if (args.name == "ambiguity") {
    if (args.train_path.empty())
      throw srl::ConfigError("ambiguity needs --train");
    report = srl::ambiguity_buckets(read_corpus(args.train_path), input,
                                    args.exclude_unseen);
  } else {  // targeted: the all-pass filter, equals the global eval report
    report.name = "targeted";
    srl::BucketRow row;
    row.key = "all";
    row.report = srl::targeted_f1(
        input, [](const srl::Sentence&, const srl::Frame&, std::size_t) {
          return true;
        });
    row.support = row.report.gold;
    report.rows.push_back(row);
  }
  const std::string table = srl::emit_plot_data(report, args.format);
  write_text(args.out_path, table);
  std::cout << table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subword semantic role labeling toolkit"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic CoNLL-09 corpus");
  synth_cmd->add_option("--spec", synth.spec_path, "SynthSpec key=value file")
      ->required();
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->set_config("--config");

  StatsArgs stats;
  CLI::App* stats_cmd =
      app.add_subcommand("stats", "Corpus statistics table");
  stats_cmd->add_option("--data", stats.data_path, "CoNLL-09 file")->required();
  stats_cmd->add_option("--train", stats.train_path,
                        "Training corpus for OOV%");
  stats_cmd->add_option("--min-count", stats.min_count,
                        "Role-count reporting threshold");
  stats_cmd->add_option("--out", stats.out_path, "Output file (default stdout)");

  MweArgs mwe;
  CLI::App* mwe_cmd = app.add_subcommand(
      "mwe", "Abbreviate multiword-expression tokens (CFdT style)");
  mwe_cmd->add_option("--input", mwe.input, "Input CoNLL-09 file")->required();
  mwe_cmd->add_option("--output", mwe.output, "Output CoNLL-09 file")
      ->required();
  mwe_cmd->add_option("--table", mwe.table_out, "Write abbreviation table");
  mwe_cmd->add_option("--load-table", mwe.table_in,
                      "Replay an existing abbreviation table first");
  mwe_cmd->add_option("--joiner", mwe.joiner, "MWE joiner (default _)");

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a labeler");
  train_cmd->add_option("--train", train.train_path, "Training corpus")
      ->required();
  train_cmd->add_option("--dev", train.dev_path, "Development corpus")
      ->required();
  train_cmd->add_option("--out", train.out_dir, "Output directory")->required();
  train.model.attach(train_cmd);
  train.trainer.attach(train_cmd);
  train_cmd->add_option("--resume", train.resume_path,
                        "Continue from a saved training state");
  train_cmd->add_flag("--save-state", train.save_state,
                      "Also write the full training state");
  train_cmd->set_config("--config");

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score a checkpoint");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Model checkpoint")
      ->required();
  eval_cmd->add_option("--vocab", eval.vocab,
                       "Vocabulary file (default: sibling vocab.txt)");
  eval_cmd->add_option("--test", eval.test_path, "Evaluation corpus")
      ->required();
  eval_cmd->add_option("--out", eval.out_path, "Report file")->required();
  eval_cmd->add_option("--dump-dists", eval.dump_dists,
                       "Also dump per-token log-probabilities");
  eval_cmd->add_option("--column-mode", eval.column_mode,
                       "Override the checkpoint's morphology source");
  eval_cmd->set_config("--config");

  CompareArgs compare;
  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "IOW/IOC/IOB table from named report files");
  compare_cmd->add_option("--word", compare.word_report, "word report");
  compare_cmd->add_option("--char", compare.char_report, "char report");
  compare_cmd->add_option("--char3", compare.char3_report, "char3 report");
  compare_cmd->add_option("--morph", compare.morph_report, "morph report");
  compare_cmd->add_option("--ensemble", compare.ensemble_reports,
                          "ensemble report (repeatable)");
  compare_cmd->add_option("--out", compare.out_path,
                          "Output file (default stdout)");

  EnsembleArgs ensemble;
  CLI::App* ensemble_cmd =
      app.add_subcommand("ensemble", "Combine base-model distributions");
  ensemble_cmd->add_option("--mode", ensemble.mode, "avg|sg");
  ensemble_cmd
      ->add_option("--dists", ensemble.dist_paths,
                   "Distribution dumps over the test set (repeatable)")
      ->required();
  ensemble_cmd->add_option("--gold", ensemble.gold_path, "Gold test corpus")
      ->required();
  ensemble_cmd->add_option("--out", ensemble.out_path, "Report file")
      ->required();
  ensemble_cmd->add_option("--train-dists", ensemble.train_dist_paths,
                           "Dumps the stacker trains on (sg mode)");
  ensemble_cmd->add_option("--train-gold", ensemble.train_gold_path,
                           "Gold corpus for the stacker split (sg mode)");
  ensemble_cmd->add_option("--stacker-seed", ensemble.stacker_seed,
                           "Stacker seed");
  ensemble_cmd->add_option("--stacker-epochs", ensemble.stacker_epochs,
                           "Stacker epochs");
  ensemble_cmd->add_option("--stacker-lr", ensemble.stacker_lr, "Stacker lr");
  ensemble_cmd->add_option("--stacker-hidden", ensemble.stacker_hidden,
                           "Stacker hidden units");
  ensemble_cmd->set_config("--config");

  AnalyzeArgs analyze;
  CLI::App* analyze_cmd =
      app.add_subcommand("analyze", "Targeted diagnostic analyses");
  analyze_cmd->add_option("--name", analyze.name, "Analysis name")->required();
  analyze_cmd->add_option("--checkpoint", analyze.checkpoint,
                          "Model checkpoint");
  analyze_cmd->add_option("--vocab", analyze.vocab, "Vocabulary file");
  analyze_cmd->add_option("--dists", analyze.dists,
                          "Distribution dump instead of a checkpoint");
  analyze_cmd->add_option("--test", analyze.test_path, "Evaluation corpus");
  analyze_cmd->add_option("--train", analyze.train_path,
                          "Training corpus (ambiguity, complexity)");
  analyze_cmd->add_option("--out", analyze.out_path, "Output table")
      ->required();
  analyze_cmd->add_option("--format", analyze.format, "tsv|csv");
  analyze_cmd->add_flag("--exclude-unseen", analyze.exclude_unseen,
                        "Report unseen eval forms separately");
  analyze_cmd->set_config("--config");

  try {
    app.parse(argc, argv);
    if (*synth_cmd) run_synth(synth);
    if (*stats_cmd) run_stats(stats);
    if (*mwe_cmd) run_mwe(mwe);
    if (*train_cmd) run_train(train);
    if (*eval_cmd) run_eval(eval);
    if (*compare_cmd) run_compare(compare);
    if (*ensemble_cmd) run_ensemble(ensemble);
    if (*analyze_cmd) run_analyze(analyze);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const srl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const srl::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const srl::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
