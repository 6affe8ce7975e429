#include "rmdl/cli.hpp"

#include <CLI11.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rmdl/error.hpp"
#include "rmdl/metrics.hpp"

namespace rmdl::cli {

namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// A '#' or ';' at the start of a line or after whitespace begins a comment.
std::string_view strip_comment(std::string_view line) {
  for (std::size_t i = 0; i < line.size(); ++i) {
    if ((line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

struct Entry {
  std::string value;
  std::size_t line;
};

class ConfigReader {
 public:
  explicit ConfigReader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& raw(const std::string& key) const { return entries_.at(key).value; }

  template <typename T>
  T number(const std::string& key, T fallback) const {
    if (!has(key)) return fallback;
    return parse<T>(key, raw(key));
  }

  // "min max" or a single value for a degenerate range.
  std::pair<std::size_t, std::size_t> range(const std::string& key, std::size_t lo, std::size_t hi) const {
    if (!has(key)) return {lo, hi};
    const auto w = words(raw(key));
    if (w.empty() || w.size() > 2) fail(key, "expected 'min max'");
    const auto a = parse<std::size_t>(key, w[0]);
    const auto b = w.size() == 2 ? parse<std::size_t>(key, w[1]) : a;
    if (a > b) fail(key, "min exceeds max");
    return {a, b};
  }

  std::pair<double, double> real_range(const std::string& key, double lo, double hi) const {
    if (!has(key)) return {lo, hi};
    const auto w = words(raw(key));
    if (w.empty() || w.size() > 2) fail(key, "expected 'min max'");
    const auto a = parse<double>(key, w[0]);
    const auto b = w.size() == 2 ? parse<double>(key, w[1]) : a;
    if (a > b) fail(key, "min exceeds max");
    return {a, b};
  }

  template <typename T, typename Fn>
  std::vector<T> list(const std::string& key, std::vector<T> fallback, Fn&& convert) const {
    if (!has(key)) return fallback;
    std::vector<T> out;
    for (const auto& w : words(raw(key))) {
      try {
        out.push_back(convert(w));
      } catch (const Error& e) {
        fail(key, e.what());
      }
    }
    if (out.empty()) fail(key, "empty list");
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    std::string where = has(key) ? " (line " + std::to_string(entries_.at(key).line) + ")" : "";
    throw ConfigError("config key '" + key + "'" + where + ": " + why, key);
  }

 private:
  template <typename T>
  T parse(const std::string& key, const std::string& text) const {
    T v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) fail(key, "bad number '" + text + "'");
    return v;
  }

  std::map<std::string, Entry> entries_;
};

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"data",
       {"task", "train_images", "train_labels", "test_images", "test_labels", "train", "test", "glove",
        "test_fraction"}},
      {"ensemble", {"dnn", "cnn", "rnn", "seed", "epochs", "batch_size", "vote", "threads"}},
      {"sampling",
       {"dnn_layers", "dnn_units", "cnn_blocks", "cnn_filters", "cnn_dense", "cnn_kernels", "rnn_layers", "rnn_units",
        "rnn_cells", "dropout", "optimizers", "learning_rate", "embedding_dim"}},
      {"features", {"max_len", "ngram_max", "tfidf_max_features", "sequence_max_features"}},
      {"output", {"checkpoint", "history", "report"}},
  };
  return keys;
}

CellKind cell_from_word(const std::string& w) {
  if (w == "lstm") return CellKind::lstm;
  if (w == "gru") return CellKind::gru;
  throw DomainError("unknown cell '" + w + "'");
}

std::string number(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

RunConfig parse_config(std::istream& in, const fs::path& base_dir) {
  std::map<std::string, Entry> entries;
  std::string section, line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(strip_comment(line));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      if (!known_keys().count(section)) {
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]", section);
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string full = section + "." + key;
    if (section.empty() || !known_keys().at(section).count(key)) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown config key '" + full + "'", full);
    }
    if (entries.count(full)) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + full + "'", full);
    entries[full] = Entry{trim(std::string_view(t).substr(eq + 1)), line_no};
  }

  const ConfigReader c(std::move(entries));
  RunConfig rc;
  auto path = [&](const std::string& key, bool must_exist) -> fs::path {
    if (!c.has(key)) return {};
    fs::path p = c.raw(key);
    if (p.empty()) c.fail(key, "empty path");
    if (p.is_relative()) p = base_dir / p;
    if (must_exist && !fs::exists(p)) c.fail(key, "file not found: " + p.string());
    return p;
  };
  auto require = [&](const std::string& key) {
    if (!c.has(key)) c.fail(key, "required key is missing");
  };

  require("data.task");
  const std::string task = c.raw("data.task");
  if (task == "image") {
    rc.task = data::Modality::image;
    require("data.train_images");
    require("data.train_labels");
    if (c.has("data.test_images") != c.has("data.test_labels")) {
      c.fail(c.has("data.test_images") ? "data.test_labels" : "data.test_images", "test images and labels go together");
    }
    for (const char* k : {"data.train", "data.test", "data.glove"}) {
      if (c.has(k)) c.fail(k, "not used by image tasks");
    }
  } else if (task == "text") {
    rc.task = data::Modality::text;
    require("data.train");
    for (const char* k : {"data.train_images", "data.train_labels", "data.test_images", "data.test_labels"}) {
      if (c.has(k)) c.fail(k, "not used by text tasks");
    }
  } else {
    c.fail("data.task", "expected 'image' or 'text', got '" + task + "'");
  }
  rc.train_images = path("data.train_images", true);
  rc.train_labels = path("data.train_labels", true);
  rc.test_images = path("data.test_images", true);
  rc.test_labels = path("data.test_labels", true);
  rc.train_corpus = path("data.train", true);
  rc.test_corpus = path("data.test", true);
  rc.glove = path("data.glove", true);
  rc.test_fraction = c.number<double>("data.test_fraction", rc.test_fraction);
  if (!(rc.test_fraction > 0.0 && rc.test_fraction < 1.0)) c.fail("data.test_fraction", "must lie in (0, 1)");

  EnsembleConfig& e = rc.ensemble;
  e.dnn = c.number<std::size_t>("ensemble.dnn", e.dnn);
  e.cnn = c.number<std::size_t>("ensemble.cnn", e.cnn);
  e.rnn = c.number<std::size_t>("ensemble.rnn", e.rnn);
  if (e.models() < 1) c.fail("ensemble.dnn", "dnn + cnn + rnn must be >= 1");
  e.seed = c.number<std::uint64_t>("ensemble.seed", e.seed);
  e.epochs = c.number<std::size_t>("ensemble.epochs", e.epochs);
  if (e.epochs < 1) c.fail("ensemble.epochs", "must be >= 1");
  e.batch_size = c.number<std::size_t>("ensemble.batch_size", e.batch_size);
  if (e.batch_size < 1) c.fail("ensemble.batch_size", "must be >= 1");
  e.threads = c.number<std::size_t>("ensemble.threads", e.threads);
  if (c.has("ensemble.vote")) {
    try {
      e.vote = vote_mode_from_string(c.raw("ensemble.vote"));
    } catch (const Error& err) {
      c.fail("ensemble.vote", err.what());
    }
  }

  SamplingRanges& s = e.ranges;
  std::tie(s.dnn_min_layers, s.dnn_max_layers) = c.range("sampling.dnn_layers", s.dnn_min_layers, s.dnn_max_layers);
  std::tie(s.dnn_min_units, s.dnn_max_units) = c.range("sampling.dnn_units", s.dnn_min_units, s.dnn_max_units);
  std::tie(s.cnn_min_blocks, s.cnn_max_blocks) = c.range("sampling.cnn_blocks", s.cnn_min_blocks, s.cnn_max_blocks);
  std::tie(s.cnn_min_filters, s.cnn_max_filters) =
      c.range("sampling.cnn_filters", s.cnn_min_filters, s.cnn_max_filters);
  std::tie(s.cnn_min_dense, s.cnn_max_dense) = c.range("sampling.cnn_dense", s.cnn_min_dense, s.cnn_max_dense);
  std::tie(s.rnn_min_layers, s.rnn_max_layers) = c.range("sampling.rnn_layers", s.rnn_min_layers, s.rnn_max_layers);
  std::tie(s.rnn_min_units, s.rnn_max_units) = c.range("sampling.rnn_units", s.rnn_min_units, s.rnn_max_units);
  std::tie(s.min_dropout, s.max_dropout) = c.real_range("sampling.dropout", s.min_dropout, s.max_dropout);
  s.cnn_kernels = c.list<std::size_t>("sampling.cnn_kernels", s.cnn_kernels, [](const std::string& w) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || ptr != w.data() + w.size()) throw DomainError("bad kernel size '" + w + "'");
    return v;
  });
  s.rnn_cells = c.list<CellKind>("sampling.rnn_cells", s.rnn_cells, cell_from_word);
  s.optimizers = c.list<optim::OptimizerKind>("sampling.optimizers", s.optimizers, [](const std::string& w) {
    return optim::optimizer_kind_from_string(w);
  });
  s.learning_rate = c.number<double>("sampling.learning_rate", s.learning_rate);
  s.embedding_dim = c.number<std::size_t>("sampling.embedding_dim", s.embedding_dim);
  try {
    s.validate();
  } catch (const DomainError& err) {
    throw ConfigError(std::string("config section [sampling]: ") + err.what(), "sampling");
  }

  e.max_len = c.number<std::size_t>("features.max_len", e.max_len);
  if (e.max_len < 1) c.fail("features.max_len", "must be >= 1");
  e.ngram_max = c.number<std::size_t>("features.ngram_max", e.ngram_max);
  if (e.ngram_max < 1) c.fail("features.ngram_max", "must be >= 1");
  e.tfidf_max_features = c.number<std::size_t>("features.tfidf_max_features", e.tfidf_max_features);
  e.sequence_max_features = c.number<std::size_t>("features.sequence_max_features", e.sequence_max_features);

  auto output = [&](const std::string& key, const fs::path& fallback) {
    fs::path p = c.has(key) ? fs::path(c.raw(key)) : fallback;
    if (p.empty()) c.fail(key, "empty path");
    return p.is_relative() ? base_dir / p : p;
  };
  rc.checkpoint = output("output.checkpoint", rc.checkpoint);
  rc.history = output("output.history", rc.history);
  rc.report = output("output.report", rc.report);
  return rc;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, path.parent_path());
}

Report evaluate(Ensemble& ensemble, const data::Dataset& dataset) {
  check_compatible(ensemble, dataset);
  const auto predicted = predict_ensemble(ensemble, dataset);
  Report r;
  r.accuracy = metrics::accuracy(dataset.labels, predicted);
  r.micro = metrics::micro_scores(metrics::confusion(dataset.labels, predicted, ensemble.input.classes));
  for (std::size_t i = 0; i < ensemble.members.size(); ++i) {
    r.member_accuracy.push_back(ensemble.members[i].failed
                                    ? std::nan("")
                                    : metrics::accuracy(dataset.labels, predict_member(ensemble, i, dataset)));
  }
  return r;
}

std::string format_report(const Report& r) {
  std::string out;
  out += "accuracy=" + number(r.accuracy) + "\n";
  out += "precision_micro=" + number(r.micro.precision) + "\n";
  out += "recall_micro=" + number(r.micro.recall) + "\n";
  out += "f1_micro=" + number(r.micro.f1) + "\n";
  for (std::size_t i = 0; i < r.member_accuracy.size(); ++i) {
    if (std::isnan(r.member_accuracy[i])) continue;
    out += "member_" + std::to_string(i) + "_accuracy=" + number(r.member_accuracy[i]) + "\n";
  }
  return out;
}

namespace {

struct LoadedData {
  data::Dataset train, test;
  std::optional<features::EmbeddingTable> glove;
};

LoadedData load_training_data(const RunConfig& rc) {
  LoadedData d;
  const bool have_test = rc.task == data::Modality::image ? !rc.test_images.empty() : !rc.test_corpus.empty();
  if (rc.task == data::Modality::image) {
    d.train = data::load_mnist_files(rc.train_images, rc.train_labels);
    if (have_test) d.test = data::load_mnist_files(rc.test_images, rc.test_labels);
  } else {
    d.train = data::load_text_file(rc.train_corpus);
    if (have_test) d.test = data::load_text_file(rc.test_corpus, &d.train.class_names);
    if (!rc.glove.empty()) {
      std::ifstream in(rc.glove);
      if (!in) throw DomainError("cannot open " + rc.glove.string());
      d.glove = features::glove_load(in);
    }
  }
  if (!have_test) {
    auto [train, test] = data::split(d.train, 1.0 - rc.test_fraction, derive_seed(rc.ensemble.seed, 0x5eed));
    d.train = std::move(train);
    d.test = std::move(test);
  }
  d.train.validate();
  d.test.validate();
  return d;
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& write) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path.string());
  write(out);
  out.close();
  if (!out) throw DomainError("failed writing " + path.string());
}

}  // namespace

int cmd_train(const fs::path& config_path, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  try {
    rc = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  LoadedData d;
  try {
    d = load_training_data(rc);
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }

  Ensemble ensemble;
  try {
    ensemble = train_ensemble(
        rc.ensemble, d.train, &d.test,
        [&](const ProgressEvent& ev) {
          err << "model " << ev.model_id << " (" << to_string(ev.family) << ")";
          if (ev.failed) {
            err << " failed: " << ev.message << "\n";
          } else {
            err << " epoch " << ev.record.epoch << " loss=" << number(ev.record.loss)
                << " accuracy=" << number(ev.record.accuracy) << "\n";
          }
        },
        d.glove ? &*d.glove : nullptr);
  } catch (const TrainingError& e) {
    err << "training failed: " << e.what() << "\n";
    return kTrainingFailed;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }

  try {
    const std::string report = format_report(evaluate(ensemble, d.test));
    write_file(rc.checkpoint, [&](std::ostream& o) { save_checkpoint(ensemble, o); });
    write_file(rc.history, [&](std::ostream& o) { write_history_csv(ensemble, o); });
    write_file(rc.report, [&](std::ostream& o) { o << report; });
    out << report;
  } catch (const Error& e) {
    err << "output error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

namespace {

std::optional<Ensemble> open_checkpoint(const fs::path& path, std::ostream& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err << "checkpoint error: cannot open " << path.string() << "\n";
    return std::nullopt;
  }
  try {
    return load_checkpoint(in);
  } catch (const Error& e) {
    err << "checkpoint error: " << path.string() << ": " << e.what() << "\n";
    return std::nullopt;
  }
}

}  // namespace

int cmd_eval(const fs::path& checkpoint, const EvalInputs& inputs, std::ostream& out, std::ostream& err) {
  auto ensemble = open_checkpoint(checkpoint, err);
  if (!ensemble) return kConfigError;
  try {
    data::Dataset ds;
    if (!inputs.corpus.empty()) {
      if (ensemble->input.modality != data::Modality::text) throw DomainError("checkpoint expects images, got a text corpus");
      ds = data::load_text_file(inputs.corpus, &ensemble->class_names);
    } else {
      if (ensemble->input.modality != data::Modality::image) throw DomainError("checkpoint expects a text corpus");
      if (inputs.images.empty() || inputs.labels.empty()) throw DomainError("eval needs both --images and --labels");
      ds = data::load_mnist_files(inputs.images, inputs.labels);
    }
    ds.validate();
    out << format_report(evaluate(*ensemble, ds));
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

int cmd_predict(const fs::path& checkpoint, const PredictInputs& inputs, std::ostream& out, std::ostream& err) {
  auto ensemble = open_checkpoint(checkpoint, err);
  if (!ensemble) return kConfigError;
  try {
    data::Dataset ds;
    if (!inputs.text.empty()) {
      if (ensemble->input.modality != data::Modality::text) throw DomainError("checkpoint expects images, got text");
      std::ifstream in(inputs.text);
      if (!in) throw DomainError("cannot open " + inputs.text.string());
      ds.modality = data::Modality::text;
      for (std::string line; std::getline(in, line);) ds.documents.push_back(features::tokenize(line));
    } else {
      if (ensemble->input.modality != data::Modality::image) throw DomainError("checkpoint expects text input");
      if (inputs.images.empty()) throw DomainError("predict needs --images or --text");
      ds = data::load_idx_image_file(inputs.images);
    }
    if (ds.size() == 0) return kOk;
    for (int label : predict_ensemble(*ensemble, ds)) out << ensemble->class_names.at(label) << "\n";
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random multimodel deep learning: train, evaluate and apply RMDL ensembles", "rmdl"};
  app.require_subcommand(1);

  std::string config;
  auto* train = app.add_subcommand("train", "Train an ensemble from a config file");
  train->add_option("config", config, "INI config file")->required();

  std::string checkpoint;
  EvalInputs eval_in;
  std::string eval_images, eval_labels, eval_corpus;
  auto* eval = app.add_subcommand("eval", "Print accuracy and micro P/R/F1 of a checkpoint on a labeled dataset");
  eval->add_option("checkpoint", checkpoint, "Checkpoint file")->required();
  auto* ei = eval->add_option("--images", eval_images, "IDX image file");
  eval->add_option("--labels", eval_labels, "IDX label file")->needs(ei);
  eval->add_option("--corpus", eval_corpus, "label<TAB>text corpus")->excludes(ei);

  std::string pred_images, pred_text;
  auto* predict = app.add_subcommand("predict", "Print one predicted label per input");
  predict->add_option("checkpoint", checkpoint, "Checkpoint file")->required();
  auto* pi = predict->add_option("--images", pred_images, "IDX image file");
  predict->add_option("--text", pred_text, "Text file, one document per line")->excludes(pi);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  if (*train) return cmd_train(config, out, err);
  if (*eval) return cmd_eval(checkpoint, EvalInputs{eval_images, eval_labels, eval_corpus}, out, err);
  return cmd_predict(checkpoint, PredictInputs{pred_images, pred_text}, out, err);
}

}  // namespace rmdl::cli
