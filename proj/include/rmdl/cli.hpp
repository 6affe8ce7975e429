#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rmdl/metrics.hpp"
#include "rmdl/rmdl.hpp"

namespace rmdl::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,  // also: unreadable or corrupt checkpoint
  kDataError = 2,    // also: input incompatible with the checkpoint
  kTrainingFailed = 3,
};

/// Everything `rmdl train` needs, read from an INI-style file:
///
///   [data]      task = image|text, train_images/train_labels/test_images/test_labels
///               (image) or train/test (text TSV), glove, test_fraction
///   [ensemble]  dnn, cnn, rnn, seed, epochs, batch_size, vote, threads
///   [sampling]  dnn_layers, dnn_units, cnn_blocks, cnn_filters, cnn_dense, cnn_kernels,
///               rnn_layers, rnn_units, rnn_cells, dropout, optimizers, learning_rate,
///               embedding_dim  (ranges are written "min max")
///   [features]  max_len, ngram_max, tfidf_max_features, sequence_max_features
///   [output]    checkpoint, history, report
///
/// Relative paths are resolved against the config file's directory. A `#` or `;`
/// at the start of a line or after whitespace starts a comment.
struct RunConfig {
  data::Modality task = data::Modality::image;
  std::filesystem::path train_images, train_labels, test_images, test_labels;
  std::filesystem::path train_corpus, test_corpus;
  std::filesystem::path glove;
  // Used only when no test set is given.
  double test_fraction = 0.2;
  EnsembleConfig ensemble;
  std::filesystem::path checkpoint = "rmdl.ckpt";
  std::filesystem::path history = "history.csv";
  std::filesystem::path report = "report.txt";
};

// Throws ConfigError naming the key on unknown sections or keys, bad values,
// missing required paths or input files that do not exist.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

struct Report {
  double accuracy = 0.0;
  metrics::MicroScores micro;
  std::vector<double> member_accuracy;  // NaN for failed members
};

Report evaluate(Ensemble& ensemble, const data::Dataset& dataset);
// "metric=value" lines: accuracy, precision_micro, recall_micro, f1_micro, then member_<i>_accuracy.
std::string format_report(const Report& report);

int cmd_train(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

struct EvalInputs {
  std::filesystem::path images, labels;  // image checkpoints
  std::filesystem::path corpus;          // text checkpoints: label<TAB>text
};
int cmd_eval(const std::filesystem::path& checkpoint, const EvalInputs& inputs, std::ostream& out, std::ostream& err);

struct PredictInputs {
  std::filesystem::path images;  // IDX image file
  std::filesystem::path text;    // one document per line
};
// Prints one class name per input.
int cmd_predict(const std::filesystem::path& checkpoint, const PredictInputs& inputs, std::ostream& out,
                std::ostream& err);

// Parses argv and dispatches to the commands above.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rmdl::cli
