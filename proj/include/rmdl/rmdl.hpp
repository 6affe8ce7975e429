#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rmdl/data.hpp"
#include "rmdl/features.hpp"
#include "rmdl/nn/network.hpp"
#include "rmdl/optim.hpp"

namespace rmdl {

enum class Family { dnn, cnn, rnn };
enum class CellKind { lstm, gru };
enum class VoteMode { automatic, binary, plurality };

std::string_view to_string(Family family);
std::string_view to_string(CellKind cell);
std::string_view to_string(VoteMode mode);
Family family_from_string(std::string_view name);
VoteMode vote_mode_from_string(std::string_view name);

/// What every model of an ensemble consumes.
///
/// Images arrive as B×H×W×C. Text arrives either as TF-IDF rows of width
/// `tfidf_width` (DNN) or as index sequences of `sequence_length` tokens drawn
/// from a vocabulary of `vocab_size` slots (CNN and RNN).
struct InputDescriptor {
  data::Modality modality = data::Modality::image;
  std::size_t height = 0, width = 0, channels = 0;
  std::size_t tfidf_width = 0;
  std::size_t sequence_length = 0;
  std::size_t vocab_size = 0;
  std::size_t classes = 0;

  friend bool operator==(const InputDescriptor&, const InputDescriptor&) = default;
};

/// Inclusive bounds for the random draws of sample_architecture.
struct SamplingRanges {
  std::size_t dnn_min_layers = 1, dnn_max_layers = 3;
  std::size_t dnn_min_units = 64, dnn_max_units = 256;
  std::size_t cnn_min_blocks = 1, cnn_max_blocks = 3;
  std::size_t cnn_min_filters = 16, cnn_max_filters = 128;
  std::vector<std::size_t> cnn_kernels{3, 5};
  std::size_t cnn_min_dense = 64, cnn_max_dense = 256;
  std::size_t rnn_min_layers = 1, rnn_max_layers = 2;
  std::size_t rnn_min_units = 32, rnn_max_units = 256;
  std::vector<CellKind> rnn_cells{CellKind::lstm, CellKind::gru};
  double min_dropout = 0.0, max_dropout = 0.5;
  std::vector<optim::OptimizerKind> optimizers{optim::OptimizerKind::adam, optim::OptimizerKind::rmsprop};
  // Per-kind default when 0.
  double learning_rate = 0.0;
  std::size_t embedding_dim = 50;

  // Throws DomainError naming the first empty or out-of-domain range.
  void validate() const;
  friend bool operator==(const SamplingRanges&, const SamplingRanges&) = default;
};

/// A fully drawn architecture: together with `input` it fixes every parameter shape.
///
/// DNN: `widths` are hidden layer sizes, one dropout rate each.
/// CNN: `widths` are filters per block with `kernels` alongside; `head_units`
///      is the dense layer after flattening and `dropouts` holds its single rate.
/// RNN: `widths` are units per recurrent layer with one `cell`; `dropouts` holds
///      the rate before the output layer.
/// Text CNN/RNN start with an Embedding of `embedding_dim`.
struct ArchitectureSpec {
  Family family = Family::dnn;
  std::vector<std::size_t> widths;
  std::vector<std::size_t> kernels;
  std::vector<double> dropouts;
  std::size_t head_units = 0;
  CellKind cell = CellKind::lstm;
  std::size_t embedding_dim = 0;
  optim::OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  InputDescriptor input;

  friend bool operator==(const ArchitectureSpec&, const ArchitectureSpec&) = default;
};

// Deterministic in (family, input, ranges, seed). CNN blocks that would shrink
// the input below one position are dropped, so the block count may be smaller
// than drawn when the input is small.
ArchitectureSpec sample_architecture(Family family, const InputDescriptor& input, const SamplingRanges& ranges,
                                     std::uint64_t seed);

// Builds and initializes the network described by `spec`. When `glove` is given
// for a text CNN/RNN, embedding rows of terms it knows are overwritten with its
// vectors (the dimension must match).
nn::Network build_network(const ArchitectureSpec& spec, const features::EmbeddingTable* glove = nullptr,
                          const features::Vocabulary* vocab = nullptr);

// ⌊1/2 + (Σy − 1/2)/n⌋ over 0/1 votes, evaluated exactly; even-n ties give 0.
int majority_vote_binary(std::span<const int> votes);

// Plurality over per-model argmax labels of an n×K probability matrix. Ties go
// to the tied label with the larger summed probability, then to the lower label.
int majority_vote_multiclass(const Tensor& probabilities);

struct EnsembleConfig {
  std::size_t dnn = 1, cnn = 1, rnn = 1;
  std::uint64_t seed = 1;
  SamplingRanges ranges;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  VoteMode vote = VoteMode::automatic;
  // Text features.
  std::size_t max_len = 100;
  std::size_t ngram_max = 1;
  std::size_t tfidf_max_features = 0;
  std::size_t sequence_max_features = 0;
  // Concurrent trainers; 0 means RMDL_THREADS, else one per model.
  std::size_t threads = 0;

  std::size_t models() const { return dnn + cnn + rnn; }
  void validate() const;
  friend bool operator==(const EnsembleConfig&, const EnsembleConfig&) = default;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean training cross-entropy over the epoch
  double accuracy = 0.0;  // on the validation set, or the training set without one
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct Member {
  ArchitectureSpec spec;
  nn::Network network;
  optim::OptimizerState optimizer;
  std::vector<EpochRecord> history;
  bool failed = false;
  std::string failure;
};

// Text preprocessing fitted on the training documents.
struct TextPipeline {
  features::TfidfModel tfidf;
  features::Vocabulary sequence_vocab;
  std::size_t max_len = 0;
};

struct Ensemble {
  EnsembleConfig config;
  InputDescriptor input;
  std::vector<std::string> class_names;
  TextPipeline text;
  std::vector<Member> members;

  // Resolves VoteMode::automatic: binary for two classes, plurality otherwise.
  VoteMode vote_mode() const;
  std::size_t active_members() const;
};

struct ProgressEvent {
  std::size_t model_id = 0;
  Family family = Family::dnn;
  EpochRecord record;
  bool failed = false;
  std::string message;
};
using ProgressSink = std::function<void(const ProgressEvent&)>;

/// Model inputs for a dataset under an ensemble's input descriptor and text pipeline.
class EncodedInputs {
 public:
  EncodedInputs(const data::Dataset& dataset, const InputDescriptor& input, const TextPipeline& text);

  std::size_t size() const { return count_; }
  // Network input for `family` holding the examples at `indices`.
  Tensor batch(Family family, std::span<const std::size_t> indices) const;

 private:
  InputDescriptor input_;
  std::size_t count_ = 0;
  const Tensor* images_ = nullptr;
  std::vector<features::SparseVector> tfidf_;
  std::vector<std::vector<std::size_t>> sequences_;
};

// Fits the text pipeline on `train` (text only) and fills the input descriptor.
void prepare_inputs(Ensemble& ensemble, const data::Dataset& train);

// Samples and trains d + c + r models independently, in parallel. Results do
// not depend on the thread count. A model whose loss or gradient turns
// non-finite is marked failed; if every model fails a TrainingError is thrown.
Ensemble train_ensemble(const EnsembleConfig& config, const data::Dataset& train, const data::Dataset* valid = nullptr,
                        const ProgressSink& progress = {}, const features::EmbeddingTable* glove = nullptr);

// Per-item softmax outputs of every active model: one n×K tensor per example.
std::vector<Tensor> predict_proba(Ensemble& ensemble, const data::Dataset& dataset);
// Voted labels. Throws DomainError when the dataset does not fit the ensemble's inputs.
std::vector<int> predict_ensemble(Ensemble& ensemble, const data::Dataset& dataset);
// Argmax labels of a single member.
std::vector<int> predict_member(Ensemble& ensemble, std::size_t member, const data::Dataset& dataset);

// Throws DomainError when `dataset` cannot be fed to `ensemble` (modality,
// image geometry or class count differ).
void check_compatible(const Ensemble& ensemble, const data::Dataset& dataset);

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Ensemble& ensemble, std::ostream& out);
// Throws FormatError on bad magic, unsupported version or truncation, and
// ChecksumError when a block's CRC32 does not match.
Ensemble load_checkpoint(std::istream& in);

// epoch,model_id,family,loss,accuracy
void write_history_csv(const Ensemble& ensemble, std::ostream& out);

}  // namespace rmdl
