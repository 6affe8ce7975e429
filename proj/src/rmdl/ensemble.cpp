#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "rmdl/error.hpp"
#include "rmdl/metrics.hpp"
#include "rmdl/nn/activation.hpp"
#include "rmdl/rmdl.hpp"

namespace rmdl {

namespace {

constexpr std::size_t kInferenceChunk = 256;

}  // namespace

void EnsembleConfig::validate() const {
  if (models() < 1) throw DomainError("ensemble: d + c + r must be >= 1");
  if (epochs < 1) throw DomainError("ensemble: epochs must be >= 1");
  if (batch_size < 1) throw DomainError("ensemble: batch size must be >= 1");
  if (max_len < 1) throw DomainError("ensemble: max_len must be >= 1");
  if (ngram_max < 1) throw DomainError("ensemble: ngram_max must be >= 1");
  ranges.validate();
}

VoteMode Ensemble::vote_mode() const {
  if (config.vote != VoteMode::automatic) return config.vote;
  return input.classes == 2 ? VoteMode::binary : VoteMode::plurality;
}

std::size_t Ensemble::active_members() const {
  std::size_t n = 0;
  for (const auto& m : members) n += !m.failed;
  return n;
}

EncodedInputs::EncodedInputs(const data::Dataset& dataset, const InputDescriptor& input, const TextPipeline& text)
    : input_(input), count_(dataset.size()) {
  if (input.modality == data::Modality::image) {
    images_ = &dataset.images;
    return;
  }
  tfidf_.reserve(count_);
  sequences_.reserve(count_);
  for (const auto& doc : dataset.documents) {
    tfidf_.push_back(features::tfidf_transform(doc, text.tfidf));
    sequences_.push_back(text.sequence_vocab.encode(doc, text.max_len));
  }
}

Tensor EncodedInputs::batch(Family family, std::span<const std::size_t> indices) const {
  const std::size_t b = indices.size();
  if (input_.modality == data::Modality::image) {
    const std::size_t stride = input_.height * input_.width * input_.channels;
    Tensor x({b, input_.height, input_.width, input_.channels});
    for (std::size_t r = 0; r < b; ++r) {
      std::copy_n(images_->raw() + indices[r] * stride, stride, x.raw() + r * stride);
    }
    return x;
  }
  if (family == Family::dnn) {
    Tensor x({b, input_.tfidf_width});
    for (std::size_t r = 0; r < b; ++r) {
      const auto& row = tfidf_[indices[r]];
      for (std::size_t j = 0; j < row.index.size(); ++j) x[r * input_.tfidf_width + row.index[j]] = row.value[j];
    }
    return x;
  }
  const std::size_t t = input_.sequence_length;
  Tensor x({b, t});
  for (std::size_t r = 0; r < b; ++r) {
    const auto& seq = sequences_[indices[r]];
    for (std::size_t j = 0; j < t; ++j) x[r * t + j] = static_cast<double>(seq[j]);
  }
  return x;
}

void prepare_inputs(Ensemble& ensemble, const data::Dataset& train) {
  if (train.size() == 0) throw DomainError("training set is empty");
  train.validate();
  InputDescriptor& in = ensemble.input;
  in = {};
  in.modality = train.modality;
  in.classes = train.classes();
  ensemble.class_names = train.class_names;
  if (train.modality == data::Modality::image) {
    if (train.images.rank() != 4) throw ShapeError("image dataset must be N×H×W×C");
    in.height = train.images.dim(1);
    in.width = train.images.dim(2);
    in.channels = train.images.dim(3);
    return;
  }
  const auto& cfg = ensemble.config;
  ensemble.text.tfidf = features::tfidf_fit(train.documents, cfg.ngram_max, cfg.tfidf_max_features);
  ensemble.text.sequence_vocab = features::Vocabulary::fit(train.documents, cfg.sequence_max_features);
  ensemble.text.max_len = cfg.max_len;
  in.tfidf_width = ensemble.text.tfidf.vocab.size();
  in.vocab_size = ensemble.text.sequence_vocab.size();
  in.sequence_length = cfg.max_len;
}

void check_compatible(const Ensemble& ensemble, const data::Dataset& dataset) {
  const InputDescriptor& in = ensemble.input;
  if (dataset.modality != in.modality) throw DomainError("dataset modality differs from the checkpoint's");
  if (in.modality == data::Modality::image) {
    const auto& s = dataset.images.shape();
    if (s.size() != 4 || s[1] != in.height || s[2] != in.width || s[3] != in.channels) {
      throw DomainError("images are " + shape_string(s) + ", checkpoint expects N×" + std::to_string(in.height) + "×" +
                        std::to_string(in.width) + "×" + std::to_string(in.channels));
    }
  }
  if (!dataset.labels.empty() && dataset.classes() != in.classes) {
    throw DomainError("dataset has " + std::to_string(dataset.classes()) + " classes, checkpoint has " +
                      std::to_string(in.classes));
  }
}

namespace {

std::vector<int> gather_labels(const std::vector<int>& labels, std::span<const std::size_t> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(labels[i]);
  return out;
}

std::vector<int> argmax_predictions(nn::Network& net, Family family, const EncodedInputs& inputs) {
  std::vector<int> out;
  out.reserve(inputs.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < inputs.size(); start += kInferenceChunk) {
    idx.resize(std::min(kInferenceChunk, inputs.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    for (std::size_t label : argmax_rows(net.forward(inputs.batch(family, idx), nn::Mode::eval))) {
      out.push_back(static_cast<int>(label));
    }
  }
  return out;
}

struct TrainingData {
  const EncodedInputs* inputs;
  const std::vector<int>* labels;
};

void train_member(Member& member, std::size_t id, const EnsembleConfig& config, TrainingData train,
                  std::optional<TrainingData> valid, const std::function<void(const ProgressEvent&)>& emit) {
  const Family family = member.spec.family;
  const std::size_t n = train.inputs->size();
  data::BatchIterator batches(n, config.batch_size, true, derive_seed(member.spec.seed, 1));
  std::vector<std::size_t> batch;

  auto fail = [&](std::string why) {
    member.failed = true;
    member.failure = std::move(why);
    ProgressEvent ev{id, family, {}, true, member.failure};
    emit(ev);
  };

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (epoch > 1) batches.reset();
    double loss_sum = 0.0;
    while (batches.next(batch)) {
      const std::vector<int> labels = gather_labels(*train.labels, batch);
      member.network.zero_grad();
      const Tensor logits = member.network.forward(train.inputs->batch(family, batch), nn::Mode::train);
      auto result = nn::loss_ce(logits, labels);
      if (!std::isfinite(result.loss)) {
        fail("non-finite loss in epoch " + std::to_string(epoch));
        return;
      }
      loss_sum += result.loss * static_cast<double>(batch.size());
      member.network.backward(result.grad);
      try {
        member.optimizer.step(member.network.params());
      } catch (const NonFiniteGradient& e) {
        fail(std::string(e.what()) + " in epoch " + std::to_string(epoch));
        return;
      }
    }
    const TrainingData scored = valid ? *valid : train;
    const auto predicted = argmax_predictions(member.network, family, *scored.inputs);
    EpochRecord record{epoch, loss_sum / static_cast<double>(n), metrics::accuracy(*scored.labels, predicted)};
    member.history.push_back(record);
    emit(ProgressEvent{id, family, record, false, {}});
  }
}

std::size_t thread_count(const EnsembleConfig& config) {
  std::size_t threads = config.threads;
  if (threads == 0) {
    if (const char* env = std::getenv("RMDL_THREADS")) {
      const std::string_view s(env);
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) threads = v;
    }
  }
  if (threads == 0) threads = config.models();
  return std::min(threads, config.models());
}

}  // namespace

Ensemble train_ensemble(const EnsembleConfig& config, const data::Dataset& train, const data::Dataset* valid,
                        const ProgressSink& progress, const features::EmbeddingTable* glove) {
  config.validate();
  Ensemble ensemble;
  ensemble.config = config;
  if (glove && train.modality == data::Modality::text) ensemble.config.ranges.embedding_dim = glove->dim();
  prepare_inputs(ensemble, train);
  if (ensemble.vote_mode() == VoteMode::binary && ensemble.input.classes != 2) {
    throw DomainError("binary vote needs exactly two classes");
  }
  if (valid) {
    valid->validate();
    check_compatible(ensemble, *valid);
  }

  const EncodedInputs train_inputs(train, ensemble.input, ensemble.text);
  std::optional<EncodedInputs> valid_inputs;
  if (valid && valid->size() > 0) valid_inputs.emplace(*valid, ensemble.input, ensemble.text);

  std::vector<Family> families;
  families.insert(families.end(), config.dnn, Family::dnn);
  families.insert(families.end(), config.cnn, Family::cnn);
  families.insert(families.end(), config.rnn, Family::rnn);
  for (std::size_t i = 0; i < families.size(); ++i) {
    Member m;
    m.spec = sample_architecture(families[i], ensemble.input, ensemble.config.ranges, derive_seed(config.seed, i));
    const bool text_embedding = train.modality == data::Modality::text && families[i] != Family::dnn;
    m.network = build_network(m.spec, text_embedding ? glove : nullptr, &ensemble.text.sequence_vocab);
    m.optimizer = optim::OptimizerState(m.spec.optimizer);
    ensemble.members.push_back(std::move(m));
  }

  std::mutex sink_mutex;
  auto emit = [&](const ProgressEvent& ev) {
    if (!progress) return;
    std::lock_guard lock(sink_mutex);
    progress(ev);
  };
  const TrainingData train_data{&train_inputs, &train.labels};
  std::optional<TrainingData> valid_data;
  if (valid_inputs) valid_data = TrainingData{&*valid_inputs, &valid->labels};

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(ensemble.members.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < ensemble.members.size(); i = next++) {
      try {
        train_member(ensemble.members[i], i, ensemble.config, train_data, valid_data, emit);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = thread_count(config);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  if (ensemble.active_members() == 0) throw TrainingError("all models failed during training");
  return ensemble;
}

std::vector<Tensor> predict_proba(Ensemble& ensemble, const data::Dataset& dataset) {
  check_compatible(ensemble, dataset);
  const EncodedInputs inputs(dataset, ensemble.input, ensemble.text);
  const std::size_t n = ensemble.active_members(), k = ensemble.input.classes;
  if (n == 0) throw TrainingError("ensemble has no usable models");
  std::vector<Tensor> out(dataset.size(), Tensor({n, k}));
  std::vector<std::size_t> idx;
  std::size_t row = 0;
  for (auto& m : ensemble.members) {
    if (m.failed) continue;
    for (std::size_t start = 0; start < inputs.size(); start += kInferenceChunk) {
      idx.resize(std::min(kInferenceChunk, inputs.size() - start));
      std::iota(idx.begin(), idx.end(), start);
      const Tensor p = nn::softmax(m.network.forward(inputs.batch(m.spec.family, idx), nn::Mode::eval));
      for (std::size_t r = 0; r < idx.size(); ++r) std::copy_n(p.raw() + r * k, k, out[start + r].raw() + row * k);
    }
    ++row;
  }
  return out;
}

std::vector<int> predict_ensemble(Ensemble& ensemble, const data::Dataset& dataset) {
  const auto probs = predict_proba(ensemble, dataset);
  const bool binary = ensemble.vote_mode() == VoteMode::binary;
  std::vector<int> labels;
  labels.reserve(probs.size());
  for (const auto& p : probs) {
    if (binary) {
      std::vector<int> votes;
      for (std::size_t label : argmax_rows(p)) votes.push_back(static_cast<int>(label));
      labels.push_back(majority_vote_binary(votes));
    } else {
      labels.push_back(majority_vote_multiclass(p));
    }
  }
  return labels;
}

std::vector<int> predict_member(Ensemble& ensemble, std::size_t member, const data::Dataset& dataset) {
  check_compatible(ensemble, dataset);
  auto& m = ensemble.members.at(member);
  const EncodedInputs inputs(dataset, ensemble.input, ensemble.text);
  return argmax_predictions(m.network, m.spec.family, inputs);
}

}  // namespace rmdl
