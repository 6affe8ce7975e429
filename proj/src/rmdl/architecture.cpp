#include <algorithm>
#include <string>

#include "rmdl/error.hpp"
#include "rmdl/nn/activation.hpp"
#include "rmdl/nn/layers.hpp"
#include "rmdl/nn/recurrent.hpp"
#include "rmdl/rmdl.hpp"

namespace rmdl {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::dnn: return "dnn";
    case Family::cnn: return "cnn";
    case Family::rnn: return "rnn";
  }
  return "unknown";
}

std::string_view to_string(CellKind cell) { return cell == CellKind::lstm ? "lstm" : "gru"; }

std::string_view to_string(VoteMode mode) {
  switch (mode) {
    case VoteMode::automatic: return "auto";
    case VoteMode::binary: return "binary";
    case VoteMode::plurality: return "plurality";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  for (auto f : {Family::dnn, Family::cnn, Family::rnn}) {
    if (to_string(f) == name) return f;
  }
  throw DomainError("unknown model family '" + std::string(name) + "'");
}

VoteMode vote_mode_from_string(std::string_view name) {
  for (auto m : {VoteMode::automatic, VoteMode::binary, VoteMode::plurality}) {
    if (to_string(m) == name) return m;
  }
  throw DomainError("unknown vote mode '" + std::string(name) + "'");
}

namespace {

void require_range(std::size_t lo, std::size_t hi, std::size_t floor, const char* name) {
  if (lo < floor || lo > hi) {
    throw DomainError(std::string(name) + ": need " + std::to_string(floor) + " <= min <= max, got " +
                      std::to_string(lo) + ".." + std::to_string(hi));
  }
}

std::size_t draw(Rng& rng, std::size_t lo, std::size_t hi) { return static_cast<std::size_t>(rng.uniform_int(lo, hi)); }

double draw_dropout(Rng& rng, const SamplingRanges& r) {
  return r.min_dropout == r.max_dropout ? r.min_dropout : rng.uniform(r.min_dropout, r.max_dropout);
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[draw(rng, 0, items.size() - 1)];
}

// Sequence length or image side seen by the first convolution.
std::size_t conv_extent(const InputDescriptor& in) {
  if (in.modality == data::Modality::text) return in.sequence_length;
  return std::min(in.height, in.width);
}

}  // namespace

void SamplingRanges::validate() const {
  require_range(dnn_min_layers, dnn_max_layers, 1, "dnn layers");
  require_range(dnn_min_units, dnn_max_units, 1, "dnn units");
  require_range(cnn_min_blocks, cnn_max_blocks, 1, "cnn blocks");
  require_range(cnn_min_filters, cnn_max_filters, 1, "cnn filters");
  require_range(cnn_min_dense, cnn_max_dense, 1, "cnn dense units");
  require_range(rnn_min_layers, rnn_max_layers, 1, "rnn layers");
  require_range(rnn_min_units, rnn_max_units, 1, "rnn units");
  if (cnn_kernels.empty()) throw DomainError("cnn kernels: empty set");
  for (std::size_t k : cnn_kernels) {
    if (k < 1) throw DomainError("cnn kernels: sizes must be >= 1");
  }
  if (rnn_cells.empty()) throw DomainError("rnn cells: empty set");
  if (optimizers.empty()) throw DomainError("optimizers: empty pool");
  if (!(min_dropout >= 0.0 && min_dropout <= max_dropout && max_dropout < 1.0)) {
    throw DomainError("dropout: need 0 <= min <= max < 1");
  }
  if (learning_rate < 0.0) throw DomainError("learning rate: must be > 0, or 0 for the per-optimizer default");
  if (embedding_dim < 1) throw DomainError("embedding dim: must be >= 1");
}

ArchitectureSpec sample_architecture(Family family, const InputDescriptor& input, const SamplingRanges& ranges,
                                     std::uint64_t seed) {
  ranges.validate();
  if (input.classes < 2) throw DomainError("input: need at least two classes");
  Rng rng(seed);
  ArchitectureSpec spec;
  spec.family = family;
  spec.seed = seed;
  spec.input = input;
  if (input.modality == data::Modality::text && family != Family::dnn) spec.embedding_dim = ranges.embedding_dim;

  switch (family) {
    case Family::dnn: {
      const std::size_t layers = draw(rng, ranges.dnn_min_layers, ranges.dnn_max_layers);
      for (std::size_t i = 0; i < layers; ++i) {
        spec.widths.push_back(draw(rng, ranges.dnn_min_units, ranges.dnn_max_units));
        spec.dropouts.push_back(draw_dropout(rng, ranges));
      }
      break;
    }
    case Family::cnn: {
      const std::size_t blocks = draw(rng, ranges.cnn_min_blocks, ranges.cnn_max_blocks);
      std::vector<std::size_t> kernels, filters;
      for (std::size_t i = 0; i < blocks; ++i) {
        kernels.push_back(pick(rng, ranges.cnn_kernels));
        filters.push_back(draw(rng, ranges.cnn_min_filters, ranges.cnn_max_filters));
      }
      spec.head_units = draw(rng, ranges.cnn_min_dense, ranges.cnn_max_dense);
      spec.dropouts.push_back(draw_dropout(rng, ranges));
      // Keep blocks while conv (valid) followed by 2×2 pooling leaves at least one position.
      std::size_t extent = conv_extent(input);
      for (std::size_t i = 0; i < blocks; ++i) {
        if (extent < kernels[i] + 1) break;
        extent = (extent - kernels[i] + 1) / 2;
        spec.kernels.push_back(kernels[i]);
        spec.widths.push_back(filters[i]);
      }
      if (spec.widths.empty()) throw DomainError("cnn: input too small for any sampled kernel");
      break;
    }
    case Family::rnn: {
      const std::size_t layers = draw(rng, ranges.rnn_min_layers, ranges.rnn_max_layers);
      for (std::size_t i = 0; i < layers; ++i) spec.widths.push_back(draw(rng, ranges.rnn_min_units, ranges.rnn_max_units));
      spec.cell = pick(rng, ranges.rnn_cells);
      spec.dropouts.push_back(draw_dropout(rng, ranges));
      break;
    }
  }

  spec.optimizer = optim::OptimizerConfig::defaults(pick(rng, ranges.optimizers));
  if (ranges.learning_rate > 0.0) spec.optimizer.learning_rate = ranges.learning_rate;
  return spec;
}

namespace {

void load_glove_rows(nn::Embedding& emb, const features::EmbeddingTable& glove, const features::Vocabulary& vocab) {
  if (glove.dim() != emb.dim()) {
    throw DomainError("embedding file has dimension " + std::to_string(glove.dim()) + ", model expects " +
                      std::to_string(emb.dim()));
  }
  if (vocab.size() != emb.vocab_size()) throw DomainError("vocabulary does not match the embedding layer");
  for (std::size_t i = 1; i < vocab.size(); ++i) {
    if (!glove.contains(vocab.term(i))) continue;
    const auto v = glove.lookup(vocab.term(i));
    std::copy(v.begin(), v.end(), emb.table().raw() + i * emb.dim());
  }
}

}  // namespace

nn::Network build_network(const ArchitectureSpec& spec, const features::EmbeddingTable* glove,
                          const features::Vocabulary* vocab) {
  const InputDescriptor& in = spec.input;
  const bool text = in.modality == data::Modality::text;
  Rng rng(derive_seed(spec.seed, 0));
  std::uint64_t dropout_index = 0;
  auto dropout_seed = [&] { return derive_seed(spec.seed, 1000 + dropout_index++); };

  nn::Network net;
  auto add_embedding = [&] {
    auto& emb = net.emplace<nn::Embedding>(in.vocab_size, spec.embedding_dim);
    emb.initialize(rng);
    if (glove && vocab) load_glove_rows(emb, *glove, *vocab);
  };

  switch (spec.family) {
    case Family::dnn: {
      std::size_t width = text ? in.tfidf_width : in.height * in.width * in.channels;
      if (!text) net.emplace<nn::Flatten>();
      for (std::size_t i = 0; i < spec.widths.size(); ++i) {
        net.emplace<nn::Dense>(width, spec.widths[i]).initialize(rng);
        net.emplace<nn::ReLU>();
        net.emplace<nn::Dropout>(spec.dropouts.at(i), dropout_seed());
        width = spec.widths[i];
      }
      net.emplace<nn::Dense>(width, in.classes).initialize(rng);
      break;
    }
    case Family::cnn: {
      std::size_t flat = 0;
      if (text) {
        add_embedding();
        std::size_t length = in.sequence_length, channels = spec.embedding_dim;
        for (std::size_t i = 0; i < spec.widths.size(); ++i) {
          net.emplace<nn::Conv1D>(channels, spec.widths[i], spec.kernels.at(i)).initialize(rng);
          net.emplace<nn::ReLU>();
          net.emplace<nn::MaxPool>(2, 2);
          length = (length - spec.kernels[i] + 1) / 2;
          channels = spec.widths[i];
        }
        flat = length * channels;
      } else {
        std::size_t h = in.height, w = in.width, channels = in.channels;
        for (std::size_t i = 0; i < spec.widths.size(); ++i) {
          net.emplace<nn::Conv2D>(channels, spec.widths[i], spec.kernels.at(i)).initialize(rng);
          net.emplace<nn::ReLU>();
          net.emplace<nn::MaxPool>(2, 2);
          h = (h - spec.kernels[i] + 1) / 2;
          w = (w - spec.kernels[i] + 1) / 2;
          channels = spec.widths[i];
        }
        flat = h * w * channels;
      }
      net.emplace<nn::Flatten>();
      net.emplace<nn::Dense>(flat, spec.head_units).initialize(rng);
      net.emplace<nn::ReLU>();
      net.emplace<nn::Dropout>(spec.dropouts.at(0), dropout_seed());
      net.emplace<nn::Dense>(spec.head_units, in.classes).initialize(rng);
      break;
    }
    case Family::rnn: {
      std::size_t features = 0;
      if (text) {
        add_embedding();
        features = spec.embedding_dim;
      } else {
        // One image row per timestep.
        net.emplace<nn::Reshape>(Shape{in.height, in.width * in.channels});
        features = in.width * in.channels;
      }
      for (std::size_t i = 0; i < spec.widths.size(); ++i) {
        const bool sequences = i + 1 < spec.widths.size();
        if (spec.cell == CellKind::lstm) {
          net.emplace<nn::Lstm>(features, spec.widths[i], sequences).initialize(rng);
        } else {
          net.emplace<nn::Gru>(features, spec.widths[i], sequences).initialize(rng);
        }
        features = spec.widths[i];
      }
      net.emplace<nn::Dropout>(spec.dropouts.at(0), dropout_seed());
      net.emplace<nn::Dense>(features, in.classes).initialize(rng);
      break;
    }
  }
  return net;
}

}  // namespace rmdl
