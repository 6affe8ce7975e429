#include <zlib.h>

#include <array>
#include <charconv>
#include <cstring>
#include <iterator>
#include <ostream>

#include "bytes.hpp"
#include "rmdl/error.hpp"
#include "rmdl/rmdl.hpp"

namespace rmdl {

// Container layout (all integers little-endian):
//   "RMDL" u32 version
//   block: u64 length, payload, u32 crc32(payload)   -- ensemble header
//   u64 member count, then one block per member
// Doubles are stored as their IEEE-754 bit patterns.

namespace {

using detail::ByteReader;
using detail::ByteWriter;

constexpr std::array<char, 4> kMagic{'R', 'M', 'D', 'L'};

std::uint32_t crc32_of(const std::string& bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

void write_optimizer_config(ByteWriter& w, const optim::OptimizerConfig& c) {
  w.str(optim::to_string(c.kind));
  w.f64(c.learning_rate);
  w.f64(c.momentum);
  w.f64(c.rho);
  w.f64(c.beta1);
  w.f64(c.beta2);
  w.f64(c.epsilon);
}

optim::OptimizerConfig read_optimizer_config(ByteReader& r) {
  optim::OptimizerConfig c;
  c.kind = optim::optimizer_kind_from_string(r.str());
  c.learning_rate = r.f64();
  c.momentum = r.f64();
  c.rho = r.f64();
  c.beta1 = r.f64();
  c.beta2 = r.f64();
  c.epsilon = r.f64();
  return c;
}

void write_ranges(ByteWriter& w, const SamplingRanges& s) {
  for (std::size_t v : {s.dnn_min_layers, s.dnn_max_layers, s.dnn_min_units, s.dnn_max_units, s.cnn_min_blocks,
                        s.cnn_max_blocks, s.cnn_min_filters, s.cnn_max_filters, s.cnn_min_dense, s.cnn_max_dense,
                        s.rnn_min_layers, s.rnn_max_layers, s.rnn_min_units, s.rnn_max_units, s.embedding_dim}) {
    w.size(v);
  }
  w.list(s.cnn_kernels, [&](std::size_t k) { w.size(k); });
  w.list(s.rnn_cells, [&](CellKind c) { w.str(to_string(c)); });
  w.list(s.optimizers, [&](optim::OptimizerKind k) { w.str(optim::to_string(k)); });
  w.f64(s.min_dropout);
  w.f64(s.max_dropout);
  w.f64(s.learning_rate);
}

CellKind cell_from_string(const std::string& s) {
  if (s == "lstm") return CellKind::lstm;
  if (s == "gru") return CellKind::gru;
  throw FormatError("checkpoint: unknown cell '" + s + "'");
}

SamplingRanges read_ranges(ByteReader& r) {
  SamplingRanges s;
  for (std::size_t* v : {&s.dnn_min_layers, &s.dnn_max_layers, &s.dnn_min_units, &s.dnn_max_units, &s.cnn_min_blocks,
                         &s.cnn_max_blocks, &s.cnn_min_filters, &s.cnn_max_filters, &s.cnn_min_dense, &s.cnn_max_dense,
                         &s.rnn_min_layers, &s.rnn_max_layers, &s.rnn_min_units, &s.rnn_max_units, &s.embedding_dim}) {
    *v = r.size();
  }
  s.cnn_kernels = r.list<std::size_t>([&] { return r.size(); });
  s.rnn_cells = r.list<CellKind>([&] { return cell_from_string(r.str()); });
  s.optimizers = r.list<optim::OptimizerKind>([&] { return optim::optimizer_kind_from_string(r.str()); });
  s.min_dropout = r.f64();
  s.max_dropout = r.f64();
  s.learning_rate = r.f64();
  return s;
}

void write_config(ByteWriter& w, const EnsembleConfig& c) {
  for (std::size_t v : {c.dnn, c.cnn, c.rnn}) w.size(v);
  w.u64(c.seed);
  write_ranges(w, c.ranges);
  for (std::size_t v : {c.epochs, c.batch_size, c.max_len, c.ngram_max, c.tfidf_max_features, c.sequence_max_features,
                        c.threads}) {
    w.size(v);
  }
  w.str(to_string(c.vote));
}

EnsembleConfig read_config(ByteReader& r) {
  EnsembleConfig c;
  for (std::size_t* v : {&c.dnn, &c.cnn, &c.rnn}) *v = r.size();
  c.seed = r.u64();
  c.ranges = read_ranges(r);
  for (std::size_t* v : {&c.epochs, &c.batch_size, &c.max_len, &c.ngram_max, &c.tfidf_max_features,
                         &c.sequence_max_features, &c.threads}) {
    *v = r.size();
  }
  c.vote = vote_mode_from_string(r.str());
  return c;
}

void write_input(ByteWriter& w, const InputDescriptor& in) {
  w.u8(in.modality == data::Modality::image ? 0 : 1);
  for (std::size_t v : {in.height, in.width, in.channels, in.tfidf_width, in.sequence_length, in.vocab_size, in.classes}) {
    w.size(v);
  }
}

InputDescriptor read_input(ByteReader& r) {
  InputDescriptor in;
  const auto modality = r.u8();
  if (modality > 1) throw FormatError("checkpoint: bad modality");
  in.modality = modality == 0 ? data::Modality::image : data::Modality::text;
  for (std::size_t* v : {&in.height, &in.width, &in.channels, &in.tfidf_width, &in.sequence_length, &in.vocab_size,
                         &in.classes}) {
    *v = r.size();
  }
  return in;
}

void write_vocab(ByteWriter& w, const features::Vocabulary& v) {
  w.size(v.documents());
  w.size(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    w.str(v.term(i));
    w.size(v.df(i));
  }
}

features::Vocabulary read_vocab(ByteReader& r) {
  const std::size_t documents = r.size();
  const std::size_t n = r.size();
  std::vector<std::string> terms;
  std::vector<std::size_t> df;
  for (std::size_t i = 0; i < n; ++i) {
    terms.push_back(r.str());
    df.push_back(r.size());
  }
  return features::Vocabulary::from_parts(std::move(terms), std::move(df), documents);
}

void write_spec(ByteWriter& w, const ArchitectureSpec& s) {
  w.str(to_string(s.family));
  w.list(s.widths, [&](std::size_t v) { w.size(v); });
  w.list(s.kernels, [&](std::size_t v) { w.size(v); });
  w.list(s.dropouts, [&](double v) { w.f64(v); });
  w.size(s.head_units);
  w.str(to_string(s.cell));
  w.size(s.embedding_dim);
  write_optimizer_config(w, s.optimizer);
  w.u64(s.seed);
  write_input(w, s.input);
}

ArchitectureSpec read_spec(ByteReader& r) {
  ArchitectureSpec s;
  s.family = family_from_string(r.str());
  s.widths = r.list<std::size_t>([&] { return r.size(); });
  s.kernels = r.list<std::size_t>([&] { return r.size(); });
  s.dropouts = r.list<double>([&] { return r.f64(); });
  s.head_units = r.size();
  s.cell = cell_from_string(r.str());
  s.embedding_dim = r.size();
  s.optimizer = read_optimizer_config(r);
  s.seed = r.u64();
  s.input = read_input(r);
  return s;
}

std::string header_payload(const Ensemble& e) {
  ByteWriter w;
  write_config(w, e.config);
  write_input(w, e.input);
  w.list(e.class_names, [&](const std::string& s) { w.str(s); });
  w.boolean(e.input.modality == data::Modality::text);
  if (e.input.modality == data::Modality::text) {
    write_vocab(w, e.text.tfidf.vocab);
    w.size(e.text.tfidf.ngram_max);
    write_vocab(w, e.text.sequence_vocab);
    w.size(e.text.max_len);
  }
  return w.bytes();
}

std::string member_payload(const Member& m) {
  ByteWriter w;
  write_spec(w, m.spec);
  w.boolean(m.failed);
  w.str(m.failure);
  auto& net = const_cast<nn::Network&>(m.network);  // params() hands out mutable views; nothing is modified here
  const auto params = net.params();
  w.size(params.size());
  for (const auto& p : params) {
    w.str(p.name);
    w.tensor(*p.value);
  }
  write_optimizer_config(w, m.optimizer.config());
  w.u64(m.optimizer.steps());
  w.list(m.optimizer.first_moments(), [&](const Tensor& t) { w.tensor(t); });
  w.list(m.optimizer.second_moments(), [&](const Tensor& t) { w.tensor(t); });
  w.list(m.history, [&](const EpochRecord& h) {
    w.size(h.epoch);
    w.f64(h.loss);
    w.f64(h.accuracy);
  });
  return w.bytes();
}

void write_block(std::ostream& out, const std::string& payload) {
  ByteWriter w;
  w.u64(payload.size());
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  ByteWriter crc;
  crc.u32(crc32_of(payload));
  out.write(crc.bytes().data(), 4);
}

std::string read_block(ByteReader& r, const std::string& what) {
  std::string payload(r.raw(r.size()));
  const std::uint32_t stored = r.u32();
  if (stored != crc32_of(payload)) throw ChecksumError("checkpoint: checksum mismatch in " + what);
  return payload;
}

Member read_member(const std::string& payload, std::size_t index, const InputDescriptor& input) {
  ByteReader r(payload, "checkpoint model " + std::to_string(index));
  Member m;
  m.spec = read_spec(r);
  if (!(m.spec.input == input)) throw FormatError(r.context() + ": input descriptor differs from the ensemble's");
  m.failed = r.boolean();
  m.failure = r.str();
  try {
    m.network = build_network(m.spec);
  } catch (const Error& e) {
    throw FormatError(r.context() + ": cannot rebuild architecture: " + e.what());
  }
  auto params = m.network.params();
  if (r.size() != params.size()) throw FormatError(r.context() + ": parameter count differs from the architecture");
  for (auto& p : params) {
    const std::string name = r.str();
    Tensor value = r.tensor();
    if (name != p.name || value.shape() != p.value->shape()) {
      throw FormatError(r.context() + ": parameter '" + name + "' does not match the architecture");
    }
    *p.value = std::move(value);
  }
  m.optimizer = optim::OptimizerState(read_optimizer_config(r));
  const std::uint64_t steps = r.u64();
  auto first = r.list<Tensor>([&] { return r.tensor(); });
  auto second = r.list<Tensor>([&] { return r.tensor(); });
  m.optimizer.restore(steps, std::move(first), std::move(second));
  m.history = r.list<EpochRecord>([&] {
    EpochRecord h;
    h.epoch = r.size();
    h.loss = r.f64();
    h.accuracy = r.f64();
    return h;
  });
  if (!r.done()) throw FormatError(r.context() + ": trailing bytes");
  return m;
}

}  // namespace

void save_checkpoint(const Ensemble& ensemble, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  ByteWriter version;
  version.u32(kCheckpointVersion);
  out.write(version.bytes().data(), 4);
  write_block(out, header_payload(ensemble));
  ByteWriter count;
  count.u64(ensemble.members.size());
  out.write(count.bytes().data(), 8);
  for (const auto& m : ensemble.members) write_block(out, member_payload(m));
  if (!out) throw Error("checkpoint: write failed");
}

Ensemble load_checkpoint(std::istream& in) {
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic.data(), 4) != 0) {
    throw FormatError("checkpoint: bad magic (not an RMDL checkpoint)");
  }
  ByteReader r(std::string_view(bytes).substr(4), "checkpoint");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version) + " (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  Ensemble e;
  {
    const std::string payload = read_block(r, "header");
    ByteReader h(payload, "checkpoint header");
    try {
      e.config = read_config(h);
      e.input = read_input(h);
      e.class_names = h.list<std::string>([&] { return h.str(); });
      if (h.boolean()) {
        e.text.tfidf.vocab = read_vocab(h);
        e.text.tfidf.ngram_max = h.size();
        e.text.sequence_vocab = read_vocab(h);
        e.text.max_len = h.size();
      }
    } catch (const FormatError&) {
      throw;
    } catch (const Error& err) {
      throw FormatError(std::string("checkpoint header: ") + err.what());
    }
    if (!h.done()) throw FormatError("checkpoint header: trailing bytes");
    if (e.class_names.size() != e.input.classes) throw FormatError("checkpoint header: class names do not match K");
  }
  const std::size_t count = r.size();
  for (std::size_t i = 0; i < count; ++i) {
    const std::string payload = read_block(r, "model " + std::to_string(i));
    try {
      e.members.push_back(read_member(payload, i, e.input));
    } catch (const FormatError&) {
      throw;
    } catch (const Error& err) {
      throw FormatError("checkpoint model " + std::to_string(i) + ": " + err.what());
    }
  }
  if (!r.done()) throw FormatError("checkpoint: trailing bytes after the last model");
  return e;
}

void write_history_csv(const Ensemble& ensemble, std::ostream& out) {
  out << "epoch,model_id,family,loss,accuracy\n";
  auto number = [](double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
  };
  for (std::size_t id = 0; id < ensemble.members.size(); ++id) {
    const auto& m = ensemble.members[id];
    for (const auto& h : m.history) {
      out << h.epoch << ',' << id << ',' << to_string(m.spec.family) << ',' << number(h.loss) << ','
          << number(h.accuracy) << '\n';
    }
  }
}

}  // namespace rmdl
