#include "gpner/model.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <map>

#include "gpner/error.hpp"
#include "gpner/loss.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint layout assumes a little-endian host");

namespace gpner {

Model Model::init(const RunConfig& config, const Corpus& train) {
  config.validate();

  Model m;
  m.config = config;
  m.kind = head_kind_from(config.head.kind);

  const auto type_names = train.entity_types();
  if (type_names.empty()) {
    throw ValidationError("training corpus carries no entity annotations");
  }
  m.types = EntityTypeSet(type_names);

  Rng enc_rng(Rng::mix(config.seed, 1));
  Rng head_rng(Rng::mix(config.seed, 2));

  if (config.encoder.kind == "embedding") {
    m.vocab = Vocab::build(train);
    m.embedder = EmbeddingEncoder::init(m.vocab.size(), config.encoder.dim,
                                        config.encoder.mix, enc_rng);
  } else {
    if (config.encoder.precomputed.empty()) {
      throw ValidationError(
          "encoder.kind=precomputed needs encoder.precomputed to name the "
          "embeddings file");
    }
    m.vocab = Vocab::from_tokens({"<pad>", "<unk>"});
    m.frozen = PrecomputedEmbeddings::load(config.encoder.precomputed);
    if (m.frozen->dim() != config.encoder.dim) {
      throw ValidationError(
          "precomputed embeddings have dimension " +
          std::to_string(m.frozen->dim()) + " but encoder.dim is " +
          std::to_string(config.encoder.dim));
    }
  }

  if (config.rope.enabled) {
    m.rope.emplace(config.head.d, config.rope.base);
  }

  if (m.kind == HeadKind::gp) {
    m.gp = GPHead::init(m.types, m.v(), config.head.d, head_rng);
  } else {
    m.egp = EGPHead::init(m.types, m.v(), config.head.d,
                          m.kind == HeadKind::egp_h, head_rng);
  }
  return m;
}

int Model::v() const { return config.encoder.dim; }

std::vector<Param*> Model::params() {
  std::vector<Param*> out;
  if (embedder) {
    for (Param* p : embedder->params()) out.push_back(p);
  }
  auto head = gp ? gp->params() : egp->params();
  out.insert(out.end(), head.begin(), head.end());
  return out;
}

long long Model::weight_param_count() const {
  return gp ? gp->weight_param_count() : egp->weight_param_count();
}

Matrix Model::encode(const Sentence& s) const {
  if (embedder) return embedder->encode(vocab.ids(s.tokens));
  return frozen->lookup(s.id, s.length());
}

ad::Value Model::encode_node(const Sentence& s) {
  if (embedder) return embedder->encode_node(vocab.ids(s.tokens));
  return ad::constant(frozen->lookup(s.id, s.length()));
}

namespace {

Matrix block_rows(const Matrix& w, int begin, int count) {
  Matrix out(count, w.cols());
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < w.cols(); ++j) out.at(i, j) = w.at(begin + i, j);
  }
  return out;
}

}  // namespace

ScoreTensor Model::score(const Sentence& s) const {
  const Matrix h = encode(s);
  const int n = h.rows();

  ScoreTensor out;
  out.mask = Mask{n, n, config.head.max_span_len};
  out.scores.reserve(types.size());

  const RotaryEncoding* rot = rope ? &*rope : nullptr;
  if (kind == HeadKind::gp) {
    for (int t = 0; t < types.size(); ++t) {
      auto [q, k] = project(h, *gp, types.name(t));
      if (rot) {
        rot->rotate_rows_in_place(q);
        rot->rotate_rows_in_place(k);
      }
      out.scores.push_back(matmul_nt(q, k));
    }
  } else {
    auto [q, k] = project(h, *egp);
    Matrix qr = q, kr = k;
    if (rot) {
      rot->rotate_rows_in_place(qr);
      rot->rotate_rows_in_place(kr);
    }
    // Rotation touches only the shared extraction product; the per-type
    // terms read the unrotated projections (or raw embeddings).
    const Matrix extraction = matmul_nt(qr, kr);
    const int d = egp->d, vdim = egp->v;
    for (int t = 0; t < types.size(); ++t) {
      const Matrix& w = egp->type_w[t].value;
      Matrix row_term, col_term;
      if (egp->over_h) {
        row_term = matmul(h, block_rows(w, 0, vdim));
        col_term = matmul(h, block_rows(w, vdim, vdim));
      } else {
        row_term = add(matmul(q, block_rows(w, 0, d)),
                       matmul(k, block_rows(w, d, d)));
        col_term = add(matmul(q, block_rows(w, 2 * d, d)),
                       matmul(k, block_rows(w, 3 * d, d)));
      }
      Matrix plane(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          plane.at(i, j) =
              extraction.at(i, j) + (row_term.at(i, 0) + col_term.at(j, 0));
        }
      }
      out.scores.push_back(std::move(plane));
    }
  }
  return out;
}

std::vector<ad::Value> Model::score_nodes(const Sentence& s) {
  ad::Value h = encode_node(s);
  const RotaryEncoding* rot = rope ? &*rope : nullptr;
  return kind == HeadKind::gp ? score_gp(h, *gp, rot)
                              : score_egp(h, *egp, rot);
}

ad::Value Model::loss_node(const Sentence& s) {
  const Mask mask{s.length(), s.length(), config.head.max_span_len};
  const std::vector<SpanAnnotation> labels(s.annotations.begin(),
                                           s.annotations.end());
  const LossSets sets =
      build_loss_sets(mask, labels, types, config.loss.threshold);
  const auto planes = score_nodes(s);
  return config.loss.kind == "bce" ? span_bce_node(planes, sets)
                                   : span_loss_node(planes, sets);
}

double Model::loss_value(const Sentence& s) {
  const ScoreTensor tensor = score(s);
  const std::vector<SpanAnnotation> labels(s.annotations.begin(),
                                           s.annotations.end());
  return config.loss.kind == "bce"
             ? span_bce(tensor, labels, types)
             : span_loss(tensor, labels, types, config.loss.threshold);
}

Prediction Model::predict_sentence(const Sentence& s) const {
  const ScoreTensor tensor = score(s);
  return Prediction{s.id,
                    decode_spans(tensor, types, config.decode.threshold,
                                 decode_mode_from(config.decode.mode))};
}

std::vector<Prediction> Model::predict(const Corpus& corpus) const {
  std::vector<Prediction> out;
  out.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) out.push_back(predict_sentence(s));
  return out;
}

namespace {

constexpr char kMagic[8] = {'G', 'P', 'N', 'E', 'R', 'B', 'I', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_str(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw ParseError(path + ": truncated checkpoint");
  }
  return v;
}
std::uint64_t get_u64(std::istream& in, const std::string& path) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw ParseError(path + ": truncated checkpoint");
  }
  return v;
}
std::string get_str(std::istream& in, const std::string& path) {
  const std::uint64_t n = get_u64(in, path);
  if (n > (1ULL << 32)) throw ParseError(path + ": corrupt string length");
  std::string s(n, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw ParseError(path + ": truncated checkpoint");
  }
  return s;
}

}  // namespace

void Model::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);

  out.write(kMagic, sizeof kMagic);
  put_u32(out, kVersion);
  put_str(out, config.to_text());

  put_u64(out, vocab.tokens().size());
  for (const auto& t : vocab.tokens()) put_str(out, t);

  put_u64(out, types.names().size());
  for (const auto& t : types.names()) put_str(out, t);

  // params() only hands out non-const pointers; nothing is written here
  auto params = const_cast<Model*>(this)->params();
  put_u64(out, params.size());
  for (const Param* p : params) {
    put_str(out, p->name);
    put_u32(out, static_cast<std::uint32_t>(p->value.rows()));
    put_u32(out, static_cast<std::uint32_t>(p->value.cols()));
    out.write(reinterpret_cast<const char*>(p->value.data().data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) throw ValidationError("write failed for " + path);
}

Model Model::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);

  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) ||
      !std::equal(magic, magic + sizeof magic, kMagic)) {
    throw ParseError(path + ": not a checkpoint file");
  }
  const auto version = get_u32(in, path);
  if (version != kVersion) {
    throw ParseError(path + ": unsupported checkpoint version " +
                     std::to_string(version));
  }

  const RunConfig config = RunConfig::from_text(get_str(in, path));

  std::vector<std::string> vocab_tokens(get_u64(in, path));
  for (auto& t : vocab_tokens) t = get_str(in, path);

  std::vector<std::string> type_names(get_u64(in, path));
  for (auto& t : type_names) t = get_str(in, path);

  Model m;
  m.config = config;
  m.kind = head_kind_from(config.head.kind);
  m.types = EntityTypeSet(type_names);
  m.vocab = Vocab::from_tokens(std::move(vocab_tokens));

  Rng dummy(0);  // shapes only; every tensor is overwritten below
  if (config.encoder.kind == "embedding") {
    m.embedder = EmbeddingEncoder::init(m.vocab.size(), config.encoder.dim,
                                        config.encoder.mix, dummy);
  } else {
    m.frozen = PrecomputedEmbeddings::load(config.encoder.precomputed);
    if (m.frozen->dim() != config.encoder.dim) {
      throw ValidationError(
          path + ": precomputed embeddings have dimension " +
          std::to_string(m.frozen->dim()) + " but the checkpoint expects " +
          std::to_string(config.encoder.dim));
    }
  }
  if (config.rope.enabled) m.rope.emplace(config.head.d, config.rope.base);
  if (m.kind == HeadKind::gp) {
    m.gp = GPHead::init(m.types, m.v(), config.head.d, dummy);
  } else {
    m.egp = EGPHead::init(m.types, m.v(), config.head.d,
                          m.kind == HeadKind::egp_h, dummy);
  }

  std::map<std::string, Matrix> tensors;
  const std::uint64_t count = get_u64(in, path);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = get_str(in, path);
    const int rows = static_cast<int>(get_u32(in, path));
    const int cols = static_cast<int>(get_u32(in, path));
    Matrix mtx(rows, cols);
    if (!in.read(reinterpret_cast<char*>(mtx.data().data()),
                 static_cast<std::streamsize>(mtx.size() * sizeof(double)))) {
      throw ParseError(path + ": truncated tensor " + name);
    }
    if (!tensors.emplace(name, std::move(mtx)).second) {
      throw ParseError(path + ": duplicate tensor " + name);
    }
  }

  auto params = m.params();
  if (params.size() != tensors.size()) {
    throw ValidationError(path + ": checkpoint holds " +
                          std::to_string(tensors.size()) +
                          " tensors but the model needs " +
                          std::to_string(params.size()));
  }
  for (Param* p : params) {
    auto it = tensors.find(p->name);
    if (it == tensors.end()) {
      throw ValidationError(path + ": checkpoint is missing tensor " + p->name);
    }
    if (!it->second.same_shape(p->value)) {
      throw ValidationError(path + ": tensor " + p->name + " has shape " +
                            it->second.shape_str() + " but the model expects " +
                            p->value.shape_str());
    }
    p->value = std::move(it->second);
  }
  return m;
}

}  // namespace gpner
