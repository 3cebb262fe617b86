#include "gpner/encoder.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "gpner/error.hpp"
#include "gpner/heads.hpp"

namespace gpner {

Vocab Vocab::build(const Corpus& corpus) {
  std::set<std::string> seen;
  for (const auto& s : corpus.sentences) {
    seen.insert(s.tokens.begin(), s.tokens.end());
  }
  std::vector<std::string> tokens = {"<pad>", "<unk>"};
  tokens.insert(tokens.end(), seen.begin(), seen.end());
  return from_tokens(std::move(tokens));
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2) {
    throw ValidationError("vocabulary needs at least the two reserved entries");
  }
  Vocab v;
  v.tokens_ = std::move(tokens);
  for (int i = 0; i < v.size(); ++i) {
    v.index_.emplace(v.tokens_[i], i);  // first wins on duplicates
  }
  return v;
}

int Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) {
    throw DimError("token id " + std::to_string(id) + " out of range for " +
                   std::to_string(size()) + " entries");
  }
  return tokens_[id];
}

std::vector<int> Vocab::ids(const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

EmbeddingEncoder EmbeddingEncoder::init(int vocab_size, int dim, bool mix,
                                        Rng& rng) {
  if (vocab_size < 2 || dim < 1) {
    throw DimError("encoder needs vocab_size >= 2 and dim >= 1, got " +
                   std::to_string(vocab_size) + " and " + std::to_string(dim));
  }
  EmbeddingEncoder e;
  e.vocab_size = vocab_size;
  e.dim = dim;
  e.mix = mix;
  Matrix table(vocab_size, dim);
  const double r = 0.5 / std::sqrt(static_cast<double>(dim));
  for (double& v : table.data()) v = rng.uniform(-r, r);
  e.table = Param("encoder.table", std::move(table));
  if (mix) {
    e.w_mix = Param("encoder.w_mix", init_weight(3 * dim, dim, rng));
    e.b_mix = Param("encoder.b_mix", Matrix(1, dim));
  }
  return e;
}

std::vector<Param*> EmbeddingEncoder::params() {
  if (!mix) return {&table};
  return {&table, &w_mix, &b_mix};
}

namespace {

void check_token_ids(const std::vector<int>& ids, int vocab_size) {
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= vocab_size) {
      throw ValidationError("token id " + std::to_string(ids[i]) +
                            " at position " + std::to_string(i) +
                            " outside vocabulary of size " +
                            std::to_string(vocab_size));
    }
  }
}

Matrix gather_rows(const Matrix& table, const std::vector<int>& ids) {
  Matrix out(static_cast<int>(ids.size()), table.cols());
  for (int i = 0; i < out.rows(); ++i) {
    const double* src = table.row(ids[i]);
    std::copy(src, src + table.cols(), out.row(i));
  }
  return out;
}

Matrix window3_rows(const Matrix& x) {
  const int n = x.rows(), v = x.cols();
  Matrix out(n, 3 * v);
  for (int i = 0; i < n; ++i) {
    for (int s = -1; s <= 1; ++s) {
      const int src = i + s;
      if (src < 0 || src >= n) continue;
      const double* from = x.row(src);
      std::copy(from, from + v, out.row(i) + (s + 1) * v);
    }
  }
  return out;
}

}  // namespace

Matrix EmbeddingEncoder::encode(const std::vector<int>& ids) const {
  check_token_ids(ids, vocab_size);
  Matrix rows = gather_rows(table.value, ids);
  if (!mix) return rows;
  return affine(window3_rows(rows), w_mix.value, b_mix.value);
}

ad::Value EmbeddingEncoder::encode_node(const std::vector<int>& ids) {
  auto rows = ad::embedding_rows(ad::leaf(table), ids);
  if (!mix) return rows;
  return ad::affine(ad::window3(rows), ad::leaf(w_mix), ad::leaf(b_mix));
}

PrecomputedEmbeddings PrecomputedEmbeddings::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return load(in, path);
}

PrecomputedEmbeddings PrecomputedEmbeddings::load(std::istream& in,
                                                  const std::string& origin) {
  auto fail = [&](int line_no, const std::string& msg) -> ParseError {
    return ParseError(origin + " line " + std::to_string(line_no) + ": " + msg);
  };

  PrecomputedEmbeddings pe;
  std::string line;
  int line_no = 0;

  // Header: "#emb v=<dim>"
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("#emb v=", 0) != 0) {
      throw fail(line_no, "expected header \"#emb v=<dim>\"");
    }
    try {
      pe.dim_ = std::stoi(line.substr(7));
    } catch (const std::exception&) {
      throw fail(line_no, "bad dimension in header");
    }
    if (pe.dim_ < 1) throw fail(line_no, "dimension must be >= 1");
    break;
  }
  if (pe.dim_ == 0) throw ParseError(origin + ": missing \"#emb\" header");

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind(">s ", 0) != 0) {
      throw fail(line_no, "expected sentence header \">s <id> n=<len>\"");
    }
    std::istringstream head(line.substr(3));
    std::string id, nfield;
    if (!(head >> id >> nfield) || nfield.rfind("n=", 0) != 0) {
      throw fail(line_no, "expected sentence header \">s <id> n=<len>\"");
    }
    int n = 0;
    try {
      n = std::stoi(nfield.substr(2));
    } catch (const std::exception&) {
      throw fail(line_no, "bad row count in sentence header");
    }
    if (n < 0) throw fail(line_no, "row count must be >= 0");
    if (pe.by_id_.count(id)) {
      throw fail(line_no, "duplicate sentence id \"" + id + "\"");
    }

    Matrix m(n, pe.dim_);
    for (int r = 0; r < n; ++r) {
      if (!std::getline(in, line)) {
        throw fail(line_no, "sentence \"" + id + "\" is missing rows");
      }
      ++line_no;
      std::istringstream row(line);
      for (int c = 0; c < pe.dim_; ++c) {
        if (!(row >> m.at(r, c))) {
          throw fail(line_no, "expected " + std::to_string(pe.dim_) +
                                  " values per row");
        }
      }
      double extra;
      if (row >> extra) {
        throw fail(line_no, "expected " + std::to_string(pe.dim_) +
                                " values per row");
      }
    }
    pe.by_id_.emplace(id, std::move(m));
    pe.order_.push_back(id);
  }
  return pe;
}

const Matrix& PrecomputedEmbeddings::lookup(const std::string& id,
                                            int n_tokens) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) {
    throw ValidationError("no precomputed embeddings for sentence \"" + id +
                          "\"");
  }
  if (it->second.rows() != n_tokens) {
    throw ValidationError("precomputed embeddings for sentence \"" + id +
                          "\" have " + std::to_string(it->second.rows()) +
                          " rows but the sentence has " +
                          std::to_string(n_tokens) + " tokens");
  }
  return it->second;
}

void write_precomputed(const Corpus& corpus, int dim, unsigned long long seed,
                       std::ostream& out) {
  if (dim < 1) throw ValidationError("embedding dimension must be >= 1");
  Rng rng(seed);
  char buf[64];
  out << "#emb v=" << dim << "\n";
  for (const auto& s : corpus.sentences) {
    if (s.id.find_first_of(" \t") != std::string::npos) {
      throw ValidationError("sentence id \"" + s.id +
                            "\" contains whitespace and cannot be written to "
                            "an embedding file");
    }
    out << ">s " << s.id << " n=" << s.length() << "\n";
    for (int i = 0; i < s.length(); ++i) {
      for (int c = 0; c < dim; ++c) {
        // %.17g keeps the values bit-exact across a write/read cycle
        std::snprintf(buf, sizeof(buf), "%.17g", rng.uniform(-1.0, 1.0));
        out << (c ? " " : "") << buf;
      }
      out << "\n";
    }
  }
}

void write_precomputed(const Corpus& corpus, int dim, unsigned long long seed,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  write_precomputed(corpus, dim, seed, out);
}

}  // namespace gpner
