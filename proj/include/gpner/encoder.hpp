#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "gpner/autodiff.hpp"
#include "gpner/data.hpp"
#include "gpner/matrix.hpp"
#include "gpner/rng.hpp"

namespace gpner {

// Token <-> id table. Ids 0 and 1 are reserved for padding and
// out-of-vocabulary tokens; corpus tokens follow in sorted order so the
// same corpus always yields the same table.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  static Vocab build(const Corpus& corpus);
  static Vocab from_tokens(std::vector<std::string> tokens);  // checkpoint load

  int size() const { return static_cast<int>(tokens_.size()); }
  int id(const std::string& token) const;  // kUnk when unknown
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<int> ids(const std::vector<std::string>& tokens) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Trainable token encoder: an embedding table followed by a window-3
// mixer, so each output row sees its token and both neighbours. Output is
// n x dim for an n-token sentence. With mix=false the mixer is dropped and
// row i is exactly the table row of token i.
struct EmbeddingEncoder {
  int vocab_size = 0;
  int dim = 0;
  bool mix = true;
  Param table;  // vocab_size x dim
  Param w_mix;  // 3*dim x dim, only when mix
  Param b_mix;  // 1 x dim, only when mix

  static EmbeddingEncoder init(int vocab_size, int dim, bool mix, Rng& rng);

  std::vector<Param*> params();
  Matrix encode(const std::vector<int>& ids) const;  // no tape
  ad::Value encode_node(const std::vector<int>& ids);
};

// Frozen per-sentence token vectors loaded from a file, keyed by sentence
// id. Stands in for an upstream contextual encoder.
class PrecomputedEmbeddings {
 public:
  static PrecomputedEmbeddings load(const std::string& path);
  static PrecomputedEmbeddings load(std::istream& in, const std::string& origin);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(order_.size()); }
  // Fails if the id is missing or the row count differs from n_tokens.
  const Matrix& lookup(const std::string& id, int n_tokens) const;

 private:
  int dim_ = 0;
  std::unordered_map<std::string, Matrix> by_id_;
  std::vector<std::string> order_;
};

// Emit one embedding block per corpus sentence, generated from the seed.
// The text format round-trips through PrecomputedEmbeddings::load.
void write_precomputed(const Corpus& corpus, int dim, unsigned long long seed,
                       std::ostream& out);
void write_precomputed(const Corpus& corpus, int dim, unsigned long long seed,
                       const std::string& path);

}  // namespace gpner
