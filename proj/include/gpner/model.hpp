#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gpner/config.hpp"
#include "gpner/data.hpp"
#include "gpner/decoder.hpp"
#include "gpner/encoder.hpp"
#include "gpner/heads.hpp"
#include "gpner/rope.hpp"

namespace gpner {

// Everything needed to score a sentence: the resolved config, the token
// encoder (trainable embeddings or frozen precomputed vectors) and one
// scoring head. Sentences are processed unpadded; score planes for an
// n-token sentence are n x n.
struct Model {
  RunConfig config;
  EntityTypeSet types;
  HeadKind kind = HeadKind::gp;
  Vocab vocab;  // meaningful only for the embedding encoder

  std::optional<EmbeddingEncoder> embedder;
  std::optional<PrecomputedEmbeddings> frozen;
  std::optional<RotaryEncoding> rope;

  std::optional<GPHead> gp;
  std::optional<EGPHead> egp;

  // Build a fresh, seeded model whose type set comes from the training
  // corpus. Fails if the corpus carries no annotations.
  static Model init(const RunConfig& config, const Corpus& train);

  int v() const;  // encoder output width
  std::vector<Param*> params();
  long long weight_param_count() const;

  // Token representations for one sentence (n x v).
  Matrix encode(const Sentence& s) const;
  ad::Value encode_node(const Sentence& s);

  // Per-type span scores; the plain path carries no gradient tape.
  ScoreTensor score(const Sentence& s) const;
  std::vector<ad::Value> score_nodes(const Sentence& s);

  // Tape loss for one sentence (1x1 node). Empty sentences give 0.
  ad::Value loss_node(const Sentence& s);
  double loss_value(const Sentence& s);  // forward only

  Prediction predict_sentence(const Sentence& s) const;
  std::vector<Prediction> predict(const Corpus& corpus) const;

  // Versioned binary container: magic, format version, resolved config,
  // vocabulary, then each named tensor with shape and float64 payload.
  void save(const std::string& path) const;
  static Model load(const std::string& path);
};

}  // namespace gpner
