#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "gpner/config.hpp"
#include "gpner/data.hpp"
#include "gpner/error.hpp"
#include "gpner/model.hpp"
#include "test_util.hpp"

using namespace gpner;
using testutil::TempDir;

namespace {

Corpus small_corpus() {
  Corpus c;
  Sentence a{"a", {"the", "open0", "x", "close0", "end"}, {{1, 3, "T0"}}};
  Sentence b{"b", {"open1", "close1", "pad"}, {{0, 1, "T1"}}};
  Sentence empty{"c", {"just", "words"}, {}};
  c.sentences = {a, b, empty};
  return c;
}

RunConfig small_config(const std::vector<std::string>& extra = {}) {
  std::vector<std::string> overrides = {"encoder.dim=6", "head.d=4"};
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  return RunConfig::from_sources("", overrides, 11);
}

bool same_predictions(const std::vector<Prediction>& a,
                      const std::vector<Prediction>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].id != b[i].id) return false;
    if (a[i].spans.size() != b[i].spans.size()) return false;
    for (size_t k = 0; k < a[i].spans.size(); ++k) {
      if (!(a[i].spans[k].span == b[i].spans[k].span)) return false;
      if (a[i].spans[k].score != b[i].spans[k].score) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("init derives the type set from the corpus") {
  Model m = Model::init(small_config(), small_corpus());
  CHECK(m.types.names() == std::vector<std::string>{"T0", "T1"});
  CHECK(m.v() == 6);
  CHECK(m.kind == HeadKind::gp);
  CHECK(m.embedder.has_value());
  CHECK(m.gp.has_value());
  CHECK_FALSE(m.egp.has_value());
  CHECK(m.rope.has_value());
  CHECK_FALSE(m.params().empty());

  Corpus unlabeled;
  unlabeled.sentences = {Sentence{"x", {"a"}, {}}};
  CHECK_THROWS_AS(Model::init(small_config(), unlabeled), ValidationError);
}

TEST_CASE("same seed and corpus build the same model bitwise") {
  Model a = Model::init(small_config(), small_corpus());
  Model b = Model::init(small_config(), small_corpus());
  auto pa = a.params(), pb = b.params();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i]->name == pb[i]->name);
    CHECK(pa[i]->value == pb[i]->value);
  }
  CHECK(same_predictions(a.predict(small_corpus()),
                         b.predict(small_corpus())));
}

TEST_CASE("plain scoring equals tape scoring bitwise for every head") {
  // The no-tape path used by predict must reproduce the training-time
  // forward pass exactly, else train metrics and eval metrics drift apart.
  Corpus corpus = small_corpus();
  for (const std::string kind : {"gp", "egp", "egp-h"}) {
    for (bool rope : {true, false}) {
      CAPTURE(kind);
      CAPTURE(rope);
      RunConfig cfg = small_config(
          {"head.kind=" + kind,
           std::string("rope.enabled=") + (rope ? "true" : "false")});
      Model m = Model::init(cfg, corpus);
      for (const Sentence& s : corpus.sentences) {
        ScoreTensor plain = m.score(s);
        std::vector<ad::Value> taped = m.score_nodes(s);
        REQUIRE(plain.scores.size() == taped.size());
        for (size_t t = 0; t < taped.size(); ++t) {
          REQUIRE(plain.scores[t].rows() == s.length());
          CHECK(plain.scores[t] == taped[t]->value);
        }
      }
    }
  }
}

TEST_CASE("loss node value equals the plain loss bitwise") {
  Corpus corpus = small_corpus();
  for (const std::string loss : {"global-pointer", "bce"}) {
    CAPTURE(loss);
    RunConfig cfg = small_config({"loss.kind=" + loss});
    Model m = Model::init(cfg, corpus);
    for (const Sentence& s : corpus.sentences) {
      CHECK(m.loss_node(s)->value.at(0, 0) == m.loss_value(s));
    }
  }
  // An annotated sentence has positive loss; spans of an empty sentence
  // are all negatives, so the loss is still positive but small.
  Model m = Model::init(small_config(), corpus);
  CHECK(m.loss_value(corpus.sentences[0]) > 0.0);
}

TEST_CASE("max_span_len caps both training mask and predictions") {
  Corpus corpus = small_corpus();
  RunConfig cfg = small_config({"head.max_span_len=2"});
  Model m = Model::init(cfg, corpus);
  ScoreTensor t = m.score(corpus.sentences[0]);
  CHECK(t.mask.max_span_len == 2);
  CHECK_FALSE(t.mask.at(0, 3));
  // The gold span (1,3) is length 3 and now falls outside the mask.
  CHECK_THROWS_AS(m.loss_value(corpus.sentences[0]), ValidationError);
  // Decoding with a low threshold can only produce capped spans.
  m.config.decode.threshold = -1e9;
  for (const Prediction& p : m.predict(corpus))
    for (const ScoredSpan& s : p.spans) CHECK(s.span.length() <= 2);
}

TEST_CASE("unknown tokens map to unk and still score") {
  Model m = Model::init(small_config(), small_corpus());
  Sentence oov{"z", {"totally", "unseen", "tokens"}, {}};
  Prediction p = m.predict_sentence(oov);
  CHECK(p.id == "z");  // no crash; spans may or may not appear
  ScoreTensor t = m.score(oov);
  CHECK(t.scores[0].all_finite());
}

TEST_CASE("checkpoint round trip preserves behavior exactly") {
  TempDir dir("model");
  Corpus corpus = small_corpus();
  RunConfig cfg = small_config({"head.kind=egp", "decode.threshold=-5"});
  Model m = Model::init(cfg, corpus);
  m.save(dir.file("m.ckpt"));

  Model back = Model::load(dir.file("m.ckpt"));
  CHECK(back.types.names() == m.types.names());
  CHECK(back.kind == HeadKind::egp);
  CHECK(back.config.to_text() == m.config.to_text());
  CHECK(back.vocab.tokens() == m.vocab.tokens());
  auto pa = m.params(), pb = back.params();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i]->name == pb[i]->name);
    CHECK(pa[i]->value == pb[i]->value);
  }
  CHECK(same_predictions(m.predict(corpus), back.predict(corpus)));

  // Saving the loaded model reproduces the file byte for byte.
  back.save(dir.file("m2.ckpt"));
  CHECK(testutil::slurp(dir.file("m.ckpt")) ==
        testutil::slurp(dir.file("m2.ckpt")));
}

TEST_CASE("checkpoint loader rejects damaged files") {
  TempDir dir("model");
  testutil::spit(dir.file("junk.bin"), "not a checkpoint at all");
  CHECK_THROWS_AS(Model::load(dir.file("junk.bin")), ParseError);

  Model m = Model::init(small_config(), small_corpus());
  m.save(dir.file("ok.ckpt"));
  std::string bytes = testutil::slurp(dir.file("ok.ckpt"));
  // Truncate in the middle of the tensor payload.
  testutil::spit(dir.file("cut.ckpt"), bytes.substr(0, bytes.size() - 9));
  CHECK_THROWS_AS(Model::load(dir.file("cut.ckpt")), ParseError);
  // Flip the version field (bytes 8..11, right after the 8-byte magic).
  std::string wrong = bytes;
  wrong[8] = static_cast<char>(0x7f);
  testutil::spit(dir.file("ver.ckpt"), wrong);
  CHECK_THROWS_AS(Model::load(dir.file("ver.ckpt")), ParseError);
  CHECK_THROWS_AS(Model::load(dir.file("absent.ckpt")), ValidationError);
}

TEST_CASE("precomputed embeddings drive a frozen encoder") {
  TempDir dir("model");
  Corpus corpus = small_corpus();
  write_precomputed(corpus, 6, 33, dir.file("emb.txt"));

  RunConfig cfg = small_config({"encoder.kind=precomputed",
                                "encoder.precomputed=" + dir.file("emb.txt")});
  Model m = Model::init(cfg, corpus);
  CHECK(m.frozen.has_value());
  CHECK_FALSE(m.embedder.has_value());
  // Only head parameters are trainable.
  for (Param* p : m.params())
    CHECK(p->name.rfind("head.", 0) == 0);
  // Encoding returns the stored rows verbatim.
  Matrix h = m.encode(corpus.sentences[0]);
  CHECK(h == m.frozen->lookup("a", corpus.sentences[0].length()));

  // Sentences missing from the file are an error.
  Sentence missing{"nope", {"x"}, {}};
  CHECK_THROWS_AS(m.encode(missing), ValidationError);

  // Dimension mismatch between config and file is rejected at init.
  RunConfig bad = small_config({"encoder.kind=precomputed", "encoder.dim=5",
                                "encoder.precomputed=" + dir.file("emb.txt")});
  CHECK_THROWS_AS(Model::init(bad, corpus), ValidationError);
  // Missing path is rejected.
  RunConfig nopath = small_config({"encoder.kind=precomputed"});
  CHECK_THROWS_AS(Model::init(nopath, corpus), ValidationError);
}

TEST_CASE("weight_param_count tracks the head and encoder inventory") {
  Corpus corpus = small_corpus();
  RunConfig gp_cfg = small_config();
  RunConfig egp_cfg = small_config({"head.kind=egp"});
  Model gp_model = Model::init(gp_cfg, corpus);
  Model egp_model = Model::init(egp_cfg, corpus);
  // Same encoder; the gp head carries 2vd weights per type, egp 2vd shared
  // plus 4d per type, so with 2 types gp is strictly bigger.
  CHECK(gp_model.weight_param_count() > egp_model.weight_param_count());
  const long long v = 6, d = 4, n_types = 2;
  CHECK(gp_model.weight_param_count() - egp_model.weight_param_count() ==
        n_types * 2 * v * d - (2 * v * d + n_types * 4 * d));
}
