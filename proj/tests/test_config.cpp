#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "gpner/config.hpp"
#include "gpner/error.hpp"
#include "test_util.hpp"

using namespace gpner;
using testutil::TempDir;

TEST_CASE("defaults are valid and fully enumerated") {
  RunConfig c = RunConfig::from_sources("", {}, std::nullopt);
  CHECK(c.seed == 1);
  CHECK(c.head.kind == "gp");
  CHECK(c.head.d == 64);
  CHECK(c.rope.enabled);
  CHECK(c.loss.kind == "global-pointer");
  CHECK(c.decode.mode == "nested");
  CHECK(c.encoder.kind == "embedding");
  CHECK(c.encoder.mix);
  CHECK(c.train.preset == "paper");
  CHECK(c.train.epochs == 30);
  CHECK(c.train.batch_size == 32);
  CHECK(c.train.lr == 2e-5);
  CHECK(c.explicit_keys.empty());

  // Every key appears in the resolved document exactly once.
  auto pairs = c.to_pairs();
  std::set<std::string> keys;
  for (const auto& [k, v] : pairs) CHECK(keys.insert(k).second);
  for (const char* k :
       {"seed", "head.kind", "head.d", "head.max_span_len", "rope.enabled",
        "rope.base", "loss.kind", "loss.threshold", "decode.mode",
        "decode.threshold", "encoder.kind", "encoder.dim", "encoder.mix",
        "encoder.precomputed", "data.train", "data.dev", "data.test",
        "data.format", "data.bio_policy", "train.preset", "train.epochs",
        "train.batch_size", "train.lr", "train.beta1", "train.beta2",
        "train.eps", "train.clip_norm", "train.stop_at_train_f1",
        "eval.buckets"}) {
    CAPTURE(k);
    CHECK(keys.count(k) == 1);
  }
}

TEST_CASE("config files parse with comments and blank lines") {
  TempDir dir("config");
  testutil::spit(dir.file("run.cfg"),
                 "# a comment\n"
                 "\n"
                 "head.kind = egp\n"
                 "head.d=16\n"
                 "  train.lr  =  0.001  \n"
                 "rope.enabled = false\n");
  RunConfig c = RunConfig::from_sources(dir.file("run.cfg"), {}, std::nullopt);
  CHECK(c.head.kind == "egp");
  CHECK(c.head.d == 16);
  CHECK(c.train.lr == 0.001);
  CHECK_FALSE(c.rope.enabled);
  CHECK(c.explicit_keys.count("head.kind") == 1);
  CHECK(c.explicit_keys.count("train.lr") == 1);
  CHECK(c.explicit_keys.count("train.epochs") == 0);
}

TEST_CASE("set overrides beat the file and the seed flag beats both") {
  TempDir dir("config");
  testutil::spit(dir.file("run.cfg"), "seed = 5\nhead.d = 16\n");
  RunConfig c = RunConfig::from_sources(
      dir.file("run.cfg"), {"head.d=32", "decode.mode=flat"}, 99);
  CHECK(c.head.d == 32);
  CHECK(c.decode.mode == "flat");
  CHECK(c.seed == 99);
  CHECK(c.explicit_keys.count("seed") == 1);
}

TEST_CASE("unknown keys and malformed lines are rejected") {
  TempDir dir("config");
  testutil::spit(dir.file("bad1.cfg"), "head.kindd = gp\n");
  CHECK_THROWS_AS(RunConfig::from_sources(dir.file("bad1.cfg"), {}, std::nullopt),
                  ValidationError);
  testutil::spit(dir.file("bad2.cfg"), "just words\n");
  CHECK_THROWS_AS(RunConfig::from_sources(dir.file("bad2.cfg"), {}, std::nullopt),
                  ValidationError);
  CHECK_THROWS_AS(RunConfig::from_sources("", {"nope=1"}, std::nullopt),
                  ValidationError);
  CHECK_THROWS_AS(RunConfig::from_sources("", {"no-equals-sign"}, std::nullopt),
                  ValidationError);
  // Missing file is an error too.
  CHECK_THROWS_AS(
      RunConfig::from_sources(dir.file("absent.cfg"), {}, std::nullopt),
      ValidationError);
}

TEST_CASE("synthetic preset retunes only keys the user left alone") {
  RunConfig c = RunConfig::from_sources("", {"train.preset=synthetic"},
                                        std::nullopt);
  CHECK(c.train.lr == 1e-3);
  CHECK(c.train.batch_size == 16);
  CHECK(c.train.epochs == 200);

  // An explicit value survives the preset.
  RunConfig d = RunConfig::from_sources(
      "", {"train.preset=synthetic", "train.epochs=77"}, std::nullopt);
  CHECK(d.train.epochs == 77);
  CHECK(d.train.lr == 1e-3);

  // The "paper" preset keeps the shipped defaults.
  RunConfig e = RunConfig::from_sources("", {}, std::nullopt);
  CHECK(e.train.lr == 2e-5);
}

TEST_CASE("validation rejects bad values with the offending key") {
  auto expect_invalid = [](const std::string& kv, const std::string& needle) {
    try {
      RunConfig::from_sources("", {kv}, std::nullopt);
      FAIL_CHECK("expected rejection of " << kv);
    } catch (const std::exception& e) {
      CAPTURE(kv);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_invalid("head.kind=mlp", "head.kind");
  expect_invalid("head.d=0", "head.d");
  expect_invalid("head.d=-4", "head.d");
  // Rotary encoding needs an even width.
  expect_invalid("head.d=7", "head.d");
  expect_invalid("rope.base=0", "rope.base");
  expect_invalid("loss.kind=hinge", "loss.kind");
  expect_invalid("decode.mode=greedy", "decode.mode");
  expect_invalid("encoder.kind=bert", "encoder.kind");
  expect_invalid("encoder.dim=0", "encoder.dim");
  expect_invalid("data.format=xml", "data.format");
  expect_invalid("data.bio_policy=loose", "data.bio_policy");
  expect_invalid("train.preset=huge", "train.preset");
  expect_invalid("train.epochs=0", "train.epochs");
  expect_invalid("train.batch_size=0", "train.batch_size");
  expect_invalid("train.lr=0", "train.lr");
  expect_invalid("train.beta1=1", "train.beta1");
  expect_invalid("train.beta2=-0.1", "train.beta2");
  expect_invalid("train.eps=0", "train.eps");
  expect_invalid("train.clip_norm=-1", "train.clip_norm");
  expect_invalid("train.stop_at_train_f1=1.5", "train.stop_at_train_f1");
  expect_invalid("eval.buckets=speed", "speed");
  expect_invalid("head.max_span_len=-2", "head.max_span_len");
  expect_invalid("seed=banana", "seed");
  expect_invalid("head.d=four", "head.d");
  expect_invalid("rope.enabled=maybe", "rope.enabled");

  // An odd width is fine once rotation is off.
  RunConfig ok =
      RunConfig::from_sources("", {"head.d=7", "rope.enabled=false"},
                              std::nullopt);
  CHECK(ok.head.d == 7);
}

TEST_CASE("bucket axis list parses including the all shorthand") {
  RunConfig none = RunConfig::from_sources("", {}, std::nullopt);
  CHECK(none.bucket_axis_names().empty());

  RunConfig one = RunConfig::from_sources("", {"eval.buckets=density"},
                                          std::nullopt);
  CHECK(one.bucket_axis_names() == std::vector<std::string>{"density"});

  RunConfig two = RunConfig::from_sources(
      "", {"eval.buckets=sentence_length,entity_length"}, std::nullopt);
  CHECK(two.bucket_axis_names() ==
        std::vector<std::string>{"sentence_length", "entity_length"});

  RunConfig all = RunConfig::from_sources("", {"eval.buckets=all"},
                                          std::nullopt);
  CHECK(all.bucket_axis_names() ==
        std::vector<std::string>{"sentence_length", "entity_length",
                                 "density"});
}

TEST_CASE("resolved text round trips exactly") {
  RunConfig c = RunConfig::from_sources(
      "",
      {"head.kind=egp-h", "train.lr=0.00017", "eval.buckets=all",
       "data.train=/tmp/x.jsonl", "loss.threshold=0.25"},
      42);
  std::string text = c.to_text();
  RunConfig back = RunConfig::from_text(text);
  CHECK(back.to_text() == text);
  CHECK(back.head.kind == "egp-h");
  CHECK(back.train.lr == 0.00017);
  CHECK(back.seed == 42);
  CHECK(back.loss.threshold == 0.25);
  CHECK(back.data.train == "/tmp/x.jsonl");
}

TEST_CASE("from_text applies no preset rewriting") {
  // A resolved document that says preset=synthetic but carries explicit
  // numbers must keep those numbers (they are already resolved).
  RunConfig c = RunConfig::from_text(
      "train.preset = synthetic\ntrain.epochs = 5\ntrain.lr = 0.5\n");
  CHECK(c.train.epochs == 5);
  CHECK(c.train.lr == 0.5);
}
