#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace gpner {

// Every run is driven by one flat key-value document. Files hold
// "key = value" lines ('#' comments allowed); command-line --set overrides
// win over file values; unknown keys are rejected. The fully resolved
// document is echoed into every output artifact.
struct RunConfig {
  unsigned long long seed = 1;

  struct Head {
    std::string kind = "gp";  // gp | egp | egp-h
    int d = 64;
    int max_span_len = 0;  // 0 = no cap
  } head;

  struct Rope {
    bool enabled = true;
    double base = 10000.0;
  } rope;

  struct Loss {
    std::string kind = "global-pointer";  // global-pointer | bce
    double threshold = 0.0;
  } loss;

  struct Decode {
    std::string mode = "nested";  // nested | flat
    double threshold = 0.0;
  } decode;

  struct Encoder {
    std::string kind = "embedding";  // embedding | precomputed
    int dim = 64;
    bool mix = true;
    std::string precomputed;  // embeddings file for kind=precomputed
  } encoder;

  struct Data {
    std::string train;
    std::string dev;
    std::string test;
    std::string format = "jsonl";        // jsonl | conll
    std::string bio_policy = "lenient";  // lenient | strict
  } data;

  struct Train {
    std::string preset = "paper";  // paper | synthetic
    int epochs = 30;
    int batch_size = 32;
    double lr = 2e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 0.0;         // 0 = no clipping
    double stop_at_train_f1 = 0.0;  // 0 = never stop early
  } train;

  struct Eval {
    std::string buckets;  // comma list of axes, or "all", or empty
  } eval;

  // Keys the user set via file/flags (as opposed to defaults). Used to
  // detect contradictions with a loaded checkpoint; not itself a key.
  std::set<std::string> explicit_keys;

  // defaults -> config file (optional) -> --set overrides -> --seed flag,
  // then preset resolution and validation. Overrides use "key=value".
  static RunConfig from_sources(
      const std::string& config_path,
      const std::vector<std::string>& overrides,
      std::optional<unsigned long long> seed_flag);

  // Parse a fully resolved document (e.g. from a checkpoint). No preset
  // resolution is applied; values are taken as-is, then validated.
  static RunConfig from_text(const std::string& text);

  void validate() const;

  // All keys in fixed order with their current values.
  std::vector<std::pair<std::string, std::string>> to_pairs() const;
  std::string to_text() const;  // "key = value" lines

  std::vector<std::string> bucket_axis_names() const;  // parsed eval.buckets
};

}  // namespace gpner
