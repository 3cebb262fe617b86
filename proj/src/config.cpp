#include "gpner/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "gpner/error.hpp"

namespace gpner {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("config key " + key + ": \"" + value +
                        "\" is not an integer");
}

unsigned long long parse_uint(const std::string& key,
                              const std::string& value) {
  try {
    size_t used = 0;
    if (!value.empty() && value[0] != '-') {
      const unsigned long long v = std::stoull(value, &used);
      if (used == value.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw ValidationError("config key " + key + ": \"" + value +
                        "\" is not a nonnegative integer");
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("config key " + key + ": \"" + value +
                        "\" is not a number");
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ValidationError("config key " + key + ": \"" + value +
                        "\" is not a boolean (use true/false)");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct KeyDesc {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

const std::vector<KeyDesc>& key_table() {
  static const std::vector<KeyDesc> table = {
      {"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
       [](RunConfig& c, const std::string& v) { c.seed = parse_uint("seed", v); }},
      {"head.kind", [](const RunConfig& c) { return c.head.kind; },
       [](RunConfig& c, const std::string& v) { c.head.kind = v; }},
      {"head.d",
       [](const RunConfig& c) { return std::to_string(c.head.d); },
       [](RunConfig& c, const std::string& v) {
         c.head.d = static_cast<int>(parse_int("head.d", v));
       }},
      {"head.max_span_len",
       [](const RunConfig& c) { return std::to_string(c.head.max_span_len); },
       [](RunConfig& c, const std::string& v) {
         c.head.max_span_len = static_cast<int>(parse_int("head.max_span_len", v));
       }},
      {"rope.enabled",
       [](const RunConfig& c) { return c.rope.enabled ? "true" : "false"; },
       [](RunConfig& c, const std::string& v) {
         c.rope.enabled = parse_bool("rope.enabled", v);
       }},
      {"rope.base", [](const RunConfig& c) { return fmt_double(c.rope.base); },
       [](RunConfig& c, const std::string& v) {
         c.rope.base = parse_double("rope.base", v);
       }},
      {"loss.kind", [](const RunConfig& c) { return c.loss.kind; },
       [](RunConfig& c, const std::string& v) { c.loss.kind = v; }},
      {"loss.threshold",
       [](const RunConfig& c) { return fmt_double(c.loss.threshold); },
       [](RunConfig& c, const std::string& v) {
         c.loss.threshold = parse_double("loss.threshold", v);
       }},
      {"decode.mode", [](const RunConfig& c) { return c.decode.mode; },
       [](RunConfig& c, const std::string& v) { c.decode.mode = v; }},
      {"decode.threshold",
       [](const RunConfig& c) { return fmt_double(c.decode.threshold); },
       [](RunConfig& c, const std::string& v) {
         c.decode.threshold = parse_double("decode.threshold", v);
       }},
      {"encoder.kind", [](const RunConfig& c) { return c.encoder.kind; },
       [](RunConfig& c, const std::string& v) { c.encoder.kind = v; }},
      {"encoder.dim",
       [](const RunConfig& c) { return std::to_string(c.encoder.dim); },
       [](RunConfig& c, const std::string& v) {
         c.encoder.dim = static_cast<int>(parse_int("encoder.dim", v));
       }},
      {"encoder.mix",
       [](const RunConfig& c) { return c.encoder.mix ? "true" : "false"; },
       [](RunConfig& c, const std::string& v) {
         c.encoder.mix = parse_bool("encoder.mix", v);
       }},
      {"encoder.precomputed",
       [](const RunConfig& c) { return c.encoder.precomputed; },
       [](RunConfig& c, const std::string& v) { c.encoder.precomputed = v; }},
      {"data.train", [](const RunConfig& c) { return c.data.train; },
       [](RunConfig& c, const std::string& v) { c.data.train = v; }},
      {"data.dev", [](const RunConfig& c) { return c.data.dev; },
       [](RunConfig& c, const std::string& v) { c.data.dev = v; }},
      {"data.test", [](const RunConfig& c) { return c.data.test; },
       [](RunConfig& c, const std::string& v) { c.data.test = v; }},
      {"data.format", [](const RunConfig& c) { return c.data.format; },
       [](RunConfig& c, const std::string& v) { c.data.format = v; }},
      {"data.bio_policy", [](const RunConfig& c) { return c.data.bio_policy; },
       [](RunConfig& c, const std::string& v) { c.data.bio_policy = v; }},
      {"train.preset", [](const RunConfig& c) { return c.train.preset; },
       [](RunConfig& c, const std::string& v) { c.train.preset = v; }},
      {"train.epochs",
       [](const RunConfig& c) { return std::to_string(c.train.epochs); },
       [](RunConfig& c, const std::string& v) {
         c.train.epochs = static_cast<int>(parse_int("train.epochs", v));
       }},
      {"train.batch_size",
       [](const RunConfig& c) { return std::to_string(c.train.batch_size); },
       [](RunConfig& c, const std::string& v) {
         c.train.batch_size = static_cast<int>(parse_int("train.batch_size", v));
       }},
      {"train.lr", [](const RunConfig& c) { return fmt_double(c.train.lr); },
       [](RunConfig& c, const std::string& v) {
         c.train.lr = parse_double("train.lr", v);
       }},
      {"train.beta1", [](const RunConfig& c) { return fmt_double(c.train.beta1); },
       [](RunConfig& c, const std::string& v) {
         c.train.beta1 = parse_double("train.beta1", v);
       }},
      {"train.beta2", [](const RunConfig& c) { return fmt_double(c.train.beta2); },
       [](RunConfig& c, const std::string& v) {
         c.train.beta2 = parse_double("train.beta2", v);
       }},
      {"train.eps", [](const RunConfig& c) { return fmt_double(c.train.eps); },
       [](RunConfig& c, const std::string& v) {
         c.train.eps = parse_double("train.eps", v);
       }},
      {"train.clip_norm",
       [](const RunConfig& c) { return fmt_double(c.train.clip_norm); },
       [](RunConfig& c, const std::string& v) {
         c.train.clip_norm = parse_double("train.clip_norm", v);
       }},
      {"train.stop_at_train_f1",
       [](const RunConfig& c) { return fmt_double(c.train.stop_at_train_f1); },
       [](RunConfig& c, const std::string& v) {
         c.train.stop_at_train_f1 = parse_double("train.stop_at_train_f1", v);
       }},
      {"eval.buckets", [](const RunConfig& c) { return c.eval.buckets; },
       [](RunConfig& c, const std::string& v) { c.eval.buckets = v; }},
  };
  return table;
}

const KeyDesc& find_key(const std::string& key) {
  for (const auto& d : key_table()) {
    if (key == d.key) return d;
  }
  throw ValidationError("unknown config key \"" + key + "\"");
}

void check_choice(const std::string& key, const std::string& value,
                  std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (value == a) return;
  }
  std::string msg = "config key " + key + ": \"" + value + "\" is not one of {";
  bool first = true;
  for (const char* a : allowed) {
    if (!first) msg += ", ";
    msg += a;
    first = false;
  }
  throw ValidationError(msg + "}");
}

void check_positive(const std::string& key, double v) {
  if (!(v > 0.0)) {
    throw ValidationError("config key " + key + " must be > 0");
  }
}

// key = value lines; '#' starts a comment; blank lines skipped
void apply_document(RunConfig& config, std::istream& in,
                    const std::string& origin, std::set<std::string>* seen) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(origin + " line " + std::to_string(line_no) +
                            ": expected \"key = value\"");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    find_key(key).set(config, value);
    if (seen) seen->insert(key);
  }
}

}  // namespace

RunConfig RunConfig::from_sources(
    const std::string& config_path, const std::vector<std::string>& overrides,
    std::optional<unsigned long long> seed_flag) {
  RunConfig config;
  std::set<std::string> seen;

  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ValidationError("cannot open config file " + config_path);
    apply_document(config, in, config_path, &seen);
  }

  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("override \"" + kv + "\" must look like key=value");
    }
    const std::string key = trim(kv.substr(0, eq));
    const std::string value = trim(kv.substr(eq + 1));
    find_key(key).set(config, value);
    seen.insert(key);
  }

  if (seed_flag) {
    config.seed = *seed_flag;
    seen.insert("seed");
  }

  // The synthetic preset retunes the optimizer for from-scratch encoder
  // training; explicitly-set keys always win over preset defaults.
  check_choice("train.preset", config.train.preset, {"paper", "synthetic"});
  if (config.train.preset == "synthetic") {
    if (!seen.count("train.lr")) config.train.lr = 1e-3;
    if (!seen.count("train.batch_size")) config.train.batch_size = 16;
    if (!seen.count("train.epochs")) config.train.epochs = 200;
  }

  config.explicit_keys = std::move(seen);
  config.validate();
  return config;
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  apply_document(config, in, "config blob", nullptr);
  config.validate();
  return config;
}

void RunConfig::validate() const {
  check_choice("head.kind", head.kind, {"gp", "egp", "egp-h"});
  if (head.d < 1) throw ValidationError("config key head.d must be >= 1");
  if (rope.enabled && head.d % 2 != 0) {
    throw ValidationError(
        "config key head.d must be even when rope.enabled is true");
  }
  if (head.max_span_len < 0) {
    throw ValidationError("config key head.max_span_len must be >= 0");
  }
  check_positive("rope.base", rope.base);
  check_choice("loss.kind", loss.kind, {"global-pointer", "bce"});
  check_choice("decode.mode", decode.mode, {"nested", "flat"});
  check_choice("encoder.kind", encoder.kind, {"embedding", "precomputed"});
  if (encoder.dim < 1) {
    throw ValidationError("config key encoder.dim must be >= 1");
  }
  check_choice("data.format", data.format, {"jsonl", "conll"});
  check_choice("data.bio_policy", data.bio_policy, {"lenient", "strict"});
  check_choice("train.preset", train.preset, {"paper", "synthetic"});
  if (train.epochs < 1) {
    throw ValidationError("config key train.epochs must be >= 1");
  }
  if (train.batch_size < 1) {
    throw ValidationError("config key train.batch_size must be >= 1");
  }
  check_positive("train.lr", train.lr);
  if (!(train.beta1 > 0.0 && train.beta1 < 1.0) ||
      !(train.beta2 > 0.0 && train.beta2 < 1.0)) {
    throw ValidationError("config keys train.beta1/train.beta2 must be in (0, 1)");
  }
  check_positive("train.eps", train.eps);
  if (train.clip_norm < 0.0) {
    throw ValidationError("config key train.clip_norm must be >= 0");
  }
  if (train.stop_at_train_f1 < 0.0 || train.stop_at_train_f1 > 1.0) {
    throw ValidationError("config key train.stop_at_train_f1 must be in [0, 1]");
  }
  bucket_axis_names();  // validates eval.buckets
}

std::vector<std::pair<std::string, std::string>> RunConfig::to_pairs() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& d : key_table()) out.emplace_back(d.key, d.get(*this));
  return out;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : to_pairs()) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

std::vector<std::string> RunConfig::bucket_axis_names() const {
  std::vector<std::string> out;
  if (eval.buckets.empty()) return out;
  if (eval.buckets == "all") {
    return {"sentence_length", "entity_length", "density"};
  }
  std::istringstream in(eval.buckets);
  std::string axis;
  while (std::getline(in, axis, ',')) {
    axis = trim(axis);
    check_choice("eval.buckets", axis,
                 {"sentence_length", "entity_length", "density"});
    out.push_back(axis);
  }
  return out;
}

}  // namespace gpner
