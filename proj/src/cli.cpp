#include "gpner/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gpner/config.hpp"
#include "gpner/data.hpp"
#include "gpner/decoder.hpp"
#include "gpner/error.hpp"
#include "gpner/eval.hpp"
#include "gpner/model.hpp"
#include "gpner/train.hpp"

namespace gpner {

namespace {

namespace fs = std::filesystem;

Corpus read_corpus(const std::string& path, const RunConfig& cfg) {
  IoWarnings warnings;
  Corpus corpus;
  if (cfg.data.format == "conll") {
    const BioPolicy policy = cfg.data.bio_policy == "strict"
                                 ? BioPolicy::strict
                                 : BioPolicy::lenient;
    corpus = read_conll_bio(path, policy, &warnings);
  } else {
    corpus = read_jsonl(path, &warnings);
  }
  if (warnings.duplicate_spans > 0) {
    std::cerr << "note: " << path << ": collapsed " << warnings.duplicate_spans
              << " duplicate span(s)\n";
  }
  if (warnings.repaired_orphans > 0) {
    std::cerr << "note: " << path << ": repaired " << warnings.repaired_orphans
              << " orphan I- tag(s)\n";
  }
  return corpus;
}

std::ofstream create_file(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

void write_config_echo(std::ostream& out, const RunConfig& cfg,
                       const std::string& prefix) {
  for (const auto& [k, v] : cfg.to_pairs()) {
    out << prefix << "config." << k << " = " << v << "\n";
  }
}

// Keys that pin the shape of a trained model. Setting one of these at
// eval/predict time to a value that disagrees with the checkpoint is an
// error instead of a silent reinterpretation.
const char* kStructuralKeys[] = {
    "head.kind",    "head.d",      "head.max_span_len",
    "rope.enabled", "rope.base",   "encoder.kind",
    "encoder.dim",  "encoder.mix", "encoder.precomputed",
    "loss.kind",    "train.preset"};

void check_checkpoint_conflicts(const RunConfig& cli_cfg,
                                const RunConfig& ckpt_cfg) {
  const auto cli_pairs = cli_cfg.to_pairs();
  const auto ckpt_pairs = ckpt_cfg.to_pairs();
  for (const char* key : kStructuralKeys) {
    if (!cli_cfg.explicit_keys.count(key)) continue;
    std::string cli_value, ckpt_value;
    for (const auto& [k, v] : cli_pairs) {
      if (k == key) cli_value = v;
    }
    for (const auto& [k, v] : ckpt_pairs) {
      if (k == key) ckpt_value = v;
    }
    if (cli_value != ckpt_value) {
      throw ValidationError("config key " + std::string(key) + " = " +
                            cli_value + " conflicts with the checkpoint (" +
                            ckpt_value + "); structural keys come from the "
                            "checkpoint");
    }
  }
}

// Runtime knobs that legitimately differ from the training run.
void apply_runtime_keys(Model& model, const RunConfig& cli_cfg) {
  model.config.seed = cli_cfg.seed;
  model.config.decode = cli_cfg.decode;
  model.config.data = cli_cfg.data;
  model.config.eval = cli_cfg.eval;
  model.config.loss.threshold = cli_cfg.loss.threshold;
}

int cmd_train(const RunConfig& cfg, const fs::path& out_dir) {
  if (cfg.data.train.empty()) {
    throw ValidationError("config key data.train must name the training corpus");
  }
  const Corpus train = read_corpus(cfg.data.train, cfg);
  Corpus dev;
  const bool has_dev = !cfg.data.dev.empty();
  if (has_dev) dev = read_corpus(cfg.data.dev, cfg);

  Model model = Model::init(cfg, train);

  auto metrics = create_file(out_dir / "metrics.txt");
  write_config_echo(metrics, model.config, "# ");
  const TrainResult result =
      train_model(model, train, has_dev ? &dev : nullptr, &metrics);

  auto resolved = create_file(out_dir / "config.resolved");
  resolved << model.config.to_text();

  const fs::path ckpt = out_dir / "model.ckpt";
  model.save(ckpt.string());

  std::cout << "trained " << result.log.size() << " epoch(s)";
  if (!result.log.empty()) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), ", final loss %.6f",
                  result.log.back().mean_loss);
    std::cout << buf;
  }
  if (result.best_dev_f1 >= 0.0) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), ", best dev F1 %.4f at epoch %d",
                  result.best_dev_f1, result.best_epoch);
    std::cout << buf;
  }
  if (result.stopped_early) std::cout << ", stopped at train F1 target";
  std::cout << "\ncheckpoint: " << ckpt.string() << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cli_cfg, const std::string& checkpoint,
             const std::string& data_flag, const fs::path& out_dir) {
  Model model = Model::load(checkpoint);
  check_checkpoint_conflicts(cli_cfg, model.config);
  apply_runtime_keys(model, cli_cfg);

  std::string data_path = data_flag;
  if (data_path.empty()) data_path = cli_cfg.data.test;
  if (data_path.empty()) data_path = cli_cfg.data.dev;
  if (data_path.empty()) {
    throw ValidationError(
        "no corpus to evaluate: pass --data or set data.test/data.dev");
  }
  const Corpus gold = read_corpus(data_path, model.config);

  const auto predictions = model.predict(gold);
  const EvalReport report = strict_f1(span_sets(gold), span_sets(predictions));
  std::vector<BucketReport> buckets;
  for (const auto& axis : model.config.bucket_axis_names()) {
    buckets.push_back(
        bucket_report(gold, span_sets(predictions), bucket_axis_from(axis)));
  }

  std::ostringstream tables;
  tables << report_table(report);
  for (const auto& b : buckets) tables << "\n" << bucket_table(b);

  auto text_out = create_file(out_dir / "eval.txt");
  write_config_echo(text_out, model.config, "# ");
  text_out << tables.str();

  auto kv_out = create_file(out_dir / "eval.kv");
  write_report_kv(kv_out, report, buckets, model.config.to_pairs());

  std::cout << tables.str();
  return 0;
}

int cmd_predict(const RunConfig& cli_cfg, const std::string& checkpoint,
                const std::string& input, std::string output,
                const fs::path& out_dir) {
  Model model = Model::load(checkpoint);
  check_checkpoint_conflicts(cli_cfg, model.config);
  apply_runtime_keys(model, cli_cfg);

  const Corpus corpus = read_corpus(input, model.config);
  if (output.empty()) output = (out_dir / "predictions.jsonl").string();

  std::ofstream out(output);
  if (!out) throw ValidationError("cannot write " + output);
  write_config_echo(out, model.config, "# ");
  for (const auto& sent : corpus.sentences) {
    const Prediction pred = model.predict_sentence(sent);
    nlohmann::ordered_json obj;
    obj["id"] = sent.id;
    obj["tokens"] = sent.tokens;
    obj["entities"] = nlohmann::ordered_json::array();
    for (const auto& s : pred.spans) {
      obj["entities"].push_back({{"start", s.span.start},
                                 {"end", s.span.end},
                                 {"type", s.span.type},
                                 {"score", s.score}});
    }
    out << obj.dump() << "\n";
  }
  std::cout << "wrote " << corpus.size() << " prediction(s) to " << output
            << "\n";
  return 0;
}

int cmd_convert(const RunConfig& cfg, const std::string& input,
                const std::string& output, const std::string& from,
                const std::string& to) {
  RunConfig read_cfg = cfg;
  read_cfg.data.format = from;
  const Corpus corpus = read_corpus(input, read_cfg);
  if (to == "conll") {
    write_conll_bio(corpus, output);
  } else {
    write_jsonl(corpus, output);
  }
  std::cout << "converted " << corpus.size() << " sentence(s) " << from
            << " -> " << to << "\n";
  return 0;
}

int cmd_synth(const RunConfig& cfg, int sentences, int types, bool nested,
              std::string output, const fs::path& out_dir) {
  const Corpus corpus = synth_corpus(cfg.seed, sentences, types, nested);
  if (output.empty()) output = (out_dir / "synth.jsonl").string();
  write_jsonl(corpus, output);
  std::cout << "wrote " << corpus.size() << " sentence(s) to " << output
            << "\n";
  return 0;
}

int cmd_gradcheck(const RunConfig& cfg, double h, double tol) {
  GradCheckSetup setup = make_gradcheck_setup(cfg.head.kind, cfg.rope.enabled,
                                              cfg.loss.kind, cfg.seed);
  const GradCheckReport report = grad_check(setup.model, setup.sample, h);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "checked %lld entries, max rel err %.3e at %s[%d,%d] "
                "(analytic %.9e, central diff %.9e)\n",
                report.checked, report.max_rel_err,
                report.worst.param.c_str(), report.worst.row, report.worst.col,
                report.worst.analytic, report.worst.fd);
  std::cout << buf;
  if (report.max_rel_err > tol) {
    throw std::runtime_error("gradient check failed: max rel err above " +
                             std::to_string(tol));
  }
  std::cout << "gradient check passed (tolerance " << tol << ")\n";
  return 0;
}

int cmd_bench(const RunConfig& cfg, int reps, const fs::path& out_dir) {
  const int kBenchV = 256, kBenchD = 64;
  const int lengths[] = {32, 64, 128, 256};
  const int type_counts[] = {1, 4, 10};
  const char* kinds[] = {"gp", "egp", "egp-h"};

  std::ostringstream table;
  for (const char* kind : kinds) {
    std::vector<double> last_ms(3, 0.0);
    for (int li = 0; li < 4; ++li) {
      const int n = lengths[li];
      for (int ti = 0; ti < 3; ++ti) {
        const int ecount = type_counts[ti];

        RunConfig bench_cfg;
        bench_cfg.seed = cfg.seed;
        bench_cfg.head.kind = kind;
        bench_cfg.head.d = kBenchD;
        bench_cfg.encoder.dim = kBenchV;
        bench_cfg.rope.enabled = cfg.rope.enabled;
        bench_cfg.validate();

        // one sentence per type so every type is registered
        Corpus seed_corpus;
        Rng rng(Rng::mix(cfg.seed, 77));
        Sentence sent;
        sent.id = "bench";
        for (int i = 0; i < n; ++i) {
          sent.tokens.push_back("t" + std::to_string(rng.uniform_int(0, 9)));
        }
        for (int t = 0; t < ecount; ++t) {
          Sentence carrier;
          carrier.id = "carrier-" + std::to_string(t);
          carrier.tokens = {"x"};
          carrier.annotations.insert({0, 0, "T" + std::to_string(t)});
          seed_corpus.sentences.push_back(std::move(carrier));
        }
        seed_corpus.sentences.push_back(sent);

        Model model = Model::init(bench_cfg, seed_corpus);

        double best_ms = 0.0;
        for (int r = 0; r < reps; ++r) {
          const auto t0 = std::chrono::steady_clock::now();
          const ScoreTensor tensor = model.score(sent);
          const auto spans =
              decode_spans(tensor, model.types, 0.0, DecodeMode::nested);
          const auto t1 = std::chrono::steady_clock::now();
          (void)spans;
          const double ms =
              std::chrono::duration<double, std::milli>(t1 - t0).count();
          if (r == 0 || ms < best_ms) best_ms = ms;
        }

        char buf[160];
        std::snprintf(buf, sizeof(buf), "head=%-5s n=%3d E=%2d ms=%9.3f\n",
                      kind, n, ecount, best_ms);
        table << buf;
        if (li > 0 && best_ms + 1e-9 < last_ms[ti]) {
          table << "warn: timing not monotone in n for head=" << kind
                << " E=" << ecount << "\n";
        }
        last_ms[ti] = best_ms;
      }
    }
  }

  table << "added_params_per_type v=" << kBenchV << " d=" << kBenchD
        << ": gp=" << added_params(HeadKind::gp, kBenchV, kBenchD)
        << " egp=" << added_params(HeadKind::egp, kBenchV, kBenchD)
        << " egp-h=" << added_params(HeadKind::egp_h, kBenchV, kBenchD) << "\n";
  const bool cheaper =
      added_params(HeadKind::egp, kBenchV, kBenchD) <
          added_params(HeadKind::gp, kBenchV, kBenchD) &&
      added_params(HeadKind::egp_h, kBenchV, kBenchD) <
          added_params(HeadKind::gp, kBenchV, kBenchD);
  table << "param_check efficient_heads_cheaper=" << (cheaper ? "pass" : "FAIL")
        << "\n";

  auto out = create_file(out_dir / "bench.txt");
  write_config_echo(out, cfg, "# ");
  out << table.str();
  std::cout << table.str();
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Span-based named entity recognition toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir_flag = ".";
  std::vector<std::string> overrides;
  std::optional<unsigned long long> seed_flag;
  int threads = 1;

  app.add_option("--config", config_path, "config file (key = value lines)");
  app.add_option("--seed", seed_flag, "override the config seed");
  app.add_option("--out-dir", out_dir_flag, "directory for output artifacts");
  app.add_option("--set", overrides, "override one config key (key=value)");
  app.add_option("--threads", threads,
                 "worker thread cap (this build runs sequentially)");

  auto* train_cmd = app.add_subcommand("train", "train a model");
  auto* eval_cmd = app.add_subcommand("eval", "score a corpus");
  auto* predict_cmd = app.add_subcommand("predict", "emit predicted spans");
  auto* convert_cmd =
      app.add_subcommand("convert", "convert between corpus formats");
  auto* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic corpus");
  auto* gradcheck_cmd = app.add_subcommand(
      "gradcheck", "verify gradients against finite differences");
  auto* bench_cmd =
      app.add_subcommand("bench", "micro-benchmark scoring throughput");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::string checkpoint, data_flag, input, output, from, to;
  eval_cmd->add_option("--checkpoint", checkpoint, "trained model file")
      ->required();
  eval_cmd->add_option("--data", data_flag,
                       "corpus to score (default: data.test, then data.dev)");
  predict_cmd->add_option("--checkpoint", checkpoint, "trained model file")
      ->required();
  predict_cmd->add_option("--input", input, "corpus to label")->required();
  predict_cmd->add_option("--output", output, "predictions file");
  convert_cmd->add_option("--input", input, "corpus to convert")->required();
  convert_cmd->add_option("--output", output, "converted file")->required();
  convert_cmd->add_option("--from", from, "input format")
      ->required()
      ->check(CLI::IsMember({"jsonl", "conll"}));
  convert_cmd->add_option("--to", to, "output format")
      ->required()
      ->check(CLI::IsMember({"jsonl", "conll"}));

  int synth_sentences = 200, synth_types = 3;
  bool synth_nested = false;
  synth_cmd->add_option("--sentences", synth_sentences, "sentence count");
  synth_cmd->add_option("--types", synth_types, "entity type count");
  synth_cmd->add_flag("--nested", synth_nested, "embed entities in entities");
  synth_cmd->add_option("--output", output, "corpus file");

  double gc_h = 1e-5, gc_tol = 1e-4;
  gradcheck_cmd->add_option("--step", gc_h, "finite-difference step");
  gradcheck_cmd->add_option("--tol", gc_tol, "max allowed relative error");

  int bench_reps = 3;
  bench_cmd->add_option("--reps", bench_reps, "timing repetitions per cell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (threads < 1) throw ValidationError("--threads must be >= 1");
    const RunConfig cfg =
        RunConfig::from_sources(config_path, overrides, seed_flag);
    const fs::path out_dir(out_dir_flag);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
      throw ValidationError("cannot create output directory " +
                            out_dir.string() + ": " + ec.message());
    }

    if (app.got_subcommand(train_cmd)) return cmd_train(cfg, out_dir);
    if (app.got_subcommand(eval_cmd)) {
      return cmd_eval(cfg, checkpoint, data_flag, out_dir);
    }
    if (app.got_subcommand(predict_cmd)) {
      return cmd_predict(cfg, checkpoint, input, output, out_dir);
    }
    if (app.got_subcommand(convert_cmd)) {
      return cmd_convert(cfg, input, output, from, to);
    }
    if (app.got_subcommand(synth_cmd)) {
      return cmd_synth(cfg, synth_sentences, synth_types, synth_nested, output,
                       out_dir);
    }
    if (app.got_subcommand(gradcheck_cmd)) {
      return cmd_gradcheck(cfg, gc_h, gc_tol);
    }
    if (app.got_subcommand(bench_cmd)) return cmd_bench(cfg, bench_reps, out_dir);
    throw ValidationError("no subcommand given");
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace gpner
