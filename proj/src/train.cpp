#include "gpner/train.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "gpner/autodiff.hpp"
#include "gpner/error.hpp"
#include "gpner/eval.hpp"

namespace gpner {

Adam::Adam(std::vector<Param*> params, double lr, double beta1, double beta2,
           double eps)
    : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
  if (!(lr > 0.0) || !(beta1 > 0.0 && beta1 < 1.0) ||
      !(beta2 > 0.0 && beta2 < 1.0) || !(eps > 0.0)) {
    throw ValidationError("adam hyperparameters out of range");
  }
  slots_.reserve(params.size());
  for (Param* p : params) {
    slots_.push_back(Slot{p, Matrix(p->value.rows(), p->value.cols()),
                          Matrix(p->value.rows(), p->value.cols())});
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (auto& s : slots_) {
    auto& w = s.p->value.data();
    auto& g = s.p->grad.data();
    auto& m = s.m.data();
    auto& u = s.u.data();
    for (size_t i = 0; i < w.size(); ++i) {
      m[i] = b1_ * m[i] + (1.0 - b1_) * g[i];
      u[i] = b2_ * u[i] + (1.0 - b2_) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double uhat = u[i] / c2;
      w[i] -= lr_ * mhat / (std::sqrt(uhat) + eps_);
    }
    s.p->reset_grad();
  }
}

namespace {

double micro_f1(const Model& model, const Corpus& corpus) {
  return strict_f1(span_sets(corpus), span_sets(model.predict(corpus)))
      .micro.f1();
}

double grad_norm(const std::vector<Param*>& params) {
  double sq = 0.0;
  for (const Param* p : params) {
    for (double g : p->grad.data()) sq += g * g;
  }
  return std::sqrt(sq);
}

std::vector<Matrix> snapshot(const std::vector<Param*>& params) {
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (const Param* p : params) out.push_back(p->value);
  return out;
}

void restore(const std::vector<Param*>& params, const std::vector<Matrix>& snap) {
  for (size_t i = 0; i < params.size(); ++i) params[i]->value = snap[i];
}

}  // namespace

TrainResult train_model(Model& model, const Corpus& train, const Corpus* dev,
                        std::ostream* log) {
  if (train.sentences.empty()) {
    throw ValidationError("training corpus is empty");
  }
  const RunConfig& cfg = model.config;
  auto params = model.params();
  Adam adam(params, cfg.train.lr, cfg.train.beta1, cfg.train.beta2,
            cfg.train.eps);

  TrainResult result;
  std::vector<Matrix> best;
  const double stop_at = cfg.train.stop_at_train_f1;

  for (int epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    const auto batches =
        make_batches(train, model.vocab, cfg.train.batch_size,
                     Rng::mix(cfg.seed, 1000 + epoch), cfg.head.max_span_len);
    double loss_sum = 0.0;
    for (size_t b = 0; b < batches.size(); ++b) {
      const Batch& batch = batches[b];
      for (const Sentence* sent : batch.sentences) {
        const ad::Value loss = model.loss_node(*sent);
        const double value = loss->value.at(0, 0);
        if (!std::isfinite(value)) {
          throw std::runtime_error(
              "non-finite loss at epoch " + std::to_string(epoch) + " batch " +
              std::to_string(b) + " sentence " + sent->id);
        }
        loss_sum += value;
        ad::backward(loss);
      }
      // batch-mean gradient
      const double inv = 1.0 / static_cast<double>(batch.sentences.size());
      for (Param* p : params) {
        for (double& g : p->grad.data()) g *= inv;
      }
      if (cfg.train.clip_norm > 0.0) {
        const double norm = grad_norm(params);
        if (norm > cfg.train.clip_norm) {
          const double scale = cfg.train.clip_norm / norm;
          for (Param* p : params) {
            for (double& g : p->grad.data()) g *= scale;
          }
        }
      }
      adam.step();
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = loss_sum / static_cast<double>(train.sentences.size());
    if (dev) {
      stats.dev_f1 = micro_f1(model, *dev);
      if (stats.dev_f1 > result.best_dev_f1) {
        result.best_dev_f1 = stats.dev_f1;
        result.best_epoch = epoch;
        best = snapshot(params);
      }
    } else {
      result.best_epoch = epoch;
    }
    if (stop_at > 0.0) stats.train_f1 = micro_f1(model, train);

    if (log) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "epoch %d loss %.6f", epoch,
                    stats.mean_loss);
      *log << buf;
      if (stats.dev_f1 >= 0.0) {
        std::snprintf(buf, sizeof(buf), " dev_f1 %.4f", stats.dev_f1);
        *log << buf;
      }
      if (stats.train_f1 >= 0.0) {
        std::snprintf(buf, sizeof(buf), " train_f1 %.4f", stats.train_f1);
        *log << buf;
      }
      *log << "\n";
    }
    result.log.push_back(stats);

    if (stop_at > 0.0 && stats.train_f1 >= stop_at) {
      result.stopped_early = true;
      break;
    }
  }

  // hand back the parameters the dev set picked
  if (dev && !best.empty()) restore(params, best);
  return result;
}

GradCheckReport grad_check(Model& model, const Sentence& sample, double h,
                           const std::string& inject_error_into) {
  if (!(h > 0.0)) throw ValidationError("finite-difference step must be > 0");
  auto params = model.params();

  for (Param* p : params) p->reset_grad();
  ad::backward(model.loss_node(sample));
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (Param* p : params) {
    analytic.push_back(p->grad);
    p->reset_grad();
  }
  if (!inject_error_into.empty()) {
    bool found = false;
    for (size_t i = 0; i < params.size(); ++i) {
      if (params[i]->name == inject_error_into) {
        analytic[i].at(0, 0) += 0.05;
        found = true;
      }
    }
    if (!found) {
      throw ValidationError("no parameter named \"" + inject_error_into + "\"");
    }
  }

  auto loss_at = [&]() { return model.loss_node(sample)->value.at(0, 0); };

  GradCheckReport report;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Param* p = params[pi];
    for (int i = 0; i < p->value.rows(); ++i) {
      for (int j = 0; j < p->value.cols(); ++j) {
        const double keep = p->value.at(i, j);
        p->value.at(i, j) = keep + h;
        const double up = loss_at();
        p->value.at(i, j) = keep - h;
        const double down = loss_at();
        p->value.at(i, j) = keep;

        const double fd = (up - down) / (2.0 * h);
        const double a = analytic[pi].at(i, j);
        const double rel =
            std::fabs(a - fd) / std::max(std::fabs(fd), 1e-2);
        ++report.checked;
        if (rel >= report.max_rel_err) {
          report.max_rel_err = rel;
          report.worst = GradCheckEntry{p->name, i, j, a, fd, rel};
        }
      }
    }
  }
  return report;
}

GradCheckSetup make_gradcheck_setup(const std::string& head_kind,
                                    bool rope_enabled,
                                    const std::string& loss_kind,
                                    unsigned long long seed) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.head.kind = head_kind;
  cfg.head.d = 8;
  cfg.encoder.dim = 8;
  cfg.rope.enabled = rope_enabled;
  cfg.loss.kind = loss_kind;
  cfg.validate();

  Corpus corpus;
  Sentence a;
  a.id = "gc-0";
  a.tokens = {"w0", "open0", "w1", "close0", "w2"};
  a.annotations.insert({1, 3, "T0"});
  Sentence b;
  b.id = "gc-1";
  b.tokens = {"open1", "w1", "close1"};
  b.annotations.insert({0, 2, "T1"});
  corpus.sentences = {a, b};

  GradCheckSetup setup{Model::init(cfg, corpus), std::move(a)};
  return setup;
}

}  // namespace gpner
