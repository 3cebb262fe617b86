#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gpner/data.hpp"
#include "gpner/matrix.hpp"
#include "gpner/model.hpp"

namespace gpner {

// Bias-corrected Adam over a fixed parameter list. step() consumes the
// gradients accumulated since the last step and resets them.
class Adam {
 public:
  Adam(std::vector<Param*> params, double lr, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);

  void step();
  long long steps_taken() const { return t_; }

 private:
  struct Slot {
    Param* p;
    Matrix m;  // first moment
    Matrix u;  // second moment
  };
  std::vector<Slot> slots_;
  double lr_, b1_, b2_, eps_;
  long long t_ = 0;
};

struct EpochStats {
  int epoch = 0;          // 1-based
  double mean_loss = 0.0; // mean per-sentence loss over the epoch
  double dev_f1 = -1.0;   // micro-F1 on dev; -1 when no dev set
  double train_f1 = -1.0; // micro-F1 on train; -1 when not measured
};

struct TrainResult {
  std::vector<EpochStats> log;
  int best_epoch = 0;        // dev-selected epoch (last epoch without dev)
  double best_dev_f1 = -1.0;
  bool stopped_early = false;  // train.stop_at_train_f1 reached
};

// Epoch loop: shuffled batches (epoch index mixed into the shuffle seed),
// per-sentence forward/backward, batch-mean gradients, optional global
// gradient-norm clipping, Adam step. With a dev corpus the model ends up
// holding the parameters of the best dev epoch. A non-finite loss aborts
// with the epoch/batch/sentence coordinates. One log line per epoch goes
// to `log` when given.
TrainResult train_model(Model& model, const Corpus& train, const Corpus* dev,
                        std::ostream* log = nullptr);

struct GradCheckEntry {
  std::string param;
  int row = 0, col = 0;
  double analytic = 0.0;
  double fd = 0.0;       // central difference
  double rel_err = 0.0;  // |analytic-fd| / max(|fd|, 1e-2)
};

struct GradCheckReport {
  GradCheckEntry worst;
  long long checked = 0;
  double max_rel_err = 0.0;
};

// Compare backward() against central finite differences of the sentence
// loss for every entry of every parameter. The sample should be small
// (n <= 6). inject_error_into names a parameter whose reported analytic
// gradient is deliberately offset — a sensitivity check for the harness
// itself, used by tests.
GradCheckReport grad_check(Model& model, const Sentence& sample,
                           double h = 1e-5,
                           const std::string& inject_error_into = "");

// A small deterministic model plus a 5-token sample sentence, used by the
// gradient-check command and the test suite.
struct GradCheckSetup {
  Model model;
  Sentence sample;
};
GradCheckSetup make_gradcheck_setup(const std::string& head_kind,
                                    bool rope_enabled,
                                    const std::string& loss_kind,
                                    unsigned long long seed);

}  // namespace gpner
