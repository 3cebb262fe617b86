#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gpner/autodiff.hpp"
#include "gpner/heads.hpp"
#include "gpner/span.hpp"

namespace gpner {

enum class LossKind { global_pointer, bce };

std::string loss_kind_name(LossKind k);
LossKind loss_kind_from(const std::string& name);

// Threshold-separated multi-label loss over raw span scores. Positives are
// pushed above the threshold, negatives below it; with the threshold at 0
// this reduces to log(1 + sum_neg e^s) + log(1 + sum_pos e^-s). Both lists
// may be empty and entries up to |s| = 1e4 are safe.
double multilabel_loss(const std::vector<double>& pos,
                       const std::vector<double>& neg);
double multilabel_loss_threshold(const std::vector<double>& pos,
                                 const std::vector<double>& neg,
                                 double threshold);

// Positive and negative cell lists for one type, row-major order.
struct CellLists {
  std::vector<std::pair<int, int>> pos;
  std::vector<std::pair<int, int>> neg;
};

// Per-type partition of the masked cells into labeled spans and the rest.
struct LossSets {
  std::vector<CellLists> per_type;  // indexed by type order
  double threshold = 0.0;
};

// Validates every label (known type, cell inside the mask) and splits the
// masked cells per type. Throws ValidationError naming the offending span.
LossSets build_loss_sets(const Mask& mask,
                         const std::vector<SpanAnnotation>& labels,
                         const EntityTypeSet& types, double threshold = 0.0);

// Sentence loss: sum over types of the multi-label loss on that type's
// cells. Only masked-true cells are read.
double span_loss(const ScoreTensor& scores,
                 const std::vector<SpanAnnotation>& labels,
                 const EntityTypeSet& types, double threshold = 0.0);

// Per-cell binary cross-entropy on sigmoid(score), for the loss ablation.
double span_bce(const ScoreTensor& scores,
                const std::vector<SpanAnnotation>& labels,
                const EntityTypeSet& types);

// Tape versions; gradients into the score nodes are the closed forms
// d/ds_neg = exp(s - lse_neg) and d/ds_pos = -exp(-s - lse_pos).
ad::Value cells_loss_node(const ad::Value& scores, const CellLists& cells,
                          double threshold);
ad::Value span_loss_node(const std::vector<ad::Value>& type_scores,
                         const LossSets& sets);
ad::Value cells_bce_node(const ad::Value& scores, const CellLists& cells);
ad::Value span_bce_node(const std::vector<ad::Value>& type_scores,
                        const LossSets& sets);

}  // namespace gpner
