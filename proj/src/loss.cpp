#include "gpner/loss.hpp"

#include <cmath>
#include <set>

#include "gpner/error.hpp"

namespace gpner {

std::string loss_kind_name(LossKind k) {
  return k == LossKind::bce ? "bce" : "global-pointer";
}

LossKind loss_kind_from(const std::string& name) {
  if (name == "global-pointer") return LossKind::global_pointer;
  if (name == "bce") return LossKind::bce;
  throw ValidationError("unknown loss kind '" + name +
                        "' (expected global-pointer or bce)");
}

double multilabel_loss(const std::vector<double>& pos,
                       const std::vector<double>& neg) {
  std::vector<double> neg_pos(pos.size());
  for (size_t i = 0; i < pos.size(); ++i) neg_pos[i] = -pos[i];
  return logsumexp0(neg) + logsumexp0(neg_pos);
}

double multilabel_loss_threshold(const std::vector<double>& pos,
                                 const std::vector<double>& neg,
                                 double threshold) {
  std::vector<double> neg_pos(pos.size());
  for (size_t i = 0; i < pos.size(); ++i) neg_pos[i] = -pos[i];
  return logsumexp_with(threshold, neg) + logsumexp_with(-threshold, neg_pos);
}

LossSets build_loss_sets(const Mask& mask,
                         const std::vector<SpanAnnotation>& labels,
                         const EntityTypeSet& types, double threshold) {
  std::vector<std::set<std::pair<int, int>>> pos_sets(types.size());
  for (const auto& span : labels) {
    const int t = types.index(span.type);
    if (!mask.at(span.start, span.end)) {
      throw ValidationError("label span " + span.str() +
                            " outside the valid mask (length " +
                            std::to_string(mask.true_length) + ")");
    }
    pos_sets[t].insert({span.start, span.end});
  }
  LossSets sets;
  sets.threshold = threshold;
  const auto all_cells = mask.cells();
  for (int t = 0; t < types.size(); ++t) {
    CellLists lists;
    lists.pos.assign(pos_sets[t].begin(), pos_sets[t].end());
    for (const auto& c : all_cells) {
      if (!pos_sets[t].count(c)) lists.neg.push_back(c);
    }
    sets.per_type.push_back(std::move(lists));
  }
  return sets;
}

namespace {

std::vector<double> gather(const Matrix& m,
                           const std::vector<std::pair<int, int>>& cells) {
  std::vector<double> out;
  out.reserve(cells.size());
  for (const auto& [i, j] : cells) out.push_back(m.at(i, j));
  return out;
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double span_loss(const ScoreTensor& scores,
                 const std::vector<SpanAnnotation>& labels,
                 const EntityTypeSet& types, double threshold) {
  const LossSets sets = build_loss_sets(scores.mask, labels, types, threshold);
  double total = 0.0;
  for (int t = 0; t < types.size(); ++t) {
    total += multilabel_loss_threshold(gather(scores.scores[t],
                                              sets.per_type[t].pos),
                                       gather(scores.scores[t],
                                              sets.per_type[t].neg),
                                       threshold);
  }
  return total;
}

double span_bce(const ScoreTensor& scores,
                const std::vector<SpanAnnotation>& labels,
                const EntityTypeSet& types) {
  const LossSets sets = build_loss_sets(scores.mask, labels, types, 0.0);
  // Per-type subtotals first, so the summation order matches the tape
  // version bitwise.
  double total = 0.0;
  for (int t = 0; t < types.size(); ++t) {
    double part = 0.0;
    for (const auto& [i, j] : sets.per_type[t].pos) {
      part += softplus(-scores.scores[t].at(i, j));
    }
    for (const auto& [i, j] : sets.per_type[t].neg) {
      part += softplus(scores.scores[t].at(i, j));
    }
    total += part;
  }
  return total;
}

ad::Value cells_loss_node(const ad::Value& scores, const CellLists& cells,
                          double threshold) {
  const std::vector<double> pos = gather(scores->value, cells.pos);
  const std::vector<double> neg = gather(scores->value, cells.neg);
  std::vector<double> neg_pos(pos.size());
  for (size_t i = 0; i < pos.size(); ++i) neg_pos[i] = -pos[i];
  const double lse_neg = logsumexp_with(threshold, neg);
  const double lse_pos = logsumexp_with(-threshold, neg_pos);

  Matrix v(1, 1);
  v.at(0, 0) = lse_neg + lse_pos;
  CellLists cl = cells;
  return ad::make_node(
      std::move(v), {scores},
      [cl = std::move(cl), pos, neg, lse_neg, lse_pos](ad::Node& n) {
        const double g = n.grad.at(0, 0);
        Matrix& ds = n.inputs[0]->grad;
        for (size_t t = 0; t < cl.neg.size(); ++t) {
          ds.at(cl.neg[t].first, cl.neg[t].second) +=
              g * std::exp(neg[t] - lse_neg);
        }
        for (size_t t = 0; t < cl.pos.size(); ++t) {
          ds.at(cl.pos[t].first, cl.pos[t].second) -=
              g * std::exp(-pos[t] - lse_pos);
        }
      });
}

ad::Value span_loss_node(const std::vector<ad::Value>& type_scores,
                         const LossSets& sets) {
  ad::Value total;
  for (size_t t = 0; t < type_scores.size(); ++t) {
    ad::Value part =
        cells_loss_node(type_scores[t], sets.per_type[t], sets.threshold);
    total = total ? ad::add(total, part) : part;
  }
  return total ? total : ad::constant(Matrix(1, 1));
}

ad::Value cells_bce_node(const ad::Value& scores, const CellLists& cells) {
  double loss = 0.0;
  for (const auto& [i, j] : cells.pos) {
    loss += softplus(-scores->value.at(i, j));
  }
  for (const auto& [i, j] : cells.neg) {
    loss += softplus(scores->value.at(i, j));
  }
  Matrix v(1, 1);
  v.at(0, 0) = loss;
  CellLists cl = cells;
  return ad::make_node(std::move(v), {scores}, [cl = std::move(cl)](ad::Node& n) {
    const double g = n.grad.at(0, 0);
    Matrix& ds = n.inputs[0]->grad;
    const Matrix& s = n.inputs[0]->value;
    for (const auto& [i, j] : cl.pos) {
      ds.at(i, j) += g * (sigmoid(s.at(i, j)) - 1.0);
    }
    for (const auto& [i, j] : cl.neg) {
      ds.at(i, j) += g * sigmoid(s.at(i, j));
    }
  });
}

ad::Value span_bce_node(const std::vector<ad::Value>& type_scores,
                        const LossSets& sets) {
  ad::Value total;
  for (size_t t = 0; t < type_scores.size(); ++t) {
    ad::Value part = cells_bce_node(type_scores[t], sets.per_type[t]);
    total = total ? ad::add(total, part) : part;
  }
  return total ? total : ad::constant(Matrix(1, 1));
}

}  // namespace gpner
