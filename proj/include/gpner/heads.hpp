#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gpner/autodiff.hpp"
#include "gpner/mask.hpp"
#include "gpner/matrix.hpp"
#include "gpner/rng.hpp"
#include "gpner/rope.hpp"

namespace gpner {

enum class HeadKind { gp, egp, egp_h };

std::string head_kind_name(HeadKind k);
HeadKind head_kind_from(const std::string& name);  // throws on unknown kind

// Ordered set of entity type names. Order is fixed for a model's lifetime
// and defines the score-tensor layout and tie-breaking in flat decoding.
class EntityTypeSet {
 public:
  EntityTypeSet() = default;
  explicit EntityTypeSet(std::vector<std::string> names);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int i) const { return names_[i]; }
  const std::vector<std::string>& names() const { return names_; }
  int index(const std::string& name) const;  // throws naming the type
  std::optional<int> find(const std::string& name) const;

 private:
  std::vector<std::string> names_;
};

// Per-type n x n span scores plus the validity mask.
struct ScoreTensor {
  std::vector<Matrix> scores;  // one n x n matrix per type
  Mask mask;

  // Copy of one type's scores with masked-out cells filled with -1e30,
  // for display/debug dumps only.
  Matrix display(int type) const;
};

// Global Pointer head: a dedicated query and key projection per type.
struct GPHead {
  int v = 0;
  int d = 0;
  EntityTypeSet types;
  struct TypeParams {
    Param wq, bq, wk, bk;
  };
  std::vector<TypeParams> per_type;

  static GPHead init(EntityTypeSet types, int v, int d, Rng& rng);
  std::vector<Param*> params();
  long long weight_param_count() const;  // weights only, biases excluded
};

// Efficient head: one shared projection pair plus a cheap per-type vector.
// over_h = false is the variant whose type term reads [q_i;k_i;q_j;k_j]
// (w has length 4d); over_h = true reads the raw embeddings [h_i;h_j]
// (w has length 2v).
struct EGPHead {
  int v = 0;
  int d = 0;
  bool over_h = false;
  EntityTypeSet types;
  Param wq, bq, wk, bk;        // shared across types
  std::vector<Param> type_w;   // one per type: (4d x 1) or (2v x 1)

  static EGPHead init(EntityTypeSet types, int v, int d, bool over_h,
                      Rng& rng);
  std::vector<Param*> params();
  long long weight_param_count() const;
};

// q_i = W_q h_i + b_q and k_i = W_k h_i + b_k for one type (GP) or the
// shared pair (EGP, type ignored). Plain-matrix path used by tools and
// verification; training goes through the tape ops below.
std::pair<Matrix, Matrix> project(const Matrix& h, const GPHead& head,
                                  const std::string& type);
std::pair<Matrix, Matrix> project(const Matrix& h, const EGPHead& head);

// Tape-based scoring: one n x n score node per type, in type order.
// rope == nullptr disables rotary position injection.
std::vector<ad::Value> score_gp(const ad::Value& h, GPHead& head,
                                const RotaryEncoding* rope);
std::vector<ad::Value> score_egp(const ad::Value& h, EGPHead& head,
                                 const RotaryEncoding* rope);

// Weight parameters added when one new entity type is registered:
// gp -> 2vd, egp -> 4d, egp-h -> 2v. Biases are excluded from the count.
long long added_params(HeadKind kind, int v, int d);
long long added_params(const std::string& kind, int v, int d);

// Fan-in scaled uniform init: entries drawn from +-0.5/sqrt(rows).
Matrix init_weight(int rows, int cols, Rng& rng);

}  // namespace gpner
