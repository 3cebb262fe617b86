#include "gpner/heads.hpp"

#include <cmath>
#include <set>

#include "gpner/error.hpp"

namespace gpner {

std::string head_kind_name(HeadKind k) {
  switch (k) {
    case HeadKind::gp: return "gp";
    case HeadKind::egp: return "egp";
    case HeadKind::egp_h: return "egp-h";
  }
  return "?";
}

HeadKind head_kind_from(const std::string& name) {
  if (name == "gp") return HeadKind::gp;
  if (name == "egp") return HeadKind::egp;
  if (name == "egp-h") return HeadKind::egp_h;
  throw ValidationError("unknown head kind '" + name +
                        "' (expected gp, egp or egp-h)");
}

EntityTypeSet::EntityTypeSet(std::vector<std::string> names)
    : names_(std::move(names)) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw ValidationError("entity type names must be nonempty");
    if (!seen.insert(n).second) {
      throw ValidationError("duplicate entity type '" + n + "'");
    }
  }
}

int EntityTypeSet::index(const std::string& name) const {
  for (int i = 0; i < size(); ++i) {
    if (names_[i] == name) return i;
  }
  throw ValidationError("unknown entity type '" + name + "'");
}

std::optional<int> EntityTypeSet::find(const std::string& name) const {
  for (int i = 0; i < size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

Matrix ScoreTensor::display(int type) const {
  Matrix m = scores[type];
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (!mask.at(i, j)) m.at(i, j) = -1e30;
    }
  }
  return m;
}

Matrix init_weight(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  const double r = 0.5 / std::sqrt(static_cast<double>(rows));
  for (double& v : m.data()) v = rng.uniform(-r, r);
  return m;
}

namespace {

void check_dims(int v, int d, const char* where) {
  if (v <= 0 || d <= 0) {
    throw ValidationError(std::string(where) + ": v and d must be positive");
  }
}

}  // namespace

GPHead GPHead::init(EntityTypeSet types, int v, int d, Rng& rng) {
  check_dims(v, d, "gp head");
  GPHead h;
  h.v = v;
  h.d = d;
  h.types = std::move(types);
  for (int t = 0; t < h.types.size(); ++t) {
    const std::string base = "head.gp." + h.types.name(t);
    TypeParams p;
    p.wq = Param(base + ".wq", init_weight(v, d, rng));
    p.bq = Param(base + ".bq", Matrix(1, d));
    p.wk = Param(base + ".wk", init_weight(v, d, rng));
    p.bk = Param(base + ".bk", Matrix(1, d));
    h.per_type.push_back(std::move(p));
  }
  return h;
}

std::vector<Param*> GPHead::params() {
  std::vector<Param*> out;
  for (auto& p : per_type) {
    out.push_back(&p.wq);
    out.push_back(&p.bq);
    out.push_back(&p.wk);
    out.push_back(&p.bk);
  }
  return out;
}

long long GPHead::weight_param_count() const {
  long long c = 0;
  for (const auto& p : per_type) c += p.wq.size() + p.wk.size();
  return c;
}

EGPHead EGPHead::init(EntityTypeSet types, int v, int d, bool over_h,
                      Rng& rng) {
  check_dims(v, d, "egp head");
  EGPHead h;
  h.v = v;
  h.d = d;
  h.over_h = over_h;
  h.types = std::move(types);
  h.wq = Param("head.shared.wq", init_weight(v, d, rng));
  h.bq = Param("head.shared.bq", Matrix(1, d));
  h.wk = Param("head.shared.wk", init_weight(v, d, rng));
  h.bk = Param("head.shared.bk", Matrix(1, d));
  const int wlen = over_h ? 2 * v : 4 * d;
  for (int t = 0; t < h.types.size(); ++t) {
    h.type_w.push_back(Param("head.type." + h.types.name(t) + ".w",
                             init_weight(wlen, 1, rng)));
  }
  return h;
}

std::vector<Param*> EGPHead::params() {
  std::vector<Param*> out{&wq, &bq, &wk, &bk};
  for (auto& w : type_w) out.push_back(&w);
  return out;
}

long long EGPHead::weight_param_count() const {
  long long c = wq.size() + wk.size();
  for (const auto& w : type_w) c += w.size();
  return c;
}

std::pair<Matrix, Matrix> project(const Matrix& h, const GPHead& head,
                                  const std::string& type) {
  const int t = head.types.index(type);
  const auto& p = head.per_type[t];
  return {affine(h, p.wq.value, p.bq.value), affine(h, p.wk.value, p.bk.value)};
}

std::pair<Matrix, Matrix> project(const Matrix& h, const EGPHead& head) {
  return {affine(h, head.wq.value, head.bq.value),
          affine(h, head.wk.value, head.bk.value)};
}

std::vector<ad::Value> score_gp(const ad::Value& h, GPHead& head,
                                const RotaryEncoding* rope) {
  std::vector<ad::Value> out;
  out.reserve(head.per_type.size());
  for (auto& p : head.per_type) {
    ad::Value q = ad::affine(h, ad::leaf(p.wq), ad::leaf(p.bq));
    ad::Value k = ad::affine(h, ad::leaf(p.wk), ad::leaf(p.bk));
    if (rope != nullptr) {
      q = ad::rope_rows(q, *rope);
      k = ad::rope_rows(k, *rope);
    }
    out.push_back(ad::matmul_nt(q, k));
  }
  return out;
}

std::vector<ad::Value> score_egp(const ad::Value& h, EGPHead& head,
                                 const RotaryEncoding* rope) {
  ad::Value q = ad::affine(h, ad::leaf(head.wq), ad::leaf(head.bq));
  ad::Value k = ad::affine(h, ad::leaf(head.wk), ad::leaf(head.bk));
  ad::Value qr = q;
  ad::Value kr = k;
  if (rope != nullptr) {
    qr = ad::rope_rows(q, *rope);
    kr = ad::rope_rows(k, *rope);
  }
  // The extraction term is one shared node; only it sees the rotation.
  ad::Value extraction = ad::matmul_nt(qr, kr);

  const int d = head.d;
  const int v = head.v;
  std::vector<ad::Value> out;
  out.reserve(head.type_w.size());
  for (auto& wp : head.type_w) {
    ad::Value w = ad::leaf(wp);
    ad::Value row_term, col_term;
    if (head.over_h) {
      row_term = ad::matmul(h, ad::slice_rows(w, 0, v));
      col_term = ad::matmul(h, ad::slice_rows(w, v, v));
    } else {
      row_term = ad::add(ad::matmul(q, ad::slice_rows(w, 0, d)),
                         ad::matmul(k, ad::slice_rows(w, d, d)));
      col_term = ad::add(ad::matmul(q, ad::slice_rows(w, 2 * d, d)),
                         ad::matmul(k, ad::slice_rows(w, 3 * d, d)));
    }
    out.push_back(ad::add(extraction, ad::outer_sum(row_term, col_term)));
  }
  return out;
}

long long added_params(HeadKind kind, int v, int d) {
  check_dims(v, d, "added_params");
  switch (kind) {
    case HeadKind::gp: return 2LL * v * d;
    case HeadKind::egp: return 4LL * d;
    case HeadKind::egp_h: return 2LL * v;
  }
  throw ValidationError("unknown head kind");
}

long long added_params(const std::string& kind, int v, int d) {
  return added_params(head_kind_from(kind), v, d);
}

}  // namespace gpner
