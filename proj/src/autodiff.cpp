#include "gpner/autodiff.hpp"

#include <string>
#include <unordered_set>
#include <utility>

#include "gpner/error.hpp"

namespace gpner::ad {

Value make_node(Matrix value, std::vector<Value> inputs,
                std::function<void(Node&)> pull) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->inputs = std::move(inputs);
  n->pull = std::move(pull);
  return n;
}

Value constant(Matrix m) { return make_node(std::move(m), {}, nullptr); }

Value leaf(Param& p) {
  auto n = std::make_shared<Node>();
  n->value = p.value;
  n->bound = &p;
  n->pull = [](Node& n) { add_in_place(n.bound->grad, n.grad); };
  return n;
}

Value matmul(const Value& a, const Value& b) {
  Matrix v = gpner::matmul(a->value, b->value);
  return make_node(std::move(v), {a, b}, [](Node& n) {
    add_in_place(n.inputs[0]->grad, matmul_nt(n.grad, n.inputs[1]->value));
    add_in_place(n.inputs[1]->grad, matmul_tn(n.inputs[0]->value, n.grad));
  });
}

Value matmul_nt(const Value& a, const Value& b) {
  Matrix v = gpner::matmul_nt(a->value, b->value);
  return make_node(std::move(v), {a, b}, [](Node& n) {
    add_in_place(n.inputs[0]->grad, gpner::matmul(n.grad, n.inputs[1]->value));
    add_in_place(n.inputs[1]->grad, matmul_tn(n.grad, n.inputs[0]->value));
  });
}

Value add(const Value& a, const Value& b) {
  Matrix v = gpner::add(a->value, b->value);
  return make_node(std::move(v), {a, b}, [](Node& n) {
    add_in_place(n.inputs[0]->grad, n.grad);
    add_in_place(n.inputs[1]->grad, n.grad);
  });
}

Value scale(const Value& a, double c) {
  Matrix v = gpner::scale(a->value, c);
  return make_node(std::move(v), {a}, [c](Node& n) {
    add_scaled_in_place(n.inputs[0]->grad, n.grad, c);
  });
}

Value hadamard(const Value& a, const Value& b) {
  if (!a->value.same_shape(b->value)) {
    throw DimError("hadamard: " + a->value.shape_str() + " vs " +
                   b->value.shape_str());
  }
  Matrix v = a->value;
  for (size_t i = 0; i < v.data().size(); ++i) v.data()[i] *= b->value.data()[i];
  return make_node(std::move(v), {a, b}, [](Node& n) {
    Matrix& da = n.inputs[0]->grad;
    Matrix& db = n.inputs[1]->grad;
    const auto& av = n.inputs[0]->value.data();
    const auto& bv = n.inputs[1]->value.data();
    for (size_t i = 0; i < n.grad.data().size(); ++i) {
      da.data()[i] += n.grad.data()[i] * bv[i];
      db.data()[i] += n.grad.data()[i] * av[i];
    }
  });
}

Value sum_all(const Value& a) {
  Matrix v(1, 1);
  for (double x : a->value.data()) v.at(0, 0) += x;
  return make_node(std::move(v), {a}, [](Node& n) {
    const double g = n.grad.at(0, 0);
    for (double& d : n.inputs[0]->grad.data()) d += g;
  });
}

Value add_row_bias(const Value& x, const Value& b) {
  if (b->value.rows() != 1 || b->value.cols() != x->value.cols()) {
    throw DimError("add_row_bias: " + x->value.shape_str() + " + " +
                   b->value.shape_str());
  }
  Matrix v = x->value;
  for (int i = 0; i < v.rows(); ++i) {
    double* r = v.row(i);
    for (int j = 0; j < v.cols(); ++j) r[j] += b->value.at(0, j);
  }
  return make_node(std::move(v), {x, b}, [](Node& n) {
    add_in_place(n.inputs[0]->grad, n.grad);
    add_in_place(n.inputs[1]->grad, col_sums(n.grad));
  });
}

Value affine(const Value& x, const Value& w, const Value& b) {
  return add_row_bias(matmul(x, w), b);
}

Value embedding_rows(const Value& table, const std::vector<int>& ids) {
  const Matrix& t = table->value;
  Matrix v(static_cast<int>(ids.size()), t.cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= t.rows()) {
      throw ValidationError("token id " + std::to_string(ids[i]) +
                            " at position " + std::to_string(i) +
                            " outside table of " + std::to_string(t.rows()) +
                            " rows");
    }
    const double* src = t.row(ids[i]);
    double* dst = v.row(static_cast<int>(i));
    for (int j = 0; j < t.cols(); ++j) dst[j] = src[j];
  }
  return make_node(std::move(v), {table}, [ids](Node& n) {
    Matrix& dt = n.inputs[0]->grad;
    for (size_t i = 0; i < ids.size(); ++i) {
      const double* g = n.grad.row(static_cast<int>(i));
      double* dst = dt.row(ids[i]);
      for (int j = 0; j < dt.cols(); ++j) dst[j] += g[j];
    }
  });
}

Value window3(const Value& x) {
  const Matrix& xv = x->value;
  const int n = xv.rows();
  const int c = xv.cols();
  Matrix v(n, 3 * c);
  for (int i = 0; i < n; ++i) {
    for (int w = -1; w <= 1; ++w) {
      const int src = i + w;
      if (src < 0 || src >= n) continue;
      const double* s = xv.row(src);
      double* d = v.row(i) + (w + 1) * c;
      for (int j = 0; j < c; ++j) d[j] = s[j];
    }
  }
  return make_node(std::move(v), {x}, [n, c](Node& nd) {
    Matrix& dx = nd.inputs[0]->grad;
    for (int i = 0; i < n; ++i) {
      for (int w = -1; w <= 1; ++w) {
        const int src = i + w;
        if (src < 0 || src >= n) continue;
        const double* g = nd.grad.row(i) + (w + 1) * c;
        double* d = dx.row(src);
        for (int j = 0; j < c; ++j) d[j] += g[j];
      }
    }
  });
}

Value rope_rows(const Value& x, const RotaryEncoding& enc) {
  Matrix v = x->value;
  enc.rotate_rows_in_place(v);
  return make_node(std::move(v), {x}, [&enc](Node& n) {
    Matrix g = n.grad;
    enc.rotate_rows_inverse_in_place(g);
    add_in_place(n.inputs[0]->grad, g);
  });
}

Value outer_sum(const Value& u, const Value& v) {
  if (u->value.cols() != 1 || v->value.cols() != 1) {
    throw DimError("outer_sum expects column vectors, got " +
                   u->value.shape_str() + " and " + v->value.shape_str());
  }
  const int n = u->value.rows();
  const int m = v->value.rows();
  Matrix out(n, m);
  for (int i = 0; i < n; ++i) {
    const double ui = u->value.at(i, 0);
    double* r = out.row(i);
    for (int j = 0; j < m; ++j) r[j] = ui + v->value.at(j, 0);
  }
  return make_node(std::move(out), {u, v}, [n, m](Node& nd) {
    Matrix& du = nd.inputs[0]->grad;
    Matrix& dv = nd.inputs[1]->grad;
    for (int i = 0; i < n; ++i) {
      const double* g = nd.grad.row(i);
      double su = 0.0;
      for (int j = 0; j < m; ++j) {
        su += g[j];
        dv.at(j, 0) += g[j];
      }
      du.at(i, 0) += su;
    }
  });
}

Value slice_rows(const Value& x, int begin, int count) {
  const Matrix& xv = x->value;
  if (begin < 0 || count < 0 || begin + count > xv.rows()) {
    throw DimError("slice_rows [" + std::to_string(begin) + ", " +
                   std::to_string(begin + count) + ") of " + xv.shape_str());
  }
  Matrix v(count, xv.cols());
  for (int i = 0; i < count; ++i) {
    const double* s = xv.row(begin + i);
    double* d = v.row(i);
    for (int j = 0; j < xv.cols(); ++j) d[j] = s[j];
  }
  return make_node(std::move(v), {x}, [begin, count](Node& n) {
    Matrix& dx = n.inputs[0]->grad;
    for (int i = 0; i < count; ++i) {
      const double* g = n.grad.row(i);
      double* d = dx.row(begin + i);
      for (int j = 0; j < dx.cols(); ++j) d[j] += g[j];
    }
  });
}

void backward(const Value& loss) {
  if (loss->value.rows() != 1 || loss->value.cols() != 1) {
    throw DimError("backward expects a 1x1 loss, got " +
                   loss->value.shape_str());
  }
  // Post-order DFS gives a topological order (inputs before consumers).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  struct Frame {
    Node* node;
    size_t next_input;
  };
  std::vector<Frame> stack;
  if (seen.insert(loss.get()).second) stack.push_back({loss.get(), 0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_input < f.node->inputs.size()) {
      Node* child = f.node->inputs[f.next_input++].get();
      if (seen.insert(child).second) stack.push_back({child, 0});
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }
  for (Node* n : order) {
    n->grad = Matrix(n->value.rows(), n->value.cols());
  }
  loss->grad.at(0, 0) = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->pull) (*it)->pull(**it);
  }
}

}  // namespace gpner::ad
