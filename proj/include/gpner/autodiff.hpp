#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "gpner/matrix.hpp"
#include "gpner/rope.hpp"

namespace gpner::ad {

// Reverse-mode tape over Matrix values. A forward pass builds a DAG of
// shared nodes; backward() walks it once in reverse topological order and
// adds each leaf's gradient into its bound Param. Graphs are per-sentence
// and freed when the last Value handle goes away.
struct Node;
using Value = std::shared_ptr<Node>;

struct Node {
  Matrix value;
  Matrix grad;  // allocated per backward pass
  std::vector<Value> inputs;
  std::function<void(Node&)> pull;  // pushes this->grad into inputs
  Param* bound = nullptr;           // set for leaves only
};

// Factory for custom ops (used by the loss module).
Value make_node(Matrix value, std::vector<Value> inputs,
                std::function<void(Node&)> pull);

Value constant(Matrix m);
Value leaf(Param& p);

Value matmul(const Value& a, const Value& b);     // a * b
Value matmul_nt(const Value& a, const Value& b);  // a * b^T
Value add(const Value& a, const Value& b);
Value scale(const Value& a, double c);
Value hadamard(const Value& a, const Value& b);
Value sum_all(const Value& a);  // 1x1
Value add_row_bias(const Value& x, const Value& b);
Value affine(const Value& x, const Value& w, const Value& b);

// Gather rows of an embedding table; backward scatter-adds into the table.
Value embedding_rows(const Value& table, const std::vector<int>& ids);

// Row i becomes [x_{i-1}; x_i; x_{i+1}], zero-padded at the edges.
Value window3(const Value& x);

// Rotate row i of x to position i (rotary encoding).
Value rope_rows(const Value& x, const RotaryEncoding& enc);

// u (n x 1) and v (m x 1) -> n x m with [i][j] = u_i + v_j.
Value outer_sum(const Value& u, const Value& v);

Value slice_rows(const Value& x, int begin, int count);

// Accumulate d(loss)/d(param) into every reachable leaf's Param.grad.
// loss must be 1x1. Repeated calls keep accumulating.
void backward(const Value& loss);

}  // namespace gpner::ad
