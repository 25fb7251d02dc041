#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <string_view>
#include <vector>

#include "gradleak/tensor.hpp"

// Reverse-mode automatic differentiation over a single append-only tape.
//
// Every op appends one node to the tape of its inputs. Backward rules are
// themselves written in terms of the public ops, so calling backward() with
// create_graph=true records the backward computation on the same tape and its
// outputs can be differentiated again. The gradient-matching objective needs
// exactly this: it is a function of parameter gradients and is minimised over
// the model input.
namespace gradleak::ad {

enum class Op {
  Leaf,
  Add,
  Sub,
  Mul,
  Div,
  Scale,
  AddScalar,
  Pow,
  MatMul,
  Transpose,
  SoftmaxRows,
  LayerNormRows,
  Tanh,
  Gelu,  // order 0 is GELU itself, order k>0 its k-th derivative
  ReduceTo,
  BroadcastTo,
  L1Norm,
  L2Norm,
  Dot,
  Concat,
  Slice,
  SliceScatter,
  Gather,
  ScatterAdd,
  CrossEntropy,
};

std::string_view op_name(Op op);

struct Node {
  Op op = Op::Leaf;
  Tensor value;
  std::vector<int> inputs;  // empty for untracked nodes
  double param = 0.0;
  std::size_t a = 0, b = 0, c = 0;
  std::vector<int> index;
  bool tracked = false;
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  int id() const { return id_; }
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool tracked() const;

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // A leaf that never receives gradient.
  Var constant(Tensor value);
  // A leaf that gradients are taken with respect to.
  Var variable(Tensor value);

  // Gradients of the scalar root with respect to each entry of wrt. A wrt
  // entry the root does not depend on gets a zero tensor of its own shape.
  // With create_graph the returned gradients are tracked nodes and may be
  // differentiated again.
  std::vector<Var> backward(Var root, std::span<const Var> wrt, bool create_graph = false);

  std::size_t size() const { return nodes_.size(); }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

  // When false, every new node is recorded as an untracked constant.
  bool grad_mode() const { return grad_mode_; }

  Var push(Node node);

 private:
  std::vector<Var> vjp(int id, Var grad);

  std::deque<Node> nodes_;
  bool grad_mode_ = true;
};

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var neg(Var a);
Var pow(Var a, double exponent);
Var matmul(Var a, Var b);
Var transpose(Var a);
Var softmax_rows(Var a);
Var layer_norm_rows(Var a, double eps = 1e-5);
Var tanh(Var a);
Var gelu(Var a);
Var gelu_derivative(Var a, int order);
Var reduce_to(Var a, std::size_t rows, std::size_t cols);
Var broadcast_to(Var a, std::size_t rows, std::size_t cols);
Var sum(Var a);
Var mean(Var a);
Var row_sum(Var a);
Var row_mean(Var a);
Var l1_norm(Var a);
Var l2_norm(Var a);
Var dot(Var a, Var b);
Var concat(std::span<const Var> parts, int axis);
Var slice(Var a, int axis, std::size_t start, std::size_t length);
Var slice_scatter(Var a, int axis, std::size_t start, std::size_t full_length);
Var embedding_lookup(Var table, std::span<const int> ids);
Var scatter_add(Var rows, std::span<const int> ids, std::size_t table_rows);
// Mean over rows of -log softmax(logits)[label].
Var cross_entropy_with_logits(Var logits, std::span<const int> labels);

}  // namespace gradleak::ad
