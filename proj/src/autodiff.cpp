#include "gradleak/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gradleak::ad {
namespace {

[[noreturn]] void shape_error(std::string_view op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                              b.shape_str());
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw std::invalid_argument("autodiff: invalid Var");
  return a.tape();
}

Tape& tape_of(Var a, Var b) {
  Tape& t = tape_of(a);
  if (&tape_of(b) != &t) throw std::invalid_argument("autodiff: operands live on different tapes");
  return t;
}

// How the right operand of an elementwise op maps onto the left one.
enum class Bcast { Same, Scalar, Row, Col };

Bcast broadcast_kind(std::string_view op, const Tensor& a, const Tensor& b) {
  if (a.same_shape(b)) return Bcast::Same;
  if (b.rows() == 1 && b.cols() == 1) return Bcast::Scalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Bcast::Row;
  if (b.cols() == 1 && b.rows() == a.rows()) return Bcast::Col;
  shape_error(op, a, b);
}

template <class F>
Tensor elementwise(std::string_view op, const Tensor& a, const Tensor& b, F f) {
  const Bcast k = broadcast_kind(op, a, b);
  Tensor out(a.rows(), a.cols());
  const std::size_t cols = a.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double bv = 0.0;
      switch (k) {
        case Bcast::Same: bv = b(r, c); break;
        case Bcast::Scalar: bv = b[0]; break;
        case Bcast::Row: bv = b(0, c); break;
        case Bcast::Col: bv = b(r, 0); break;
      }
      out(r, c) = f(a(r, c), bv);
    }
  }
  return out;
}

template <class F>
Tensor map(const Tensor& a, F f) {
  Tensor out = a;
  for (double& v : out.data()) v = f(v);
  return out;
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double gelu_value(double x, int order) {
  const double phi = normal_pdf(x);
  const double x2 = x * x;
  switch (order) {
    case 0: return x * normal_cdf(x);
    case 1: return normal_cdf(x) + x * phi;
    case 2: return (2.0 - x2) * phi;
    case 3: return (x2 * x - 4.0 * x) * phi;
    case 4: return (-x2 * x2 + 7.0 * x2 - 4.0) * phi;
    default: throw std::invalid_argument("gelu_derivative: order must be in [0,4]");
  }
}

Var make(Tape& t, Op op, Tensor value, std::vector<int> inputs) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  n.inputs = std::move(inputs);
  return t.push(std::move(n));
}

Var make(Tape& t, Node n) { return t.push(std::move(n)); }

}  // namespace

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "multiply";
    case Op::Div: return "divide";
    case Op::Scale: return "scale";
    case Op::AddScalar: return "add-scalar";
    case Op::Pow: return "pow";
    case Op::MatMul: return "matmul";
    case Op::Transpose: return "transpose";
    case Op::SoftmaxRows: return "row-softmax";
    case Op::LayerNormRows: return "layer-normalize";
    case Op::Tanh: return "tanh";
    case Op::Gelu: return "gelu";
    case Op::ReduceTo: return "reduce";
    case Op::BroadcastTo: return "broadcast";
    case Op::L1Norm: return "l1-norm";
    case Op::L2Norm: return "l2-norm";
    case Op::Dot: return "dot";
    case Op::Concat: return "concat";
    case Op::Slice: return "slice";
    case Op::SliceScatter: return "slice-scatter";
    case Op::Gather: return "embedding-lookup";
    case Op::ScatterAdd: return "scatter-add";
    case Op::CrossEntropy: return "cross-entropy-with-logits";
  }
  return "?";
}

const Tensor& Var::value() const { return tape_->node(id_).value; }
bool Var::tracked() const { return tape_->node(id_).tracked; }

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.tracked = false;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::variable(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.tracked = true;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::push(Node n) {
  if (!n.value.all_finite()) {
    throw std::domain_error(std::string(op_name(n.op)) + ": non-finite output");
  }
  bool tracked = false;
  if (grad_mode_) {
    for (int in : n.inputs) tracked = tracked || nodes_[static_cast<std::size_t>(in)].tracked;
  }
  n.tracked = tracked;
  if (!tracked) n.inputs.clear();
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

std::vector<Var> Tape::backward(Var root, std::span<const Var> wrt, bool create_graph) {
  if (&root.tape() != this) throw std::invalid_argument("backward: root is on another tape");
  if (root.value().size() != 1) {
    throw std::invalid_argument("backward: root must be scalar, got " + root.value().shape_str());
  }
  const int root_id = root.id();
  const std::size_t n = static_cast<std::size_t>(root_id) + 1;

  // Restrict the sweep to nodes lying on a path from some wrt entry.
  std::vector<char> depends(n, 0);
  for (const Var& w : wrt) {
    if (&w.tape() != this) throw std::invalid_argument("backward: wrt entry is on another tape");
    if (w.id() <= root_id && nodes_[static_cast<std::size_t>(w.id())].tracked) depends[w.id()] = 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (depends[i] || !nodes_[i].tracked) continue;
    for (int in : nodes_[i].inputs) {
      if (depends[in]) {
        depends[i] = 1;
        break;
      }
    }
  }

  const bool saved_mode = grad_mode_;
  grad_mode_ = create_graph;
  std::vector<Var> grads(n);
  try {
    if (depends[root_id]) grads[root_id] = constant(Tensor::scalar(1.0));
    for (int id = root_id; id >= 0; --id) {
      if (!depends[id] || !grads[id].valid()) continue;
      const std::vector<int> inputs = nodes_[id].inputs;
      if (inputs.empty()) continue;
      std::vector<Var> in_grads = vjp(id, grads[id]);
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        const int in = inputs[k];
        if (!depends[in] || !in_grads[k].valid()) continue;
        grads[in] = grads[in].valid() ? add(grads[in], in_grads[k]) : in_grads[k];
      }
    }
  } catch (...) {
    grad_mode_ = saved_mode;
    throw;
  }
  grad_mode_ = saved_mode;

  std::vector<Var> out;
  out.reserve(wrt.size());
  for (const Var& w : wrt) {
    if (w.id() <= root_id && grads[w.id()].valid()) {
      out.push_back(grads[w.id()]);
    } else {
      out.push_back(constant(Tensor(w.rows(), w.cols(), 0.0)));
    }
  }
  return out;
}

std::vector<Var> Tape::vjp(int id, Var g) {
  // Rules append nodes while they run; take copies of what they read.
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  const Op op = node.op;
  const std::vector<int> ins = node.inputs;
  const double param = node.param;
  const std::size_t na = node.a, nb = node.b, nc = node.c;
  const std::vector<int> index = node.index;
  const Var out(this, id);
  auto in = [&](std::size_t k) { return Var(this, ins[k]); };

  switch (op) {
    case Op::Leaf: return {};
    case Op::Add: {
      const Var b = in(1);
      return {g, reduce_to(g, b.rows(), b.cols())};
    }
    case Op::Sub: {
      const Var b = in(1);
      return {g, reduce_to(neg(g), b.rows(), b.cols())};
    }
    case Op::Mul: {
      const Var a = in(0), b = in(1);
      return {mul(g, b), reduce_to(mul(g, a), b.rows(), b.cols())};
    }
    case Op::Div: {
      const Var b = in(1);
      const Var gb = neg(div(mul(g, out), b));
      return {div(g, b), reduce_to(gb, b.rows(), b.cols())};
    }
    case Op::Scale: return {scale(g, param)};
    case Op::AddScalar: return {g};
    case Op::Pow: return {mul(g, scale(pow(in(0), param - 1.0), param))};
    case Op::MatMul: return {matmul(g, transpose(in(1))), matmul(transpose(in(0)), g)};
    case Op::Transpose: return {transpose(g)};
    case Op::SoftmaxRows: {
      const Var gy = mul(g, out);
      return {sub(gy, mul(out, row_sum(gy)))};
    }
    case Op::LayerNormRows: {
      // d xhat = inv_std * (g - mean(g) - xhat * mean(g * xhat)), with inv_std
      // recomputed from the input so the rule stays differentiable in x.
      const Var x = in(0);
      const Var centered = sub(x, row_mean(x));
      const Var inv_std = pow(add_scalar(row_mean(mul(centered, centered)), param), -0.5);
      const Var inner = sub(sub(g, row_mean(g)), mul(out, row_mean(mul(g, out))));
      return {mul(inner, inv_std)};
    }
    case Op::Tanh: return {mul(g, add_scalar(neg(mul(out, out)), 1.0))};
    case Op::Gelu: return {mul(g, gelu_derivative(in(0), static_cast<int>(na) + 1))};
    case Op::ReduceTo: {
      const Var a = in(0);
      return {broadcast_to(g, a.rows(), a.cols())};
    }
    case Op::BroadcastTo: {
      const Var a = in(0);
      return {reduce_to(g, a.rows(), a.cols())};
    }
    case Op::L1Norm: {
      const Tensor sign = map(in(0).value(), [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
      return {mul(constant(sign), g)};
    }
    case Op::L2Norm: {
      const Var a = in(0);
      if (out.value().item() == 0.0) return {constant(Tensor(a.rows(), a.cols(), 0.0))};
      return {mul(div(a, out), g)};
    }
    case Op::Dot: return {mul(in(1), g), mul(in(0), g)};
    case Op::Concat: {
      std::vector<Var> res;
      std::size_t offset = 0;
      const int axis = static_cast<int>(na);
      for (std::size_t k = 0; k < ins.size(); ++k) {
        const Var part = in(k);
        const std::size_t len = axis == 0 ? part.rows() : part.cols();
        res.push_back(slice(g, axis, offset, len));
        offset += len;
      }
      return res;
    }
    case Op::Slice: {
      const Var a = in(0);
      const int axis = static_cast<int>(na);
      return {slice_scatter(g, axis, nb, axis == 0 ? a.rows() : a.cols())};
    }
    case Op::SliceScatter: return {slice(g, static_cast<int>(na), nb, nc)};
    case Op::Gather: return {scatter_add(g, index, in(0).rows())};
    case Op::ScatterAdd: return {embedding_lookup(g, index)};
    case Op::CrossEntropy: {
      const Var logits = in(0);
      Tensor onehot(logits.rows(), logits.cols(), 0.0);
      for (std::size_t r = 0; r < index.size(); ++r) onehot(r, static_cast<std::size_t>(index[r])) = 1.0;
      const Var diff = sub(softmax_rows(logits), constant(std::move(onehot)));
      return {mul(diff, scale(g, 1.0 / static_cast<double>(logits.rows())))};
    }
  }
  throw std::logic_error("vjp: unhandled op");
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  return make(t, Op::Add, elementwise("add", a.value(), b.value(), [](double x, double y) { return x + y; }),
              {a.id(), b.id()});
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  return make(t, Op::Sub, elementwise("sub", a.value(), b.value(), [](double x, double y) { return x - y; }),
              {a.id(), b.id()});
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  return make(t, Op::Mul,
              elementwise("multiply", a.value(), b.value(), [](double x, double y) { return x * y; }),
              {a.id(), b.id()});
}

Var div(Var a, Var b) {
  Tape& t = tape_of(a, b);
  return make(t, Op::Div, elementwise("divide", a.value(), b.value(), [](double x, double y) { return x / y; }),
              {a.id(), b.id()});
}

Var scale(Var a, double s) {
  Node n;
  n.op = Op::Scale;
  n.value = map(a.value(), [s](double v) { return v * s; });
  n.inputs = {a.id()};
  n.param = s;
  return make(tape_of(a), std::move(n));
}

Var add_scalar(Var a, double s) {
  Node n;
  n.op = Op::AddScalar;
  n.value = map(a.value(), [s](double v) { return v + s; });
  n.inputs = {a.id()};
  n.param = s;
  return make(tape_of(a), std::move(n));
}

Var neg(Var a) { return scale(a, -1.0); }

Var pow(Var a, double exponent) {
  Node n;
  n.op = Op::Pow;
  n.value = map(a.value(), [exponent](double v) { return std::pow(v, exponent); });
  n.inputs = {a.id()};
  n.param = exponent;
  return make(tape_of(a), std::move(n));
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (x.cols() != y.rows()) shape_error("matmul", x, y);
  Tensor out(x.rows(), y.cols(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t k = 0; k < x.cols(); ++k) {
      const double xv = x(i, k);
      if (xv == 0.0) continue;
      for (std::size_t j = 0; j < y.cols(); ++j) out(i, j) += xv * y(k, j);
    }
  }
  return make(t, Op::MatMul, std::move(out), {a.id(), b.id()});
}

Var transpose(Var a) {
  const Tensor& x = a.value();
  Tensor out(x.cols(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(j, i) = x(i, j);
  return make(tape_of(a), Op::Transpose, std::move(out), {a.id()});
}

Var softmax_rows(Var a) {
  Tensor out = a.value();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row_span(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      total += v;
    }
    for (double& v : row) v /= total;
  }
  return make(tape_of(a), Op::SoftmaxRows, std::move(out), {a.id()});
}

Var layer_norm_rows(Var a, double eps) {
  Tensor out = a.value();
  const double c = static_cast<double>(out.cols());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row_span(r);
    double mu = 0.0;
    for (double v : row) mu += v;
    mu /= c;
    double var = 0.0;
    for (double v : row) var += (v - mu) * (v - mu);
    var /= c;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (double& v : row) v = (v - mu) * inv;
  }
  Node n;
  n.op = Op::LayerNormRows;
  n.value = std::move(out);
  n.inputs = {a.id()};
  n.param = eps;
  return make(tape_of(a), std::move(n));
}

Var tanh(Var a) {
  return make(tape_of(a), Op::Tanh, map(a.value(), [](double v) { return std::tanh(v); }), {a.id()});
}

Var gelu(Var a) { return gelu_derivative(a, 0); }

Var gelu_derivative(Var a, int order) {
  if (order < 0 || order > 4) throw std::invalid_argument("gelu_derivative: order must be in [0,4]");
  Node n;
  n.op = Op::Gelu;
  n.value = map(a.value(), [order](double v) { return gelu_value(v, order); });
  n.inputs = {a.id()};
  n.a = static_cast<std::size_t>(order);
  return make(tape_of(a), std::move(n));
}

Var reduce_to(Var a, std::size_t rows, std::size_t cols) {
  const Tensor& x = a.value();
  if (rows == x.rows() && cols == x.cols()) return a;
  if ((rows != 1 && rows != x.rows()) || (cols != 1 && cols != x.cols())) {
    shape_error("reduce", x, Tensor(rows, cols));
  }
  Tensor out(rows, cols, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out(rows == 1 ? 0 : r, cols == 1 ? 0 : c) += x(r, c);
  return make(tape_of(a), Op::ReduceTo, std::move(out), {a.id()});
}

Var broadcast_to(Var a, std::size_t rows, std::size_t cols) {
  const Tensor& x = a.value();
  if (rows == x.rows() && cols == x.cols()) return a;
  if ((x.rows() != 1 && x.rows() != rows) || (x.cols() != 1 && x.cols() != cols)) {
    shape_error("broadcast", x, Tensor(rows, cols));
  }
  Tensor out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = x(x.rows() == 1 ? 0 : r, x.cols() == 1 ? 0 : c);
  return make(tape_of(a), Op::BroadcastTo, std::move(out), {a.id()});
}

Var sum(Var a) {
  if (a.value().size() == 1) return a;
  return reduce_to(a, 1, 1);
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var row_sum(Var a) { return reduce_to(a, a.rows(), 1); }

Var row_mean(Var a) { return scale(row_sum(a), 1.0 / static_cast<double>(a.cols())); }

Var l1_norm(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += std::abs(v);
  return make(tape_of(a), Op::L1Norm, Tensor::scalar(s), {a.id()});
}

Var l2_norm(Var a) {
  return make(tape_of(a), Op::L2Norm, Tensor::scalar(gradleak::l2_norm(a.value().data())), {a.id()});
}

Var dot(Var a, Var b) {
  Tape& t = tape_of(a, b);
  if (!a.value().same_shape(b.value())) shape_error("dot", a.value(), b.value());
  return make(t, Op::Dot, Tensor::scalar(gradleak::dot(a.value().data(), b.value().data())), {a.id(), b.id()});
}

Var concat(std::span<const Var> parts, int axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  if (axis != 0 && axis != 1) throw std::invalid_argument("concat: axis must be 0 or 1");
  Tape& t = tape_of(parts[0]);
  const Tensor& first = parts[0].value();
  std::size_t total = 0;
  std::vector<int> ids;
  for (const Var& p : parts) {
    tape_of(p, parts[0]);
    const Tensor& v = p.value();
    if (axis == 0 ? v.cols() != first.cols() : v.rows() != first.rows()) shape_error("concat", first, v);
    total += axis == 0 ? v.rows() : v.cols();
    ids.push_back(p.id());
  }
  Tensor out = axis == 0 ? Tensor(total, first.cols()) : Tensor(first.rows(), total);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < v.rows(); ++r)
      for (std::size_t c = 0; c < v.cols(); ++c) {
        if (axis == 0) out(offset + r, c) = v(r, c);
        else out(r, offset + c) = v(r, c);
      }
    offset += axis == 0 ? v.rows() : v.cols();
  }
  Node n;
  n.op = Op::Concat;
  n.value = std::move(out);
  n.inputs = std::move(ids);
  n.a = static_cast<std::size_t>(axis);
  return make(t, std::move(n));
}

Var slice(Var a, int axis, std::size_t start, std::size_t length) {
  const Tensor& x = a.value();
  const std::size_t extent = axis == 0 ? x.rows() : x.cols();
  if ((axis != 0 && axis != 1) || length == 0 || start + length > extent) {
    throw std::invalid_argument("slice: range [" + std::to_string(start) + ", " +
                                std::to_string(start + length) + ") out of bounds for " + x.shape_str());
  }
  Tensor out = axis == 0 ? Tensor(length, x.cols()) : Tensor(x.rows(), length);
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c)
      out(r, c) = axis == 0 ? x(start + r, c) : x(r, start + c);
  Node n;
  n.op = Op::Slice;
  n.value = std::move(out);
  n.inputs = {a.id()};
  n.a = static_cast<std::size_t>(axis);
  n.b = start;
  n.c = length;
  return make(tape_of(a), std::move(n));
}

Var slice_scatter(Var a, int axis, std::size_t start, std::size_t full_length) {
  const Tensor& x = a.value();
  const std::size_t len = axis == 0 ? x.rows() : x.cols();
  if ((axis != 0 && axis != 1) || start + len > full_length) {
    throw std::invalid_argument("slice-scatter: block does not fit");
  }
  Tensor out = axis == 0 ? Tensor(full_length, x.cols(), 0.0) : Tensor(x.rows(), full_length, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (axis == 0) out(start + r, c) = x(r, c);
      else out(r, start + c) = x(r, c);
    }
  Node n;
  n.op = Op::SliceScatter;
  n.value = std::move(out);
  n.inputs = {a.id()};
  n.a = static_cast<std::size_t>(axis);
  n.b = start;
  n.c = len;
  return make(tape_of(a), std::move(n));
}

Var embedding_lookup(Var table, std::span<const int> ids) {
  const Tensor& w = table.value();
  if (ids.empty()) throw std::invalid_argument("embedding-lookup: empty id list");
  Tensor out(ids.size(), w.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= w.rows()) {
      throw std::invalid_argument("embedding-lookup: id " + std::to_string(ids[r]) +
                                  " out of range for table " + w.shape_str());
    }
    std::copy_n(w.row_span(static_cast<std::size_t>(ids[r])).begin(), w.cols(), out.row_span(r).begin());
  }
  Node n;
  n.op = Op::Gather;
  n.value = std::move(out);
  n.inputs = {table.id()};
  n.index.assign(ids.begin(), ids.end());
  return make(tape_of(table), std::move(n));
}

Var scatter_add(Var rows, std::span<const int> ids, std::size_t table_rows) {
  const Tensor& x = rows.value();
  if (ids.size() != x.rows()) throw std::invalid_argument("scatter-add: id count does not match rows");
  Tensor out(table_rows, x.cols(), 0.0);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    auto dst = out.row_span(static_cast<std::size_t>(ids[r]));
    auto src = x.row_span(r);
    for (std::size_t c = 0; c < x.cols(); ++c) dst[c] += src[c];
  }
  Node n;
  n.op = Op::ScatterAdd;
  n.value = std::move(out);
  n.inputs = {rows.id()};
  n.index.assign(ids.begin(), ids.end());
  return make(tape_of(rows), std::move(n));
}

Var cross_entropy_with_logits(Var logits, std::span<const int> labels) {
  const Tensor& z = logits.value();
  if (labels.size() != z.rows()) {
    throw std::invalid_argument("cross-entropy-with-logits: " + std::to_string(labels.size()) +
                                " labels for logits " + z.shape_str());
  }
  double total = 0.0;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= z.cols()) {
      throw std::invalid_argument("cross-entropy-with-logits: label out of range");
    }
    auto row = z.row_span(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - mx);
    total += mx + std::log(s) - row[static_cast<std::size_t>(labels[r])];
  }
  Node n;
  n.op = Op::CrossEntropy;
  n.value = Tensor::scalar(total / static_cast<double>(z.rows()));
  n.inputs = {logits.id()};
  n.index.assign(labels.begin(), labels.end());
  return make(tape_of(logits), std::move(n));
}

}  // namespace gradleak::ad
