#include "coldoc/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace coldoc {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

void check_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw std::logic_error(std::string(op) + ": tensor is not defined");
}

}  // namespace

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

// --- backward machinery -------------------------------------------------

/// Scratch adjoint storage for one backward run. Leaf gradients are only
/// merged into Tensor::grad at the end, so repeated backward calls see
/// clean intermediate state and accumulate exactly once per run.
class BackwardPass {
 public:
  std::vector<double>* find(const detail::TensorNode* n) {
    auto it = adj_.find(n);
    return it == adj_.end() ? nullptr : &it->second;
  }

  std::vector<double>& at_or_create(const detail::TensorNode* n) {
    auto [it, inserted] = adj_.try_emplace(n);
    if (inserted) it->second.assign(n->data.size(), 0.0);
    return it->second;
  }

 private:
  std::unordered_map<const detail::TensorNode*, std::vector<double>> adj_;
};

class OpBuilder {
 public:
  using GradFn = std::function<void(BackwardPass&, const std::vector<double>&)>;

  static Tensor make(std::vector<std::size_t> shape, std::vector<double> data,
                     std::vector<std::shared_ptr<detail::TensorNode>> parents, GradFn grad_fn) {
    auto n = std::make_shared<detail::TensorNode>();
    n->shape = std::move(shape);
    n->data = std::move(data);
    n->is_leaf = false;
    n->seq = next_seq();
    bool rg = false;
    for (const auto& p : parents) rg = rg || p->requires_grad;
    n->requires_grad = rg;
    if (rg) {
      n->parents = std::move(parents);
      detail::TensorNode* self = n.get();
      n->backward_fn = [self, fn = std::move(grad_fn)](BackwardPass& bp) {
        if (const std::vector<double>* g = bp.find(self)) fn(bp, *g);
      };
    }
    return wrap(std::move(n));
  }

  static Tensor leaf(std::vector<std::size_t> shape, std::vector<double> data,
                     bool requires_grad) {
    if (shape_product(shape) != data.size()) {
      throw std::invalid_argument("tensor: shape " + shape_str(shape) + " does not match " +
                                  std::to_string(data.size()) + " elements");
    }
    auto n = std::make_shared<detail::TensorNode>();
    n->shape = std::move(shape);
    n->data = std::move(data);
    n->requires_grad = requires_grad;
    n->seq = next_seq();
    return wrap(std::move(n));
  }

  static Tensor wrap(std::shared_ptr<detail::TensorNode> n) { return Tensor(std::move(n)); }
  static const std::shared_ptr<detail::TensorNode>& node(const Tensor& t) { return t.node_; }

  static std::uint64_t next_seq() {
    static std::atomic<std::uint64_t> counter{0};
    return ++counter;
  }
};

namespace {

using Node = detail::TensorNode;
using NodePtr = std::shared_ptr<Node>;

const NodePtr& node_of(const Tensor& t) { return OpBuilder::node(t); }

/// Adds g into the adjoint of `p` when it participates in differentiation.
/// Returns nullptr when the parent is a constant.
std::vector<double>* adj_of(BackwardPass& bp, const NodePtr& p) {
  if (!p->requires_grad) return nullptr;
  return &bp.at_or_create(p.get());
}

}  // namespace

// --- Tensor basics ------------------------------------------------------

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
  std::size_t n = shape_product(shape);
  return OpBuilder::leaf(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value, bool requires_grad) {
  std::size_t n = shape_product(shape);
  return OpBuilder::leaf(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from_data(std::vector<std::size_t> shape, std::vector<double> data,
                         bool requires_grad) {
  return OpBuilder::leaf(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return OpBuilder::leaf({1}, {value}, requires_grad);
}

Tensor Tensor::row(std::vector<double> data, bool requires_grad) {
  std::size_t n = data.size();
  return OpBuilder::leaf({n}, std::move(data), requires_grad);
}

Tensor Tensor::randn(std::vector<std::size_t> shape, Rng& rng, double stddev,
                     bool requires_grad) {
  std::size_t n = shape_product(shape);
  std::vector<double> data(n);
  for (double& v : data) v = rng.normal() * stddev;
  return OpBuilder::leaf(std::move(shape), std::move(data), requires_grad);
}

const std::vector<std::size_t>& Tensor::shape() const {
  check_defined(*this, "shape");
  return node_->shape;
}

std::size_t Tensor::size() const {
  check_defined(*this, "size");
  return node_->data.size();
}

const std::vector<double>& Tensor::values() const {
  check_defined(*this, "values");
  return node_->data;
}

double Tensor::value() const {
  check_defined(*this, "value");
  if (node_->data.size() != 1) {
    throw std::logic_error("value: tensor of shape " + shape_str(node_->shape) +
                           " is not a scalar");
  }
  return node_->data[0];
}

double Tensor::at(const std::vector<std::size_t>& index) const {
  check_defined(*this, "at");
  if (index.size() != node_->shape.size()) {
    throw std::out_of_range("at: index rank does not match tensor rank");
  }
  std::size_t flat = 0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= node_->shape[i]) throw std::out_of_range("at: index out of range");
    flat = flat * node_->shape[i] + index[i];
  }
  return node_->data[flat];
}

bool Tensor::requires_grad() const {
  check_defined(*this, "requires_grad");
  return node_->requires_grad;
}

bool Tensor::has_grad() const {
  check_defined(*this, "has_grad");
  return !node_->grad.empty();
}

const std::vector<double>& Tensor::grad() const {
  check_defined(*this, "grad");
  if (node_->grad.empty()) {
    throw std::logic_error("grad: no gradient has been computed for this tensor");
  }
  return node_->grad;
}

void Tensor::zero_grad() {
  check_defined(*this, "zero_grad");
  node_->grad.assign(node_->data.size(), 0.0);
}

std::vector<double>& Tensor::raw_data() {
  check_defined(*this, "raw_data");
  if (!node_->is_leaf) {
    throw std::logic_error("raw_data: in-place mutation is restricted to leaf tensors");
  }
  return node_->data;
}

void Tensor::backward() const {
  check_defined(*this, "backward");
  if (node_->data.size() != 1) {
    throw std::logic_error("backward: root must be a scalar, got shape " +
                           shape_str(node_->shape));
  }

  // Reachable subgraph, then op nodes in exact reverse construction order.
  std::vector<Node*> ops;
  std::vector<Node*> leaves;
  std::unordered_set<const Node*> seen;
  std::vector<Node*> stack{node_.get()};
  seen.insert(node_.get());
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    if (n->backward_fn) ops.push_back(n);
    if (n->is_leaf && n->requires_grad) leaves.push_back(n);
    for (const auto& p : n->parents) {
      if (seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(ops.begin(), ops.end(), [](const Node* a, const Node* b) { return a->seq > b->seq; });

  BackwardPass bp;
  bp.at_or_create(node_.get())[0] = 1.0;
  for (Node* n : ops) n->backward_fn(bp);

  for (Node* n : leaves) {
    const std::vector<double>* g = bp.find(n);
    if (!g) continue;
    if (n->grad.empty()) n->grad.assign(n->data.size(), 0.0);
    for (std::size_t i = 0; i < g->size(); ++i) n->grad[i] += (*g)[i];
  }
}

bool all_finite(const Tensor& x) {
  for (double v : x.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// --- broadcasting -------------------------------------------------------

namespace {

struct Bcast {
  std::vector<std::size_t> out_shape;
  std::vector<std::size_t> a_stride;  // 0 where broadcast
  std::vector<std::size_t> b_stride;
  std::size_t total = 0;
};

Bcast plan_bcast(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                 const char* op) {
  std::size_t rank = std::max(a.size(), b.size());
  Bcast bc;
  bc.out_shape.resize(rank);
  std::vector<std::size_t> pa(rank, 1), pb(rank, 1);
  std::copy(a.begin(), a.end(), pa.begin() + (rank - a.size()));
  std::copy(b.begin(), b.end(), pb.begin() + (rank - b.size()));
  for (std::size_t i = 0; i < rank; ++i) {
    if (pa[i] != pb[i] && pa[i] != 1 && pb[i] != 1) {
      throw std::invalid_argument(std::string(op) + ": shapes " + shape_str(a) + " and " +
                                  shape_str(b) + " are not broadcast-compatible");
    }
    bc.out_shape[i] = std::max(pa[i], pb[i]);
  }
  auto strides_for = [&](const std::vector<std::size_t>& padded) {
    std::vector<std::size_t> s(rank);
    std::size_t stride = 1;
    for (std::size_t i = rank; i-- > 0;) {
      s[i] = padded[i] == 1 ? 0 : stride;
      stride *= padded[i];
    }
    return s;
  };
  bc.a_stride = strides_for(pa);
  bc.b_stride = strides_for(pb);
  bc.total = shape_product(bc.out_shape);
  return bc;
}

/// Calls f(out_flat, a_flat, b_flat) over the broadcast output space.
template <class F>
void bcast_for_each(const Bcast& bc, F&& f) {
  std::size_t rank = bc.out_shape.size();
  for (std::size_t flat = 0; flat < bc.total; ++flat) {
    std::size_t rem = flat, ai = 0, bi = 0;
    for (std::size_t d = rank; d-- > 0;) {
      std::size_t c = rem % bc.out_shape[d];
      rem /= bc.out_shape[d];
      ai += c * bc.a_stride[d];
      bi += c * bc.b_stride[d];
    }
    f(flat, ai, bi);
  }
}

template <class Fwd>
Tensor binary_bcast_op(const Tensor& a, const Tensor& b, const char* name, Fwd&& fwd,
                       double da_coeff, double db_coeff, bool mul_rule) {
  check_defined(a, name);
  check_defined(b, name);
  const NodePtr& an = node_of(a);
  const NodePtr& bn = node_of(b);
  Bcast bc = plan_bcast(an->shape, bn->shape, name);
  std::vector<double> out(bc.total);
  if (an->shape == bn->shape) {
    for (std::size_t i = 0; i < bc.total; ++i) out[i] = fwd(an->data[i], bn->data[i]);
  } else {
    bcast_for_each(bc, [&](std::size_t o, std::size_t ai, std::size_t bi) {
      out[o] = fwd(an->data[ai], bn->data[bi]);
    });
  }
  return OpBuilder::make(
      bc.out_shape, std::move(out), {an, bn},
      [an, bn, bc, da_coeff, db_coeff, mul_rule](BackwardPass& bp, const std::vector<double>& g) {
        std::vector<double>* ga = adj_of(bp, an);
        std::vector<double>* gb = adj_of(bp, bn);
        if (!ga && !gb) return;
        bcast_for_each(bc, [&](std::size_t o, std::size_t ai, std::size_t bi) {
          if (mul_rule) {
            // d(a*b)/da = b, d(a*b)/db = a
            if (ga) (*ga)[ai] += g[o] * bn->data[bi];
            if (gb) (*gb)[bi] += g[o] * an->data[ai];
          } else {
            if (ga) (*ga)[ai] += g[o] * da_coeff;
            if (gb) (*gb)[bi] += g[o] * db_coeff;
          }
        });
      });
}

template <class Fwd, class Deriv>
Tensor unary_op(const Tensor& x, const char* name, Fwd&& fwd, Deriv&& dfn) {
  check_defined(x, name);
  const NodePtr& xn = node_of(x);
  std::size_t n = xn->data.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(xn->data[i]);
  // derivative is evaluated from (x, y) pairs; capture y by copy
  std::vector<double> y = out;
  return OpBuilder::make(xn->shape, std::move(out), {xn},
                         [xn, y = std::move(y), dfn](BackwardPass& bp,
                                                     const std::vector<double>& g) {
                           if (std::vector<double>* gx = adj_of(bp, xn)) {
                             for (std::size_t i = 0; i < g.size(); ++i) {
                               (*gx)[i] += g[i] * dfn(xn->data[i], y[i]);
                             }
                           }
                         });
}

}  // namespace

// --- elementwise suite --------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_bcast_op(a, b, "add", [](double x, double y) { return x + y; }, 1.0, 1.0, false);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_bcast_op(a, b, "sub", [](double x, double y) { return x - y; }, 1.0, -1.0, false);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_bcast_op(a, b, "mul", [](double x, double y) { return x * y; }, 0.0, 0.0, true);
}

Tensor scale(const Tensor& x, double c) {
  return unary_op(x, "scale", [c](double v) { return c * v; },
                  [c](double, double) { return c; });
}

Tensor exp(const Tensor& x) {
  return unary_op(x, "exp", [](double v) { return std::exp(v); },
                  [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  check_defined(x, "log");
  for (double v : x.values()) {
    if (!(v > 0.0)) {
      throw std::domain_error("log: input must be strictly positive, got " + std::to_string(v));
    }
  }
  return unary_op(x, "log", [](double v) { return std::log(v); },
                  [](double v, double) { return 1.0 / v; });
}

Tensor tanh(const Tensor& x) {
  return unary_op(x, "tanh", [](double v) { return std::tanh(v); },
                  [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary_op(x, "sigmoid", [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
                  [](double, double y) { return y * (1.0 - y); });
}

// --- matmul -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_defined(a, "matmul");
  check_defined(b, "matmul");
  const NodePtr& an = node_of(a);
  const NodePtr& bn = node_of(b);
  if (an->shape.size() != 2 || bn->shape.size() != 2) {
    throw std::invalid_argument("matmul: expected rank-2 tensors, got " + shape_str(an->shape) +
                                " and " + shape_str(bn->shape));
  }
  if (an->shape[1] != bn->shape[0]) {
    throw std::invalid_argument("matmul: inner dimensions disagree between " +
                                shape_str(an->shape) + " and " + shape_str(bn->shape));
  }
  const std::size_t m = an->shape[0], k = an->shape[1], n = bn->shape[1];
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double av = an->data[i * k + p];
      if (av == 0.0) continue;
      const double* brow = bn->data.data() + p * n;
      double* orow = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return OpBuilder::make(
      {m, n}, std::move(out), {an, bn},
      [an, bn, m, k, n](BackwardPass& bp, const std::vector<double>& g) {
        // da = g . b^T ; db = a^T . g
        if (std::vector<double>* ga = adj_of(bp, an)) {
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
              double s = 0.0;
              const double* grow = g.data() + i * n;
              const double* brow = bn->data.data() + p * n;
              for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
              (*ga)[i * k + p] += s;
            }
          }
        }
        if (std::vector<double>* gb = adj_of(bp, bn)) {
          for (std::size_t i = 0; i < m; ++i) {
            const double* grow = g.data() + i * n;
            for (std::size_t p = 0; p < k; ++p) {
              double av = an->data[i * k + p];
              if (av == 0.0) continue;
              double* gbrow = gb->data() + p * n;
              for (std::size_t j = 0; j < n; ++j) gbrow[j] += av * grow[j];
            }
          }
        }
      });
}

// --- softmax ------------------------------------------------------------

Tensor softmax(const Tensor& x, std::size_t axis) {
  check_defined(x, "softmax");
  const NodePtr& xn = node_of(x);
  const auto& shape = xn->shape;
  if (axis >= shape.size()) {
    throw std::invalid_argument("softmax: axis " + std::to_string(axis) +
                                " out of range for shape " + shape_str(shape));
  }
  std::size_t len = shape[axis];
  std::size_t inner = 1;
  for (std::size_t d = axis + 1; d < shape.size(); ++d) inner *= shape[d];
  std::size_t outer = xn->data.size() / (len * inner);

  std::vector<double> out(xn->data.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      std::size_t base = o * len * inner + in;
      double mx = xn->data[base];
      for (std::size_t j = 1; j < len; ++j) mx = std::max(mx, xn->data[base + j * inner]);
      double total = 0.0;
      for (std::size_t j = 0; j < len; ++j) {
        double e = std::exp(xn->data[base + j * inner] - mx);
        out[base + j * inner] = e;
        total += e;
      }
      double inv = 1.0 / total;
      for (std::size_t j = 0; j < len; ++j) out[base + j * inner] *= inv;
    }
  }
  std::vector<double> y = out;
  return OpBuilder::make(
      shape, std::move(out), {xn},
      [xn, y = std::move(y), len, inner, outer](BackwardPass& bp, const std::vector<double>& g) {
        std::vector<double>* gx = adj_of(bp, xn);
        if (!gx) return;
        // per line: gin = s * (g - dot(g, s))
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t in = 0; in < inner; ++in) {
            std::size_t base = o * len * inner + in;
            double d = 0.0;
            for (std::size_t j = 0; j < len; ++j) d += g[base + j * inner] * y[base + j * inner];
            for (std::size_t j = 0; j < len; ++j) {
              std::size_t idx = base + j * inner;
              (*gx)[idx] += y[idx] * (g[idx] - d);
            }
          }
        }
      });
}

// --- shape ops ----------------------------------------------------------

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  for (const Tensor& t : parts) check_defined(t, "concat");
  const auto& first = node_of(parts[0])->shape;
  if (axis >= first.size()) {
    throw std::invalid_argument("concat: axis " + std::to_string(axis) +
                                " out of range for shape " + shape_str(first));
  }
  std::vector<std::size_t> out_shape = first;
  out_shape[axis] = 0;
  for (const Tensor& t : parts) {
    const auto& s = node_of(t)->shape;
    if (s.size() != first.size()) {
      throw std::invalid_argument("concat: rank mismatch between " + shape_str(first) + " and " +
                                  shape_str(s));
    }
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != axis && s[d] != first[d]) {
        throw std::invalid_argument("concat: shapes " + shape_str(first) + " and " + shape_str(s) +
                                    " differ outside axis " + std::to_string(axis));
      }
    }
    out_shape[axis] += s[axis];
  }

  std::size_t inner = 1;
  for (std::size_t d = axis + 1; d < out_shape.size(); ++d) inner *= out_shape[d];
  std::size_t outer = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= out_shape[d];

  std::vector<double> out(shape_product(out_shape));
  std::size_t out_axis = out_shape[axis];
  std::size_t offset = 0;  // running position along the axis
  std::vector<std::size_t> part_offsets(parts.size());
  std::vector<NodePtr> parents;
  parents.reserve(parts.size());
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const NodePtr& pn = node_of(parts[pi]);
    parents.push_back(pn);
    part_offsets[pi] = offset;
    std::size_t plen = pn->shape[axis];
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t j = 0; j < plen; ++j) {
        const double* src = pn->data.data() + (o * plen + j) * inner;
        double* dst = out.data() + (o * out_axis + offset + j) * inner;
        std::copy(src, src + inner, dst);
      }
    }
    offset += plen;
  }

  std::vector<std::size_t> part_lens(parts.size());
  for (std::size_t pi = 0; pi < parts.size(); ++pi) part_lens[pi] = parents[pi]->shape[axis];

  return OpBuilder::make(
      out_shape, std::move(out), parents,
      [parents, part_offsets, part_lens, outer, inner, out_axis](BackwardPass& bp,
                                                                 const std::vector<double>& g) {
        for (std::size_t pi = 0; pi < parents.size(); ++pi) {
          std::vector<double>* gp = adj_of(bp, parents[pi]);
          if (!gp) continue;
          std::size_t plen = part_lens[pi];
          for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t j = 0; j < plen; ++j) {
              const double* src = g.data() + (o * out_axis + part_offsets[pi] + j) * inner;
              double* dst = gp->data() + (o * plen + j) * inner;
              for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
            }
          }
        }
      });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t len) {
  check_defined(x, "slice");
  const NodePtr& xn = node_of(x);
  const auto& shape = xn->shape;
  if (axis >= shape.size()) {
    throw std::invalid_argument("slice: axis " + std::to_string(axis) +
                                " out of range for shape " + shape_str(shape));
  }
  if (start + len > shape[axis] || len == 0) {
    throw std::invalid_argument("slice: range [" + std::to_string(start) + ", " +
                                std::to_string(start + len) + ") invalid for axis of size " +
                                std::to_string(shape[axis]));
  }
  std::size_t inner = 1;
  for (std::size_t d = axis + 1; d < shape.size(); ++d) inner *= shape[d];
  std::size_t outer = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= shape[d];
  std::size_t in_axis = shape[axis];

  std::vector<std::size_t> out_shape = shape;
  out_shape[axis] = len;
  std::vector<double> out(outer * len * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < len; ++j) {
      const double* src = xn->data.data() + (o * in_axis + start + j) * inner;
      std::copy(src, src + inner, out.data() + (o * len + j) * inner);
    }
  }
  return OpBuilder::make(out_shape, std::move(out), {xn},
                         [xn, outer, inner, in_axis, start, len](BackwardPass& bp,
                                                                 const std::vector<double>& g) {
                           std::vector<double>* gx = adj_of(bp, xn);
                           if (!gx) return;
                           for (std::size_t o = 0; o < outer; ++o) {
                             for (std::size_t j = 0; j < len; ++j) {
                               const double* src = g.data() + (o * len + j) * inner;
                               double* dst = gx->data() + (o * in_axis + start + j) * inner;
                               for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
                             }
                           }
                         });
}

Tensor transpose(const Tensor& x) {
  check_defined(x, "transpose");
  const NodePtr& xn = node_of(x);
  if (xn->shape.size() != 2) {
    throw std::invalid_argument("transpose: expected rank-2 tensor, got " +
                                shape_str(xn->shape));
  }
  std::size_t r = xn->shape[0], c = xn->shape[1];
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = xn->data[i * c + j];
  }
  return OpBuilder::make({c, r}, std::move(out), {xn},
                         [xn, r, c](BackwardPass& bp, const std::vector<double>& g) {
                           if (std::vector<double>* gx = adj_of(bp, xn)) {
                             for (std::size_t i = 0; i < r; ++i) {
                               for (std::size_t j = 0; j < c; ++j) {
                                 (*gx)[i * c + j] += g[j * r + i];
                               }
                             }
                           }
                         });
}

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape) {
  check_defined(x, "reshape");
  const NodePtr& xn = node_of(x);
  if (shape_product(shape) != xn->data.size()) {
    throw std::invalid_argument("reshape: cannot view " + shape_str(xn->shape) + " as " +
                                shape_str(shape));
  }
  std::vector<double> out = xn->data;
  return OpBuilder::make(std::move(shape), std::move(out), {xn},
                         [xn](BackwardPass& bp, const std::vector<double>& g) {
                           if (std::vector<double>* gx = adj_of(bp, xn)) {
                             for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i];
                           }
                         });
}

// --- reductions ---------------------------------------------------------

namespace {

Tensor axis_reduce(const Tensor& x, std::size_t axis, double factor, const char* name) {
  check_defined(x, name);
  const NodePtr& xn = node_of(x);
  const auto& shape = xn->shape;
  if (axis >= shape.size()) {
    throw std::invalid_argument(std::string(name) + ": axis " + std::to_string(axis) +
                                " out of range for shape " + shape_str(shape));
  }
  std::size_t len = shape[axis];
  std::size_t inner = 1;
  for (std::size_t d = axis + 1; d < shape.size(); ++d) inner *= shape[d];
  std::size_t outer = xn->data.size() / (len * inner);

  std::vector<std::size_t> out_shape;
  for (std::size_t d = 0; d < shape.size(); ++d) {
    if (d != axis) out_shape.push_back(shape[d]);
  }
  if (out_shape.empty()) out_shape.push_back(1);

  std::vector<double> out(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < len; ++j) {
      const double* src = xn->data.data() + (o * len + j) * inner;
      double* dst = out.data() + o * inner;
      for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
    }
  }
  for (double& v : out) v *= factor;

  return OpBuilder::make(out_shape, std::move(out), {xn},
                         [xn, outer, inner, len, factor](BackwardPass& bp,
                                                         const std::vector<double>& g) {
                           std::vector<double>* gx = adj_of(bp, xn);
                           if (!gx) return;
                           for (std::size_t o = 0; o < outer; ++o) {
                             for (std::size_t j = 0; j < len; ++j) {
                               double* dst = gx->data() + (o * len + j) * inner;
                               const double* src = g.data() + o * inner;
                               for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i] * factor;
                             }
                           }
                         });
}

Tensor full_reduce(const Tensor& x, bool average, const char* name) {
  check_defined(x, name);
  const NodePtr& xn = node_of(x);
  std::size_t n = xn->data.size();
  double total = 0.0;
  for (double v : xn->data) total += v;
  double factor = average ? 1.0 / static_cast<double>(n) : 1.0;
  return OpBuilder::make({1}, {total * factor}, {xn},
                         [xn, factor](BackwardPass& bp, const std::vector<double>& g) {
                           if (std::vector<double>* gx = adj_of(bp, xn)) {
                             for (double& v : *gx) v += g[0] * factor;
                           }
                         });
}

}  // namespace

Tensor sum(const Tensor& x, std::size_t axis) { return axis_reduce(x, axis, 1.0, "sum"); }

Tensor mean(const Tensor& x, std::size_t axis) {
  check_defined(x, "mean");
  double n = static_cast<double>(node_of(x)->shape.at(axis));
  return axis_reduce(x, axis, 1.0 / n, "mean");
}

Tensor sum_all(const Tensor& x) { return full_reduce(x, false, "sum_all"); }

Tensor mean_all(const Tensor& x) { return full_reduce(x, true, "mean_all"); }

// --- gather / normalize -------------------------------------------------

Tensor gather_rows(const Tensor& table, const std::vector<std::size_t>& ids) {
  check_defined(table, "gather_rows");
  const NodePtr& tn = node_of(table);
  if (tn->shape.size() != 2) {
    throw std::invalid_argument("gather_rows: expected rank-2 table, got " +
                                shape_str(tn->shape));
  }
  std::size_t rows = tn->shape[0], d = tn->shape[1];
  for (std::size_t id : ids) {
    if (id >= rows) {
      throw std::out_of_range("gather_rows: row id " + std::to_string(id) +
                              " out of range for table with " + std::to_string(rows) + " rows");
    }
  }
  std::vector<double> out(ids.size() * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const double* src = tn->data.data() + ids[i] * d;
    std::copy(src, src + d, out.data() + i * d);
  }
  return OpBuilder::make({ids.size(), d}, std::move(out), {tn},
                         [tn, ids, d](BackwardPass& bp, const std::vector<double>& g) {
                           std::vector<double>* gt = adj_of(bp, tn);
                           if (!gt) return;
                           for (std::size_t i = 0; i < ids.size(); ++i) {
                             double* dst = gt->data() + ids[i] * d;
                             const double* src = g.data() + i * d;
                             for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
                           }
                         });
}

Tensor l2_normalize(const Tensor& x) {
  check_defined(x, "l2_normalize");
  const NodePtr& xn = node_of(x);
  const auto& shape = xn->shape;
  if (shape.empty()) throw std::invalid_argument("l2_normalize: rank-0 tensor");
  std::size_t d = shape.back();
  std::size_t lines = xn->data.size() / d;
  std::vector<double> out(xn->data.size());
  std::vector<double> norms(lines);
  for (std::size_t l = 0; l < lines; ++l) {
    const double* v = xn->data.data() + l * d;
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += v[i] * v[i];
    double n = std::max(std::sqrt(s), 1e-12);
    norms[l] = n;
    for (std::size_t i = 0; i < d; ++i) out[l * d + i] = v[i] / n;
  }
  std::vector<double> y = out;
  return OpBuilder::make(
      shape, std::move(out), {xn},
      [xn, y = std::move(y), norms = std::move(norms), d, lines](BackwardPass& bp,
                                                                 const std::vector<double>& g) {
        std::vector<double>* gx = adj_of(bp, xn);
        if (!gx) return;
        // gin = (g - y * (g . y)) / norm, per line
        for (std::size_t l = 0; l < lines; ++l) {
          double dp = 0.0;
          for (std::size_t i = 0; i < d; ++i) dp += g[l * d + i] * y[l * d + i];
          for (std::size_t i = 0; i < d; ++i) {
            (*gx)[l * d + i] += (g[l * d + i] - y[l * d + i] * dp) / norms[l];
          }
        }
      });
}

// --- sugar ---------------------------------------------------------------

Tensor dot(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("dot: shapes " + shape_str(a.shape()) + " and " +
                                shape_str(b.shape()) + " differ");
  }
  return sum_all(mul(a, b));
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw std::invalid_argument("stack_rows: no inputs");
  std::vector<Tensor> mats;
  mats.reserve(rows.size());
  for (const Tensor& r : rows) {
    if (r.rank() != 1) {
      throw std::invalid_argument("stack_rows: expected rank-1 rows, got " +
                                  shape_str(r.shape()));
    }
    mats.push_back(reshape(r, {1, r.size()}));
  }
  return concat(mats, 0);
}

}  // namespace coldoc
