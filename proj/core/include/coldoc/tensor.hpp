#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "coldoc/rng.hpp"

namespace coldoc {

class BackwardPass;

namespace detail {

/// One node of the differentiation graph. Nodes are created in strictly
/// increasing `seq` order; an op node's parents always carry smaller
/// sequence numbers, so the graph is acyclic by construction and the
/// backward pass can replay op nodes in exact reverse construction order.
struct TensorNode {
  std::vector<std::size_t> shape;
  std::vector<double> data;  // row-major
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<double> grad;  // leaf accumulator; empty until backward touches it
  std::uint64_t seq = 0;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(BackwardPass&)> backward_fn;

  std::size_t size() const { return data.size(); }
};

}  // namespace detail

/// Dense 64-bit float tensor participating in a reverse-mode differentiation
/// graph. Tensors are cheap shared handles; ops build the graph eagerly and
/// backward() replays recorded adjoints in reverse construction order.
class Tensor {
 public:
  Tensor() = default;  // null handle

  static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
  static Tensor full(std::vector<std::size_t> shape, double value, bool requires_grad = false);
  static Tensor from_data(std::vector<std::size_t> shape, std::vector<double> data,
                          bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor row(std::vector<double> data, bool requires_grad = false);  // 1-D
  /// Normal(0, stddev^2) entries drawn from rng.
  static Tensor randn(std::vector<std::size_t> shape, Rng& rng, double stddev,
                      bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const std::vector<std::size_t>& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  const std::vector<double>& values() const;
  double value() const;  // scalar tensors only
  double at(const std::vector<std::size_t>& index) const;

  bool requires_grad() const;
  bool has_grad() const;
  const std::vector<double>& grad() const;
  void zero_grad();

  /// Accumulates d(root)/d(leaf) into every reachable requires_grad leaf.
  /// Root must be scalar. Repeated calls without zero_grad accumulate.
  void backward() const;

  /// Direct element access for leaf tensors (optimizer updates, fixtures).
  /// Must not be called on op outputs.
  std::vector<double>& raw_data();

 private:
  explicit Tensor(std::shared_ptr<detail::TensorNode> n) : node_(std::move(n)) {}
  std::shared_ptr<detail::TensorNode> node_;

  friend class OpBuilder;
  friend class BackwardPass;
};

// --- operations --------------------------------------------------------
// Binary elementwise ops broadcast with trailing-axis alignment: shapes are
// right-aligned and each aligned pair of dims must match or be 1.

Tensor matmul(const Tensor& a, const Tensor& b);  // [m,k] x [k,n] -> [m,n]
Tensor softmax(const Tensor& x, std::size_t axis);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double c);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);  // domain error on non-positive input
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t len);
Tensor transpose(const Tensor& x);  // rank-2 only
Tensor reshape(const Tensor& x, std::vector<std::size_t> shape);
Tensor sum(const Tensor& x, std::size_t axis);
Tensor mean(const Tensor& x, std::size_t axis);
Tensor sum_all(const Tensor& x);   // -> scalar
Tensor mean_all(const Tensor& x);  // -> scalar
/// Rows of a [rows, d] table selected by id; gradients scatter-add back.
Tensor gather_rows(const Tensor& table, const std::vector<std::size_t>& ids);
/// Unit-normalizes each slice along the last axis. Norms are floored at
/// 1e-12 so zero slices map to zero instead of NaN.
Tensor l2_normalize(const Tensor& x);

// sugar
Tensor dot(const Tensor& a, const Tensor& b);              // sum(a*b) -> scalar
Tensor stack_rows(const std::vector<Tensor>& rows);        // n x [d] -> [n,d]

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(const Tensor& a, double c) { return scale(a, c); }
inline Tensor operator*(double c, const Tensor& a) { return scale(a, c); }

std::string shape_str(const std::vector<std::size_t>& shape);
bool all_finite(const Tensor& x);

}  // namespace coldoc
