#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/error.hpp"

namespace adast {

using Shape = std::vector<int64_t>;

std::string shape_str(const Shape& shape);
int64_t shape_numel(const Shape& shape);

namespace detail {

struct TensorNode {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
};

}  // namespace detail

// Dense row-major tensor of doubles. Shared-handle semantics: copies alias
// the same storage. Values are immutable after construction except for the
// grad buffer and explicit parameter updates through mutable_data().
class Tensor {
 public:
  Tensor() = default;

  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  int64_t dim(int i) const { return node_->shape[static_cast<size_t>(i)]; }
  int64_t numel() const { return static_cast<int64_t>(node_->data.size()); }

  const std::vector<double>& data() const { return node_->data; }
  // Single logical writer: optimizer steps, initializers, running stats.
  std::vector<double>& mutable_data() { return node_->data; }

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool v) {
    node_->requires_grad = v;
    return *this;
  }

  bool has_grad() const { return !node_->grad.empty(); }
  const std::vector<double>& grad() const;
  void zero_grad();
  void accumulate_grad(const std::vector<double>& g);

  double item() const;

  // Deep copy of values; detached from any tape, requires_grad = false.
  Tensor clone_detached() const;

  detail::TensorNode* node() const { return node_.get(); }
  const std::shared_ptr<detail::TensorNode>& node_ptr() const { return node_; }

  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::TensorNode> node_;
};

// Scratch gradients for one backward sweep, keyed by node. Intermediate
// results flow through here and are flushed into persistent grad buffers at
// the end, so repeated backward calls accumulate exactly once per call.
class GradMap {
 public:
  std::vector<double>& slot(const detail::TensorNode* node);
  const std::vector<double>* find(const detail::TensorNode* node) const;
  const std::unordered_map<const detail::TensorNode*, std::vector<double>>& entries() const {
    return map_;
  }

 private:
  std::unordered_map<const detail::TensorNode*, std::vector<double>> map_;
};

using BackwardFn = std::function<void(const std::vector<double>& out_grad, GradMap& grads)>;

// Records executed operations in order; backward() replays them in exact
// reverse order. One tape per logical thread of execution.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* active();

  size_t size() const { return entries_.size(); }

  void record(std::shared_ptr<detail::TensorNode> output, BackwardFn fn);

  // Accumulates d(loss)/d(t) into every requires_grad tensor reachable from
  // loss. loss must be scalar and this tape non-empty.
  void backward(const Tensor& loss);

 private:
  struct Entry {
    std::shared_ptr<detail::TensorNode> output;
    BackwardFn fn;
  };
  std::vector<Entry> entries_;
  Tape* prev_ = nullptr;
};

// Disables recording while alive (evaluation passes, pseudo-label scans).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

bool grad_recording_enabled();

// ---- operations ------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double s);
Tensor mul_scalar(const Tensor& a, double s);
Tensor neg(const Tensor& a);
Tensor exp(const Tensor& a);
// natural log; argument clamped at 1e-12 (clamped region has zero gradient)
Tensor log(const Tensor& a);
Tensor abs(const Tensor& a);  // subgradient 0 at 0
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);  // outputs clamped into (1e-12, 1 - 1e-12)

Tensor sum(const Tensor& a);
Tensor sum(const Tensor& a, int axis);
Tensor mean(const Tensor& a);
Tensor mean(const Tensor& a, int axis);

Tensor matmul(const Tensor& a, const Tensor& b);  // [m×n]·[n×p]
Tensor bmm(const Tensor& a, const Tensor& b);     // [B×m×n]·[B×n×p]
Tensor transpose(const Tensor& a, int axis0, int axis1);
Tensor reshape(const Tensor& a, Shape shape);
Tensor concat(const std::vector<Tensor>& parts, int axis);

Tensor softmax(const Tensor& a, int axis);

// -(1/B) sum_b log(max(p[b][y[b]], 1e-12)); p is [B×K] probabilities.
Tensor cross_entropy(const Tensor& probs, const std::vector<int>& labels);

// Row-major indices of the maxima along `axis` (ties -> lowest index).
std::vector<int64_t> argmax(const Tensor& a, int axis);

void backward(const Tensor& loss);

constexpr double kLogClamp = 1e-12;

}  // namespace adast
