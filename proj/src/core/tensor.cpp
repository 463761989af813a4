#include "core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace adast {

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

int64_t shape_numel(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

namespace {

thread_local Tape* g_active_tape = nullptr;
thread_local int g_nograd_depth = 0;

std::vector<int64_t> strides_of(const Shape& shape) {
  std::vector<int64_t> st(shape.size(), 1);
  for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i) {
    st[static_cast<size_t>(i)] = st[static_cast<size_t>(i) + 1] * shape[static_cast<size_t>(i) + 1];
  }
  return st;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    raise(ErrorKind::Shape, op, ": shapes ", shape_str(a.shape()), " and ",
          shape_str(b.shape()), " differ");
  }
}

bool should_record(std::initializer_list<const Tensor*> inputs) {
  if (g_nograd_depth > 0 || g_active_tape == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

Tensor make_output(Shape shape, std::vector<double> values, bool rec) {
  Tensor out = Tensor::from_data(std::move(shape), std::move(values));
  if (rec) out.set_requires_grad(true);
  return out;
}

// Splits an axis-reduction layout into (outer, n, inner) extents.
struct LaneLayout {
  int64_t outer = 1, n = 1, inner = 1;
};

LaneLayout lanes(const Shape& shape, int axis) {
  LaneLayout l;
  l.n = shape[static_cast<size_t>(axis)];
  for (int i = 0; i < axis; ++i) l.outer *= shape[static_cast<size_t>(i)];
  for (size_t i = static_cast<size_t>(axis) + 1; i < shape.size(); ++i) l.inner *= shape[i];
  return l;
}

void check_axis(const Tensor& a, int axis, const char* op) {
  if (axis < 0 || axis >= a.rank()) {
    raise(ErrorKind::InvalidArgument, op, ": axis ", axis, " out of range for rank ", a.rank());
  }
}

}  // namespace

// ---- Tensor -----------------------------------------------------------------

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
  for (int64_t d : shape) {
    require(d > 0, ErrorKind::Shape, "dimension sizes must be positive, got ", shape_str(shape));
  }
  require(shape_numel(shape) == static_cast<int64_t>(data.size()), ErrorKind::Shape,
          "shape ", shape_str(shape), " requires ", shape_numel(shape),
          " values, got ", data.size());
  auto node = std::make_shared<detail::TensorNode>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<double> d(static_cast<size_t>(shape_numel(shape)), 0.0);
  return from_data(std::move(shape), std::move(d), requires_grad);
}

Tensor Tensor::full(Shape shape, double value) {
  std::vector<double> d(static_cast<size_t>(shape_numel(shape)), value);
  return from_data(std::move(shape), std::move(d));
}

Tensor Tensor::scalar(double value) { return from_data({}, {value}); }

const std::vector<double>& Tensor::grad() const {
  require(!node_->grad.empty(), ErrorKind::InvalidArgument, "gradient not populated");
  return node_->grad;
}

void Tensor::zero_grad() {
  node_->grad.assign(node_->data.size(), 0.0);
}

void Tensor::accumulate_grad(const std::vector<double>& g) {
  require(g.size() == node_->data.size(), ErrorKind::Shape,
          "gradient size ", g.size(), " does not match tensor size ", node_->data.size());
  if (node_->grad.empty()) node_->grad.assign(node_->data.size(), 0.0);
  for (size_t i = 0; i < g.size(); ++i) node_->grad[i] += g[i];
}

double Tensor::item() const {
  require(numel() == 1, ErrorKind::Rank, "item() requires a scalar, got shape ",
          shape_str(shape()));
  return node_->data[0];
}

Tensor Tensor::clone_detached() const {
  return Tensor::from_data(node_->shape, node_->data);
}

// ---- GradMap ----------------------------------------------------------------

std::vector<double>& GradMap::slot(const detail::TensorNode* node) {
  auto it = map_.find(node);
  if (it == map_.end()) {
    it = map_.emplace(node, std::vector<double>(node->data.size(), 0.0)).first;
  }
  return it->second;
}

const std::vector<double>* GradMap::find(const detail::TensorNode* node) const {
  auto it = map_.find(node);
  return it == map_.end() ? nullptr : &it->second;
}

// ---- Tape -------------------------------------------------------------------

Tape::Tape() {
  prev_ = g_active_tape;
  g_active_tape = this;
}

Tape::~Tape() { g_active_tape = prev_; }

Tape* Tape::active() { return g_active_tape; }

void Tape::record(std::shared_ptr<detail::TensorNode> output, BackwardFn fn) {
  entries_.push_back(Entry{std::move(output), std::move(fn)});
}

void Tape::backward(const Tensor& loss) {
  require(loss.numel() == 1, ErrorKind::Rank, "backward requires a scalar loss, got shape ",
          shape_str(loss.shape()));
  require(!entries_.empty(), ErrorKind::InvalidArgument, "backward on an empty tape");

  GradMap grads;
  grads.slot(loss.node())[0] = 1.0;

  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    const std::vector<double>* g = grads.find(it->output.get());
    if (g == nullptr) continue;  // not on a path to the loss
    it->fn(*g, grads);
  }

  for (const auto& [node, g] : grads.entries()) {
    if (!node->requires_grad) continue;
    auto* mutable_node = const_cast<detail::TensorNode*>(node);
    if (mutable_node->grad.empty()) mutable_node->grad.assign(node->data.size(), 0.0);
    for (size_t i = 0; i < g.size(); ++i) mutable_node->grad[i] += g[i];
  }
}

void backward(const Tensor& loss) {
  require(Tape::active() != nullptr, ErrorKind::InvalidArgument,
          "backward called with no active tape");
  Tape::active()->backward(loss);
}

NoGradGuard::NoGradGuard() { ++g_nograd_depth; }
NoGradGuard::~NoGradGuard() { --g_nograd_depth; }

bool grad_recording_enabled() { return g_nograd_depth == 0 && g_active_tape != nullptr; }

// ---- elementwise ------------------------------------------------------------

namespace {

template <typename Fwd, typename Bwd>
Tensor binary_elementwise(const Tensor& a, const Tensor& b, const char* name, Fwd fwd, Bwd bwd) {
  check_same_shape(a, b, name);
  const size_t n = a.data().size();
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = fwd(a.data()[i], b.data()[i]);
  bool rec = should_record({&a, &b});
  Tensor result = make_output(a.shape(), std::move(out), rec);
  if (rec) {
    auto an = a.node_ptr();
    auto bn = b.node_ptr();
    Tape::active()->record(result.node_ptr(), [an, bn, bwd](const std::vector<double>& g, GradMap& grads) {
      auto& ga = grads.slot(an.get());
      auto& gb = grads.slot(bn.get());
      for (size_t i = 0; i < g.size(); ++i) {
        auto [da, db] = bwd(an->data[i], bn->data[i], g[i]);
        ga[i] += da;
        gb[i] += db;
      }
    });
  }
  return result;
}

template <typename Fwd, typename Bwd>
Tensor unary_elementwise(const Tensor& a, Fwd fwd, Bwd bwd) {
  const size_t n = a.data().size();
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = fwd(a.data()[i]);
  bool rec = should_record({&a});
  Tensor result = make_output(a.shape(), std::move(out), rec);
  if (rec) {
    auto an = a.node_ptr();
    auto on = result.node_ptr();
    Tape::active()->record(result.node_ptr(), [an, on, bwd](const std::vector<double>& g, GradMap& grads) {
      auto& ga = grads.slot(an.get());
      for (size_t i = 0; i < g.size(); ++i) ga[i] += bwd(an->data[i], on->data[i], g[i]);
    });
  }
  return result;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      a, b, "add", [](double x, double y) { return x + y; },
      [](double, double, double g) { return std::pair(g, g); });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double, double g) { return std::pair(g, -g); });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](double x, double y, double g) { return std::pair(g * y, g * x); });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary_elementwise(
      a, [s](double x) { return x + s; }, [](double, double, double g) { return g; });
}

Tensor mul_scalar(const Tensor& a, double s) {
  return unary_elementwise(
      a, [s](double x) { return x * s; }, [s](double, double, double g) { return g * s; });
}

Tensor neg(const Tensor& a) { return mul_scalar(a, -1.0); }

Tensor exp(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return std::exp(x); },
      [](double, double y, double g) { return g * y; });
}

Tensor log(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return std::log(std::max(x, kLogClamp)); },
      [](double x, double, double g) { return x > kLogClamp ? g / x : 0.0; });
}

Tensor abs(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return std::fabs(x); },
      [](double x, double, double g) { return x > 0.0 ? g : (x < 0.0 ? -g : 0.0); });
}

Tensor relu(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double, double g) { return x > 0.0 ? g : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary_elementwise(
      a,
      [](double x) {
        double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
        return std::clamp(s, kLogClamp, 1.0 - kLogClamp);
      },
      [](double, double y, double g) { return g * y * (1.0 - y); });
}

// ---- reductions -------------------------------------------------------------

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  bool rec = should_record({&a});
  Tensor result = make_output({}, {total}, rec);
  if (rec) {
    auto an = a.node_ptr();
    Tape::active()->record(result.node_ptr(), [an](const std::vector<double>& g, GradMap& grads) {
      auto& ga = grads.slot(an.get());
      for (double& v : ga) v += g[0];
    });
  }
  return result;
}

Tensor mean(const Tensor& a) {
  return mul_scalar(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor sum(const Tensor& a, int axis) {
  check_axis(a, axis, "sum");
  const LaneLayout l = lanes(a.shape(), axis);
  Shape out_shape;
  for (int i = 0; i < a.rank(); ++i) {
    if (i != axis) out_shape.push_back(a.dim(i));
  }
  std::vector<double> out(static_cast<size_t>(l.outer * l.inner), 0.0);
  const auto& in = a.data();
  for (int64_t o = 0; o < l.outer; ++o) {
    for (int64_t k = 0; k < l.n; ++k) {
      const int64_t base = (o * l.n + k) * l.inner;
      for (int64_t i = 0; i < l.inner; ++i) {
        out[static_cast<size_t>(o * l.inner + i)] += in[static_cast<size_t>(base + i)];
      }
    }
  }
  bool rec = should_record({&a});
  Tensor result = make_output(std::move(out_shape), std::move(out), rec);
  if (rec) {
    auto an = a.node_ptr();
    Tape::active()->record(result.node_ptr(), [an, l](const std::vector<double>& g, GradMap& grads) {
      auto& ga = grads.slot(an.get());
      for (int64_t o = 0; o < l.outer; ++o) {
        for (int64_t k = 0; k < l.n; ++k) {
          const int64_t base = (o * l.n + k) * l.inner;
          for (int64_t i = 0; i < l.inner; ++i) {
            ga[static_cast<size_t>(base + i)] += g[static_cast<size_t>(o * l.inner + i)];
          }
        }
      }
    });
  }
  return result;
}

Tensor mean(const Tensor& a, int axis) {
  check_axis(a, axis, "mean");
  return mul_scalar(sum(a, axis), 1.0 / static_cast<double>(a.dim(axis)));
}

// ---- linear algebra ---------------------------------------------------------

namespace {

// c[m×p] += a[m×n] · b[n×p]
void matmul_accum(const double* a, const double* b, double* c, int64_t m, int64_t n, int64_t p) {
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      const double* brow = b + k * p;
      double* crow = c + i * p;
      for (int64_t j = 0; j < p; ++j) crow[j] += aik * brow[j];
    }
  }
}

// c[m×p] += a[m×n] · b[p×n]^T
void matmul_bt_accum(const double* a, const double* b, double* c, int64_t m, int64_t n, int64_t p) {
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < p; ++j) {
      const double* arow = a + i * n;
      const double* brow = b + j * n;
      double acc = 0.0;
      for (int64_t k = 0; k < n; ++k) acc += arow[k] * brow[k];
      c[i * p + j] += acc;
    }
  }
}

// c[n×p] += a[m×n]^T · b[m×p]
void matmul_at_accum(const double* a, const double* b, double* c, int64_t m, int64_t n, int64_t p) {
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * n;
    const double* brow = b + i * p;
    for (int64_t k = 0; k < n; ++k) {
      const double aik = arow[k];
      double* crow = c + k * p;
      for (int64_t j = 0; j < p; ++j) crow[j] += aik * brow[j];
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2, ErrorKind::Shape, "matmul requires rank-2 tensors, got ",
          shape_str(a.shape()), " and ", shape_str(b.shape()));
  if (a.dim(1) != b.dim(0)) {
    raise(ErrorKind::Shape, "matmul: inner dimensions disagree for ", shape_str(a.shape()),
          " and ", shape_str(b.shape()));
  }
  const int64_t m = a.dim(0), n = a.dim(1), p = b.dim(1);
  std::vector<double> out(static_cast<size_t>(m * p), 0.0);
  matmul_accum(a.data().data(), b.data().data(), out.data(), m, n, p);
  bool rec = should_record({&a, &b});
  Tensor result = make_output({m, p}, std::move(out), rec);
  if (rec) {
    auto an = a.node_ptr();
    auto bn = b.node_ptr();
    Tape::active()->record(result.node_ptr(), [an, bn, m, n, p](const std::vector<double>& g, GradMap& grads) {
      matmul_bt_accum(g.data(), bn->data.data(), grads.slot(an.get()).data(), m, p, n);
      matmul_at_accum(an->data.data(), g.data(), grads.slot(bn.get()).data(), m, n, p);
    });
  }
  return result;
}

Tensor bmm(const Tensor& a, const Tensor& b) {
  require(a.rank() == 3 && b.rank() == 3, ErrorKind::Shape, "bmm requires rank-3 tensors, got ",
          shape_str(a.shape()), " and ", shape_str(b.shape()));
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(1)) {
    raise(ErrorKind::Shape, "bmm: incompatible shapes ", shape_str(a.shape()), " and ",
          shape_str(b.shape()));
  }
  const int64_t bs = a.dim(0), m = a.dim(1), n = a.dim(2), p = b.dim(2);
  std::vector<double> out(static_cast<size_t>(bs * m * p), 0.0);
  for (int64_t i = 0; i < bs; ++i) {
    matmul_accum(a.data().data() + i * m * n, b.data().data() + i * n * p, out.data() + i * m * p,
                 m, n, p);
  }
  bool rec = should_record({&a, &b});
  Tensor result = make_output({bs, m, p}, std::move(out), rec);
  if (rec) {
    auto an = a.node_ptr();
    auto bn = b.node_ptr();
    Tape::active()->record(result.node_ptr(), [an, bn, bs, m, n, p](const std::vector<double>& g, GradMap& grads) {
      auto& ga = grads.slot(an.get());
      auto& gb = grads.slot(bn.get());
      for (int64_t i = 0; i < bs; ++i) {
        matmul_bt_accum(g.data() + i * m * p, bn->data.data() + i * n * p, ga.data() + i * m * n,
                        m, p, n);
        matmul_at_accum(an->data.data() + i * m * n, g.data() + i * m * p, gb.data() + i * n * p,
                        m, n, p);
      }
    });
  }
  return result;
}

// ---- shape ops --------------------------------------------------------------

namespace {

// Copies src into dst with two axes swapped; used by both directions of
// transpose. dst index = src index with (ax0, ax1) components exchanged.
void permute_two_axes(const std::vector<double>& src, const Shape& src_shape, int ax0, int ax1,
                      std::vector<double>& dst) {
  Shape dst_shape = src_shape;
  std::swap(dst_shape[static_cast<size_t>(ax0)], dst_shape[static_cast<size_t>(ax1)]);
  const auto src_strides = strides_of(src_shape);
  const auto dst_strides = strides_of(dst_shape);
  const size_t rank = src_shape.size();
  std::vector<int64_t> idx(rank, 0);
  const size_t n = src.size();
  for (size_t linear = 0; linear < n; ++linear) {
    int64_t dst_linear = 0;
    for (size_t d = 0; d < rank; ++d) {
      size_t sd = d;
      if (d == static_cast<size_t>(ax0)) sd = static_cast<size_t>(ax1);
      else if (d == static_cast<size_t>(ax1)) sd = static_cast<size_t>(ax0);
      dst_linear += idx[sd] * dst_strides[d];
    }
    dst[static_cast<size_t>(dst_linear)] = src[linear];
    for (int d = static_cast<int>(rank) - 1; d >= 0; --d) {
      if (++idx[static_cast<size_t>(d)] < src_shape[static_cast<size_t>(d)]) break;
      idx[static_cast<size_t>(d)] = 0;
    }
  }
}

}  // namespace

Tensor transpose(const Tensor& a, int axis0, int axis1) {
  check_axis(a, axis0, "transpose");
  check_axis(a, axis1, "transpose");
  Shape out_shape = a.shape();
  std::swap(out_shape[static_cast<size_t>(axis0)], out_shape[static_cast<size_t>(axis1)]);
  std::vector<double> out(a.data().size());
  permute_two_axes(a.data(), a.shape(), axis0, axis1, out);
  bool rec = should_record({&a});
  Tensor result = make_output(std::move(out_shape), std::move(out), rec);
  if (rec) {
    auto an = a.node_ptr();
    auto on = result.node_ptr();
    Tape::active()->record(result.node_ptr(), [an, on, axis0, axis1](const std::vector<double>& g, GradMap& grads) {
      std::vector<double> gin(g.size());
      permute_two_axes(g, on->shape, axis0, axis1, gin);
      auto& ga = grads.slot(an.get());
      for (size_t i = 0; i < gin.size(); ++i) ga[i] += gin[i];
    });
  }
  return result;
}

Tensor reshape(const Tensor& a, Shape shape) {
  require(shape_numel(shape) == a.numel(), ErrorKind::Shape, "reshape from ",
          shape_str(a.shape()), " to ", shape_str(shape), " changes element count");
  bool rec = should_record({&a});
  Tensor result = make_output(std::move(shape), a.data(), rec);
  if (rec) {
    auto an = a.node_ptr();
    Tape::active()->record(result.node_ptr(), [an](const std::vector<double>& g, GradMap& grads) {
      auto& ga = grads.slot(an.get());
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
  }
  return result;
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  require(!parts.empty(), ErrorKind::InvalidArgument, "concat of zero tensors");
  const Tensor& first = parts.front();
  check_axis(first, axis, "concat");
  int64_t axis_total = 0;
  for (const Tensor& t : parts) {
    require(t.rank() == first.rank(), ErrorKind::Shape, "concat: rank mismatch");
    for (int d = 0; d < first.rank(); ++d) {
      if (d != axis && t.dim(d) != first.dim(d)) {
        raise(ErrorKind::Shape, "concat: shapes ", shape_str(first.shape()), " and ",
              shape_str(t.shape()), " differ off-axis");
      }
    }
    axis_total += t.dim(axis);
  }
  Shape out_shape = first.shape();
  out_shape[static_cast<size_t>(axis)] = axis_total;

  const LaneLayout l = lanes(out_shape, axis);
  std::vector<double> out(static_cast<size_t>(shape_numel(out_shape)));
  for (int64_t o = 0; o < l.outer; ++o) {
    int64_t offset = 0;
    for (const Tensor& t : parts) {
      const int64_t tn = t.dim(axis);
      const double* src = t.data().data() + o * tn * l.inner;
      double* dst = out.data() + (o * l.n + offset) * l.inner;
      std::copy(src, src + tn * l.inner, dst);
      offset += tn;
    }
  }

  bool rec = false;
  for (const Tensor& t : parts) {
    if (t.requires_grad()) rec = true;
  }
  rec = rec && grad_recording_enabled();
  Tensor result = make_output(std::move(out_shape), std::move(out), rec);
  if (rec) {
    std::vector<std::shared_ptr<detail::TensorNode>> nodes;
    std::vector<int64_t> axis_dims;
    for (const Tensor& t : parts) {
      nodes.push_back(t.node_ptr());
      axis_dims.push_back(t.dim(axis));
    }
    Tape::active()->record(result.node_ptr(), [nodes, axis_dims, l](const std::vector<double>& g, GradMap& grads) {
      for (int64_t o = 0; o < l.outer; ++o) {
        int64_t offset = 0;
        for (size_t pi = 0; pi < nodes.size(); ++pi) {
          const int64_t tn = axis_dims[pi];
          const double* src = g.data() + (o * l.n + offset) * l.inner;
          double* dst = grads.slot(nodes[pi].get()).data() + o * tn * l.inner;
          for (int64_t i = 0; i < tn * l.inner; ++i) dst[i] += src[i];
          offset += tn;
        }
      }
    });
  }
  return result;
}

// ---- softmax / losses / argmax ----------------------------------------------

Tensor softmax(const Tensor& a, int axis) {
  check_axis(a, axis, "softmax");
  for (double v : a.data()) {
    require(!std::isnan(v), ErrorKind::Numeric, "softmax input contains NaN");
  }
  const LaneLayout l = lanes(a.shape(), axis);
  const auto& in = a.data();
  std::vector<double> out(in.size());
  for (int64_t o = 0; o < l.outer; ++o) {
    for (int64_t i = 0; i < l.inner; ++i) {
      const int64_t base = o * l.n * l.inner + i;
      double mx = in[static_cast<size_t>(base)];
      for (int64_t k = 1; k < l.n; ++k) {
        mx = std::max(mx, in[static_cast<size_t>(base + k * l.inner)]);
      }
      double denom = 0.0;
      for (int64_t k = 0; k < l.n; ++k) {
        const double e = std::exp(in[static_cast<size_t>(base + k * l.inner)] - mx);
        out[static_cast<size_t>(base + k * l.inner)] = e;
        denom += e;
      }
      for (int64_t k = 0; k < l.n; ++k) {
        out[static_cast<size_t>(base + k * l.inner)] /= denom;
      }
    }
  }
  bool rec = should_record({&a});
  Tensor result = make_output(a.shape(), std::move(out), rec);
  if (rec) {
    auto an = a.node_ptr();
    auto on = result.node_ptr();
    Tape::active()->record(result.node_ptr(), [an, on, l](const std::vector<double>& g, GradMap& grads) {
      auto& ga = grads.slot(an.get());
      const auto& y = on->data;
      for (int64_t o = 0; o < l.outer; ++o) {
        for (int64_t i = 0; i < l.inner; ++i) {
          const int64_t base = o * l.n * l.inner + i;
          double dot = 0.0;
          for (int64_t k = 0; k < l.n; ++k) {
            const size_t idx = static_cast<size_t>(base + k * l.inner);
            dot += g[idx] * y[idx];
          }
          for (int64_t k = 0; k < l.n; ++k) {
            const size_t idx = static_cast<size_t>(base + k * l.inner);
            ga[idx] += y[idx] * (g[idx] - dot);
          }
        }
      }
    });
  }
  return result;
}

Tensor cross_entropy(const Tensor& probs, const std::vector<int>& labels) {
  require(probs.rank() == 2, ErrorKind::Shape, "cross_entropy expects [B×K] probabilities, got ",
          shape_str(probs.shape()));
  const int64_t b = probs.dim(0), k = probs.dim(1);
  require(static_cast<int64_t>(labels.size()) == b, ErrorKind::Shape, "cross_entropy: ",
          labels.size(), " labels for batch of ", b);
  const auto& p = probs.data();
  for (int64_t i = 0; i < b; ++i) {
    const int y = labels[static_cast<size_t>(i)];
    if (y < 0 || y >= k) {
      raise(ErrorKind::Label, "label ", y, " out of range [0, ", k, ") at row ", i);
    }
    double row = 0.0;
    for (int64_t j = 0; j < k; ++j) row += p[static_cast<size_t>(i * k + j)];
    require(std::fabs(row - 1.0) < 1e-6, ErrorKind::Numeric, "cross_entropy row ", i,
            " sums to ", row, ", expected 1");
  }
  double loss = 0.0;
  for (int64_t i = 0; i < b; ++i) {
    loss -= std::log(std::max(p[static_cast<size_t>(i * k + labels[static_cast<size_t>(i)])], kLogClamp));
  }
  loss /= static_cast<double>(b);
  bool rec = should_record({&probs});
  Tensor result = make_output({}, {loss}, rec);
  if (rec) {
    auto pn = probs.node_ptr();
    auto labels_copy = labels;
    Tape::active()->record(result.node_ptr(), [pn, labels_copy, b, k](const std::vector<double>& g, GradMap& grads) {
      auto& gp = grads.slot(pn.get());
      for (int64_t i = 0; i < b; ++i) {
        const size_t idx = static_cast<size_t>(i * k + labels_copy[static_cast<size_t>(i)]);
        const double pv = pn->data[idx];
        if (pv > kLogClamp) gp[idx] -= g[0] / (static_cast<double>(b) * pv);
      }
    });
  }
  return result;
}

std::vector<int64_t> argmax(const Tensor& a, int axis) {
  check_axis(a, axis, "argmax");
  const LaneLayout l = lanes(a.shape(), axis);
  const auto& in = a.data();
  std::vector<int64_t> out(static_cast<size_t>(l.outer * l.inner), 0);
  for (int64_t o = 0; o < l.outer; ++o) {
    for (int64_t i = 0; i < l.inner; ++i) {
      const int64_t base = o * l.n * l.inner + i;
      int64_t best = 0;
      double bestv = in[static_cast<size_t>(base)];
      for (int64_t k = 1; k < l.n; ++k) {
        const double v = in[static_cast<size_t>(base + k * l.inner)];
        if (v > bestv) {
          bestv = v;
          best = k;
        }
      }
      out[static_cast<size_t>(o * l.inner + i)] = best;
    }
  }
  return out;
}

}  // namespace adast
