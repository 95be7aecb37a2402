#include "racap/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "racap/kernels.hpp"

namespace racap {

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (int d : s) n *= static_cast<std::size_t>(d);
  return n;
}

struct Tensor::Impl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // sized iff requires_grad
  std::vector<double> adj;   // per-backward scratch, managed by Graph
  bool requires_grad = false;
};

namespace {

void check_shape(const Shape& s) {
  if (s.empty() || s.size() > 2) {
    throw std::invalid_argument("tensor: shape must be 1-D or 2-D, got " + shape_str(s));
  }
  for (int d : s) {
    if (d < 1) throw std::invalid_argument("tensor: non-positive extent in shape " + shape_str(s));
  }
}

double sum_of(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

void transpose_buf(const double* src, double* dst, int rows, int cols) {
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) dst[static_cast<std::size_t>(j) * rows + i] = src[static_cast<std::size_t>(i) * cols + j];
}

}  // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  check_shape(shape);
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->shape = std::move(shape);
  const std::size_t n = shape_numel(t.impl_->shape);
  t.impl_->data.assign(n, 0.0);
  t.impl_->requires_grad = requires_grad;
  if (requires_grad) t.impl_->grad.assign(n, 0.0);
  return t;
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::fill(t.impl_->data.begin(), t.impl_->data.end(), value);
  return t;
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  check_shape(shape);
  if (values.size() != shape_numel(shape)) {
    throw std::invalid_argument("tensor: " + std::to_string(values.size()) +
                                " values for shape " + shape_str(shape));
  }
  Tensor t = zeros(std::move(shape), requires_grad);
  t.impl_->data = std::move(values);
  return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

namespace {
void require_defined(const Tensor& t, const char* what) {
  if (!t.defined()) throw std::invalid_argument(std::string(what) + ": undefined tensor");
}
}  // namespace

const Shape& Tensor::shape() const {
  require_defined(*this, "shape");
  return impl_->shape;
}

int Tensor::ndim() const { return static_cast<int>(shape().size()); }

int Tensor::dim(int axis) const {
  const Shape& s = shape();
  if (axis < 0 || axis >= static_cast<int>(s.size())) {
    throw std::invalid_argument("dim: axis " + std::to_string(axis) + " out of range for " + shape_str(s));
  }
  return s[static_cast<std::size_t>(axis)];
}

std::size_t Tensor::numel() const { return shape_numel(shape()); }

bool Tensor::requires_grad() const {
  require_defined(*this, "requires_grad");
  return impl_->requires_grad;
}

std::span<double> Tensor::data() {
  require_defined(*this, "data");
  return impl_->data;
}

std::span<const double> Tensor::data() const {
  require_defined(*this, "data");
  return impl_->data;
}

std::span<double> Tensor::grad() {
  require_defined(*this, "grad");
  if (!impl_->requires_grad) throw std::invalid_argument("grad: tensor does not track gradients");
  return impl_->grad;
}

std::span<const double> Tensor::grad() const {
  require_defined(*this, "grad");
  if (!impl_->requires_grad) throw std::invalid_argument("grad: tensor does not track gradients");
  return impl_->grad;
}

void Tensor::zero_grad() {
  auto g = grad();
  std::fill(g.begin(), g.end(), 0.0);
}

double Tensor::item() const {
  if (numel() != 1) throw std::invalid_argument("item: tensor has shape " + shape_str(shape()));
  return impl_->data[0];
}

double Tensor::at(int i) const {
  if (ndim() != 1) throw std::invalid_argument("at(i): tensor has shape " + shape_str(shape()));
  if (i < 0 || i >= dim(0)) throw std::invalid_argument("at: index " + std::to_string(i) + " out of range");
  return impl_->data[static_cast<std::size_t>(i)];
}

double Tensor::at(int i, int j) const {
  if (ndim() != 2) throw std::invalid_argument("at(i,j): tensor has shape " + shape_str(shape()));
  if (i < 0 || i >= dim(0) || j < 0 || j >= dim(1)) {
    throw std::invalid_argument("at: index (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
  }
  return impl_->data[static_cast<std::size_t>(i) * dim(1) + j];
}

// ---------------------------------------------------------------------------
// Graph

Tensor Graph::track_result(Shape shape, bool requires_grad) {
  Tensor out = Tensor::zeros(std::move(shape), requires_grad);
  track(out);
  return out;
}

void Graph::track(const Tensor& t) {
  if (!t.impl_ || !t.impl_->requires_grad) return;
  if (tracked_set_.insert(t.impl_.get()).second) tracked_.push_back(t);
}

void Graph::record(const char* op, std::function<void()> fn) {
  nodes_.push_back(Node{op, std::move(fn)});
}

Tensor Graph::matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0)) {
    throw std::invalid_argument("matmul: incompatible shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  const bool rg = a.requires_grad() || b.requires_grad();
  Tensor out = track_result({m, n}, rg);
  kernels::matmul(a.data().data(), b.data().data(), out.data().data(), m, k, n);
  if (rg) {
    track(a);
    track(b);
    record("matmul", [a, b, out, m, k, n]() {
      const double* dout = out.impl_->adj.data();
      if (a.impl_->requires_grad) {
        kernels::matmul_nt(dout, b.impl_->data.data(), a.impl_->adj.data(), m, n, k, true);
      }
      if (b.impl_->requires_grad) {
        kernels::matmul_tn(a.impl_->data.data(), dout, b.impl_->adj.data(), m, k, n, true);
      }
    });
  }
  return out;
}

Tensor Graph::transpose(const Tensor& a) {
  require_defined(a, "transpose");
  if (a.ndim() != 2) throw std::invalid_argument("transpose: need 2-D, got " + shape_str(a.shape()));
  const int r = a.dim(0), c = a.dim(1);
  Tensor out = track_result({c, r}, a.requires_grad());
  transpose_buf(a.data().data(), out.data().data(), r, c);
  if (out.requires_grad()) {
    track(a);
    record("transpose", [a, out, r, c]() {
      const double* dout = out.impl_->adj.data();
      double* da = a.impl_->adj.data();
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) da[static_cast<std::size_t>(i) * c + j] += dout[static_cast<std::size_t>(j) * r + i];
    });
  }
  return out;
}

namespace {

struct BinOperands {
  std::size_t n;       // numel of the non-scalar side
  bool a_scalar;
  bool b_scalar;
  Shape out_shape;
};

BinOperands bin_operands(const char* op, const Tensor& a, const Tensor& b) {
  require_defined(a, op);
  require_defined(b, op);
  BinOperands r;
  r.a_scalar = a.numel() == 1;
  r.b_scalar = b.numel() == 1;
  if (a.shape() == b.shape()) {
    r.a_scalar = r.b_scalar = false;  // same shape: plain zip even for 1-element tensors
    r.out_shape = a.shape();
  } else if (r.b_scalar) {
    r.out_shape = a.shape();
  } else if (r.a_scalar) {
    r.out_shape = b.shape();
  } else {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  r.n = shape_numel(r.out_shape);
  return r;
}

}  // namespace

Tensor Graph::add(const Tensor& a, const Tensor& b) {
  const BinOperands s = bin_operands("add", a, b);
  const bool rg = a.requires_grad() || b.requires_grad();
  Tensor out = track_result(s.out_shape, rg);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* py = out.data().data();
  if (!s.a_scalar && !s.b_scalar) {
    kernels::vadd(pa, pb, py, s.n);
  } else if (s.b_scalar) {
    kernels::vshift(pb[0], pa, py, s.n);
  } else {
    kernels::vshift(pa[0], pb, py, s.n);
  }
  if (rg) {
    track(a);
    track(b);
    record("add", [a, b, out, s]() {
      const double* dout = out.impl_->adj.data();
      if (a.impl_->requires_grad) {
        if (s.a_scalar) {
          a.impl_->adj[0] += sum_of(dout, s.n);
        } else {
          kernels::axpy(1.0, dout, a.impl_->adj.data(), s.n);
        }
      }
      if (b.impl_->requires_grad) {
        if (s.b_scalar) {
          b.impl_->adj[0] += sum_of(dout, s.n);
        } else {
          kernels::axpy(1.0, dout, b.impl_->adj.data(), s.n);
        }
      }
    });
  }
  return out;
}

Tensor Graph::sub(const Tensor& a, const Tensor& b) {
  const BinOperands s = bin_operands("sub", a, b);
  const bool rg = a.requires_grad() || b.requires_grad();
  Tensor out = track_result(s.out_shape, rg);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* py = out.data().data();
  if (!s.a_scalar && !s.b_scalar) {
    kernels::vsub(pa, pb, py, s.n);
  } else if (s.b_scalar) {
    kernels::vshift(-pb[0], pa, py, s.n);
  } else {
    for (std::size_t i = 0; i < s.n; ++i) py[i] = pa[0] - pb[i];
  }
  if (rg) {
    track(a);
    track(b);
    record("sub", [a, b, out, s]() {
      const double* dout = out.impl_->adj.data();
      if (a.impl_->requires_grad) {
        if (s.a_scalar) {
          a.impl_->adj[0] += sum_of(dout, s.n);
        } else {
          kernels::axpy(1.0, dout, a.impl_->adj.data(), s.n);
        }
      }
      if (b.impl_->requires_grad) {
        if (s.b_scalar) {
          b.impl_->adj[0] -= sum_of(dout, s.n);
        } else {
          kernels::axpy(-1.0, dout, b.impl_->adj.data(), s.n);
        }
      }
    });
  }
  return out;
}

Tensor Graph::mul(const Tensor& a, const Tensor& b) {
  const BinOperands s = bin_operands("mul", a, b);
  const bool rg = a.requires_grad() || b.requires_grad();
  Tensor out = track_result(s.out_shape, rg);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* py = out.data().data();
  if (!s.a_scalar && !s.b_scalar) {
    kernels::vmul(pa, pb, py, s.n);
  } else if (s.b_scalar) {
    kernels::vscale(pb[0], pa, py, s.n);
  } else {
    kernels::vscale(pa[0], pb, py, s.n);
  }
  if (rg) {
    track(a);
    track(b);
    record("mul", [a, b, out, s]() {
      const double* dout = out.impl_->adj.data();
      const double* pa2 = a.impl_->data.data();
      const double* pb2 = b.impl_->data.data();
      if (a.impl_->requires_grad) {
        if (s.a_scalar) {
          a.impl_->adj[0] += kernels::dot(dout, pb2, s.n);
        } else if (s.b_scalar) {
          kernels::axpy(pb2[0], dout, a.impl_->adj.data(), s.n);
        } else {
          kernels::accum_mul(dout, pb2, a.impl_->adj.data(), s.n);
        }
      }
      if (b.impl_->requires_grad) {
        if (s.b_scalar) {
          b.impl_->adj[0] += kernels::dot(dout, pa2, s.n);
        } else if (s.a_scalar) {
          kernels::axpy(pa2[0], dout, b.impl_->adj.data(), s.n);
        } else {
          kernels::accum_mul(dout, pa2, b.impl_->adj.data(), s.n);
        }
      }
    });
  }
  return out;
}

Tensor Graph::div(const Tensor& a, const Tensor& b) {
  const BinOperands s = bin_operands("div", a, b);
  const bool rg = a.requires_grad() || b.requires_grad();
  Tensor out = track_result(s.out_shape, rg);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* py = out.data().data();
  if (!s.a_scalar && !s.b_scalar) {
    kernels::vdiv(pa, pb, py, s.n);
  } else if (s.b_scalar) {
    for (std::size_t i = 0; i < s.n; ++i) py[i] = pa[i] / pb[0];
  } else {
    for (std::size_t i = 0; i < s.n; ++i) py[i] = pa[0] / pb[i];
  }
  if (rg) {
    track(a);
    track(b);
    record("div", [a, b, out, s]() {
      const double* dout = out.impl_->adj.data();
      const double* pa2 = a.impl_->data.data();
      const double* pb2 = b.impl_->data.data();
      if (a.impl_->requires_grad) {
        double* da = a.impl_->adj.data();
        if (s.a_scalar) {
          double acc = 0.0;
          for (std::size_t i = 0; i < s.n; ++i) acc += dout[i] / pb2[i];
          da[0] += acc;
        } else if (s.b_scalar) {
          kernels::axpy(1.0 / pb2[0], dout, da, s.n);
        } else {
          for (std::size_t i = 0; i < s.n; ++i) da[i] += dout[i] / pb2[i];
        }
      }
      if (b.impl_->requires_grad) {
        double* db = b.impl_->adj.data();
        if (s.b_scalar) {
          double acc = 0.0;
          const double inv2 = 1.0 / (pb2[0] * pb2[0]);
          for (std::size_t i = 0; i < s.n; ++i) acc -= dout[i] * (s.a_scalar ? pa2[0] : pa2[i]) * inv2;
          db[0] += acc;
        } else if (s.a_scalar) {
          for (std::size_t i = 0; i < s.n; ++i) db[i] -= dout[i] * pa2[0] / (pb2[i] * pb2[i]);
        } else {
          kernels::div_grad_den(pa2, pb2, dout, db, s.n);
        }
      }
    });
  }
  return out;
}

Tensor Graph::scale(const Tensor& a, double c) {
  require_defined(a, "scale");
  Tensor out = track_result(a.shape(), a.requires_grad());
  kernels::vscale(c, a.data().data(), out.data().data(), a.numel());
  if (out.requires_grad()) {
    track(a);
    const std::size_t n = a.numel();
    record("scale", [a, out, c, n]() {
      kernels::axpy(c, out.impl_->adj.data(), a.impl_->adj.data(), n);
    });
  }
  return out;
}

Tensor Graph::add_const(const Tensor& a, double c) {
  require_defined(a, "add_const");
  Tensor out = track_result(a.shape(), a.requires_grad());
  kernels::vshift(c, a.data().data(), out.data().data(), a.numel());
  if (out.requires_grad()) {
    track(a);
    const std::size_t n = a.numel();
    record("add_const", [a, out, n]() {
      kernels::axpy(1.0, out.impl_->adj.data(), a.impl_->adj.data(), n);
    });
  }
  return out;
}

// relu/tanh/sigmoid/sqrt share one recording scheme: the forward output is
// enough to evaluate the local derivative, so closures hold no extra buffers.
Tensor Graph::unary(const char* name, void (*fwd)(const double*, double*, std::size_t),
                    void (*bwd)(const double*, const double*, double*, std::size_t), const Tensor& a) {
  require_defined(a, name);
  const std::size_t n = a.numel();
  Tensor out = track_result(a.shape(), a.requires_grad());
  fwd(a.data().data(), out.data().data(), n);
  if (out.requires_grad()) {
    track(a);
    record(name, [a, out, bwd, n]() {
      bwd(out.impl_->data.data(), out.impl_->adj.data(), a.impl_->adj.data(), n);
    });
  }
  return out;
}

Tensor Graph::relu(const Tensor& a) { return unary("relu", kernels::vrelu, kernels::relu_grad, a); }
Tensor Graph::tanh(const Tensor& a) { return unary("tanh", kernels::vtanh, kernels::tanh_grad, a); }
Tensor Graph::sigmoid(const Tensor& a) { return unary("sigmoid", kernels::vsigmoid, kernels::sigmoid_grad, a); }
Tensor Graph::sqrt(const Tensor& a) { return unary("sqrt", kernels::vsqrt, kernels::sqrt_grad, a); }

Tensor Graph::elementwise(EwOp op, const Tensor& a, const Tensor* b, double c) {
  switch (op) {
    case EwOp::Add:
    case EwOp::Sub:
    case EwOp::Mul:
    case EwOp::Div: {
      if (b == nullptr) throw std::invalid_argument("elementwise: binary op needs a second operand");
      if (op == EwOp::Add) return add(a, *b);
      if (op == EwOp::Sub) return sub(a, *b);
      if (op == EwOp::Mul) return mul(a, *b);
      return div(a, *b);
    }
    case EwOp::Scale:
      return scale(a, c);
    case EwOp::Relu:
      return relu(a);
    case EwOp::Tanh:
      return tanh(a);
    case EwOp::Sigmoid:
      return sigmoid(a);
    case EwOp::Sqrt:
      return sqrt(a);
  }
  throw std::invalid_argument("elementwise: unknown op tag");
}

Tensor Graph::softmax(const Tensor& a, int axis) {
  require_defined(a, "softmax");
  const int nd = a.ndim();
  if (nd == 1) {
    if (axis != 0) throw std::invalid_argument("softmax: axis " + std::to_string(axis) + " for 1-D input");
    Tensor out = track_result(a.shape(), a.requires_grad());
    kernels::softmax_rows(a.data().data(), out.data().data(), 1, a.dim(0));
    if (out.requires_grad()) {
      track(a);
      const int n = a.dim(0);
      record("softmax", [a, out, n]() {
        kernels::softmax_grad_rows(out.impl_->data.data(), out.impl_->adj.data(), a.impl_->adj.data(), 1, n);
      });
    }
    return out;
  }
  if (nd != 2 || (axis != 0 && axis != 1)) {
    throw std::invalid_argument("softmax: axis " + std::to_string(axis) + " invalid for shape " + shape_str(a.shape()));
  }
  const int r = a.dim(0), c = a.dim(1);
  Tensor out = track_result(a.shape(), a.requires_grad());
  if (axis == 1) {
    kernels::softmax_rows(a.data().data(), out.data().data(), r, c);
    if (out.requires_grad()) {
      track(a);
      record("softmax", [a, out, r, c]() {
        kernels::softmax_grad_rows(out.impl_->data.data(), out.impl_->adj.data(), a.impl_->adj.data(), r, c);
      });
    }
    return out;
  }
  // axis 0: run the row kernel on a transposed copy
  std::vector<double> xt(a.numel()), yt(a.numel());
  transpose_buf(a.data().data(), xt.data(), r, c);
  kernels::softmax_rows(xt.data(), yt.data(), c, r);
  transpose_buf(yt.data(), out.data().data(), c, r);
  if (out.requires_grad()) {
    track(a);
    record("softmax", [a, out, r, c]() {
      std::vector<double> yt2(out.impl_->data.size()), dyt(out.impl_->data.size()), dxt(out.impl_->data.size(), 0.0);
      transpose_buf(out.impl_->data.data(), yt2.data(), r, c);
      transpose_buf(out.impl_->adj.data(), dyt.data(), r, c);
      kernels::softmax_grad_rows(yt2.data(), dyt.data(), dxt.data(), c, r);
      std::vector<double> dx(out.impl_->data.size());
      transpose_buf(dxt.data(), dx.data(), c, r);
      kernels::axpy(1.0, dx.data(), a.impl_->adj.data(), dx.size());
    });
  }
  return out;
}

Tensor Graph::l2_norm(const Tensor& a) {
  require_defined(a, "l2_norm");
  const std::size_t n = a.numel();
  const double norm = std::sqrt(kernels::dot(a.data().data(), a.data().data(), n));
  Tensor out = track_result({1}, a.requires_grad());
  out.data()[0] = norm;
  if (out.requires_grad()) {
    track(a);
    record("l2_norm", [a, out, n]() {
      const double norm_val = out.impl_->data[0];
      if (norm_val == 0.0) return;  // subgradient at the origin: 0
      kernels::axpy(out.impl_->adj[0] / norm_val, a.impl_->data.data(), a.impl_->adj.data(), n);
    });
  }
  return out;
}

Tensor Graph::dot(const Tensor& a, const Tensor& b) {
  require_defined(a, "dot");
  require_defined(b, "dot");
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("dot: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const std::size_t n = a.numel();
  const bool rg = a.requires_grad() || b.requires_grad();
  Tensor out = track_result({1}, rg);
  out.data()[0] = kernels::dot(a.data().data(), b.data().data(), n);
  if (rg) {
    track(a);
    track(b);
    record("dot", [a, b, out, n]() {
      const double d = out.impl_->adj[0];
      if (a.impl_->requires_grad) kernels::axpy(d, b.impl_->data.data(), a.impl_->adj.data(), n);
      if (b.impl_->requires_grad) kernels::axpy(d, a.impl_->data.data(), b.impl_->adj.data(), n);
    });
  }
  return out;
}

Tensor Graph::sum(const Tensor& a) {
  require_defined(a, "sum");
  const std::size_t n = a.numel();
  Tensor out = track_result({1}, a.requires_grad());
  out.data()[0] = sum_of(a.data().data(), n);
  if (out.requires_grad()) {
    track(a);
    record("sum", [a, out, n]() {
      kernels::accum_const(out.impl_->adj[0], a.impl_->adj.data(), n);
    });
  }
  return out;
}

Tensor Graph::concat(std::span<const Tensor> parts, int axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  if (axis != 0 && axis != 1) throw std::invalid_argument("concat: axis must be 0 or 1");
  bool rg = false;
  const int other = 1 - axis;
  int along = 0;
  for (const Tensor& p : parts) {
    require_defined(p, "concat");
    if (p.ndim() != 2) throw std::invalid_argument("concat: need 2-D inputs, got " + shape_str(p.shape()));
    if (p.dim(other) != parts[0].dim(other)) {
      throw std::invalid_argument("concat: extent mismatch " + shape_str(p.shape()) + " vs " + shape_str(parts[0].shape()));
    }
    along += p.dim(axis);
    rg = rg || p.requires_grad();
  }
  Shape out_shape = axis == 0 ? Shape{along, parts[0].dim(1)} : Shape{parts[0].dim(0), along};
  Tensor out = track_result(out_shape, rg);
  const int out_cols = out.dim(1);
  double* py = out.data().data();
  int offset = 0;
  for (const Tensor& p : parts) {
    const double* pp = p.data().data();
    const int pr = p.dim(0), pc = p.dim(1);
    if (axis == 0) {
      std::copy(pp, pp + static_cast<std::size_t>(pr) * pc, py + static_cast<std::size_t>(offset) * pc);
      offset += pr;
    } else {
      for (int i = 0; i < pr; ++i) {
        std::copy(pp + static_cast<std::size_t>(i) * pc, pp + static_cast<std::size_t>(i) * pc + pc,
                  py + static_cast<std::size_t>(i) * out_cols + offset);
      }
      offset += pc;
    }
  }
  if (rg) {
    std::vector<Tensor> held(parts.begin(), parts.end());
    for (const Tensor& p : held) track(p);
    record("concat", [held = std::move(held), out, axis, out_cols]() {
      const double* dout = out.impl_->adj.data();
      int off = 0;
      for (const Tensor& p : held) {
        const int pr = p.dim(0), pc = p.dim(1);
        if (p.impl_->requires_grad) {
          double* dp = p.impl_->adj.data();
          if (axis == 0) {
            kernels::axpy(1.0, dout + static_cast<std::size_t>(off) * pc, dp, static_cast<std::size_t>(pr) * pc);
          } else {
            for (int i = 0; i < pr; ++i)
              for (int j = 0; j < pc; ++j)
                dp[static_cast<std::size_t>(i) * pc + j] += dout[static_cast<std::size_t>(i) * out_cols + off + j];
          }
        }
        off += axis == 0 ? pr : pc;
      }
    });
  }
  return out;
}

Tensor Graph::narrow(const Tensor& a, int axis, int start, int len) {
  require_defined(a, "narrow");
  if (a.ndim() != 2) throw std::invalid_argument("narrow: need 2-D, got " + shape_str(a.shape()));
  if (axis != 0 && axis != 1) throw std::invalid_argument("narrow: axis must be 0 or 1");
  if (len < 1 || start < 0 || start + len > a.dim(axis)) {
    throw std::invalid_argument("narrow: range [" + std::to_string(start) + "," + std::to_string(start + len) +
                                ") out of bounds for " + shape_str(a.shape()));
  }
  const int r = a.dim(0), c = a.dim(1);
  Shape out_shape = axis == 0 ? Shape{len, c} : Shape{r, len};
  Tensor out = track_result(out_shape, a.requires_grad());
  const double* pa = a.data().data();
  double* py = out.data().data();
  if (axis == 0) {
    std::copy(pa + static_cast<std::size_t>(start) * c, pa + static_cast<std::size_t>(start + len) * c, py);
  } else {
    for (int i = 0; i < r; ++i)
      std::copy(pa + static_cast<std::size_t>(i) * c + start, pa + static_cast<std::size_t>(i) * c + start + len,
                py + static_cast<std::size_t>(i) * len);
  }
  if (out.requires_grad()) {
    track(a);
    record("narrow", [a, out, axis, start, len, r, c]() {
      const double* dout = out.impl_->adj.data();
      double* da = a.impl_->adj.data();
      if (axis == 0) {
        kernels::axpy(1.0, dout, da + static_cast<std::size_t>(start) * c, static_cast<std::size_t>(len) * c);
      } else {
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < len; ++j)
            da[static_cast<std::size_t>(i) * c + start + j] += dout[static_cast<std::size_t>(i) * len + j];
      }
    });
  }
  return out;
}

Tensor Graph::gather_rows(const Tensor& table, const std::vector<int>& ids) {
  require_defined(table, "gather_rows");
  if (table.ndim() != 2) throw std::invalid_argument("gather_rows: need 2-D table, got " + shape_str(table.shape()));
  if (ids.empty()) throw std::invalid_argument("gather_rows: no row indices");
  const int rows = table.dim(0), cols = table.dim(1);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= rows) {
      throw std::invalid_argument("gather_rows: id " + std::to_string(ids[i]) + " at position " + std::to_string(i) +
                                  " outside table with " + std::to_string(rows) + " rows");
    }
  }
  Tensor out = track_result({static_cast<int>(ids.size()), cols}, table.requires_grad());
  const double* pt = table.data().data();
  double* py = out.data().data();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy(pt + static_cast<std::size_t>(ids[i]) * cols, pt + static_cast<std::size_t>(ids[i]) * cols + cols,
              py + i * cols);
  }
  if (out.requires_grad()) {
    track(table);
    record("gather_rows", [table, out, ids, cols]() {
      const double* dout = out.impl_->adj.data();
      double* dt = table.impl_->adj.data();
      for (std::size_t i = 0; i < ids.size(); ++i) {
        kernels::axpy(1.0, dout + i * cols, dt + static_cast<std::size_t>(ids[i]) * cols, static_cast<std::size_t>(cols));
      }
    });
  }
  return out;
}

void Graph::backward(const Tensor& loss) {
  require_defined(loss, "backward");
  if (loss.numel() != 1) {
    throw std::invalid_argument("backward: loss has shape " + shape_str(loss.shape()) + ", expected a scalar");
  }
  if (!loss.requires_grad() || tracked_set_.find(loss.impl_.get()) == tracked_set_.end()) {
    throw std::invalid_argument("backward: loss is not connected to any tracked parameter of this graph");
  }
  for (Tensor& t : tracked_) t.impl_->adj.assign(t.impl_->data.size(), 0.0);
  loss.impl_->adj[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->backward();
  for (Tensor& t : tracked_) {
    kernels::axpy(1.0, t.impl_->adj.data(), t.impl_->grad.data(), t.impl_->grad.size());
  }
}

void Graph::zero_grads() {
  for (Tensor& t : tracked_) t.zero_grad();
}

}  // namespace racap
