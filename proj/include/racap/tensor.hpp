#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace racap {

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);
std::size_t shape_numel(const Shape& s);

// Dense row-major array of 64-bit floats with an optional gradient buffer.
// Tensor is a value-semantic handle: copies share storage, so the same
// parameter tensor can sit in a model struct, a named-parameter list and a
// graph node at once.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  int ndim() const;
  int dim(int axis) const;
  std::size_t numel() const;
  bool requires_grad() const;

  std::span<double> data();
  std::span<const double> data() const;
  std::span<double> grad();  // throws when the tensor does not track gradients
  std::span<const double> grad() const;
  void zero_grad();

  double item() const;  // numel() must be 1
  double at(int i) const;
  double at(int i, int j) const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
  friend class Graph;
};

// Tags for the generic elementwise entry point. Binary ops take two operands
// of equal shape (or one scalar); unary ops take one.
enum class EwOp { Add, Sub, Mul, Div, Scale, Relu, Tanh, Sigmoid, Sqrt };

// Define-by-run reverse-mode tape. Each forward pass builds a fresh Graph;
// ops compute values eagerly and record a backward closure when any input
// tracks gradients. backward() replays the closures in reverse, accumulating
// into the .grad of every tracked tensor (repeat calls keep accumulating
// until zero_grads()).
class Graph {
 public:
  // a[m x k] * b[k x n]
  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor transpose(const Tensor& a);

  // binary elementwise; shapes must match or one operand must be scalar
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor div(const Tensor& a, const Tensor& b);

  Tensor scale(const Tensor& a, double c);
  Tensor add_const(const Tensor& a, double c);

  // unary elementwise
  Tensor relu(const Tensor& a);    // relu'(0) := 0
  Tensor tanh(const Tensor& a);
  Tensor sigmoid(const Tensor& a);
  Tensor sqrt(const Tensor& a);    // sqrt'(0) := 0

  Tensor elementwise(EwOp op, const Tensor& a, const Tensor* b = nullptr, double c = 0.0);

  // numerically stabilized by max subtraction; axis 0 or 1 for 2-D, 0 for 1-D
  Tensor softmax(const Tensor& a, int axis);

  Tensor l2_norm(const Tensor& a);            // scalar; gradient at the origin := 0
  Tensor dot(const Tensor& a, const Tensor& b);
  Tensor sum(const Tensor& a);

  Tensor concat(std::span<const Tensor> parts, int axis);
  Tensor narrow(const Tensor& a, int axis, int start, int len);

  // out[i, :] = table[ids[i], :]; duplicate ids accumulate in the backward pass
  Tensor gather_rows(const Tensor& table, const std::vector<int>& ids);

  // loss must be a tracked scalar
  void backward(const Tensor& loss);

  // zero the .grad of every tensor this graph has tracked
  void zero_grads();

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    const char* op;
    std::function<void()> backward;
  };

  Tensor track_result(Shape shape, bool requires_grad);
  void track(const Tensor& t);
  void record(const char* op, std::function<void()> fn);
  Tensor unary(const char* name, void (*fwd)(const double*, double*, std::size_t),
               void (*bwd)(const double*, const double*, double*, std::size_t), const Tensor& a);

  std::vector<Node> nodes_;
  std::vector<Tensor> tracked_;
  std::unordered_set<const void*> tracked_set_;
};

}  // namespace racap
