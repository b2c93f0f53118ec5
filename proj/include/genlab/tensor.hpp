#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "genlab/common.hpp"

namespace genlab {

// Dense double-precision tensor, row-major.  Cheap handle over shared
// storage: copies alias the same data and gradient buffers.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
  static Tensor from_data(std::vector<std::size_t> shape,
                          std::vector<double> data, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> data, bool requires_grad = false);
  static Tensor vector1d(std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const std::vector<std::size_t>& shape() const;
  std::size_t size() const;
  std::size_t ndim() const { return shape().size(); }
  // 2-D accessors; throw DimensionError on other ranks.
  std::size_t rows() const;
  std::size_t cols() const;

  bool requires_grad() const;
  double item() const;  // value of a single-element tensor

  std::vector<double>& data();
  const std::vector<double>& data() const;

  // Gradient buffer, allocated (zeroed) on first touch.
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  bool grad_allocated() const;
  void zero_grad();

  bool all_finite() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  struct Impl {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until first use
    bool requires_grad = false;
  };
  std::shared_ptr<Impl> impl_;
  Impl& impl();
  const Impl& impl() const;
  friend class Tape;
};

// Define-by-run reverse-mode tape.  Each differentiable op appends a node
// holding its output and a closure that pushes adjoints to the inputs; the
// backward pass walks nodes once, in reverse creation order.  Tapes are
// rebuilt per forward pass and cleared between training steps.
class Tape {
 public:
  // --- structural ---
  Tensor matmul(const Tensor& a, const Tensor& b);   // [m x k] * [k x n]
  Tensor transpose(const Tensor& a);                 // 2-D

  // --- elementwise / broadcast ---
  Tensor add(const Tensor& a, const Tensor& b);        // same shape
  Tensor sub(const Tensor& a, const Tensor& b);        // same shape
  Tensor mul(const Tensor& a, const Tensor& b);        // same shape, Hadamard
  Tensor add_bias_row(const Tensor& x, const Tensor& b);  // [n x d] + [d]
  Tensor scale(const Tensor& a, double c);
  Tensor negate(const Tensor& a);
  Tensor mul_scalar(const Tensor& a, const Tensor& s);  // s has one element
  Tensor recip(const Tensor& s);                        // one element
  Tensor clamp_min(const Tensor& a, double lo);
  Tensor leaky_relu(const Tensor& a, double slope);
  Tensor tanh_elem(const Tensor& a);
  Tensor softplus(const Tensor& a);  // max(x,0) + log1p(exp(-|x|))

  // --- reductions (whole tensor -> single element) ---
  Tensor reduce_sum(const Tensor& a);
  Tensor reduce_mean(const Tensor& a);

  // Batch normalization over rows of x [n x d] with per-column gamma/beta.
  // In train mode uses batch statistics (n >= 2 required) and updates the
  // running buffers in place with the given momentum; in eval mode uses the
  // running buffers.  Gradients flow to x, gamma and beta.
  Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                   std::vector<double>& running_mean,
                   std::vector<double>& running_var, bool train_mode,
                   double momentum = 0.9, double eps = 1e-5);

  // Seeds d(loss)/d(loss) = 1 and accumulates gradients into every
  // requires_grad tensor reachable from `loss`.  Leaf gradients accumulate
  // across calls; intermediate gradients are reset internally per call.
  void backward(const Tensor& loss);

  // Drop all recorded nodes (and the tensors they keep alive).
  void clear();

  std::size_t node_count() const { return nodes_.size(); }

  bool recording() const { return recording_; }
  void set_recording(bool on) { recording_ = on; }

 private:
  struct Node {
    Tensor output;
    std::function<void()> backward;
  };
  std::vector<Node> nodes_;
  bool recording_ = true;

  // True when the op must be recorded: tape recording is on and at least one
  // input wants gradients.  The output's requires_grad mirrors this.
  bool track(const Tensor& a) const;
  bool track(const Tensor& a, const Tensor& b) const;
  bool track(const Tensor& a, const Tensor& b, const Tensor& c) const;
  void push(Tensor output, std::function<void()> fn);
};

// RAII guard that disables tape recording in scope.
class NoGradScope {
 public:
  explicit NoGradScope(Tape& tape) : tape_(tape), prev_(tape.recording()) {
    tape_.set_recording(false);
  }
  ~NoGradScope() { tape_.set_recording(prev_); }
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape& tape_;
  bool prev_;
};

}  // namespace genlab
