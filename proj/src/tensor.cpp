#include "genlab/tensor.hpp"

#include <cmath>
#include <cstddef>
#include <utility>

#include "genlab/kernels.hpp"

namespace genlab {

namespace {

std::size_t numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

// out[c x r] = in[r x c] transposed.
void transpose_into(const double* in, std::size_t r, std::size_t c,
                    double* out) {
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = in[i * c + j];
}

double stable_softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor

Tensor::Impl& Tensor::impl() {
  if (!impl_) throw ContractError("Tensor: use of default-constructed tensor");
  return *impl_;
}

const Tensor::Impl& Tensor::impl() const {
  if (!impl_) throw ContractError("Tensor: use of default-constructed tensor");
  return *impl_;
}

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
  if (shape.empty()) throw DimensionError("Tensor: empty shape");
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->data.assign(numel(shape), 0.0);
  t.impl_->shape = std::move(shape);
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::from_data(std::vector<std::size_t> shape,
                         std::vector<double> data, bool requires_grad) {
  if (shape.empty()) throw DimensionError("Tensor: empty shape");
  if (data.size() != numel(shape))
    throw DimensionError("Tensor: " + std::to_string(data.size()) +
                         " values do not fill shape " + shape_str(shape));
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->shape = std::move(shape);
  t.impl_->data = std::move(data);
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> data, bool requires_grad) {
  return from_data({rows, cols}, std::move(data), requires_grad);
}

Tensor Tensor::vector1d(std::vector<double> data, bool requires_grad) {
  if (data.empty()) throw DimensionError("Tensor: empty vector");
  const std::size_t n = data.size();  // before the move below
  return from_data({n}, std::move(data), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

const std::vector<std::size_t>& Tensor::shape() const { return impl().shape; }

std::size_t Tensor::size() const { return impl().data.size(); }

std::size_t Tensor::rows() const {
  if (ndim() != 2)
    throw DimensionError("Tensor: rows() on shape " + shape_str(shape()));
  return shape()[0];
}

std::size_t Tensor::cols() const {
  if (ndim() != 2)
    throw DimensionError("Tensor: cols() on shape " + shape_str(shape()));
  return shape()[1];
}

bool Tensor::requires_grad() const { return impl().requires_grad; }

double Tensor::item() const {
  if (size() != 1)
    throw ContractError("Tensor: item() on shape " + shape_str(shape()));
  return impl().data[0];
}

std::vector<double>& Tensor::data() { return impl().data; }
const std::vector<double>& Tensor::data() const { return impl().data; }

std::vector<double>& Tensor::grad() {
  Impl& im = impl();
  if (im.grad.size() != im.data.size()) im.grad.assign(im.data.size(), 0.0);
  return im.grad;
}

const std::vector<double>& Tensor::grad() const {
  const Impl& im = impl();
  if (im.grad.size() != im.data.size())
    throw ContractError("Tensor: gradient not populated");
  return im.grad;
}

bool Tensor::grad_allocated() const {
  return impl_ && impl_->grad.size() == impl_->data.size();
}

void Tensor::zero_grad() {
  Impl& im = impl();
  if (!im.grad.empty()) im.grad.assign(im.data.size(), 0.0);
}

bool Tensor::all_finite() const {
  for (double v : impl().data)
    if (!std::isfinite(v)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Tape

bool Tape::track(const Tensor& a) const {
  return recording_ && a.requires_grad();
}
bool Tape::track(const Tensor& a, const Tensor& b) const {
  return recording_ && (a.requires_grad() || b.requires_grad());
}
bool Tape::track(const Tensor& a, const Tensor& b, const Tensor& c) const {
  return recording_ &&
         (a.requires_grad() || b.requires_grad() || c.requires_grad());
}

void Tape::push(Tensor output, std::function<void()> fn) {
  nodes_.push_back(Node{std::move(output), std::move(fn)});
}

void Tape::clear() { nodes_.clear(); }

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1)
    throw ContractError("backward: loss must have a single element, got " +
                        shape_str(loss.shape()));
  if (!loss.requires_grad())
    throw ContractError("backward: loss does not require gradients");
  // Intermediate (op output) gradients are tape-owned scratch: reset them so
  // repeated backward calls accumulate only into leaves.
  for (Node& n : nodes_) n.output.zero_grad();
  loss.impl_->grad.assign(1, 1.0);
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it)
    if (it->backward) it->backward();
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.cols() != b.rows())
    throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()));
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out = Tensor::zeros({m, n}, track(a, b));
  const auto& ops = kernels::active_ops();
  ops.matmul_acc(a.data().data(), b.data().data(), out.data().data(), m, k, n);
  if (out.requires_grad()) {
    Tensor av = a, bv = b, ov = out;
    push(out, [av, bv, ov, m, k, n]() mutable {
      if (!ov.grad_allocated()) return;
      const auto& ops = kernels::active_ops();
      const double* g = ov.grad().data();
      if (av.requires_grad()) {
        // dA += G * B^T
        std::vector<double> bt(k * n);
        transpose_into(bv.data().data(), k, n, bt.data());
        ops.matmul_acc(g, bt.data(), av.grad().data(), m, n, k);
      }
      if (bv.requires_grad()) {
        // dB += A^T * G
        std::vector<double> at(m * k);
        transpose_into(av.data().data(), m, k, at.data());
        ops.matmul_acc(at.data(), g, bv.grad().data(), k, m, n);
      }
    });
  }
  return out;
}

Tensor Tape::transpose(const Tensor& a) {
  if (a.ndim() != 2)
    throw DimensionError("transpose: need a matrix, got " +
                         shape_str(a.shape()));
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out = Tensor::zeros({c, r}, track(a));
  transpose_into(a.data().data(), r, c, out.data().data());
  if (out.requires_grad()) {
    Tensor av = a, ov = out;
    push(out, [av, ov, r, c]() mutable {
      if (!ov.grad_allocated()) return;
      std::vector<double> gt(r * c);
      transpose_into(ov.grad().data(), c, r, gt.data());
      kernels::active_ops().axpy(1.0, gt.data(), av.grad().data(), r * c);
    });
  }
  return out;
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw DimensionError("add: shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  Tensor out = Tensor::zeros(a.shape(), track(a, b));
  kernels::active_ops().add(a.data().data(), b.data().data(),
                            out.data().data(), a.size());
  if (out.requires_grad()) {
    Tensor av = a, bv = b, ov = out;
    push(out, [av, bv, ov]() mutable {
      if (!ov.grad_allocated()) return;
      const auto& ops = kernels::active_ops();
      const double* g = ov.grad().data();
      if (av.requires_grad()) ops.axpy(1.0, g, av.grad().data(), av.size());
      if (bv.requires_grad()) ops.axpy(1.0, g, bv.grad().data(), bv.size());
    });
  }
  return out;
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw DimensionError("sub: shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  Tensor out = Tensor::zeros(a.shape(), track(a, b));
  kernels::active_ops().sub(a.data().data(), b.data().data(),
                            out.data().data(), a.size());
  if (out.requires_grad()) {
    Tensor av = a, bv = b, ov = out;
    push(out, [av, bv, ov]() mutable {
      if (!ov.grad_allocated()) return;
      const auto& ops = kernels::active_ops();
      const double* g = ov.grad().data();
      if (av.requires_grad()) ops.axpy(1.0, g, av.grad().data(), av.size());
      if (bv.requires_grad()) ops.axpy(-1.0, g, bv.grad().data(), bv.size());
    });
  }
  return out;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw DimensionError("mul: shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  Tensor out = Tensor::zeros(a.shape(), track(a, b));
  kernels::active_ops().mul(a.data().data(), b.data().data(),
                            out.data().data(), a.size());
  if (out.requires_grad()) {
    Tensor av = a, bv = b, ov = out;
    push(out, [av, bv, ov]() mutable {
      if (!ov.grad_allocated()) return;
      const std::size_t n = av.size();
      const double* g = ov.grad().data();
      if (av.requires_grad()) {
        double* da = av.grad().data();
        const double* bd = bv.data().data();
        for (std::size_t i = 0; i < n; ++i) da[i] += g[i] * bd[i];
      }
      if (bv.requires_grad()) {
        double* db = bv.grad().data();
        const double* ad = av.data().data();
        for (std::size_t i = 0; i < n; ++i) db[i] += g[i] * ad[i];
      }
    });
  }
  return out;
}

Tensor Tape::add_bias_row(const Tensor& x, const Tensor& b) {
  if (x.ndim() != 2 || b.ndim() != 1 || x.cols() != b.size())
    throw DimensionError("add_bias_row: incompatible shapes " +
                         shape_str(x.shape()) + " and " + shape_str(b.shape()));
  const std::size_t n = x.rows(), d = x.cols();
  Tensor out = Tensor::zeros(x.shape(), track(x, b));
  const auto& ops = kernels::active_ops();
  for (std::size_t i = 0; i < n; ++i)
    ops.add(x.data().data() + i * d, b.data().data(),
            out.data().data() + i * d, d);
  if (out.requires_grad()) {
    Tensor xv = x, bv = b, ov = out;
    push(out, [xv, bv, ov, n, d]() mutable {
      if (!ov.grad_allocated()) return;
      const auto& ops = kernels::active_ops();
      const double* g = ov.grad().data();
      if (xv.requires_grad()) ops.axpy(1.0, g, xv.grad().data(), n * d);
      if (bv.requires_grad()) {
        double* db = bv.grad().data();
        for (std::size_t i = 0; i < n; ++i) ops.axpy(1.0, g + i * d, db, d);
      }
    });
  }
  return out;
}

Tensor Tape::scale(const Tensor& a, double c) {
  Tensor out = Tensor::zeros(a.shape(), track(a));
  kernels::active_ops().scale(a.data().data(), c, out.data().data(), a.size());
  if (out.requires_grad()) {
    Tensor av = a, ov = out;
    push(out, [av, ov, c]() mutable {
      if (!ov.grad_allocated()) return;
      kernels::active_ops().axpy(c, ov.grad().data(), av.grad().data(),
                                 av.size());
    });
  }
  return out;
}

Tensor Tape::negate(const Tensor& a) { return scale(a, -1.0); }

Tensor Tape::mul_scalar(const Tensor& a, const Tensor& s) {
  if (s.size() != 1)
    throw DimensionError("mul_scalar: scalar operand has shape " +
                         shape_str(s.shape()));
  const double sv = s.data()[0];
  Tensor out = Tensor::zeros(a.shape(), track(a, s));
  kernels::active_ops().scale(a.data().data(), sv, out.data().data(),
                              a.size());
  if (out.requires_grad()) {
    Tensor av = a, scal = s, ov = out;
    push(out, [av, scal, ov, sv]() mutable {
      if (!ov.grad_allocated()) return;
      const double* g = ov.grad().data();
      if (av.requires_grad())
        kernels::active_ops().axpy(sv, g, av.grad().data(), av.size());
      if (scal.requires_grad()) {
        double acc = 0.0;
        const double* ad = av.data().data();
        for (std::size_t i = 0; i < av.size(); ++i) acc += g[i] * ad[i];
        scal.grad()[0] += acc;
      }
    });
  }
  return out;
}

Tensor Tape::recip(const Tensor& s) {
  if (s.size() != 1)
    throw DimensionError("recip: operand has shape " + shape_str(s.shape()));
  const double sv = s.data()[0];
  Tensor out = Tensor::from_data(s.shape(), {1.0 / sv}, track(s));
  if (out.requires_grad()) {
    Tensor sc = s, ov = out;
    push(out, [sc, ov, sv]() mutable {
      if (!ov.grad_allocated()) return;
      sc.grad()[0] += -ov.grad()[0] / (sv * sv);
    });
  }
  return out;
}

Tensor Tape::clamp_min(const Tensor& a, double lo) {
  Tensor out = Tensor::zeros(a.shape(), track(a));
  const double* x = a.data().data();
  double* y = out.data().data();
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = x[i] > lo ? x[i] : lo;
  if (out.requires_grad()) {
    Tensor av = a, ov = out;
    push(out, [av, ov, lo]() mutable {
      if (!ov.grad_allocated()) return;
      const double* g = ov.grad().data();
      const double* x = av.data().data();
      double* da = av.grad().data();
      for (std::size_t i = 0; i < av.size(); ++i)
        if (x[i] > lo) da[i] += g[i];
    });
  }
  return out;
}

Tensor Tape::leaky_relu(const Tensor& a, double slope) {
  Tensor out = Tensor::zeros(a.shape(), track(a));
  kernels::active_ops().leaky_relu(a.data().data(), slope, out.data().data(),
                                   a.size());
  if (out.requires_grad()) {
    Tensor av = a, ov = out;
    push(out, [av, ov, slope]() mutable {
      if (!ov.grad_allocated()) return;
      kernels::active_ops().leaky_relu_grad_acc(
          av.data().data(), ov.grad().data(), slope, av.grad().data(),
          av.size());
    });
  }
  return out;
}

Tensor Tape::tanh_elem(const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape(), track(a));
  const double* x = a.data().data();
  double* y = out.data().data();
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = std::tanh(x[i]);
  if (out.requires_grad()) {
    Tensor av = a, ov = out;
    push(out, [av, ov]() mutable {
      if (!ov.grad_allocated()) return;
      const double* g = ov.grad().data();
      const double* y = ov.data().data();
      double* da = av.grad().data();
      for (std::size_t i = 0; i < av.size(); ++i)
        da[i] += g[i] * (1.0 - y[i] * y[i]);
    });
  }
  return out;
}

Tensor Tape::softplus(const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape(), track(a));
  const double* x = a.data().data();
  double* y = out.data().data();
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = stable_softplus(x[i]);
  if (out.requires_grad()) {
    Tensor av = a, ov = out;
    push(out, [av, ov]() mutable {
      if (!ov.grad_allocated()) return;
      const double* g = ov.grad().data();
      const double* x = av.data().data();
      double* da = av.grad().data();
      for (std::size_t i = 0; i < av.size(); ++i)
        da[i] += g[i] * stable_sigmoid(x[i]);
    });
  }
  return out;
}

Tensor Tape::reduce_sum(const Tensor& a) {
  if (a.size() == 0) throw ContractError("reduce_sum: empty tensor");
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  Tensor out = Tensor::from_data({1}, {acc}, track(a));
  if (out.requires_grad()) {
    Tensor av = a, ov = out;
    push(out, [av, ov]() mutable {
      if (!ov.grad_allocated()) return;
      const double g = ov.grad()[0];
      double* da = av.grad().data();
      for (std::size_t i = 0; i < av.size(); ++i) da[i] += g;
    });
  }
  return out;
}

Tensor Tape::reduce_mean(const Tensor& a) {
  if (a.size() == 0) throw ContractError("reduce_mean: empty tensor");
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  const double inv_n = 1.0 / static_cast<double>(a.size());
  Tensor out = Tensor::from_data({1}, {acc * inv_n}, track(a));
  if (out.requires_grad()) {
    Tensor av = a, ov = out;
    push(out, [av, ov, inv_n]() mutable {
      if (!ov.grad_allocated()) return;
      const double g = ov.grad()[0] * inv_n;
      double* da = av.grad().data();
      for (std::size_t i = 0; i < av.size(); ++i) da[i] += g;
    });
  }
  return out;
}

Tensor Tape::batchnorm(const Tensor& x, const Tensor& gamma,
                       const Tensor& beta, std::vector<double>& running_mean,
                       std::vector<double>& running_var, bool train_mode,
                       double momentum, double eps) {
  if (x.ndim() != 2)
    throw DimensionError("batchnorm: need a matrix, got " +
                         shape_str(x.shape()));
  const std::size_t n = x.rows(), d = x.cols();
  if (gamma.ndim() != 1 || gamma.size() != d || beta.ndim() != 1 ||
      beta.size() != d)
    throw DimensionError("batchnorm: gamma/beta must have shape [" +
                         std::to_string(d) + "]");
  if (running_mean.size() != d || running_var.size() != d)
    throw ContractError("batchnorm: running buffers not sized to " +
                        std::to_string(d));
  if (train_mode && n < 2)
    throw ContractError(
        "batchnorm: train mode needs a batch of at least 2 rows, got " +
        std::to_string(n));

  const double* xd = x.data().data();
  const double* gd = gamma.data().data();
  const double* bd = beta.data().data();

  std::vector<double> mean(d, 0.0), var(d, 0.0), invstd(d);
  if (train_mode) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) mean[j] += xd[i * d + j];
    for (std::size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        double c = xd[i * d + j] - mean[j];
        var[j] += c * c;
      }
    for (std::size_t j = 0; j < d; ++j) var[j] /= static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) {
      running_mean[j] = momentum * running_mean[j] + (1.0 - momentum) * mean[j];
      running_var[j] = momentum * running_var[j] + (1.0 - momentum) * var[j];
    }
  } else {
    mean = running_mean;
    var = running_var;
  }
  for (std::size_t j = 0; j < d; ++j) invstd[j] = 1.0 / std::sqrt(var[j] + eps);

  Tensor out = Tensor::zeros(x.shape(), track(x, gamma, beta));
  double* y = out.data().data();
  std::vector<double> xhat(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double h = (xd[i * d + j] - mean[j]) * invstd[j];
      xhat[i * d + j] = h;
      y[i * d + j] = gd[j] * h + bd[j];
    }

  if (out.requires_grad()) {
    Tensor xv = x, gv = gamma, bv = beta, ov = out;
    auto xh = std::make_shared<std::vector<double>>(std::move(xhat));
    auto istd = std::make_shared<std::vector<double>>(std::move(invstd));
    push(out, [xv, gv, bv, ov, xh, istd, n, d, train_mode]() mutable {
      if (!ov.grad_allocated()) return;
      const double* g = ov.grad().data();
      const double* gd = gv.data().data();
      const double* xhd = xh->data();

      if (gv.requires_grad()) {
        double* dg = gv.grad().data();
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < d; ++j)
            dg[j] += g[i * d + j] * xhd[i * d + j];
      }
      if (bv.requires_grad()) {
        double* db = bv.grad().data();
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < d; ++j) db[j] += g[i * d + j];
      }
      if (!xv.requires_grad()) return;
      double* dx = xv.grad().data();
      if (!train_mode) {
        // Eval mode is an affine map per column.
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < d; ++j)
            dx[i * d + j] += g[i * d + j] * gd[j] * (*istd)[j];
        return;
      }
      // Train mode: statistics depend on x.
      std::vector<double> sum_dh(d, 0.0), sum_dh_xhat(d, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          double dh = g[i * d + j] * gd[j];
          sum_dh[j] += dh;
          sum_dh_xhat[j] += dh * xhd[i * d + j];
        }
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          double dh = g[i * d + j] * gd[j];
          dx[i * d + j] += (*istd)[j] * (dh - inv_n * sum_dh[j] -
                                         xhd[i * d + j] * inv_n * sum_dh_xhat[j]);
        }
    });
  }
  return out;
}

}  // namespace genlab
