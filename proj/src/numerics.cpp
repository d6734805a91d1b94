#include "ilstm/numerics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ilstm {

Vector ClassTarget::one_hot(std::size_t classes) const {
  if (index >= classes) {
    throw std::invalid_argument("class index " + std::to_string(index) +
                                " out of range [0, " +
                                std::to_string(classes) + ")");
  }
  Vector t(classes, 0.0);
  t[index] = 1.0;
  return t;
}

ProbVector::ProbVector(Vector p) : p_(std::move(p)) {
  if (p_.empty()) {
    throw std::invalid_argument("ProbVector must be non-empty");
  }
  double sum = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("ProbVector entry " + std::to_string(v) +
                                  " outside [0,1]");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("ProbVector sums to " + std::to_string(sum) +
                                ", expected 1");
  }
}

double Rng::normal() {
  // Guard against log(0); uniform() can return exactly 0.
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("Rng::index requires n >= 1");
  }
  return static_cast<std::size_t>(next_u64() % n);
}

std::uint64_t Rng::derive(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + (stream + 1) * 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Vector sigmoid(const Vector& x) {
  Vector out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double v = x[k];
    // Evaluate with a non-positive exponent on both branches so exp can
    // underflow but never overflow.
    if (v >= 0.0) {
      out[k] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[k] = e / (1.0 + e);
    }
  }
  return out;
}

Vector tanh_act(const Vector& x) {
  Vector out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    out[k] = std::tanh(x[k]);
  }
  return out;
}

Vector affine(const Matrix& w, std::span<const double> v, const Vector& b) {
  if (w.cols != v.size() || w.rows != b.size()) {
    throw std::invalid_argument(
        "affine shape mismatch: W is " + std::to_string(w.rows) + "x" +
        std::to_string(w.cols) + ", v has length " + std::to_string(v.size()) +
        ", b has length " + std::to_string(b.size()));
  }
  Vector out(w.rows);
  const double* wp = w.a.data();
  for (std::size_t i = 0; i < w.rows; ++i, wp += w.cols) {
    double acc = b[i];
    for (std::size_t j = 0; j < w.cols; ++j) {
      acc += wp[j] * v[j];
    }
    out[i] = acc;
  }
  return out;
}

ProbVector softmax(const Vector& z) {
  if (z.empty()) {
    throw std::invalid_argument("softmax of empty vector");
  }
  double mx = z[0];
  for (double v : z) {
    mx = std::max(mx, v);
  }
  Vector e(z.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    e[k] = std::exp(z[k] - mx);
    sum += e[k];
  }
  for (double& v : e) {
    v /= sum;
  }
  return ProbVector(std::move(e));
}

double cross_entropy(const ClassTarget& target, const ProbVector& p) {
  if (target.index >= p.size()) {
    throw std::invalid_argument("cross_entropy target " +
                                std::to_string(target.index) +
                                " out of range for " + std::to_string(p.size()) +
                                " classes");
  }
  const double floor = 1e-12;
  return -std::log(std::max(p[target.index], floor));
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& params, double eps) {
  if (!(eps > 0.0)) {
    throw std::invalid_argument("finite_diff_grad requires eps > 0");
  }
  Vector theta = params;
  Vector grad(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = theta[k];
    theta[k] = saved + eps;
    const double hi = f(theta);
    theta[k] = saved - eps;
    const double lo = f(theta);
    theta[k] = saved;
    if (!std::isfinite(hi) || !std::isfinite(lo)) {
      throw std::runtime_error("finite_diff_grad: non-finite evaluation at "
                               "coordinate " +
                               std::to_string(k));
    }
    grad[k] = (hi - lo) / (2.0 * eps);
  }
  return grad;
}

bool all_finite(std::span<const double> xs) {
  for (double v : xs) {
    if (!std::isfinite(v)) {
      return false;
    }
  }
  return true;
}

std::size_t argmax(std::span<const double> xs) {
  if (xs.empty()) {
    throw std::invalid_argument("argmax of empty vector");
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < xs.size(); ++k) {
    if (xs[k] > xs[best]) {
      best = k;
    }
  }
  return best;
}

void add_outer(Matrix& acc, std::span<const double> u,
               std::span<const double> v) {
  if (acc.rows != u.size() || acc.cols != v.size()) {
    throw std::invalid_argument(
        "add_outer shape mismatch: acc is " + std::to_string(acc.rows) + "x" +
        std::to_string(acc.cols) + ", u has length " +
        std::to_string(u.size()) + ", v has length " +
        std::to_string(v.size()));
  }
  double* ap = acc.a.data();
  for (std::size_t i = 0; i < u.size(); ++i, ap += acc.cols) {
    const double ui = u[i];
    for (std::size_t j = 0; j < v.size(); ++j) {
      ap[j] += ui * v[j];
    }
  }
}

void add_matvec_transposed(const Matrix& w, std::span<const double> u,
                           std::span<double> out) {
  if (w.rows != u.size() || w.cols != out.size()) {
    throw std::invalid_argument(
        "add_matvec_transposed shape mismatch: W is " +
        std::to_string(w.rows) + "x" + std::to_string(w.cols) +
        ", u has length " + std::to_string(u.size()) + ", out has length " +
        std::to_string(out.size()));
  }
  const double* wp = w.a.data();
  for (std::size_t i = 0; i < w.rows; ++i, wp += w.cols) {
    const double ui = u[i];
    for (std::size_t j = 0; j < w.cols; ++j) {
      out[j] += ui * wp[j];
    }
  }
}

}  // namespace ilstm
