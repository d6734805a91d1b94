#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace ilstm {

using Vector = std::vector<double>;

// Dense row-major matrix. The only shapes used are the ones the models need,
// so there is no broadcasting or view machinery here.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), a(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return a[i * cols + j];
  }

  std::span<double> row(std::size_t i) { return {a.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const {
    return {a.data() + i * cols, cols};
  }

  std::size_t size() const { return a.size(); }
};

// Class index plus its dense one-hot form on demand.
struct ClassTarget {
  std::size_t index = 0;

  Vector one_hot(std::size_t classes) const;
};

// Discrete distribution over classes: entries in [0,1], sum 1 within 1e-9.
// Constructed by softmax (or explicitly, which validates).
class ProbVector {
 public:
  explicit ProbVector(Vector p);

  const Vector& values() const { return p_; }
  double operator[](std::size_t i) const { return p_[i]; }
  std::size_t size() const { return p_.size(); }

 private:
  Vector p_;
};

// Seedable generator with a fully specified stream: every derived quantity
// (uniform doubles, indices, shuffles) is computed from raw mt19937_64 words
// by our own arithmetic, so identical seeds give identical results on any
// platform. Single-owner; use one Rng per worker.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; consumes two uniforms per call.
  double normal();

  // [0, n), n >= 1.
  std::size_t index(std::size_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  // Stateless child-seed derivation (splitmix64 of master + stream).
  static std::uint64_t derive(std::uint64_t master, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

// Elementwise logistic sigmoid, overflow-safe at any finite input.
Vector sigmoid(const Vector& x);

// Elementwise tanh.
Vector tanh_act(const Vector& x);

// W * v + b. Throws on dimension mismatch, naming both shapes.
Vector affine(const Matrix& w, std::span<const double> v, const Vector& b);

// Max-shifted softmax.
ProbVector softmax(const Vector& z);

// -log p[target]; probabilities floored at 1e-12 so the result is never NaN.
double cross_entropy(const ClassTarget& target, const ProbVector& p);

// Central-difference gradient of f at params. Oracle for BPTT verification;
// never used on any production path.
Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& params, double eps);

bool all_finite(std::span<const double> xs);

// Index of the largest entry; ties break to the lowest index.
std::size_t argmax(std::span<const double> xs);

// acc += u * v^T  (outer product accumulate; shapes must match acc).
void add_outer(Matrix& acc, std::span<const double> u,
               std::span<const double> v);

// out += W^T * u.
void add_matvec_transposed(const Matrix& w, std::span<const double> u,
                           std::span<double> out);

}  // namespace ilstm
