#pragma once

#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

namespace shubin {

using Complex = std::complex<double>;

/// Multi-index in N_0^n.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t dim) : entries_(dim, 0) {}
  MultiIndex(std::initializer_list<unsigned> entries) : entries_(entries) {}
  explicit MultiIndex(std::vector<unsigned> entries) : entries_(std::move(entries)) {}

  static MultiIndex unit(std::size_t dim, std::size_t axis, unsigned power = 1) {
    MultiIndex m(dim);
    m.entries_[axis] = power;
    return m;
  }

  std::size_t dim() const { return entries_.size(); }
  unsigned operator[](std::size_t i) const { return entries_[i]; }
  unsigned& operator[](std::size_t i) { return entries_[i]; }
  unsigned total() const;
  const std::vector<unsigned>& entries() const { return entries_; }

  /// prod_i entries_i!
  double factorial() const;

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

 private:
  std::vector<unsigned> entries_;
};

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b);

/// Every multi-index of the given dimension with |mu| == total, lexicographic.
std::vector<MultiIndex> multi_indices_of_total(std::size_t dim, unsigned total);

/// Key for the monomial x^beta D^alpha.
struct Monomial {
  MultiIndex beta;
  MultiIndex alpha;
  unsigned order() const { return beta.total() + alpha.total(); }
  auto operator<=>(const Monomial&) const = default;
  bool operator==(const Monomial&) const = default;
};

/// P = sum c_{alpha beta} x^beta D^alpha with D = -i d/dx, kept in normal
/// order (multiplications left of derivatives) with no zero coefficients.
class ShubinOperator {
 public:
  using TermMap = std::map<Monomial, Complex>;

  explicit ShubinOperator(std::size_t dim);

  static ShubinOperator identity(std::size_t dim);
  static ShubinOperator position(std::size_t dim, std::size_t axis);
  static ShubinOperator derivative(std::size_t dim, std::size_t axis);
  /// -Delta + |x|^2 = sum_j D_j^2 + x_j^2
  static ShubinOperator harmonic_oscillator(std::size_t dim);
  /// (x_j + i D_j) / sqrt(2)
  static ShubinOperator annihilation(std::size_t dim, std::size_t axis);

  /// Accumulates c into the coefficient of x^beta D^alpha, pruning exact zeros.
  void add_term(const MultiIndex& beta, const MultiIndex& alpha, Complex c);

  std::size_t dim() const { return dim_; }
  unsigned order() const { return order_; }
  const TermMap& terms() const { return terms_; }
  Complex coefficient(const MultiIndex& beta, const MultiIndex& alpha) const;
  bool empty() const { return terms_.empty(); }

  ShubinOperator& operator+=(const ShubinOperator& rhs);
  ShubinOperator& operator-=(const ShubinOperator& rhs);
  ShubinOperator& operator*=(Complex s);

  bool operator==(const ShubinOperator& rhs) const {
    return dim_ == rhs.dim_ && terms_ == rhs.terms_;
  }

  /// Largest coefficient modulus, 0 for the zero operator.
  double max_abs_coefficient() const;

 private:
  void refresh_order();

  std::size_t dim_;
  unsigned order_ = 0;
  TermMap terms_;
};

ShubinOperator operator+(ShubinOperator a, const ShubinOperator& b);
ShubinOperator operator-(ShubinOperator a, const ShubinOperator& b);
ShubinOperator operator*(Complex s, ShubinOperator a);

/// f -> p(q(f)) in normal order. Throws InvalidArgument on dimension mismatch.
ShubinOperator compose(const ShubinOperator& p, const ShubinOperator& q);

/// Formal L^2 adjoint.
ShubinOperator adjoint(const ShubinOperator& p);

struct NormalityReport {
  bool normal = false;
  double discrepancy = 0.0;  // max |coefficient| of P P* - P* P
};

NormalityReport is_normal(const ShubinOperator& p, double tol = 0.0);

/// Hard cap on iterate(), since term counts grow combinatorially.
inline constexpr unsigned kDefaultIterateCap = 16;

/// P^k by repeated composition; P^0 is the identity.
ShubinOperator iterate(const ShubinOperator& p, unsigned k, unsigned cap = kDefaultIterateCap);

/// Principal symbol sum_{|alpha|+|beta|=m} c x^beta xi^alpha at z = (x, xi).
Complex principal_symbol(const ShubinOperator& p, const std::vector<double>& z);

struct EllipticityReport {
  bool elliptic = false;
  double min_modulus = 0.0;
  std::vector<double> argmin;  // point (x, xi) on the unit sphere of R^{2n}
  double threshold = 1e-9;
};

/// Minimizes |p_m| over the unit sphere in R^{2n}: shifted Halton sampling
/// followed by projected gradient descent on |p_m|^2 from the best sample.
/// Throws InvalidArgument for order-0 operators.
EllipticityReport ellipticity_test(const ShubinOperator& p, std::size_t sphere_samples,
                                   std::uint64_t seed = 0, double threshold = 1e-9);

}  // namespace shubin
