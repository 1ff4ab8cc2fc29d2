#include "shubin/operator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "shubin/errors.hpp"

namespace shubin {

unsigned MultiIndex::total() const {
  return std::accumulate(entries_.begin(), entries_.end(), 0u);
}

double MultiIndex::factorial() const {
  double out = 1.0;
  for (unsigned e : entries_) {
    for (unsigned k = 2; k <= e; ++k) out *= static_cast<double>(k);
  }
  return out;
}

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("multi-index dimension mismatch");
  MultiIndex out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] + b[i];
  return out;
}

std::vector<MultiIndex> multi_indices_of_total(std::size_t dim, unsigned total) {
  std::vector<MultiIndex> out;
  if (dim == 0) return out;
  MultiIndex cur(dim);
  // Compositions of `total` into `dim` parts, lexicographically ascending.
  auto rec = [&](auto&& self, std::size_t axis, unsigned remaining) -> void {
    if (axis + 1 == dim) {
      cur[axis] = remaining;
      out.push_back(cur);
      return;
    }
    for (unsigned v = 0; v <= remaining; ++v) {
      cur[axis] = v;
      self(self, axis + 1, remaining - v);
    }
  };
  rec(rec, 0, total);
  return out;
}

namespace {

// Normal-ordered expansion of D^a x^b in one variable as (x power, D power, coeff).
struct OrderedTerm {
  unsigned x_power;
  unsigned d_power;
  Complex coeff;
};

// D^a x^b = (D^{a-1} x^b) D - i b D^{a-1} x^{b-1}, from D x^b = x^b D - i b x^{b-1}.
std::vector<OrderedTerm> reorder_1d(unsigned a, unsigned b) {
  if (a == 0 || b == 0) return {{b, a, Complex(1.0, 0.0)}};
  std::vector<OrderedTerm> out = reorder_1d(a - 1, b);
  for (auto& t : out) ++t.d_power;
  const Complex factor(0.0, -static_cast<double>(b));
  for (auto t : reorder_1d(a - 1, b - 1)) {
    t.coeff *= factor;
    auto it = std::find_if(out.begin(), out.end(), [&](const OrderedTerm& o) {
      return o.x_power == t.x_power && o.d_power == t.d_power;
    });
    if (it == out.end()) {
      out.push_back(t);
    } else {
      it->coeff += t.coeff;
    }
  }
  return out;
}

// Expands x^{beta} (D^{alpha_mid} x^{beta_mid}) D^{alpha} into normal order,
// scaled by c, and accumulates the result into `sink`.
void accumulate_product(const MultiIndex& beta, const MultiIndex& alpha_mid,
                        const MultiIndex& beta_mid, const MultiIndex& alpha, Complex c,
                        ShubinOperator::TermMap& sink) {
  const std::size_t dim = beta.dim();
  std::vector<std::vector<OrderedTerm>> per_axis(dim);
  for (std::size_t j = 0; j < dim; ++j) per_axis[j] = reorder_1d(alpha_mid[j], beta_mid[j]);

  std::vector<std::size_t> pick(dim, 0);
  while (true) {
    Monomial mono{beta, alpha};
    Complex coeff = c;
    for (std::size_t j = 0; j < dim; ++j) {
      const auto& t = per_axis[j][pick[j]];
      mono.beta[j] += t.x_power;
      mono.alpha[j] += t.d_power;
      coeff *= t.coeff;
    }
    sink[mono] += coeff;

    std::size_t j = 0;
    for (; j < dim; ++j) {
      if (++pick[j] < per_axis[j].size()) break;
      pick[j] = 0;
    }
    if (j == dim) break;
  }
}

void prune(ShubinOperator::TermMap& terms) {
  std::erase_if(terms, [](const auto& kv) { return kv.second == Complex(0.0, 0.0); });
}

ShubinOperator from_terms(std::size_t dim, const ShubinOperator::TermMap& terms) {
  ShubinOperator out(dim);
  for (const auto& [mono, c] : terms) out.add_term(mono.beta, mono.alpha, c);
  return out;
}

}  // namespace

ShubinOperator::ShubinOperator(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw InvalidArgument("operator dimension must be positive");
}

ShubinOperator ShubinOperator::identity(std::size_t dim) {
  ShubinOperator p(dim);
  p.add_term(MultiIndex(dim), MultiIndex(dim), 1.0);
  return p;
}

ShubinOperator ShubinOperator::position(std::size_t dim, std::size_t axis) {
  if (axis >= dim) throw InvalidArgument("axis out of range");
  ShubinOperator p(dim);
  p.add_term(MultiIndex::unit(dim, axis), MultiIndex(dim), 1.0);
  return p;
}

ShubinOperator ShubinOperator::derivative(std::size_t dim, std::size_t axis) {
  if (axis >= dim) throw InvalidArgument("axis out of range");
  ShubinOperator p(dim);
  p.add_term(MultiIndex(dim), MultiIndex::unit(dim, axis), 1.0);
  return p;
}

ShubinOperator ShubinOperator::harmonic_oscillator(std::size_t dim) {
  ShubinOperator p(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    p.add_term(MultiIndex(dim), MultiIndex::unit(dim, j, 2), 1.0);
    p.add_term(MultiIndex::unit(dim, j, 2), MultiIndex(dim), 1.0);
  }
  return p;
}

ShubinOperator ShubinOperator::annihilation(std::size_t dim, std::size_t axis) {
  if (axis >= dim) throw InvalidArgument("axis out of range");
  const double s = 1.0 / std::sqrt(2.0);
  ShubinOperator p(dim);
  p.add_term(MultiIndex::unit(dim, axis), MultiIndex(dim), s);
  p.add_term(MultiIndex(dim), MultiIndex::unit(dim, axis), Complex(0.0, s));
  return p;
}

void ShubinOperator::add_term(const MultiIndex& beta, const MultiIndex& alpha, Complex c) {
  if (beta.dim() != dim_ || alpha.dim() != dim_) {
    throw InvalidArgument("term multi-index has dimension " + std::to_string(beta.dim()) + "/" +
                          std::to_string(alpha.dim()) + ", operator has " + std::to_string(dim_));
  }
  if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
    throw InvalidArgument("operator coefficient must be finite");
  }
  Monomial key{beta, alpha};
  auto it = terms_.find(key);
  if (it == terms_.end()) {
    if (c != Complex(0.0, 0.0)) terms_.emplace(std::move(key), c);
  } else {
    it->second += c;
    if (it->second == Complex(0.0, 0.0)) terms_.erase(it);
  }
  refresh_order();
}

Complex ShubinOperator::coefficient(const MultiIndex& beta, const MultiIndex& alpha) const {
  auto it = terms_.find(Monomial{beta, alpha});
  return it == terms_.end() ? Complex(0.0, 0.0) : it->second;
}

ShubinOperator& ShubinOperator::operator+=(const ShubinOperator& rhs) {
  if (rhs.dim_ != dim_) throw InvalidArgument("operator dimension mismatch");
  for (const auto& [mono, c] : rhs.terms_) add_term(mono.beta, mono.alpha, c);
  return *this;
}

ShubinOperator& ShubinOperator::operator-=(const ShubinOperator& rhs) {
  if (rhs.dim_ != dim_) throw InvalidArgument("operator dimension mismatch");
  for (const auto& [mono, c] : rhs.terms_) add_term(mono.beta, mono.alpha, -c);
  return *this;
}

ShubinOperator& ShubinOperator::operator*=(Complex s) {
  for (auto& kv : terms_) kv.second *= s;
  prune(terms_);
  refresh_order();
  return *this;
}

double ShubinOperator::max_abs_coefficient() const {
  double out = 0.0;
  for (const auto& kv : terms_) out = std::max(out, std::abs(kv.second));
  return out;
}

void ShubinOperator::refresh_order() {
  order_ = 0;
  for (const auto& kv : terms_) order_ = std::max(order_, kv.first.order());
}

ShubinOperator operator+(ShubinOperator a, const ShubinOperator& b) { return a += b; }
ShubinOperator operator-(ShubinOperator a, const ShubinOperator& b) { return a -= b; }
ShubinOperator operator*(Complex s, ShubinOperator a) { return a *= s; }

ShubinOperator compose(const ShubinOperator& p, const ShubinOperator& q) {
  if (p.dim() != q.dim()) {
    throw InvalidArgument("compose: dimension mismatch (" + std::to_string(p.dim()) + " vs " +
                          std::to_string(q.dim()) + ")");
  }
  ShubinOperator::TermMap sink;
  for (const auto& [m1, c1] : p.terms()) {
    for (const auto& [m2, c2] : q.terms()) {
      accumulate_product(m1.beta, m1.alpha, m2.beta, m2.alpha, c1 * c2, sink);
    }
  }
  prune(sink);
  return from_terms(p.dim(), sink);
}

ShubinOperator adjoint(const ShubinOperator& p) {
  // (c x^beta D^alpha)^* = conj(c) D^alpha x^beta
  const MultiIndex zero(p.dim());
  ShubinOperator::TermMap sink;
  for (const auto& [mono, c] : p.terms()) {
    accumulate_product(zero, mono.alpha, mono.beta, zero, std::conj(c), sink);
  }
  prune(sink);
  return from_terms(p.dim(), sink);
}

NormalityReport is_normal(const ShubinOperator& p, double tol) {
  const ShubinOperator pstar = adjoint(p);
  const ShubinOperator commutator = compose(p, pstar) - compose(pstar, p);
  NormalityReport rep;
  rep.discrepancy = commutator.max_abs_coefficient();
  rep.normal = rep.discrepancy <= tol;
  return rep;
}

ShubinOperator iterate(const ShubinOperator& p, unsigned k, unsigned cap) {
  if (k > cap) {
    throw ResourceLimit("iterate: power " + std::to_string(k) + " exceeds cap " +
                        std::to_string(cap));
  }
  ShubinOperator out = ShubinOperator::identity(p.dim());
  for (unsigned i = 0; i < k; ++i) out = compose(out, p);
  return out;
}

Complex principal_symbol(const ShubinOperator& p, const std::vector<double>& z) {
  const std::size_t n = p.dim();
  Complex sum(0.0, 0.0);
  for (const auto& [mono, c] : p.terms()) {
    if (mono.order() != p.order()) continue;
    double v = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      v *= std::pow(z[j], mono.beta[j]) * std::pow(z[n + j], mono.alpha[j]);
    }
    sum += c * v;
  }
  return sum;
}

namespace {

// Gradient of |p_m(z)|^2 with respect to z.
std::vector<double> symbol_gradient(const ShubinOperator& p, const std::vector<double>& z) {
  const std::size_t n = p.dim();
  const Complex value = principal_symbol(p, z);
  std::vector<double> grad(2 * n, 0.0);
  for (const auto& [mono, c] : p.terms()) {
    if (mono.order() != p.order()) continue;
    for (std::size_t k = 0; k < 2 * n; ++k) {
      const unsigned power = k < n ? mono.beta[k] : mono.alpha[k - n];
      if (power == 0) continue;
      double v = static_cast<double>(power);
      for (std::size_t j = 0; j < n; ++j) {
        const unsigned bj = mono.beta[j] - (k == j ? 1u : 0u);
        const unsigned aj = mono.alpha[j] - (k == n + j ? 1u : 0u);
        v *= std::pow(z[j], bj) * std::pow(z[n + j], aj);
      }
      grad[k] += 2.0 * (std::conj(value) * c * v).real();
    }
  }
  return grad;
}

double radical_inverse(std::uint64_t index, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double out = 0.0;
  while (index > 0) {
    out += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return out;
}

// splitmix64, used only to derive Cranley-Patterson shifts from the seed.
std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void normalize(std::vector<double>& z) {
  double s = 0.0;
  for (double v : z) s += v * v;
  s = std::sqrt(s);
  for (double& v : z) v /= s;
}

double objective(const ShubinOperator& p, const std::vector<double>& z) {
  return std::norm(principal_symbol(p, z));
}

}  // namespace

EllipticityReport ellipticity_test(const ShubinOperator& p, std::size_t sphere_samples,
                                   std::uint64_t seed, double threshold) {
  if (p.order() == 0) throw InvalidArgument("ellipticity_test needs an operator of order >= 1");
  if (sphere_samples == 0) throw InvalidArgument("ellipticity_test needs at least one sample");
  const std::size_t dims = 2 * p.dim();
  static constexpr std::array<unsigned, 16> primes{2, 3, 5, 7, 11, 13, 17, 19,
                                                   23, 29, 31, 37, 41, 43, 47, 53};
  if (dims > primes.size()) throw InvalidArgument("ellipticity_test supports n <= 8");

  std::uint64_t state = seed;
  std::vector<double> shift(dims);
  for (double& s : shift) s = static_cast<double>(splitmix(state) >> 11) * 0x1.0p-53;

  std::vector<double> best;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<double> z(dims);
  for (std::size_t i = 0; i < sphere_samples; ++i) {
    // Shifted Halton point pushed through Box-Muller pairs, then normalized.
    std::array<double, 16> u{};
    for (std::size_t k = 0; k < dims; ++k) {
      u[k] = std::fmod(radical_inverse(i + 1, primes[k]) + shift[k], 1.0);
    }
    for (std::size_t k = 0; k < dims; k += 2) {
      const double r = std::sqrt(-2.0 * std::log(1.0 - u[k]));
      const double theta = 2.0 * M_PI * u[k + 1];
      z[k] = r * std::cos(theta);
      z[k + 1] = r * std::sin(theta);
    }
    normalize(z);
    const double v = objective(p, z);
    if (v < best_value) {
      best_value = v;
      best = z;
    }
  }

  // Projected gradient descent with step halving (and doubling on success).
  double step = 1.0;
  for (int it = 0; it < 200 && best_value > 0.0; ++it) {
    auto g = symbol_gradient(p, best);
    double radial = 0.0;
    for (std::size_t k = 0; k < dims; ++k) radial += g[k] * best[k];
    double gnorm2 = 0.0;
    for (std::size_t k = 0; k < dims; ++k) {
      g[k] -= radial * best[k];
      gnorm2 += g[k] * g[k];
    }
    if (gnorm2 == 0.0) break;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      std::vector<double> trial(dims);
      for (std::size_t k = 0; k < dims; ++k) trial[k] = best[k] - step * g[k];
      normalize(trial);
      const double v = objective(p, trial);
      if (v < best_value - 1e-4 * step * gnorm2 || (v < best_value && halving > 40)) {
        best = std::move(trial);
        best_value = v;
        accepted = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }

  EllipticityReport rep;
  rep.min_modulus = std::sqrt(best_value);
  rep.argmin = best;
  rep.threshold = threshold;
  rep.elliptic = rep.min_modulus >= threshold;
  return rep;
}

}  // namespace shubin
