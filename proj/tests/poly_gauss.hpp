#pragma once

// Test oracle: functions q(x) e^{-|x|^2/2} with q a complex polynomial, on
// which x^beta D^alpha acts exactly.

#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "shubin/operator.hpp"

namespace oracle {

using shubin::Complex;
using Exponent = std::vector<unsigned>;
using Poly = std::map<Exponent, Complex>;

inline Poly d_axis(const Poly& q, std::size_t j) {
  // -i (dq/dx_j - x_j q)
  Poly out;
  const Complex mi(0.0, -1.0);
  for (const auto& [e, c] : q) {
    if (e[j] > 0) {
      Exponent d = e;
      d[j] -= 1;
      out[d] += mi * c * static_cast<double>(e[j]);
    }
    Exponent u = e;
    u[j] += 1;
    out[u] -= mi * c;
  }
  return out;
}

inline Poly x_axis(const Poly& q, std::size_t j) {
  Poly out;
  for (const auto& [e, c] : q) {
    Exponent u = e;
    u[j] += 1;
    out[u] += c;
  }
  return out;
}

inline Poly apply(const shubin::ShubinOperator& p, const Poly& q) {
  Poly out;
  for (const auto& [mono, c] : p.terms()) {
    Poly cur = q;
    for (std::size_t j = 0; j < p.dim(); ++j)
      for (unsigned k = 0; k < mono.alpha[j]; ++k) cur = d_axis(cur, j);
    for (std::size_t j = 0; j < p.dim(); ++j)
      for (unsigned k = 0; k < mono.beta[j]; ++k) cur = x_axis(cur, j);
    for (const auto& [e, v] : cur) out[e] += c * v;
  }
  return out;
}

inline double distance(const Poly& a, const Poly& b) {
  double worst = 0.0;
  for (const auto& [e, c] : a) {
    auto it = b.find(e);
    worst = std::max(worst, std::abs(c - (it == b.end() ? Complex{} : it->second)));
  }
  for (const auto& [e, c] : b)
    if (!a.contains(e)) worst = std::max(worst, std::abs(c));
  return worst;
}

inline Complex evaluate(const Poly& q, const std::vector<double>& x) {
  Complex s{};
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  for (const auto& [e, c] : q) {
    double m = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) m *= std::pow(x[j], e[j]);
    s += c * m;
  }
  return s * std::exp(-0.5 * r2);
}

}  // namespace oracle
