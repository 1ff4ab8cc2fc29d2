#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "poly_gauss.hpp"
#include "shubin/errors.hpp"
#include "shubin/operator.hpp"

using namespace shubin;

namespace {

const Complex I(0.0, 1.0);

ShubinOperator random_operator(std::mt19937_64& rng, std::size_t dim, unsigned max_order) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 2);
  ShubinOperator p(dim);
  for (unsigned s = 0; s <= max_order; ++s) {
    for (unsigned a = 0; a <= s; ++a) {
      for (const auto& alpha : multi_indices_of_total(dim, a)) {
        for (const auto& beta : multi_indices_of_total(dim, s - a)) {
          if (coin(rng) == 0) continue;
          p.add_term(beta, alpha, Complex(coef(rng), coef(rng)));
        }
      }
    }
  }
  return p;
}

double max_diff(const ShubinOperator& a, const ShubinOperator& b) {
  return (a - b).max_abs_coefficient();
}

oracle::Poly gaussian_seed(std::size_t dim) {
  oracle::Poly q;
  q[oracle::Exponent(dim, 0)] = 1.0;
  return q;
}

oracle::Poly test_poly(std::size_t dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  oracle::Poly q;
  for (unsigned s = 0; s <= 3; ++s)
    for (const auto& e : multi_indices_of_total(dim, s)) q[e.entries()] = Complex(coef(rng), coef(rng));
  return q;
}

}  // namespace

TEST_CASE("multi-index helpers") {
  const MultiIndex a{1, 2};
  CHECK(a.total() == 3);
  CHECK(a.factorial() == 2.0);
  CHECK((a + MultiIndex{2, 0}) == MultiIndex{3, 2});
  const auto all = multi_indices_of_total(2, 2);
  REQUIRE(all.size() == 3);
  CHECK(all[0] == MultiIndex{0, 2});
  CHECK(all[2] == MultiIndex{2, 0});
  CHECK(multi_indices_of_total(3, 4).size() == 15);
}

TEST_CASE("canonical form prunes zeros and tracks order") {
  ShubinOperator p(1);
  p.add_term(MultiIndex{2}, MultiIndex{1}, 1.0);
  p.add_term(MultiIndex{0}, MultiIndex{1}, 2.0);
  CHECK(p.order() == 3);
  p.add_term(MultiIndex{2}, MultiIndex{1}, -1.0);
  CHECK(p.terms().size() == 1);
  CHECK(p.order() == 1);
  p.add_term(MultiIndex{0}, MultiIndex{1}, -2.0);
  CHECK(p.empty());
  CHECK(p.order() == 0);
}

TEST_CASE("compose normal-orders D x") {
  const auto X = ShubinOperator::position(1, 0);
  const auto D = ShubinOperator::derivative(1, 0);
  const auto dx = compose(D, X);
  CHECK(dx.terms().size() == 2);
  CHECK(dx.coefficient(MultiIndex{1}, MultiIndex{1}) == Complex(1.0, 0.0));
  CHECK(dx.coefficient(MultiIndex{0}, MultiIndex{0}) == Complex(0.0, -1.0));

  const auto xd = compose(X, D);
  CHECK(xd.terms().size() == 1);
  CHECK(xd.coefficient(MultiIndex{1}, MultiIndex{1}) == Complex(1.0, 0.0));

  CHECK_THROWS_AS(compose(X, ShubinOperator::position(2, 0)), InvalidArgument);

  // Oracle on 1, x, x^2 times the Gaussian.
  for (unsigned k = 0; k <= 2; ++k) {
    oracle::Poly q;
    q[{k}] = 1.0;
    CHECK(oracle::distance(oracle::apply(dx, q), oracle::apply(D, oracle::apply(X, q))) < 1e-14);
  }
}

TEST_CASE("compose(H, H) acts as H twice, and H^2 h_0 = h_0") {
  const auto H = ShubinOperator::harmonic_oscillator(1);
  const auto H2 = compose(H, H);
  CHECK(H2.order() == 4);
  CHECK(H2.coefficient(MultiIndex{0}, MultiIndex{4}) == Complex(1.0));
  CHECK(H2.coefficient(MultiIndex{4}, MultiIndex{0}) == Complex(1.0));
  CHECK(H2.coefficient(MultiIndex{2}, MultiIndex{2}) == Complex(2.0));

  const auto h0 = gaussian_seed(1);
  const auto out = oracle::apply(H2, h0);
  CHECK(oracle::distance(out, h0) < 1e-13);
  CHECK(oracle::distance(oracle::apply(iterate(H, 2), h0), h0) < 1e-13);

  // Pointwise against the closed form at sample points.
  const double c0 = std::pow(std::numbers::pi, -0.25);
  for (double x : {-2.0, -0.5, 0.0, 0.7, 1.9}) {
    const Complex v = c0 * oracle::evaluate(out, {x});
    CHECK(std::abs(v - c0 * std::exp(-0.5 * x * x)) < 1e-13);
  }
}

TEST_CASE("compose matches sequential application on random operators") {
  std::mt19937_64 rng(11);
  for (std::size_t dim : {1u, 2u}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = random_operator(rng, dim, 2);
      const auto q = random_operator(rng, dim, 2);
      const auto f = test_poly(dim, rng);
      const auto pq = compose(p, q);
      CHECK(pq.order() <= p.order() + q.order());
      CHECK(oracle::distance(oracle::apply(pq, f), oracle::apply(p, oracle::apply(q, f))) < 1e-11);
    }
  }
}

TEST_CASE("compose is associative") {
  std::mt19937_64 rng(3);
  for (std::size_t dim : {1u, 2u}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = random_operator(rng, dim, 2);
      const auto q = random_operator(rng, dim, 2);
      const auto r = random_operator(rng, dim, 2);
      CHECK(max_diff(compose(compose(p, q), r), compose(p, compose(q, r))) <= 1e-12);
    }
  }
}

TEST_CASE("adjoint examples") {
  const auto a = ShubinOperator::annihilation(1, 0);
  const auto as = adjoint(a);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(as.coefficient(MultiIndex{1}, MultiIndex{0}) == Complex(s));
  CHECK(as.coefficient(MultiIndex{0}, MultiIndex{1}) == Complex(0.0, -s));
  CHECK(as.terms().size() == 2);

  const auto H = ShubinOperator::harmonic_oscillator(2);
  CHECK(adjoint(H) == H);

  const auto iD = Complex(0.0, 1.0) * ShubinOperator::derivative(1, 0);
  const auto iDs = adjoint(iD);
  CHECK(iDs.coefficient(MultiIndex{0}, MultiIndex{1}) == Complex(0.0, -1.0));
}

TEST_CASE("adjoint satisfies integration by parts on Gaussians") {
  // (P f, g) = (f, P* g) with f, g polynomial times Gaussian, by quadrature
  // in 1-D: all integrands are polynomial times e^{-x^2}, so 40 Gauss-Hermite
  // style trapezoid samples on a wide grid suffice.
  std::mt19937_64 rng(5);
  auto inner = [](const oracle::Poly& u, const oracle::Poly& v) {
    Complex s{};
    const double h = 0.01;
    for (int i = -1200; i <= 1200; ++i) {
      const double x = i * h;
      s += oracle::evaluate(u, {x}) * std::conj(oracle::evaluate(v, {x})) * h;
    }
    return s;
  };
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_operator(rng, 1, 2);
    const auto f = test_poly(1, rng);
    const auto g = test_poly(1, rng);
    const Complex lhs = inner(oracle::apply(p, f), g);
    const Complex rhs = inner(f, oracle::apply(adjoint(p), g));
    CHECK(std::abs(lhs - rhs) < 1e-9 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("adjoint is an involutive anti-homomorphism") {
  std::mt19937_64 rng(17);
  for (std::size_t dim : {1u, 2u}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = random_operator(rng, dim, 2);
      const auto q = random_operator(rng, dim, 2);
      CHECK(max_diff(adjoint(adjoint(p)), p) <= 1e-15);
      CHECK(max_diff(adjoint(compose(p, q)), compose(adjoint(q), adjoint(p))) <= 1e-12);
    }
  }
}

TEST_CASE("adjoint laws hold exactly for integer coefficients") {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<int> coef(-3, 3);
  auto integer_op = [&](std::size_t dim) {
    ShubinOperator p(dim);
    for (unsigned s = 0; s <= 2; ++s)
      for (unsigned a = 0; a <= s; ++a)
        for (const auto& alpha : multi_indices_of_total(dim, a))
          for (const auto& beta : multi_indices_of_total(dim, s - a))
            p.add_term(beta, alpha, Complex(coef(rng), coef(rng)));
    return p;
  };
  for (std::size_t dim : {1u, 2u}) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto p = integer_op(dim);
      const auto q = integer_op(dim);
      CHECK(adjoint(adjoint(p)) == p);
      CHECK(adjoint(compose(p, q)) == compose(adjoint(q), adjoint(p)));
    }
  }
}

TEST_CASE("normality") {
  const auto H = ShubinOperator::harmonic_oscillator(1);
  const auto rh = is_normal(H);
  CHECK(rh.normal);
  CHECK(rh.discrepancy == 0.0);

  const auto D = ShubinOperator::derivative(1, 0);
  CHECK(is_normal(D).normal);
  CHECK(is_normal(D).discrepancy == 0.0);

  const auto ra = is_normal(ShubinOperator::annihilation(1, 0), 1e-12);
  CHECK_FALSE(ra.normal);
  CHECK(ra.discrepancy == doctest::Approx(1.0).epsilon(1e-15));

  // Unnormalized x + iD: [a, a*] = 2 exactly.
  ShubinOperator b(1);
  b.add_term(MultiIndex{1}, MultiIndex{0}, 1.0);
  b.add_term(MultiIndex{0}, MultiIndex{1}, I);
  CHECK(is_normal(b).discrepancy == 2.0);
}

TEST_CASE("iterate") {
  const auto H = ShubinOperator::harmonic_oscillator(1);
  CHECK(iterate(H, 0) == ShubinOperator::identity(1));
  CHECK(iterate(H, 1) == H);

  const auto D3 = iterate(ShubinOperator::derivative(1, 0), 3);
  CHECK(D3.terms().size() == 1);
  CHECK(D3.coefficient(MultiIndex{0}, MultiIndex{3}) == Complex(1.0));

  CHECK_THROWS_AS(iterate(H, 17), ResourceLimit);
  CHECK_NOTHROW(iterate(H, 3, 4));

  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_operator(rng, 1, 2);
    for (unsigned j = 0; j <= 2; ++j)
      for (unsigned k = 0; k <= 2; ++k)
        CHECK(max_diff(iterate(p, j + k), compose(iterate(p, j), iterate(p, k))) <=
              1e-12 * (1.0 + iterate(p, j + k).max_abs_coefficient()));
  }
  // Exact for integer coefficients.
  const auto H2 = ShubinOperator::harmonic_oscillator(2);
  CHECK(iterate(H2, 3) == compose(iterate(H2, 1), iterate(H2, 2)));
}

TEST_CASE("principal symbol and ellipticity") {
  const auto H = ShubinOperator::harmonic_oscillator(1);
  CHECK(principal_symbol(H, {0.6, 0.8}) == Complex(1.0));

  for (std::size_t samples : {64u, 128u, 1000u}) {
    const auto r = ellipticity_test(H, samples);
    CHECK(r.elliptic);
    CHECK(r.min_modulus == doctest::Approx(1.0).epsilon(1e-9));
  }

  ShubinOperator d2(1);
  d2.add_term(MultiIndex{0}, MultiIndex{2}, 1.0);
  const auto rd = ellipticity_test(d2, 256);
  CHECK_FALSE(rd.elliptic);
  CHECK(rd.min_modulus < 1e-9);
  REQUIRE(rd.argmin.size() == 2);
  CHECK(std::abs(rd.argmin[0]) == doctest::Approx(1.0).epsilon(1e-6));

  ShubinOperator b(1);
  b.add_term(MultiIndex{1}, MultiIndex{0}, 1.0);
  b.add_term(MultiIndex{0}, MultiIndex{1}, I);
  const auto rb = ellipticity_test(b, 128);
  CHECK(rb.elliptic);
  CHECK(rb.min_modulus == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(ellipticity_test(ShubinOperator::identity(1), 64), InvalidArgument);

  const auto H3 = ShubinOperator::harmonic_oscillator(3);
  const auto r3 = ellipticity_test(H3, 256, 9);
  CHECK(r3.min_modulus == doctest::Approx(1.0).epsilon(1e-9));
  const auto again = ellipticity_test(H3, 256, 9);
  CHECK(again.argmin == r3.argmin);
}
