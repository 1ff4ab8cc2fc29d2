// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "poly_gauss.hpp"
#include "shubin/analysis.hpp"
#include "shubin/pipeline.hpp"

using namespace shubin;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& what, bool ok, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs a criterion body; any escaping exception marks it failed.
void criterion(int id, const std::string& what, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [ok, detail] = body();
    report(id, what, ok, detail);
  } catch (const std::exception& e) {
    report(id, what, false, std::string("exception: ") + e.what());
  }
}

ShubinOperator anisotropic(double omega2) {
  ShubinOperator p(1);
  p.add_term(MultiIndex{0}, MultiIndex{2}, 1.0);
  p.add_term(MultiIndex{2}, MultiIndex{0}, omega2);
  return p;
}

// Gaussian-integer coefficients keep every symbolic operation exact.
ShubinOperator integer_operator(std::mt19937_64& rng, std::size_t dim, unsigned max_order) {
  std::uniform_int_distribution<int> coef(-3, 3);
  std::uniform_int_distribution<int> coin(0, 2);
  ShubinOperator p(dim);
  for (unsigned s = 0; s <= max_order; ++s)
    for (unsigned a = 0; a <= s; ++a)
      for (const auto& alpha : multi_indices_of_total(dim, a))
        for (const auto& beta : multi_indices_of_total(dim, s - a)) {
          if (coin(rng) == 0) continue;
          p.add_term(beta, alpha, Complex(coef(rng), coef(rng)));
        }
  return p;
}

oracle::Poly integer_poly(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_int_distribution<int> coef(-4, 4);
  oracle::Poly q;
  for (unsigned s = 0; s <= 3; ++s)
    for (const auto& e : multi_indices_of_total(dim, s)) q[e.entries()] = Complex(coef(rng), coef(rng));
  return q;
}

std::span<const Complex> view(const VectorXc& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

int main() {
  criterion(1, "harmonic oscillator spectrum, N = 64", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const BasisTruncation t(1, 64);
    const auto m = operator_matrix(ShubinOperator::harmonic_oscillator(1), t);
    MatrixXc off = m.entries;
    off.diagonal().setZero();
    const bool diagonal = off.cwiseAbs().maxCoeff() == 0.0;
    const auto s = decompose(m, true);
    double err = 0.0;
    for (int j = 0; j < 64; ++j) err = std::max(err, std::abs(s.eigenvalues[j] - Complex(2.0 * j + 1.0)));
    const double secs = seconds_since(t0);
    return std::pair{diagonal && err <= 1e-12 && secs < 1.0,
                     fmt("diagonal=%g max error %.3g, %.3f s", diagonal, err, secs)};
  });

  criterion(2, "anisotropic oscillator D^2 + 4x^2, N = 128, pad 2", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = decompose(operator_matrix(anisotropic(4.0), BasisTruncation(1, 128), 2), true);
    double rel = 0.0;
    for (int k = 0; k < 20; ++k) {
      const double exact = 2.0 * (2 * k + 1);
      rel = std::max(rel, std::abs(s.eigenvalues[k] - exact) / exact);
    }
    const double secs = seconds_since(t0);
    return std::pair{rel <= 1e-6 && secs < 5.0, fmt("max relative error %.3g, %.3f s", rel, secs)};
  });

  criterion(3, "Weyl fit", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto s1 = decompose(operator_matrix(ShubinOperator::harmonic_oscillator(1), BasisTruncation(1, 272)), true);
    const auto f1 = weyl_fit(s1, 2, 1, 20, 200);
    const auto s2 = decompose(operator_matrix(ShubinOperator::harmonic_oscillator(2), BasisTruncation(2, 32)), true);
    const auto f2 = weyl_fit(s2, 2, 2, 20, 32 * 33 / 2);
    const double secs = seconds_since(t0);
    const bool ok = f1.B >= 1.9 && f1.B <= 2.1 && f1.exponent >= 0.98 && f1.exponent <= 1.02 &&
                    f2.exponent >= 0.45 && f2.exponent <= 0.55 && secs < 30.0;
    return std::pair{ok, fmt("1-D B = %.4f exponent %.4f; 2-D exponent %.4f; %.2f s", f1.B, f1.exponent,
                             f2.exponent, secs)};
  });

  criterion(4, "Hermite transform of exp(-x^2/2)", [] {
    const BasisTruncation t(1, 64);
    const auto c = hermite_transform([](std::span<const double> x) { return Complex(std::exp(-0.5 * x[0] * x[0])); },
                                     t, 96);
    const auto s = decompose(operator_matrix(ShubinOperator::harmonic_oscillator(1), t), true);
    const auto a = expand(c, s).a;
    const double err = std::abs(a[0] - std::pow(std::numbers::pi, 0.25));
    double tail = 0.0;
    for (Eigen::Index j = 1; j < a.size(); ++j) tail += std::abs(a[j]);
    return std::pair{err <= 1e-8 && tail <= 1e-8, fmt("|a_1 - pi^(1/4)| = %.3g, tail sum %.3g", err, tail)};
  });

  criterion(5, "decay classifier on exp(-x^2) and a_j = 1, M_p = (p!)^(1/2)", [] {
    const BasisTruncation t(1, 64);
    const auto c = hermite_transform([](std::span<const double> x) { return Complex(std::exp(-x[0] * x[0])); },
                                     t, 96);
    const auto s = decompose(operator_matrix(ShubinOperator::harmonic_oscillator(1), t), true);
    const auto a = expand(c, s).a;
    const auto w = make_gevrey(0.5, 2048);
    const auto grid = default_lambda_grid();
    const auto pos = classify_decay(view(a), w, 1, grid);
    const std::vector<Complex> ones(s.trusted, 1.0);
    const auto neg = classify_decay(ones, w, 1, grid);
    const bool ok = pos.verdict_roumieu && pos.lambda_star >= 0.5 && !neg.verdict_roumieu && !neg.verdict_beurling;
    return std::pair{ok, fmt("exp(-x^2): roumieu=%g lambda_star=%g; ones: roumieu=%g beurling=%g",
                             pos.verdict_roumieu, pos.lambda_star, neg.verdict_roumieu, neg.verdict_beurling)};
  });

  criterion(6, "weight-sequence conditions", [] {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    for (double mu : {0.5, 1.0, 2.0}) {
      const auto r = check_conditions(make_gevrey(mu, 256));
      ok = ok && r.m1_ok && r.m2prime_ok;
    }
    const auto half = check_conditions(make_gevrey(0.5, 256));
    ok = ok && half.assumption_roumieu && !half.assumption_beurling;
    std::vector<double> log_m{0.0, 0.0, std::log(10.0), std::log(10.0)};
    for (int p = 4; p <= 12; ++p) log_m.push_back(log_m.back() + std::log(static_cast<double>(p)));
    const auto planted = check_conditions(WeightSequence(log_m));
    ok = ok && !planted.m1_ok && planted.m1_first_violation == 2;
    const double secs = seconds_since(t0);
    return std::pair{ok && secs < 1.0,
                     fmt("Gevrey 1/2: roumieu=%g beurling=%g; planted violation at p = %g; %.3f s",
                         half.assumption_roumieu, half.assumption_beurling,
                         static_cast<double>(planted.m1_first_violation), secs)};
  });

  criterion(7, "associated-function inequalities, Gevrey 1, m = 2, n = 1", [] {
    const auto w = make_gevrey(1.0, 2048);
    const auto cond = check_conditions(w);
    std::vector<double> grid;
    for (int i = 0; i < 50; ++i) grid.push_back(std::pow(10.0, -0.5 + 2.5 * i / 49.0));
    const auto rows = compare_m_mtilde(w, cond, 2, 1, grid);
    double min_le = std::numeric_limits<double>::infinity();
    double min_k = min_le;
    bool saturated = false;
    for (const auto& r : rows) {
      min_le = std::min(min_le, r.slack_tilde_le_m);
      min_k = std::min(min_k, r.slack_komatsu);
      saturated = saturated || r.saturated;
    }
    return std::pair{rows.size() == 50 && min_le >= 0.0 && min_k >= 0.0 && !saturated,
                     fmt("min slack M - Mtilde %.4g, min Komatsu log slack %.4g over %g points", min_le, min_k,
                         static_cast<double>(rows.size()))};
  });

  criterion(8, "norm-family implication pattern on a 10-function corpus", [] {
    const std::size_t N = 64;
    const BasisTruncation t(1, N);
    const auto w = make_gevrey(0.5, 2048);
    const unsigned m = 2, p_cap = 6, s_cap = 12;
    const std::vector<double> h_grid{0.5, 1.0, 2.0, 4.0, 8.0};
    std::vector<double> half_grid;
    for (double h : h_grid) half_grid.push_back(h / 2.0);
    const auto H = ShubinOperator::harmonic_oscillator(1);
    const auto Pm = iterate_matrix(H, t, p_cap);

    using F = std::function<double(double)>;
    std::vector<F> corpus;
    for (unsigned k : {0u, 1u, 2u, 3u, 5u, 8u})
      corpus.push_back([k](double x) { return hermite_eval(k, x); });
    corpus.push_back([](double x) { return 3.0 * std::exp(-0.5 * x * x); });
    corpus.push_back([](double x) { return std::exp(-x * x); });
    corpus.push_back([](double x) { return -2.0 * x * std::exp(-x * x); });
    corpus.push_back([](double x) { return (1.0 + x * x) * std::exp(-0.5 * x * x); });

    bool pattern = true;
    double worst = -std::numeric_limits<double>::infinity();
    const double bound = std::log(2.0);  // 2^{2n-1}, n = 1
    for (const auto& f : corpus) {
      const auto c = hermite_transform([&f](std::span<const double> x) { return Complex(f(x[0])); }, t, N + 32);
      const auto it = iterate_norms(Pm, c, t, w, m, h_grid, p_cap);
      const auto full = seminorm_family(c, t, w, h_grid, s_cap, m);
      const auto halved = seminorm_family(c, t, w, half_grid, s_cap, m);
      auto finite_somewhere = [](const std::vector<NormEntry>& row) {
        return std::any_of(row.begin(), row.end(),
                           [](const NormEntry& e) { return std::isfinite(e.log_value) && !e.saturated; });
      };
      pattern = pattern && finite_somewhere(it.iterate) == finite_somewhere(full.sobolev) &&
                finite_somewhere(it.iterate);
      for (std::size_t i = 0; i < h_grid.size(); ++i)
        worst = std::max(worst, full.sobolev[i].log_value - bound - halved.ultra[i].log_value);
    }
    return std::pair{pattern && worst <= 0.0,
                     fmt("pattern=%g, max log(||f||'_h / (2 ||f||_{h/2})) = %.4g", pattern, worst)};
  });

  criterion(9, "eigenfunction bound witness, |alpha|+|beta| <= 4, j <= 100", [] {
    const auto s = decompose(operator_matrix(ShubinOperator::harmonic_oscillator(1), BasisTruncation(1, 140)), true);
    const auto fit = weyl_fit(s, 2, 1, 20, 100);
    const auto wit = eigen_bound_fit(s, fit, 4, 100);
    const double lo = wit.running_max[9];
    const double hi = wit.running_max[99];
    const double spread = (hi - lo) / hi;
    return std::pair{std::isfinite(wit.witness) && spread <= 0.10,
                     fmt("ell = %.6g, variation over j in [10, 100] %.3g", wit.witness, spread)};
  });

  criterion(10, "eigen-division solve with a_j = exp(-j)", [] {
    const auto s = decompose(operator_matrix(ShubinOperator::harmonic_oscillator(1), BasisTruncation(1, 64)), true);
    ExpansionCoefficients f;
    f.a.resize(static_cast<Eigen::Index>(s.trusted));
    for (Eigen::Index j = 0; j < f.a.size(); ++j) f.a[j] = std::exp(-static_cast<double>(j + 1));
    const auto u = solve_eigen_division(s, f, KernelPolicy::Reject);
    const auto w = make_gevrey(0.5, 2048);
    const auto grid = default_lambda_grid();
    const auto cf = classify_decay(view(f.a), w, 1, grid);
    const auto cu = classify_decay(view(u.u.a), w, 1, grid);
    bool same = cf.verdict_roumieu == cu.verdict_roumieu && cf.verdict_beurling == cu.verdict_beurling;
    for (std::size_t i = 0; i < grid.size(); ++i) same = same && cf.rows[i].pass == cu.rows[i].pass;
    double err = 0.0;
    for (Eigen::Index j = 0; j < f.a.size(); ++j)
      err = std::max(err, std::abs(u.u.a[j] * s.eigenvalues[j] - f.a[j]) / std::abs(f.a[j]));
    return std::pair{same && err <= 1e-10,
                     fmt("same classification=%g, max relative re-multiplication error %.3g", same, err)};
  });

  criterion(11, "symbolic calculus", [] {
    std::mt19937_64 rng(2024);
    bool exact = true;
    for (std::size_t dim : {1u, 2u}) {
      for (int trial = 0; trial < 20; ++trial) {
        const auto p = integer_operator(rng, dim, 2);
        const auto q = integer_operator(rng, dim, 2);
        exact = exact && adjoint(adjoint(p)) == p;
        exact = exact && adjoint(compose(p, q)) == compose(adjoint(q), adjoint(p));
        const auto f = integer_poly(rng, dim);
        exact = exact && oracle::distance(oracle::apply(compose(p, q), f),
                                          oracle::apply(p, oracle::apply(q, f))) == 0.0;
      }
    }
    const auto ho = is_normal(ShubinOperator::harmonic_oscillator(1));
    const auto ann = is_normal(ShubinOperator::annihilation(1, 0), 1e-12);
    // 1/sqrt(2) is not a double, so the computed discrepancy is 1 to within a few ulps.
    const double ulps = std::abs(ann.discrepancy - 1.0) / std::numeric_limits<double>::epsilon();
    ShubinOperator raw(1);
    raw.add_term(MultiIndex{1}, MultiIndex{0}, 1.0);
    raw.add_term(MultiIndex{0}, MultiIndex{1}, Complex(0.0, 1.0));
    const auto unscaled = is_normal(raw);
    const bool ok = exact && ho.normal && ho.discrepancy == 0.0 && !ann.normal && ulps <= 4.0 &&
                    unscaled.discrepancy == 2.0;
    char detail[256];
    std::snprintf(detail, sizeof detail,
                  "exact=%d, oscillator discrepancy %.17g, annihilation discrepancy %.17g (%.0f ulp from 1), "
                  "x + iD discrepancy %.17g",
                  exact, ho.discrepancy, ann.discrepancy, ulps, unscaled.discrepancy);
    return std::pair{ok, std::string(detail)};
  });

  criterion(12, "determinism of the bundled job", [] {
    const fs::path job_file = fs::path(SHUBIN_JOBS_DIR) / "ho1d_gevrey_half.json";
    const auto root = fs::temp_directory_path() / "shubin_acceptance";
    fs::remove_all(root);
    std::vector<std::string> reports;
    for (const char* name : {"a", "b"}) {
      auto job = load_job(job_file);
      job.output_dir = root / name;
      const auto r = run_job(job);
      if (r.status != RunStatus::Ok) return std::pair{false, "run failed: " + r.message};
      reports.push_back(read_file(root / name / "report.json"));
    }
    const bool same = reports[0] == reports[1];
    return std::pair{same, fmt("report.json identical=%g (%g bytes)", same, static_cast<double>(reports[0].size()))};
  });

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
