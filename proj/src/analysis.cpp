#include "shubin/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "shubin/errors.hpp"

namespace shubin {

namespace {

using Index = Eigen::Index;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_abs(Complex z) {
  const double mag = std::abs(z);
  return mag == 0.0 ? kNegInf : std::log(mag);
}

std::size_t tail_start(std::size_t size) { return size - std::max<std::size_t>(1, size / 4); }

double root_scale(std::size_t j, std::size_t n) {
  return std::pow(static_cast<double>(j), 1.0 / (2.0 * static_cast<double>(n)));
}

}  // namespace

ExpansionCoefficients expand(const VectorXc& f_coeffs, const SpectralDecomposition& s,
                             std::string source) {
  if (f_coeffs.size() != s.vectors.rows()) {
    throw InvalidArgument("expand: coefficient vector has length " +
                          std::to_string(f_coeffs.size()) + ", basis has " +
                          std::to_string(s.vectors.rows()));
  }
  const Index J = static_cast<Index>(s.trusted);
  ExpansionCoefficients out;
  // (f, u_j) = u_j^* f
  out.a = s.vectors.leftCols(J).adjoint() * f_coeffs;
  out.source = std::move(source);
  return out;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int k = -4; k <= 4; ++k) grid.push_back(std::ldexp(1.0, k));
  return grid;
}

DecayFit classify_decay(std::span<const Complex> a, const WeightSequence& w, std::size_t n,
                        std::span<const double> lambda_grid, double rel_floor) {
  if (n == 0) throw InvalidArgument("classify_decay needs n >= 1");
  if (!(rel_floor >= 0.0)) throw InvalidArgument("classify_decay needs rel_floor >= 0");
  DecayFit fit;
  fit.j_count = a.size();
  double largest = 0.0;
  for (const auto& v : a) largest = std::max(largest, std::abs(v));
  const double floor = rel_floor * largest;
  std::size_t J = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i]) > floor) J = i + 1;
  fit.j_resolved = J;
  const std::size_t tail = J == 0 ? 0 : tail_start(J);
  const AssociatedFunction assoc(w);

  const bool finitely_supported = J <= 1;

  double running = kNegInf;
  bool any_pass = false;
  bool all_pass = !lambda_grid.empty();
  for (double lambda : lambda_grid) {
    if (!(lambda > 0.0)) throw InvalidArgument("lambda grid entries must be positive");
    DecayRow row;
    row.lambda = lambda;
    row.log_sup = kNegInf;
    row.log_head = kNegInf;
    row.log_tail = kNegInf;
    bool tail_saturated = false;
    for (std::size_t i = 0; i < J; ++i) {
      if (!(std::abs(a[i]) > floor)) continue;
      const double la = log_abs(a[i]);
      const auto m = assoc.evaluate(lambda * root_scale(i + 1, n));
      if (m.saturated) {
        ++row.saturated;
        tail_saturated = tail_saturated || i >= tail;
        continue;
      }
      const double v = la + m.value;
      if (v > row.log_sup) {
        row.log_sup = v;
        row.argmax_j = i + 1;
      }
      double& slot = i < tail ? row.log_head : row.log_tail;
      slot = std::max(slot, v);
    }
    row.pass = finitely_supported || (!tail_saturated && row.log_head > kNegInf &&
                            row.log_tail < row.log_head);
    running = std::max(running, row.log_sup);
    row.log_sup_monotone = running;
    if (row.pass) {
      any_pass = true;
      fit.lambda_star = lambda;
      fit.log_c_star = row.log_sup;
    } else {
      all_pass = false;
    }
    fit.rows.push_back(row);
  }
  fit.verdict_roumieu = any_pass;
  fit.verdict_beurling = any_pass && all_pass;
  return fit;
}

OperatorMatrix iterate_matrix(const ShubinOperator& p, const BasisTruncation& trunc,
                              unsigned p_cap) {
  const BasisTruncation wide = trunc.padded(static_cast<std::size_t>(p_cap) * p.order());
  return operator_matrix(p, wide);
}

NormTable iterate_norms(const OperatorMatrix& p_mat, const VectorXc& f,
                        const BasisTruncation& trunc, const WeightSequence& w, unsigned m,
                        std::span<const double> h_grid, unsigned p_cap) {
  if (m == 0) throw InvalidArgument("iterate_norms needs m >= 1");
  if (static_cast<std::size_t>(p_cap) * m > w.p_max()) {
    throw InvalidArgument("iterate_norms: p_cap * m = " + std::to_string(p_cap * m) +
                          " exceeds weight p_max " + std::to_string(w.p_max()));
  }
  const std::size_t needed = trunc.per_axis() + static_cast<std::size_t>(p_cap) * p_mat.order;
  if (p_mat.trunc.dim() != trunc.dim() || p_mat.trunc.per_axis() < needed) {
    throw InvalidArgument("iterate_norms: operator matrix needs per-axis size >= " +
                          std::to_string(needed) + " for " + std::to_string(p_cap) +
                          " applications, has " + std::to_string(p_mat.trunc.per_axis()));
  }
  NormTable table;
  table.h_grid.assign(h_grid.begin(), h_grid.end());
  VectorXc v = embed(f, trunc, p_mat.trunc);
  table.iterate_l2.push_back(v.norm());
  for (unsigned p = 1; p <= p_cap; ++p) {
    v = p_mat.entries * v;
    table.iterate_l2.push_back(v.norm());
  }
  for (double h : h_grid) {
    if (!(h > 0.0)) throw InvalidArgument("h grid entries must be positive");
    NormEntry e;
    e.h = h;
    e.log_value = kNegInf;
    for (unsigned p = 0; p <= p_cap; ++p) {
      const double mp = static_cast<double>(p) * m;
      const double val = std::log(table.iterate_l2[p]) - mp * std::log(h) - w.log_m(p * m);
      if (val > e.log_value) {
        e.log_value = val;
        e.argmax = p;
      }
    }
    e.saturated = p_cap > 0 && e.argmax == p_cap;
    table.iterate.push_back(e);
  }
  return table;
}

NormTable seminorm_family(const VectorXc& f, const BasisTruncation& trunc,
                          const WeightSequence& w, std::span<const double> h_grid,
                          unsigned s_cap, unsigned m) {
  if (m == 0) throw InvalidArgument("seminorm_family needs m >= 1");
  if (s_cap > w.p_max()) {
    throw InvalidArgument("seminorm_family: s_cap exceeds weight p_max");
  }
  NormTable table;
  table.h_grid.assign(h_grid.begin(), h_grid.end());
  for (unsigned s = 0; s <= s_cap; ++s) {
    const auto level = seminorm_level(f, s, trunc);
    table.level_sum.push_back(level.sum);
    table.level_max.push_back(level.max);
  }
  const unsigned last_multiple = (s_cap / m) * m;
  for (double h : h_grid) {
    if (!(h > 0.0)) throw InvalidArgument("h grid entries must be positive");
    NormEntry ultra{h, kNegInf, 0, false};
    for (unsigned s = 0; s <= s_cap; ++s) {
      const double val = std::log(table.level_max[s]) - s * std::log(h) - w.log_m(s);
      if (val > ultra.log_value) {
        ultra.log_value = val;
        ultra.argmax = s;
      }
    }
    ultra.saturated = s_cap > 0 && ultra.argmax == s_cap;
    table.ultra.push_back(ultra);

    NormEntry prime{h, kNegInf, 0, false};
    for (unsigned s = 0; s <= s_cap; s += m) {
      const double val = std::log(table.level_sum[s]) - s * std::log(h) - w.log_m(s);
      if (val > prime.log_value) {
        prime.log_value = val;
        prime.argmax = s;
      }
    }
    prime.saturated = last_multiple > 0 && prime.argmax == last_multiple;
    table.sobolev.push_back(prime);
  }
  return table;
}

InterpolationReport interpolation_check(const VectorXc& f, const BasisTruncation& trunc,
                                        unsigned m, std::span<const double> c_grid,
                                        unsigned p_max) {
  if (m < 2) throw InvalidArgument("interpolation_check needs m >= 2 (0 < j < m)");
  const unsigned top = (p_max + 1) * m;
  std::vector<double> level(top + 1);
  for (unsigned s = 0; s <= top; ++s) level[s] = sobolev_seminorm(f, s, trunc);
  const double l2 = f.norm();

  InterpolationReport rep;
  rep.c_grid.assign(c_grid.begin(), c_grid.end());
  for (double c : c_grid) {
    bool ok = true;
    double worst = 0.0;
    for (unsigned p = 0; p <= p_max; ++p) {
      for (unsigned j = 1; j < m; ++j) {
        const unsigned s = p * m + j;
        const double factorial_term =
            std::exp(s * std::log(c) + 0.5 * std::lgamma(static_cast<double>(s) + 1.0)) * l2;
        const double rhs = level[p * m] + c * level[(p + 1) * m] + factorial_term;
        const double lhs = level[s];
        if (lhs > rhs) ok = false;
        if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
      }
    }
    rep.holds.push_back(ok);
    if (ok && (rep.least_passing < 0.0 || c < rep.least_passing)) {
      rep.least_passing = c;
      rep.worst_ratio = worst;
    }
  }
  return rep;
}

DivisionResult solve_eigen_division(const SpectralDecomposition& s, const ExpansionCoefficients& f,
                                    KernelPolicy policy, double tol) {
  const Index J = f.a.size();
  if (J > s.eigenvalues.size()) {
    throw InvalidArgument("solve_eigen_division: more coefficients than eigenvalues");
  }
  const double lambda_floor = tol * std::max(1.0, s.matrix_norm);
  const double a_floor = tol * (J > 0 ? f.a.cwiseAbs().maxCoeff() : 0.0);
  DivisionResult out;
  out.u.a = VectorXc::Zero(J);
  out.u.source = f.source.empty() ? "division" : f.source + "/division";
  for (Index j = 0; j < J; ++j) {
    const Complex lambda = s.eigenvalues(j);
    if (std::abs(lambda) <= lambda_floor) {
      out.kernel.push_back(static_cast<std::size_t>(j) + 1);
      if (std::abs(f.a(j)) > a_floor) {
        if (policy == KernelPolicy::Reject) {
          throw Unsolvable("right-hand side has a component of size " +
                           std::to_string(std::abs(f.a(j))) + " along the kernel eigenvector j = " +
                           std::to_string(j + 1));
        }
        out.dropped_mass += std::norm(f.a(j));
      }
      continue;
    }
    out.u.a(j) = f.a(j) / lambda;
  }
  return out;
}

DualPairing pair_dual(std::span<const Complex> dual, const ExpansionCoefficients& test,
                      const WeightSequence& w, std::size_t n, double h) {
  if (!(h > 0.0)) throw InvalidArgument("pair_dual needs h > 0");
  if (n == 0) throw InvalidArgument("pair_dual needs n >= 1");
  const std::size_t J = std::min(dual.size(), static_cast<std::size_t>(test.a.size()));
  if (J < 2) throw InvalidArgument("pair_dual needs at least two coefficients");
  const AssociatedFunction assoc(w);
  const std::size_t tail = tail_start(J);

  DualPairing out;
  double head = kNegInf;
  double tail_max = kNegInf;
  out.log_growth_witness = kNegInf;
  for (std::size_t i = 0; i < J; ++i) {
    const double g = log_abs(dual[i]) - assoc(root_scale(i + 1, n) / h);
    double& slot = i < tail ? head : tail_max;
    slot = std::max(slot, g);
    out.log_growth_witness = std::max(out.log_growth_witness, g);
  }
  if (tail_max > head) {
    throw NotInDual("dual sequence grows faster than e^{M(j^{1/(2n)}/h)} at h = " +
                    std::to_string(h));
  }

  head = kNegInf;
  tail_max = kNegInf;
  out.log_decay_witness = kNegInf;
  for (std::size_t i = 0; i < J; ++i) {
    const double d = log_abs(test.a(static_cast<Index>(i))) + assoc(2.0 * root_scale(i + 1, n) / h);
    double& slot = i < tail ? head : tail_max;
    slot = std::max(slot, d);
    out.log_decay_witness = std::max(out.log_decay_witness, d);
  }
  out.decay_certified = tail_max < head || out.log_decay_witness == kNegInf;

  out.value = Complex(0.0, 0.0);
  for (std::size_t i = 0; i < J; ++i) out.value += dual[i] * test.a(static_cast<Index>(i));

  const double log_prefactor = out.log_growth_witness + out.log_decay_witness;
  if (log_prefactor > kNegInf) {
    double sum = 0.0;
    double last_term = 0.0;
    bool saturated = false;
    for (std::size_t j = J + 1; j <= 64 * J; ++j) {
      const auto lo = assoc.evaluate(root_scale(j, n) / h);
      const auto hi = assoc.evaluate(2.0 * root_scale(j, n) / h);
      saturated = saturated || hi.saturated;
      last_term = std::exp(log_prefactor + lo.value - hi.value);
      sum += last_term;
      if (last_term < 1e-17 * sum) break;
    }
    out.tail_bound = sum;
    out.tail_truncated = saturated || last_term >= 1e-17 * sum;
  }
  return out;
}

}  // namespace shubin
