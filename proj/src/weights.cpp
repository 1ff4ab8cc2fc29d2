#include "shubin/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "shubin/errors.hpp"

namespace shubin {

namespace {

constexpr std::size_t kMinPMax = 8;

// Relative slack for comparisons in the log domain.
double log_tol(double scale) { return 1e-12 * (1.0 + std::abs(scale)); }

struct LinearWitness {
  double log_A = 0.0;
  double log_H = 0.0;
  std::size_t argmax = 0;
};

// Fits y_p ~ a + b p (p = first..first+y.size()-1), clamps the slope at 0 and
// takes log A as the maximal residual y_p - p log H.
LinearWitness fit_log_linear(std::span<const double> y, std::size_t first) {
  const double count = static_cast<double>(y.size());
  double mean_p = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    mean_p += static_cast<double>(first + i);
    mean_y += y[i];
  }
  mean_p /= count;
  mean_y /= count;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dp = static_cast<double>(first + i) - mean_p;
    sxy += dp * (y[i] - mean_y);
    sxx += dp * dp;
  }
  LinearWitness out;
  out.log_H = sxx > 0.0 ? std::max(sxy / sxx, 0.0) : 0.0;
  out.log_A = y[0] - static_cast<double>(first) * out.log_H;
  for (std::size_t i = 1; i < y.size(); ++i) {
    const double r = y[i] - static_cast<double>(first + i) * out.log_H;
    if (r > out.log_A + log_tol(out.log_A)) {
      out.log_A = r;
      out.argmax = i;
    }
  }
  return out;
}

// Last-quarter split used by the finite-range trend tests.
std::size_t tail_start(std::size_t size) { return size - std::max<std::size_t>(1, size / 4); }

}  // namespace

WeightSequence::WeightSequence(std::vector<double> log_m) : log_m_(std::move(log_m)) {
  if (log_m_.size() < kMinPMax + 1) {
    throw InvalidArgument("weight sequence needs p_max >= 8, got " +
                          std::to_string(log_m_.empty() ? 0 : log_m_.size() - 1));
  }
  if (log_m_[0] != 0.0) throw InvalidArgument("weight sequence must have M_0 = 1");
  for (double v : log_m_) {
    if (!std::isfinite(v)) throw InvalidArgument("weight sequence has a non-finite entry");
  }
}

std::vector<double> log_factorials(std::size_t p_max) {
  std::vector<double> out(p_max + 1, 0.0);
  for (std::size_t p = 1; p <= p_max; ++p) {
    out[p] = out[p - 1] + std::log(static_cast<double>(p));
  }
  return out;
}

WeightSequence make_gevrey(double mu, std::size_t p_max) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidArgument("gevrey exponent mu must be > 0");
  if (p_max < kMinPMax) throw InvalidArgument("gevrey p_max must be >= 8");
  auto lf = log_factorials(p_max);
  for (double& v : lf) v *= mu;
  return WeightSequence(std::move(lf));
}

ConditionReport check_conditions(const WeightSequence& w) {
  const std::size_t P = w.p_max();
  const auto L = w.log_m();
  ConditionReport rep;

  // (M.1): 2 L_p <= L_{p-1} + L_{p+1}
  rep.m1_ok = true;
  for (std::size_t p = 1; p + 1 <= P; ++p) {
    const double rhs = L[p - 1] + L[p + 1];
    if (2.0 * L[p] > rhs + log_tol(rhs)) {
      rep.m1_ok = false;
      rep.m1_first_violation = p;
      break;
    }
  }

  // (M.2)': L_{p+1} - L_p <= log A + p log H
  {
    std::vector<double> d(P);
    for (std::size_t p = 0; p < P; ++p) d[p] = L[p + 1] - L[p];
    const auto fit = fit_log_linear(d, 0);
    rep.m2prime_A = std::exp(fit.log_A);
    rep.m2prime_H = std::exp(fit.log_H);
    rep.m2prime_boundary = P >= 2 && fit.argmax == P - 1;
    rep.m2prime_ok = std::isfinite(rep.m2prime_A) && std::isfinite(rep.m2prime_H) &&
                     !rep.m2prime_boundary;
  }

  // (M.2): L_p - min_{1<=q<=p}(L_q + L_{p-q}) <= log A + p log H
  {
    std::vector<double> e(P);
    for (std::size_t p = 1; p <= P; ++p) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t q = 1; q <= p; ++q) best = std::min(best, L[q] + L[p - q]);
      e[p - 1] = L[p] - best;
    }
    const auto fit = fit_log_linear(e, 1);
    rep.m2_A = std::exp(fit.log_A);
    rep.m2_H = std::exp(fit.log_H);
    rep.m2_ok = std::isfinite(rep.m2_A) && std::isfinite(rep.m2_H) && fit.argmax != P - 1;
  }

  // sqrt(p!) <= C_l l^p M_p: scan l = 2^{k/4} upwards, accept the first l for
  // which the maximal excess is not carried by the last quarter of the range.
  {
    const auto lf = log_factorials(P);
    std::vector<double> g(P + 1);
    for (std::size_t p = 0; p <= P; ++p) g[p] = 0.5 * lf[p] - L[p];
    const std::size_t tail = tail_start(P + 1);
    for (int k = -80; k <= 80 && !rep.assumption_roumieu; ++k) {
      const double log_l = 0.25 * k * std::log(2.0);
      double head = -std::numeric_limits<double>::infinity();
      double tail_max = head;
      for (std::size_t p = 0; p <= P; ++p) {
        const double s = g[p] - static_cast<double>(p) * log_l;
        double& slot = p < tail ? head : tail_max;
        slot = std::max(slot, s);
      }
      if (tail_max <= head + log_tol(head)) {
        rep.assumption_roumieu = true;
        rep.roumieu_l = std::exp(log_l);
        rep.roumieu_C = std::exp(std::max(head, tail_max));
      }
    }
  }

  // Lemma ratios and the Beurling trend test on them.
  rep.lemma_ratios.resize(P);
  std::vector<double> log_r(P);
  for (std::size_t p = 0; p < P; ++p) {
    log_r[p] = 0.5 * std::log(static_cast<double>(p + 1)) + L[p] - L[p + 1];
    rep.lemma_ratios[p] = std::exp(log_r[p]);
  }
  rep.lemma_r = *std::max_element(rep.lemma_ratios.begin(), rep.lemma_ratios.end());
  {
    const std::size_t tail = tail_start(P);
    const double threshold = log_r[0] + std::log(0.5);
    bool decreasing = true;
    for (std::size_t p = tail; p < P; ++p) {
      if (log_r[p] >= threshold) decreasing = false;
      if (p > tail && !(log_r[p] < log_r[p - 1])) decreasing = false;
    }
    rep.assumption_beurling = decreasing;
  }
  return rep;
}

AssociatedFunction::AssociatedFunction(const WeightSequence& w, std::size_t step)
    : w_(&w), step_(step) {
  if (step == 0) throw InvalidArgument("associated function step must be positive");
}

AssociatedFunction::Value AssociatedFunction::evaluate(double t) const {
  if (!(t > 0.0)) throw InvalidArgument("associated function needs t > 0");
  const double log_t = std::log(t);
  const auto L = w_->log_m();
  const std::size_t last = (w_->p_max() / step_) * step_;
  Value v;
  for (std::size_t p = step_; p <= last; p += step_) {
    const double val = static_cast<double>(p) * log_t - L[p];
    if (val > v.value) {
      v.value = val;
      v.argmax = p;
    }
  }
  v.saturated = v.argmax == last && last > 0;
  return v;
}

std::vector<AssociatedComparisonRow> compare_m_mtilde(const WeightSequence& w,
                                                      const ConditionReport& conditions,
                                                      std::size_t m, std::size_t n,
                                                      std::span<const double> t_grid) {
  if (!conditions.m2prime_ok || !(conditions.m2prime_A > 0.0) || !(conditions.m2prime_H >= 1.0)) {
    throw PreconditionFailure("compare_m_mtilde needs (M.2)' witnesses A, H");
  }
  if (m == 0 || n == 0) throw InvalidArgument("m and n must be positive");
  const AssociatedFunction big(w, 1);
  const AssociatedFunction tilde(w, m);
  const double log_A = std::log(conditions.m2prime_A);
  const double log_H = std::log(conditions.m2prime_H);
  const double dm = static_cast<double>(m);
  const double dn = static_cast<double>(n);

  std::vector<AssociatedComparisonRow> rows;
  rows.reserve(t_grid.size());
  for (double t : t_grid) {
    AssociatedComparisonRow row;
    row.t = t;
    const auto mt = tilde.evaluate(t);
    const auto mm = big.evaluate(t);
    const auto mt_shift = tilde.evaluate(std::pow(conditions.m2prime_H, 2.0 * dn) * t);
    const auto mt_m = tilde.evaluate(std::pow(conditions.m2prime_H, dm) * t);
    row.m_tilde = mt.value;
    row.m = mm.value;
    row.slack_tilde_le_m = mm.value - mt.value;
    row.slack_komatsu = 2.0 * dn * log_A + dn * (dm + 1.0) * log_H + mt_shift.value -
                        2.0 * dn * std::log(t) - mt.value;
    row.slack_m_le_shifted =
        mt_m.value + dm * log_A + 0.5 * (dm + 2.0) * (dm - 1.0) * log_H - mm.value;
    row.saturated = mt.saturated || mm.saturated || mt_shift.saturated || mt_m.saturated;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace shubin
