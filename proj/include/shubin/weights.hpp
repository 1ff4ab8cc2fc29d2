#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace shubin {

/// Weight sequence M_0 = 1, M_1, ..., M_{p_max}, stored as logarithms.
class WeightSequence {
 public:
  /// Throws InvalidArgument unless log_m[0] == 0, all entries finite and
  /// p_max = log_m.size() - 1 >= 8.
  explicit WeightSequence(std::vector<double> log_m);

  std::size_t p_max() const { return log_m_.size() - 1; }
  double log_m(std::size_t p) const { return log_m_[p]; }
  std::span<const double> log_m() const { return log_m_; }

 private:
  std::vector<double> log_m_;
};

/// M_p = (p!)^mu.
WeightSequence make_gevrey(double mu, std::size_t p_max);

/// log p! by cumulative summation, shared with make_gevrey so that exact
/// comparisons against sqrt(p!) do not pick up lgamma rounding.
std::vector<double> log_factorials(std::size_t p_max);

struct ConditionReport {
  bool m1_ok = false;
  std::size_t m1_first_violation = 0;  // p of the first failing index, 0 if none

  bool m2prime_ok = false;
  double m2prime_A = 0.0;
  double m2prime_H = 1.0;
  bool m2prime_boundary = false;  // A attained at the last ratio

  bool m2_ok = false;
  double m2_A = 0.0;
  double m2_H = 1.0;

  bool assumption_roumieu = false;
  double roumieu_l = 0.0;
  double roumieu_C = 0.0;

  bool assumption_beurling = false;
  bool beurling_finite_range = true;  // always set: the test is a trend test

  std::vector<double> lemma_ratios;  // r_p = sqrt(p+1) M_p / M_{p+1}
  double lemma_r = 0.0;              // max_p r_p
};

ConditionReport check_conditions(const WeightSequence& w);

/// Associated function M(t) = sup_p log(t^p / M_p), or its sub-lattice variant
/// Mtilde(t) = sup_p log(t^{mp} / M_{mp}) when step > 1.
class AssociatedFunction {
 public:
  explicit AssociatedFunction(const WeightSequence& w, std::size_t step = 1);

  struct Value {
    double value = 0.0;
    std::size_t argmax = 0;  // index into M_p (already multiplied by step)
    bool saturated = false;  // maximizer sits at the last admissible index
  };

  Value evaluate(double t) const;
  double operator()(double t) const { return evaluate(t).value; }

  std::size_t step() const { return step_; }
  const WeightSequence& weights() const { return *w_; }

 private:
  const WeightSequence* w_;
  std::size_t step_;
};

struct AssociatedComparisonRow {
  double t = 0.0;
  double m_tilde = 0.0;
  double m = 0.0;
  double slack_tilde_le_m = 0.0;   // M(t) - Mtilde(t)
  double slack_komatsu = 0.0;      // log of rhs/lhs of the e^{Mtilde} bound
  double slack_m_le_shifted = 0.0; // Mtilde(H^m t) + log(A^m H^{(m+2)(m-1)/2}) - M(t)
  bool saturated = false;
};

/// Evaluates Mtilde <= M and the Komatsu-type bound
///   e^{Mtilde(t)} <= A^{2n} H^{n(m+1)} e^{Mtilde(H^{2n} t)} / t^{2n}
/// on a grid. Throws PreconditionFailure if the (M.2)' witnesses are absent.
std::vector<AssociatedComparisonRow> compare_m_mtilde(const WeightSequence& w,
                                                      const ConditionReport& conditions,
                                                      std::size_t m, std::size_t n,
                                                      std::span<const double> t_grid);

}  // namespace shubin
