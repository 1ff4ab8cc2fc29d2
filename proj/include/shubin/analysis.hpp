#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "shubin/spectral.hpp"
#include "shubin/weights.hpp"

namespace shubin {

/// a_j = (f, u_j), j = 1..J.
struct ExpansionCoefficients {
  VectorXc a;
  std::string source;
};

/// a_j = (f, u_j) for the trusted eigenvectors; f is given in Hermite coefficients.
ExpansionCoefficients expand(const VectorXc& f_coeffs, const SpectralDecomposition& s,
                             std::string source = {});

/// 2^k, k = -4..4.
std::vector<double> default_lambda_grid();

struct DecayRow {
  double lambda = 0.0;
  double log_sup = 0.0;       // log S(lambda) over unsaturated indices
  double log_sup_monotone = 0.0;  // running max over the grid, so nondecreasing in lambda
  std::size_t argmax_j = 0;   // 1-based
  double log_head = 0.0;      // max over j in the first three quarters
  double log_tail = 0.0;      // max over j in the last quarter
  std::size_t saturated = 0;  // indices skipped because M saturated
  bool pass = false;
};

struct DecayFit {
  std::vector<DecayRow> rows;
  double lambda_star = 0.0;
  double log_c_star = 0.0;
  bool verdict_roumieu = false;
  bool verdict_beurling = false;
  std::size_t j_count = 0;
  std::size_t j_resolved = 0;  // last j with |a_j| above the noise floor
};

/// Finite-range surrogate of |a_j| <= C e^{-M(lambda j^{1/(2n)})}: for each
/// lambda, S = sup_j |a_j| e^{M(lambda j^{1/(2n)})} passes when the last
/// quarter of the index range stays strictly below the rest and no tail index
/// has a truncation-saturated M. Coefficients with |a_j| <= rel_floor * max|a|
/// are treated as unresolved zeros and the quarter split is taken over
/// j <= j_resolved.
DecayFit classify_decay(std::span<const Complex> a, const WeightSequence& w, std::size_t n,
                        std::span<const double> lambda_grid, double rel_floor = 0.0);

struct NormEntry {
  double h = 0.0;
  double log_value = 0.0;
  std::size_t argmax = 0;  // p for the iterate norm, s = |alpha|+|beta| otherwise
  bool saturated = false;
};

struct NormTable {
  std::vector<double> h_grid;
  std::vector<NormEntry> iterate;    // ||f||_{P,h}
  std::vector<NormEntry> ultra;      // ||f||_h
  std::vector<NormEntry> sobolev;    // ||f||'_h
  std::vector<double> iterate_l2;    // ||P^p f||, p = 0..p_cap
  std::vector<double> level_sum;     // |f|_s, s = 0..s_cap
  std::vector<double> level_max;     // max_{|alpha|+|beta|=s} ||x^beta d^alpha f||
};

/// Builds the operator matrix wide enough to apply P p_cap times to vectors
/// supported in `trunc` without truncation loss.
OperatorMatrix iterate_matrix(const ShubinOperator& p, const BasisTruncation& trunc,
                              unsigned p_cap);

/// ||f||_{P,h} = sup_p ||P^p f|| / (h^{mp} M_{mp}) by repeated application of
/// the padded matrix. p_mat must satisfy per_axis >= N + p_cap * order.
NormTable iterate_norms(const OperatorMatrix& p_mat, const VectorXc& f,
                        const BasisTruncation& trunc, const WeightSequence& w, unsigned m,
                        std::span<const double> h_grid, unsigned p_cap);

/// ||f||_h over |alpha|+|beta| <= s_cap and ||f||'_h over pm <= s_cap.
NormTable seminorm_family(const VectorXc& f, const BasisTruncation& trunc,
                          const WeightSequence& w, std::span<const double> h_grid,
                          unsigned s_cap, unsigned m);

struct InterpolationReport {
  std::vector<double> c_grid;
  std::vector<bool> holds;
  double least_passing = -1.0;  // -1 if no grid value passes
  double worst_ratio = 0.0;     // lhs / rhs at the least passing C
};

/// Checks |f|_{pm+j} <= |f|_{pm} + C |f|_{(p+1)m} + C^{pm+j} ((pm+j)!)^{1/2} ||f||
/// for 0 < j < m and p = 0..p_max.
InterpolationReport interpolation_check(const VectorXc& f, const BasisTruncation& trunc,
                                        unsigned m, std::span<const double> c_grid,
                                        unsigned p_max);

enum class KernelPolicy { Reject, Project };

struct DivisionResult {
  ExpansionCoefficients u;
  std::vector<std::size_t> kernel;  // 1-based j with |lambda_j| <= tol ||A||
  double dropped_mass = 0.0;        // sum |a_j|^2 over projected kernel indices
};

/// b_j = a_j / lambda_j. Kernel indices with a_j != 0 throw Unsolvable under
/// Reject and are zeroed under Project.
DivisionResult solve_eigen_division(const SpectralDecomposition& s, const ExpansionCoefficients& f,
                                    KernelPolicy policy, double tol = 1e-10);

struct DualPairing {
  Complex value;
  double log_growth_witness = 0.0;  // log sup_j |a_j| e^{-M(j^{1/(2n)}/h)}
  double log_decay_witness = 0.0;   // log sup_j |b_j| e^{M(2 j^{1/(2n)}/h)}
  double tail_bound = 0.0;
  bool decay_certified = false;     // decay witness not carried by the tail
  bool tail_truncated = false;      // tail series cut before converging
};

/// sum_j a_j b_j for a dual sequence a and a test expansion b, with a tail
/// estimate. Throws NotInDual if a fails the growth screen at this h.
DualPairing pair_dual(std::span<const Complex> dual, const ExpansionCoefficients& test,
                      const WeightSequence& w, std::size_t n, double h);

}  // namespace shubin
