#pragma once

#include <Eigen/Dense>

#include <cstddef>

#include "shubin/hermite.hpp"

namespace shubin {

/// Eigenpairs of a truncated operator matrix, sorted by |lambda| (ties by
/// argument), with degenerate eigenspaces put in a canonical basis.
struct SpectralDecomposition {
  BasisTruncation trunc;
  VectorXc eigenvalues;
  MatrixXc vectors;             // orthonormal columns u_j in trunc order
  Eigen::VectorXd residuals;    // ||A u_j - lambda_j u_j||
  std::size_t trusted = 0;      // J_trust: leading indices with small residuals
  double matrix_norm = 0.0;     // max |lambda_j|
  double schur_departure = 0.0; // ||strict upper part of T|| / ||A|| on the normal path
  bool selfadjoint = false;
};

struct DecomposeOptions {
  double tol = 1e-10;
  double trust_fraction = 0.75;  // upper share of the spectrum treated as polluted
  double tie_tol = 1e-9;         // relative tolerance for degenerate eigenvalues
};

/// Self-adjoint path: hermitian eigensolver. General path: complex Schur form,
/// accepted only if the matrix is normal up to max(tol, order/N) * ||A||.
/// Throws NotNormal otherwise.
SpectralDecomposition decompose(const OperatorMatrix& a, bool selfadjoint,
                                const DecomposeOptions& options = {});

struct WeylFit {
  double B = 0.0;
  double exponent = 0.0;
  double exponent_expected = 0.0;  // m / (2n)
  double r_squared = 0.0;
  std::size_t j_min = 0;  // 1-based, inclusive
  std::size_t j_max = 0;
  unsigned m = 0;
  std::size_t n = 0;
};

/// Least squares of log|lambda_j| = log B + e log j over trusted j in
/// [j_min, j_max] (1-based; j_max = 0 means J_trust). Needs >= 20 points,
/// otherwise throws ResourceLimit.
WeylFit weyl_fit(const SpectralDecomposition& s, unsigned m, std::size_t n, std::size_t j_min,
                 std::size_t j_max = 0);

/// Largest |alpha| + |beta| accepted by the seminorm routines.
inline constexpr unsigned kSeminormCap = 32;

/// ||x^beta d^alpha f|| for f = sum u_k h_k.
double coeff_seminorm(const VectorXc& u, const MultiIndex& alpha, const MultiIndex& beta,
                      const BasisTruncation& trunc);

/// |f|_s = sum_{|alpha|+|beta|=s} ||x^beta d^alpha f||.
double sobolev_seminorm(const VectorXc& u, unsigned s, const BasisTruncation& trunc);

/// max_{|alpha|+|beta|=s} ||x^beta d^alpha f||, computed alongside |f|_s.
struct SeminormLevel {
  double sum = 0.0;
  double max = 0.0;
};
SeminormLevel seminorm_level(const VectorXc& u, unsigned s, const BasisTruncation& trunc);

struct EigenBoundWitness {
  double witness = 0.0;                // max over j of ell_j
  std::vector<double> per_index;       // ell_j, j = 1..j_max
  std::vector<double> running_max;     // max_{i <= j} ell_i
  std::size_t j_max = 0;
};

/// ell_j = max over 1 <= |alpha|+|beta| <= cap of
///   (||x^beta d^alpha u_j|| / (j^{(m+s)/(2n)} (alpha! beta!)^{1/2}))^{1/s}.
EigenBoundWitness eigen_bound_fit(const SpectralDecomposition& s, const WeylFit& weyl,
                                  unsigned cap, std::size_t j_max = 0);

}  // namespace shubin
