#include "shubin/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "shubin/errors.hpp"

namespace shubin {

namespace {

using Index = Eigen::Index;

// Makes the first significant coefficient of each column real and positive.
void fix_phases(MatrixXc& v) {
  for (Index c = 0; c < v.cols(); ++c) {
    const double biggest = v.col(c).cwiseAbs().maxCoeff();
    if (biggest == 0.0) continue;
    for (Index r = 0; r < v.rows(); ++r) {
      const double mag = std::abs(v(r, c));
      if (mag > 1e-8 * biggest) {
        v.col(c) *= std::conj(v(r, c)) / mag;
        v(r, c) = mag;
        break;
      }
    }
  }
}

// Rotates a degenerate block so that it diagonalizes the Gram matrix of
// x_0 applied to the block, eigenvalues ascending.
void canonicalize_block(MatrixXc& vectors, Index first, Index count,
                        const BasisTruncation& trunc) {
  if (count < 2) return;
  const Index padded = static_cast<Index>(to_tensor(vectors.col(first), trunc, 1).values.size());
  MatrixXc image(padded, count);
  for (Index c = 0; c < count; ++c) {
    auto t = to_tensor(vectors.col(first + c), trunc, 1);
    apply_ladder(t, 0, Ladder::Position);
    image.col(c) = Eigen::Map<const VectorXc>(t.values.data(), padded);
  }
  const MatrixXc gram = image.adjoint() * image;
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(gram);
  vectors.middleCols(first, count) = vectors.middleCols(first, count) * solver.eigenvectors();
}

// Argument in (-pi, pi], so that negative reals sort last regardless of the
// sign of a zero imaginary part.
double argument(Complex z) {
  const double a = std::arg(z);
  return a <= -M_PI ? M_PI : a;
}

std::vector<Index> sorted_order(const VectorXc& lambda, double tie_tol) {
  const Index size = lambda.size();
  std::vector<Index> order(static_cast<std::size_t>(size));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(lambda(a)) < std::abs(lambda(b));
  });
  // Within runs of equal modulus, order by argument.
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size()) {
      const double prev = std::abs(lambda(order[end - 1]));
      const double cur = std::abs(lambda(order[end]));
      if (cur - prev > tie_tol * std::max(1.0, cur)) break;
      ++end;
    }
    std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](Index a, Index b) { return argument(lambda(a)) < argument(lambda(b)); });
    start = end;
  }
  return order;
}

}  // namespace

SpectralDecomposition decompose(const OperatorMatrix& a, bool selfadjoint,
                                const DecomposeOptions& options) {
  const MatrixXc& A = a.entries;
  const Index size = A.rows();
  if (size == 0 || A.cols() != size) throw InvalidArgument("decompose needs a square matrix");
  if (!A.allFinite()) throw InvalidArgument("decompose: matrix has non-finite entries");

  SpectralDecomposition out{a.trunc, {}, {}, {}, 0, 0.0, 0.0, selfadjoint};
  VectorXc lambda;
  MatrixXc vectors;

  if (selfadjoint) {
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw InvalidArgument("decompose: self-adjoint path requested for a non-hermitian matrix");
    }
    Eigen::SelfAdjointEigenSolver<MatrixXc> solver(A);
    if (solver.info() != Eigen::Success) throw InvalidInput("hermitian eigensolver did not converge");
    lambda = solver.eigenvalues().cast<Complex>();
    vectors = solver.eigenvectors();
  } else {
    // Crop can break exact normality of a normal operator only near the
    // truncation boundary, so the admissible departure scales with order/N.
    const double slack =
        std::max(options.tol, static_cast<double>(std::max(a.order, 1u)) /
                                  static_cast<double>(a.trunc.per_axis()));
    const double frob = A.norm();
    const double commutator = (A * A.adjoint() - A.adjoint() * A).norm();
    if (frob > 0.0 && commutator > slack * frob * frob) {
      throw NotNormal("matrix is not normal: ||AA* - A*A|| / ||A||^2 = " +
                          std::to_string(commutator / (frob * frob)),
                      commutator / (frob * frob));
    }
    Eigen::ComplexSchur<MatrixXc> schur(A);
    if (schur.info() != Eigen::Success) throw InvalidInput("Schur decomposition did not converge");
    const MatrixXc& T = schur.matrixT();
    lambda = T.diagonal();
    const MatrixXc upper = T.triangularView<Eigen::StrictlyUpper>();
    out.schur_departure = frob > 0.0 ? upper.norm() / frob : 0.0;
    if (out.schur_departure > slack) {
      throw NotNormal("Schur form is not diagonal: departure " +
                          std::to_string(out.schur_departure),
                      out.schur_departure);
    }
    vectors = schur.matrixU();
  }

  const auto order = sorted_order(lambda, options.tie_tol);
  out.eigenvalues.resize(size);
  out.vectors.resize(size, size);
  for (Index j = 0; j < size; ++j) {
    out.eigenvalues(j) = lambda(order[static_cast<std::size_t>(j)]);
    out.vectors.col(j) = vectors.col(order[static_cast<std::size_t>(j)]);
  }
  out.matrix_norm = out.eigenvalues.cwiseAbs().maxCoeff();

  // Degenerate eigenspaces: canonical basis, then phase fixing.
  Index start = 0;
  while (start < size) {
    Index end = start + 1;
    while (end < size && std::abs(out.eigenvalues(end) - out.eigenvalues(start)) <=
                             options.tie_tol * std::max(1.0, std::abs(out.eigenvalues(start)))) {
      ++end;
    }
    canonicalize_block(out.vectors, start, end - start, a.trunc);
    start = end;
  }
  fix_phases(out.vectors);

  out.residuals.resize(size);
  const MatrixXc image = A * out.vectors;
  for (Index j = 0; j < size; ++j) {
    out.residuals(j) = (image.col(j) - out.eigenvalues(j) * out.vectors.col(j)).norm();
  }
  const auto limit =
      static_cast<Index>(std::floor(options.trust_fraction * static_cast<double>(size)));
  const double threshold = options.tol * std::max(out.matrix_norm, 1.0);
  Index trusted = 0;
  while (trusted < limit && out.residuals(trusted) <= threshold) ++trusted;
  out.trusted = static_cast<std::size_t>(trusted);
  return out;
}

WeylFit weyl_fit(const SpectralDecomposition& s, unsigned m, std::size_t n, std::size_t j_min,
                 std::size_t j_max) {
  if (m == 0 || n == 0) throw InvalidArgument("weyl_fit needs positive m and n");
  if (j_min == 0) j_min = 1;
  const std::size_t last = j_max == 0 ? s.trusted : std::min(j_max, s.trusted);
  if (last < j_min || last - j_min < 20) {
    throw ResourceLimit("weyl_fit: need at least 20 trusted eigenvalues in [" +
                        std::to_string(j_min) + ", " + std::to_string(last) + "]");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t j = j_min; j <= last; ++j) {
    const double mag = std::abs(s.eigenvalues(static_cast<Index>(j - 1)));
    if (mag == 0.0) continue;
    xs.push_back(std::log(static_cast<double>(j)));
    ys.push_back(std::log(mag));
  }
  const double count = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / count;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / count;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  WeylFit fit;
  fit.exponent = sxy / sxx;
  fit.B = std::exp(my - fit.exponent * mx);
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.exponent_expected = static_cast<double>(m) / (2.0 * static_cast<double>(n));
  fit.j_min = j_min;
  fit.j_max = last;
  fit.m = m;
  fit.n = n;
  return fit;
}

double coeff_seminorm(const VectorXc& u, const MultiIndex& alpha, const MultiIndex& beta,
                      const BasisTruncation& trunc) {
  if (alpha.total() + beta.total() > kSeminormCap) {
    throw InvalidArgument("seminorm order " + std::to_string(alpha.total() + beta.total()) +
                          " exceeds cap " + std::to_string(kSeminormCap));
  }
  return apply_monomial_norm(u, trunc, beta, alpha);
}

SeminormLevel seminorm_level(const VectorXc& u, unsigned s, const BasisTruncation& trunc) {
  if (s > kSeminormCap) {
    throw InvalidArgument("seminorm order " + std::to_string(s) + " exceeds cap " +
                          std::to_string(kSeminormCap));
  }
  const std::size_t n = trunc.dim();
  SeminormLevel level;
  // (alpha, beta) with |alpha| + |beta| = s is a multi-index of length 2n.
  for (const auto& joint : multi_indices_of_total(2 * n, s)) {
    MultiIndex alpha(n);
    MultiIndex beta(n);
    for (std::size_t a = 0; a < n; ++a) {
      alpha[a] = joint[a];
      beta[a] = joint[n + a];
    }
    const double v = apply_monomial_norm(u, trunc, beta, alpha);
    level.sum += v;
    level.max = std::max(level.max, v);
  }
  return level;
}

double sobolev_seminorm(const VectorXc& u, unsigned s, const BasisTruncation& trunc) {
  return seminorm_level(u, s, trunc).sum;
}

EigenBoundWitness eigen_bound_fit(const SpectralDecomposition& s, const WeylFit& weyl,
                                  unsigned cap, std::size_t j_max) {
  if (cap > kSeminormCap) {
    throw InvalidArgument("eigen_bound_fit: cap " + std::to_string(cap) + " exceeds " +
                          std::to_string(kSeminormCap));
  }
  const std::size_t n = s.trunc.dim();
  const double m = static_cast<double>(weyl.m);
  const std::size_t last = j_max == 0 ? s.trusted : std::min(j_max, s.trusted);
  EigenBoundWitness out;
  out.j_max = last;
  out.per_index.assign(last, 0.0);
  out.running_max.assign(last, 0.0);
  if (cap == 0) return out;

  std::vector<std::pair<MultiIndex, MultiIndex>> pairs;
  for (unsigned order = 1; order <= cap; ++order) {
    for (const auto& joint : multi_indices_of_total(2 * n, order)) {
      MultiIndex alpha(n);
      MultiIndex beta(n);
      for (std::size_t a = 0; a < n; ++a) {
        alpha[a] = joint[a];
        beta[a] = joint[n + a];
      }
      pairs.emplace_back(alpha, beta);
    }
  }
  for (std::size_t j = 1; j <= last; ++j) {
    const VectorXc u = s.vectors.col(static_cast<Index>(j - 1));
    const double norm = u.norm();
    double ell = 0.0;
    for (const auto& [alpha, beta] : pairs) {
      const double order = static_cast<double>(alpha.total() + beta.total());
      const double denom = std::pow(static_cast<double>(j), (m + order) / (2.0 * n)) *
                           std::sqrt(alpha.factorial() * beta.factorial()) * norm;
      const double ratio = coeff_seminorm(u, alpha, beta, s.trunc) / denom;
      ell = std::max(ell, std::pow(ratio, 1.0 / order));
    }
    out.per_index[j - 1] = ell;
    out.running_max[j - 1] = std::max(ell, j > 1 ? out.running_max[j - 2] : 0.0);
    out.witness = std::max(out.witness, ell);
  }
  return out;
}

}  // namespace shubin
