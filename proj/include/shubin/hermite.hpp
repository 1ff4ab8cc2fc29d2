#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "shubin/operator.hpp"

namespace shubin {

using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

/// Tensor Hermite basis {h_k : k in {0..N-1}^n}, enumerated by total degree
/// and then lexicographically.
class BasisTruncation {
 public:
  BasisTruncation(std::size_t dim, std::size_t per_axis);

  std::size_t dim() const { return dim_; }
  std::size_t per_axis() const { return per_axis_; }
  std::size_t total() const { return order_.size(); }

  const MultiIndex& multi_index(std::size_t position) const { return order_[position]; }

  /// Position of k in the enumeration; throws InvalidArgument if k lies outside.
  std::size_t position(const MultiIndex& k) const;

  /// Row-major (axis 0 slowest) flat index of the position-th basis element.
  std::size_t row_major(std::size_t position) const { return row_major_[position]; }
  std::size_t position_of_row_major(std::size_t flat) const { return position_of_flat_[flat]; }

  /// Same dimension, per-axis size enlarged by `extra`.
  BasisTruncation padded(std::size_t extra) const { return {dim_, per_axis_ + extra}; }

  bool operator==(const BasisTruncation& o) const {
    return dim_ == o.dim_ && per_axis_ == o.per_axis_;
  }

 private:
  std::size_t dim_;
  std::size_t per_axis_;
  std::vector<MultiIndex> order_;
  std::vector<std::size_t> row_major_;
  std::vector<std::size_t> position_of_flat_;
};

/// Zero-extends v from `from` into the larger truncation `to`.
VectorXc embed(const VectorXc& v, const BasisTruncation& from, const BasisTruncation& to);

/// Keeps the coefficients of `to`'s basis elements; drops the rest.
VectorXc restrict_to(const VectorXc& v, const BasisTruncation& from, const BasisTruncation& to);

/// Galerkin matrix of an operator in a truncated Hermite basis.
struct OperatorMatrix {
  BasisTruncation trunc;
  MatrixXc entries;
  std::size_t pad = 0;   // per-axis padding used during assembly
  unsigned order = 0;    // order of the source operator
};

enum class Ladder { Position, Derivative };

/// X_axis (multiplication by x) or D_axis = -i d/dx in the truncated basis.
OperatorMatrix ladder_matrix(std::size_t axis, Ladder kind, const BasisTruncation& trunc);

/// Assembles sum c x^beta D^alpha at per-axis size N + pad and crops to N.
/// pad defaults to the operator order, which makes the retained block the
/// exact Galerkin projection.
OperatorMatrix operator_matrix(const ShubinOperator& p, const BasisTruncation& trunc);
OperatorMatrix operator_matrix(const ShubinOperator& p, const BasisTruncation& trunc,
                               std::size_t pad);

/// Sparse coefficient vector keyed by row-major index in a per-axis box of
/// size `extent`. Used to apply monomials without dense matrices.
struct TensorCoefficients {
  std::size_t dim = 0;
  std::size_t extent = 0;
  std::vector<Complex> values;  // dense row-major storage, extent^dim entries
};

/// Embeds v into a box of per-axis size trunc.per_axis() + extra.
TensorCoefficients to_tensor(const VectorXc& v, const BasisTruncation& trunc, std::size_t extra);

/// In-place x_axis multiplication or d/dx_axis differentiation (real ladder,
/// no factor of -i). Throws ResourceLimit if the box would overflow.
void apply_ladder(TensorCoefficients& t, std::size_t axis, Ladder kind);

/// ||x^beta d^alpha f|| for f with coefficients u (here d = d/dx, i.e. i D).
double apply_monomial_norm(const VectorXc& u, const BasisTruncation& trunc,
                           const MultiIndex& beta, const MultiIndex& alpha);

/// L^2-normalized Hermite function h_k(x), stable three-term recurrence.
double hermite_eval(unsigned k, double x);

/// h_0(x), ..., h_{out.size()-1}(x).
void hermite_functions(double x, std::span<double> out);

/// Gauss-Hermite rule for weight e^{-x^2}, with the weights folded by e^{x^2}
/// so that int g(x) dx ~ sum folded_weights[i] g(nodes[i]).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> folded_weights;
};

GaussHermiteRule gauss_hermite(std::size_t order);

/// Tensor nodes of a rule, row-major with axis 0 slowest.
std::vector<std::vector<double>> tensor_nodes(const GaussHermiteRule& rule, std::size_t dim);

using Function = std::function<Complex(std::span<const double>)>;

/// c_k = int f(x) h_k(x) dx by tensor Gauss-Hermite quadrature.
/// Requires quad_order >= N + 8; throws InvalidInput on non-finite samples.
VectorXc hermite_transform(const Function& f, const BasisTruncation& trunc,
                           std::size_t quad_order);

/// Same, from samples at tensor_nodes(gauss_hermite(quad_order), n).
VectorXc hermite_transform(std::span<const Complex> samples, const BasisTruncation& trunc,
                           std::size_t quad_order);

/// Partial sum sum_k c_k h_k(x) at each point.
std::vector<Complex> synthesize(const VectorXc& c, const BasisTruncation& trunc,
                                const std::vector<std::vector<double>>& points);

}  // namespace shubin
