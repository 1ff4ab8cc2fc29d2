#include "shubin/hermite.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "shubin/errors.hpp"

namespace shubin {

namespace {

// Upper bound on N^n; beyond this dense eigensolves are out of reach anyway.
constexpr std::size_t kMaxTotal = std::size_t{1} << 16;

std::size_t checked_power(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (out > kMaxTotal / std::max<std::size_t>(base, 1)) {
      throw ResourceLimit("truncation exceeds " + std::to_string(kMaxTotal) + " basis elements");
    }
    out *= base;
  }
  return out;
}

// Flat row-major index of a multi-index in a box of per-axis size `extent`.
std::size_t flat_index(const MultiIndex& k, std::size_t extent) {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < k.dim(); ++a) flat = flat * extent + k[a];
  return flat;
}

double ladder_down(std::size_t k) { return std::sqrt(0.5 * static_cast<double>(k)); }
double ladder_up(std::size_t k) { return std::sqrt(0.5 * static_cast<double>(k + 1)); }

}  // namespace

BasisTruncation::BasisTruncation(std::size_t dim, std::size_t per_axis)
    : dim_(dim), per_axis_(per_axis) {
  if (dim == 0) throw InvalidArgument("truncation dimension must be positive");
  if (per_axis == 0) throw InvalidArgument("truncation per-axis size must be positive");
  const std::size_t total = checked_power(per_axis, dim);

  order_.reserve(total);
  const unsigned max_degree = static_cast<unsigned>(dim * (per_axis - 1));
  for (unsigned d = 0; d <= max_degree; ++d) {
    for (auto& k : multi_indices_of_total(dim, d)) {
      bool inside = true;
      for (std::size_t a = 0; a < dim; ++a) inside = inside && k[a] < per_axis;
      if (inside) order_.push_back(std::move(k));
    }
  }
  row_major_.resize(total);
  position_of_flat_.resize(total);
  for (std::size_t pos = 0; pos < total; ++pos) {
    row_major_[pos] = flat_index(order_[pos], per_axis);
    position_of_flat_[row_major_[pos]] = pos;
  }
}

std::size_t BasisTruncation::position(const MultiIndex& k) const {
  if (k.dim() != dim_) throw InvalidArgument("multi-index dimension does not match truncation");
  for (std::size_t a = 0; a < dim_; ++a) {
    if (k[a] >= per_axis_) throw InvalidArgument("multi-index outside truncation");
  }
  return position_of_flat_[flat_index(k, per_axis_)];
}

VectorXc embed(const VectorXc& v, const BasisTruncation& from, const BasisTruncation& to) {
  if (from.dim() != to.dim() || to.per_axis() < from.per_axis()) {
    throw InvalidArgument("embed: target truncation must contain the source");
  }
  if (static_cast<std::size_t>(v.size()) != from.total()) {
    throw InvalidArgument("embed: vector length does not match truncation");
  }
  VectorXc out = VectorXc::Zero(static_cast<Eigen::Index>(to.total()));
  for (std::size_t pos = 0; pos < from.total(); ++pos) {
    out(static_cast<Eigen::Index>(to.position(from.multi_index(pos)))) =
        v(static_cast<Eigen::Index>(pos));
  }
  return out;
}

VectorXc restrict_to(const VectorXc& v, const BasisTruncation& from, const BasisTruncation& to) {
  if (from.dim() != to.dim() || to.per_axis() > from.per_axis()) {
    throw InvalidArgument("restrict_to: target truncation must be contained in the source");
  }
  VectorXc out(static_cast<Eigen::Index>(to.total()));
  for (std::size_t pos = 0; pos < to.total(); ++pos) {
    out(static_cast<Eigen::Index>(pos)) =
        v(static_cast<Eigen::Index>(from.position(to.multi_index(pos))));
  }
  return out;
}

TensorCoefficients to_tensor(const VectorXc& v, const BasisTruncation& trunc, std::size_t extra) {
  if (static_cast<std::size_t>(v.size()) != trunc.total()) {
    throw InvalidArgument("coefficient vector length " + std::to_string(v.size()) +
                          " does not match truncation size " + std::to_string(trunc.total()));
  }
  TensorCoefficients t;
  t.dim = trunc.dim();
  t.extent = trunc.per_axis() + extra;
  t.values.assign(checked_power(t.extent, t.dim), Complex(0.0, 0.0));
  for (std::size_t pos = 0; pos < trunc.total(); ++pos) {
    t.values[flat_index(trunc.multi_index(pos), t.extent)] = v(static_cast<Eigen::Index>(pos));
  }
  return t;
}

void apply_ladder(TensorCoefficients& t, std::size_t axis, Ladder kind) {
  if (axis >= t.dim) throw InvalidArgument("ladder axis out of range");
  std::size_t stride = 1;
  for (std::size_t a = axis + 1; a < t.dim; ++a) stride *= t.extent;
  const double up_sign = kind == Ladder::Position ? 1.0 : -1.0;

  std::vector<Complex> out(t.values.size(), Complex(0.0, 0.0));
  for (std::size_t flat = 0; flat < t.values.size(); ++flat) {
    const Complex v = t.values[flat];
    if (v == Complex(0.0, 0.0)) continue;
    const std::size_t k = (flat / stride) % t.extent;
    // x h_k = sqrt(k/2) h_{k-1} + sqrt((k+1)/2) h_{k+1}
    // h_k'  = sqrt(k/2) h_{k-1} - sqrt((k+1)/2) h_{k+1}
    if (k > 0) out[flat - stride] += v * ladder_down(k);
    if (k + 1 >= t.extent) {
      throw ResourceLimit("ladder application leaves the padded box; increase padding");
    }
    out[flat + stride] += v * (up_sign * ladder_up(k));
  }
  t.values = std::move(out);
}

double apply_monomial_norm(const VectorXc& u, const BasisTruncation& trunc,
                           const MultiIndex& beta, const MultiIndex& alpha) {
  if (beta.dim() != trunc.dim() || alpha.dim() != trunc.dim()) {
    throw InvalidArgument("monomial dimension does not match truncation");
  }
  auto t = to_tensor(u, trunc, beta.total() + alpha.total());
  for (std::size_t a = 0; a < trunc.dim(); ++a) {
    for (unsigned r = 0; r < alpha[a]; ++r) apply_ladder(t, a, Ladder::Derivative);
  }
  for (std::size_t a = 0; a < trunc.dim(); ++a) {
    for (unsigned r = 0; r < beta[a]; ++r) apply_ladder(t, a, Ladder::Position);
  }
  double sum = 0.0;
  for (const auto& v : t.values) sum += std::norm(v);
  return std::sqrt(sum);
}

OperatorMatrix ladder_matrix(std::size_t axis, Ladder kind, const BasisTruncation& trunc) {
  if (axis >= trunc.dim()) {
    throw InvalidArgument("ladder_matrix: axis " + std::to_string(axis) + " out of range");
  }
  ShubinOperator p = kind == Ladder::Position ? ShubinOperator::position(trunc.dim(), axis)
                                              : ShubinOperator::derivative(trunc.dim(), axis);
  return operator_matrix(p, trunc);
}

OperatorMatrix operator_matrix(const ShubinOperator& p, const BasisTruncation& trunc) {
  return operator_matrix(p, trunc, p.order());
}

OperatorMatrix operator_matrix(const ShubinOperator& p, const BasisTruncation& trunc,
                               std::size_t pad) {
  if (p.dim() != trunc.dim()) {
    throw InvalidArgument("operator_matrix: operator dimension " + std::to_string(p.dim()) +
                          " does not match truncation dimension " +
                          std::to_string(trunc.dim()));
  }
  pad = std::max<std::size_t>(pad, p.order());
  const std::size_t total = trunc.total();
  const std::size_t extent = trunc.per_axis() + pad;
  const std::size_t n = trunc.dim();

  // Crop map: padded row-major index -> position in trunc, or npos.
  const std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> crop(checked_power(extent, n), npos);
  for (std::size_t pos = 0; pos < total; ++pos) {
    crop[flat_index(trunc.multi_index(pos), extent)] = pos;
  }

  OperatorMatrix out{trunc, MatrixXc::Zero(static_cast<Eigen::Index>(total),
                                           static_cast<Eigen::Index>(total)),
                     pad, p.order()};
  // D^alpha = (-i)^{|alpha|} d^alpha; powers of -i are applied exactly.
  static const Complex minus_i_pow[4] = {{1.0, 0.0}, {0.0, -1.0}, {-1.0, 0.0}, {0.0, 1.0}};

  for (std::size_t col = 0; col < total; ++col) {
    VectorXc unit = VectorXc::Zero(static_cast<Eigen::Index>(total));
    unit(static_cast<Eigen::Index>(col)) = 1.0;
    const TensorCoefficients seed = to_tensor(unit, trunc, pad);
    for (const auto& [mono, c] : p.terms()) {
      TensorCoefficients t = seed;
      for (std::size_t a = 0; a < n; ++a) {
        for (unsigned r = 0; r < mono.alpha[a]; ++r) apply_ladder(t, a, Ladder::Derivative);
      }
      for (std::size_t a = 0; a < n; ++a) {
        for (unsigned r = 0; r < mono.beta[a]; ++r) apply_ladder(t, a, Ladder::Position);
      }
      const Complex scale = c * minus_i_pow[mono.alpha.total() % 4];
      for (std::size_t flat = 0; flat < t.values.size(); ++flat) {
        if (t.values[flat] == Complex(0.0, 0.0) || crop[flat] == npos) continue;
        out.entries(static_cast<Eigen::Index>(crop[flat]), static_cast<Eigen::Index>(col)) +=
            scale * t.values[flat];
      }
    }
  }
  return out;
}

void hermite_functions(double x, std::span<double> out) {
  if (out.empty()) return;
  // Track values as mantissa * e^{log_scale} so that h_0 = pi^{-1/4} e^{-x^2/2}
  // does not underflow for large |x|.
  constexpr double kRescale = 1e150;
  const double log_rescale = std::log(kRescale);
  double log_scale = -0.5 * x * x;
  double prev = 0.0;
  double cur = std::pow(M_PI, -0.25);
  out[0] = cur * std::exp(log_scale);
  for (std::size_t k = 0; k + 1 < out.size(); ++k) {
    const double dk = static_cast<double>(k);
    const double next = x * std::sqrt(2.0 / (dk + 1.0)) * cur - std::sqrt(dk / (dk + 1.0)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescale) {
      cur /= kRescale;
      prev /= kRescale;
      log_scale += log_rescale;
    }
    if (log_scale > -700.0) {
      out[k + 1] = cur * std::exp(log_scale);
    } else {
      out[k + 1] = cur == 0.0 ? 0.0
                              : std::copysign(std::exp(std::log(std::abs(cur)) + log_scale), cur);
    }
  }
}

double hermite_eval(unsigned k, double x) {
  std::vector<double> h(static_cast<std::size_t>(k) + 1);
  hermite_functions(x, h);
  return h.back();
}

GaussHermiteRule gauss_hermite(std::size_t order) {
  if (order == 0) throw InvalidArgument("quadrature order must be positive");
  // Golub-Welsch on the Jacobi matrix of the normalized Hermite recurrence.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(order > 0 ? order - 1 : 0));
  for (std::size_t k = 1; k < order; ++k) sub(static_cast<Eigen::Index>(k - 1)) = ladder_down(k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

  GaussHermiteRule rule;
  rule.nodes.resize(order);
  rule.folded_weights.resize(order);
  std::vector<double> h(order + 1);
  for (std::size_t i = 0; i < order; ++i) {
    double x = solver.eigenvalues()(static_cast<Eigen::Index>(i));
    // Newton polish on h_order, with h_order' = sqrt(2 order) h_{order-1} - x h_order.
    for (int it = 0; it < 4; ++it) {
      hermite_functions(x, h);
      const double f = h[order];
      const double df = std::sqrt(2.0 * static_cast<double>(order)) * h[order - 1] - x * f;
      if (df == 0.0) break;
      x -= f / df;
    }
    hermite_functions(x, h);
    rule.nodes[i] = x;
    // w_i e^{x_i^2} = 1 / (order * h_{order-1}(x_i)^2)
    rule.folded_weights[i] = 1.0 / (static_cast<double>(order) * h[order - 1] * h[order - 1]);
  }
  // Enforce the exact reflection symmetry of the rule.
  for (std::size_t i = 0; i < order / 2; ++i) {
    const std::size_t j = order - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.folded_weights[i] + rule.folded_weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.folded_weights[i] = rule.folded_weights[j] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

std::vector<std::vector<double>> tensor_nodes(const GaussHermiteRule& rule, std::size_t dim) {
  const std::size_t q = rule.nodes.size();
  const std::size_t count = checked_power(q, dim);
  std::vector<std::vector<double>> out(count, std::vector<double>(dim));
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t rem = flat;
    for (std::size_t a = dim; a-- > 0;) {
      out[flat][a] = rule.nodes[rem % q];
      rem /= q;
    }
  }
  return out;
}

VectorXc hermite_transform(const Function& f, const BasisTruncation& trunc,
                           std::size_t quad_order) {
  const auto rule = gauss_hermite(quad_order);
  const auto points = tensor_nodes(rule, trunc.dim());
  std::vector<Complex> samples(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) samples[i] = f(points[i]);
  return hermite_transform(samples, trunc, quad_order);
}

VectorXc hermite_transform(std::span<const Complex> samples, const BasisTruncation& trunc,
                           std::size_t quad_order) {
  const std::size_t N = trunc.per_axis();
  const std::size_t n = trunc.dim();
  if (quad_order < N + 8) {
    throw InvalidArgument("hermite_transform needs quad_order >= N + 8 (" +
                          std::to_string(N + 8) + "), got " + std::to_string(quad_order));
  }
  const auto rule = gauss_hermite(quad_order);
  const std::size_t q = quad_order;
  if (samples.size() != checked_power(q, n)) {
    throw InvalidInput("expected " + std::to_string(checked_power(q, n)) +
                       " samples on the tensor quadrature grid, got " +
                       std::to_string(samples.size()));
  }
  for (const auto& s : samples) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
      throw InvalidInput("non-finite function sample");
    }
  }
  // Weighted Hermite table W(k, i) = h_k(x_i) * folded_weight_i.
  Eigen::MatrixXd table(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(q));
  std::vector<double> h(N);
  for (std::size_t i = 0; i < q; ++i) {
    hermite_functions(rule.nodes[i], h);
    for (std::size_t k = 0; k < N; ++k) {
      table(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) =
          h[k] * rule.folded_weights[i];
    }
  }

  // Contract one axis at a time; data is row-major with per-axis extents `dims`.
  std::vector<Complex> data(samples.begin(), samples.end());
  std::vector<std::size_t> dims(n, q);
  for (std::size_t axis = 0; axis < n; ++axis) {
    std::size_t outer = 1;
    std::size_t inner = 1;
    for (std::size_t a = 0; a < axis; ++a) outer *= dims[a];
    for (std::size_t a = axis + 1; a < n; ++a) inner *= dims[a];
    std::vector<Complex> next(outer * N * inner, Complex(0.0, 0.0));
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t k = 0; k < N; ++k) {
        for (std::size_t i = 0; i < q; ++i) {
          const double w = table(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
          const Complex* src = &data[(o * q + i) * inner];
          Complex* dst = &next[(o * N + k) * inner];
          for (std::size_t r = 0; r < inner; ++r) dst[r] += w * src[r];
        }
      }
    }
    data = std::move(next);
    dims[axis] = N;
  }

  VectorXc out(static_cast<Eigen::Index>(trunc.total()));
  for (std::size_t pos = 0; pos < trunc.total(); ++pos) {
    out(static_cast<Eigen::Index>(pos)) = data[trunc.row_major(pos)];
  }
  return out;
}

std::vector<Complex> synthesize(const VectorXc& c, const BasisTruncation& trunc,
                                const std::vector<std::vector<double>>& points) {
  if (static_cast<std::size_t>(c.size()) != trunc.total()) {
    throw InvalidArgument("synthesize: coefficient length does not match truncation");
  }
  const std::size_t n = trunc.dim();
  const std::size_t N = trunc.per_axis();
  std::vector<Complex> out;
  out.reserve(points.size());
  std::vector<std::vector<double>> h(n, std::vector<double>(N));
  for (const auto& x : points) {
    if (x.size() != n) throw InvalidArgument("synthesize: point dimension mismatch");
    for (std::size_t a = 0; a < n; ++a) hermite_functions(x[a], h[a]);
    Complex sum(0.0, 0.0);
    for (std::size_t pos = 0; pos < trunc.total(); ++pos) {
      const auto& k = trunc.multi_index(pos);
      double basis = 1.0;
      for (std::size_t a = 0; a < n; ++a) basis *= h[a][k[a]];
      sum += c(static_cast<Eigen::Index>(pos)) * basis;
    }
    out.push_back(sum);
  }
  return out;
}

}  // namespace shubin
