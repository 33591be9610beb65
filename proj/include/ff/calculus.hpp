#ifndef FF_CALCULUS_HPP
#define FF_CALCULUS_HPP

#include <limits>
#include <vector>

#include "ff/field.hpp"

namespace ff {

/// Partial derivatives of every component along every axis. The output has
/// shape {d, shape...}: slot 0 is the derivative direction.
///
/// Interior points use the 3-point central stencil. At an edge the stencil is
/// the central one applied with a ghost value extrapolated by the quintic
/// through the first six points, so the leading truncation error matches the
/// interior and nested derivatives keep a smooth O(h^2) error. Axes with fewer
/// than 7 points fall back to the 3-point one-sided stencil.
template <typename Scalar>
Field<Scalar> grad(const Field<Scalar>& field);

/// Derivative along a single axis, same shape as the input.
template <typename Scalar>
Field<Scalar> partial(const Field<Scalar>& field, int axis);

/// (sum_x |F(x)|^p w(x))^(1/p), trapezoidal weights, Frobenius norm over
/// components. p = infinity gives the max over points.
template <typename Scalar>
Scalar lp_norm(const Field<Scalar>& field, Scalar p);

/// Same with the Riemannian volume weight sqrt(det g).
template <typename Scalar>
Scalar lp_norm(const Field<Scalar>& field, Scalar p, const MetricField<Scalar>& g);

/// lp_norm(F) + lp_norm(grad F) [+ lp_norm(grad grad F)] for order 1 [2].
template <typename Scalar>
Scalar sobolev_norm(const Field<Scalar>& field, int order, Scalar p);

/// Discrete L^2 pairing sum_x w(x) F(x) zeta(x), one value per component of F.
template <typename Scalar>
VectorX<Scalar> pair(const Field<Scalar>& field, const VectorX<Scalar>& scalar_samples);

/// Fixed family of smooth scalar test fields on a chart: products over axes of
/// sin(j pi (x - a)/(b - a)), 1 <= j <= size per axis. Every element vanishes
/// on the chart boundary and is scaled to unit discrete W^{1,q} norm.
template <typename Scalar>
class TestDictionary {
 public:
  TestDictionary(const Chart<Scalar>& chart, int size, Scalar q);

  int size() const { return size_; }
  Index count() const { return static_cast<Index>(values_.size()); }
  Scalar dual_exponent() const { return q_; }
  const Chart<Scalar>& chart() const { return chart_; }

  /// Frequencies (one per axis) of element j.
  const std::vector<int>& frequencies(Index j) const { return freqs_[j]; }
  /// Samples of element j (length num_points).
  const VectorX<Scalar>& values(Index j) const { return values_[j]; }
  /// Exact gradient of element j: num_points x d.
  const MatrixX<Scalar>& gradient(Index j) const { return grads_[j]; }

  /// count() x components matrix of pairings <F_c, zeta_j>.
  MatrixX<Scalar> pairings(const Field<Scalar>& field) const;

 private:
  Chart<Scalar> chart_;
  int size_;
  Scalar q_;
  std::vector<std::vector<int>> freqs_;
  std::vector<VectorX<Scalar>> values_;
  std::vector<MatrixX<Scalar>> grads_;
};

/// Finite-dictionary surrogate of the W^{-1,r} norm: max_j |<F, zeta_j>| over
/// a TestDictionary normalised in W^{1,r'} (r' = r/(r-1)); |.| is the
/// Euclidean norm of the per-component pairings.
template <typename Scalar>
Scalar negative_norm_estimate(const Field<Scalar>& field, Scalar r, int dictionary_size = 8);

template <typename Scalar>
Scalar negative_norm_estimate(const Field<Scalar>& field, const TestDictionary<Scalar>& dict);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace ff

#endif  // FF_CALCULUS_HPP
