#ifndef FF_CURVATURE_HPP
#define FF_CURVATURE_HPP

#include <string>
#include <vector>

#include "ff/calculus.hpp"
#include "ff/field.hpp"

namespace ff {

/// Inverse of a small SPD matrix: closed form for d <= 3, LDLT otherwise.
template <typename Scalar>
MatrixX<Scalar> spd_inverse(const MatrixX<Scalar>& g);

/// Pointwise g^{-1}, shape {d, d}.
template <typename Scalar>
Field<Scalar> inverse_metric(const MetricField<Scalar>& g);

/// Christoffel symbols Gamma^k_ij stored with shape {d, d, d} as (k, i, j).
template <typename Scalar>
class ChristoffelField : public Field<Scalar> {
 public:
  ChristoffelField() = default;
  explicit ChristoffelField(Field<Scalar> f);

  /// d x d matrix (i, j) -> Gamma^k_ij.
  MatrixX<Scalar> at(Index p, int k) const {
    const int d = this->chart().dim();
    return Field<Scalar>::block(p, d, d, Index(k) * d * d);
  }
  Scalar operator()(Index p, int k, int i, int j) const {
    const int d = this->chart().dim();
    return Field<Scalar>::values()(p, (Index(k) * d + i) * d + j);
  }

  const typename Field<Scalar>::Storage& values() const { return Field<Scalar>::values(); }
  const Field<Scalar>& field() const { return *this; }
};

/// Fully lowered Riemann tensor R_ijkl, shape {d, d, d, d}, with the
/// convention R_ijkl = <R(d_i, d_j) d_l, d_k>, so R_1212 = K det g in 2-D.
template <typename Scalar>
class RiemannField : public Field<Scalar> {
 public:
  RiemannField() = default;
  explicit RiemannField(Field<Scalar> f);

  Scalar operator()(Index p, int i, int j, int k, int l) const {
    const int d = this->chart().dim();
    return Field<Scalar>::values()(p, ((Index(i) * d + j) * d + k) * d + l);
  }

  /// Largest violation of the antisymmetries, pair symmetry and the first
  /// Bianchi identity over all points.
  Scalar symmetry_defect() const;

  const typename Field<Scalar>::Storage& values() const { return Field<Scalar>::values(); }
  const Field<Scalar>& field() const { return *this; }
};

template <typename Scalar>
ChristoffelField<Scalar> christoffel(const MetricField<Scalar>& g);

template <typename Scalar>
RiemannField<Scalar> riemann(const MetricField<Scalar>& g);

/// Gauss mismatch sum_a (B^a_ik B^a_jl - B^a_il B^a_jk) - R_ijkl, shape {d, d, d, d}.
template <typename Scalar>
Field<Scalar> gauss_residual_field(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B);

/// Codazzi mismatch C^b_ijk = nabla_i B^b_jk - nabla_j B^b_ik, shape {k, d, d, d},
/// with Christoffel symbols on tangential slots and the normal connection on
/// the normal slot.
template <typename Scalar>
Field<Scalar> codazzi_residual_field(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B,
                                     const NormalConnectionField<Scalar>& N);

/// Ricci mismatch (B^a g^-1 B^b - B^b g^-1 B^a)_ij + F_ij[a][b], shape {d, d, k, k},
/// where F is the curvature of the normal connection. Zero when k = 1.
template <typename Scalar>
Field<Scalar> ricci_residual_field(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B,
                                   const NormalConnectionField<Scalar>& N);

/// Scalar residuals are lp norms over points of the independent components
/// only (i < j, k < l for Gauss; i < j for Codazzi; i < j, a < b for Ricci),
/// so every equation is counted once.
template <typename Scalar>
Scalar gauss_residual(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B, Scalar p);

template <typename Scalar>
Scalar codazzi_residual(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B,
                        const NormalConnectionField<Scalar>& N, Scalar p);

template <typename Scalar>
Scalar ricci_residual(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B,
                      const NormalConnectionField<Scalar>& N, Scalar p);

struct ResidualReport {
  double gauss = 0;
  double codazzi = 0;
  double ricci = 0;
  std::string norm_kind = "L^p";
  double p = 2;
  /// Residual level below which the data counts as compatible.
  double threshold = 0;
  bool compatible = false;
  std::vector<std::string> flags;
};

/// All three residuals plus the compatibility verdict. A negative `tol`
/// selects the calibrated threshold.
ResidualReport gcr_residuals(const MetricField<double>& g, const SecondFormField<double>& B,
                             const NormalConnectionField<double>& N, double p, double tol = -1);

/// kappa * h^2 * scale: the discretisation floor expected from second-order
/// stencils. `scale` grows with |B|, |g| and |grad g| of the data and with the
/// chart volume; kappa is calibrated once on the analytic round-sphere chart
/// with a safety factor of 10.
double compatibility_threshold(const MetricField<double>& g, const SecondFormField<double>& B,
                               double p);

}  // namespace ff

#endif  // FF_CURVATURE_HPP
