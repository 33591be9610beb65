#ifndef FF_IMMERSION_HPP
#define FF_IMMERSION_HPP

#include "ff/calculus.hpp"
#include "ff/field.hpp"

namespace ff {

/// x -> Q x + t with Q in SO(n).
template <typename Scalar>
struct RigidMotion {
  MatrixX<Scalar> rotation;
  VectorX<Scalar> translation;

  static RigidMotion identity(int n) {
    return {MatrixX<Scalar>::Identity(n, n), VectorX<Scalar>::Zero(n)};
  }

  ImmersionField<Scalar> apply(const ImmersionField<Scalar>& f) const;
};

/// g = df df^T (row i of df is d_i f). Throws NumericalError listing the
/// points where det g <= det_floor.
template <typename Scalar>
MetricField<Scalar> induced_metric(const ImmersionField<Scalar>& f, Scalar det_floor = Scalar(1e-10));

/// Unit normals, shape {k, n} (row a = nu_a). Orthogonal to every d_i f and
/// oriented so that det[d_1 f; ...; d_d f; nu_1; ...; nu_k] > 0. For k = 1 this
/// is the normalised generalised cross product; for k > 1 the last k ambient
/// axes are projected onto the normal space and orthonormalised, falling back
/// to the axes with the largest projections where that is degenerate.
template <typename Scalar>
Field<Scalar> normal_field(const ImmersionField<Scalar>& f);

template <typename Scalar>
struct SecondFormResult {
  SecondFormField<Scalar> B;
  NormalConnectionField<Scalar> N;
  Field<Scalar> normals;
  /// Largest |B^a_ij - B^a_ji| before symmetrisation.
  Scalar asymmetry = 0;
  /// Largest |N_i[a][b] + N_i[b][a]| before antisymmetrisation.
  Scalar normal_asymmetry = 0;
};

/// B^a_ij = <d_i d_j f, nu_a> and N_i[a][b] = <d_i nu_a, nu_b> by repeated
/// first differences. With this orientation the cylinder (cos u, sin u, v)
/// has B = diag(-1, 0) and the (phi, theta) unit sphere chart has B = -g.
template <typename Scalar>
SecondFormResult<Scalar> second_form(const ImmersionField<Scalar>& f);

template <typename Scalar>
struct FundamentalForms {
  MetricField<Scalar> g;
  SecondFormField<Scalar> B;
  NormalConnectionField<Scalar> N;
  Scalar asymmetry = 0;
  Scalar normal_asymmetry = 0;
};

template <typename Scalar>
FundamentalForms<Scalar> fundamental_forms(const ImmersionField<Scalar>& f);

/// Kabsch: (Q, t) minimising sum_x |Q f(x) + t - f_ref(x)|^2 over SO(n) x R^n.
/// Ties (repeated singular values) resolve as returned by Eigen::JacobiSVD.
template <typename Scalar>
RigidMotion<Scalar> best_rigid_motion(const ImmersionField<Scalar>& f, const ImmersionField<Scalar>& f_ref);

/// sobolev_norm(Q f + t - f_ref, order, p) for the Kabsch motion.
template <typename Scalar>
Scalar quotient_distance(const ImmersionField<Scalar>& f, const ImmersionField<Scalar>& f_ref, int order,
                         Scalar p);

}  // namespace ff

#endif  // FF_IMMERSION_HPP
