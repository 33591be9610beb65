#ifndef FF_RIGIDITY_HPP
#define FF_RIGIDITY_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ff/calculus.hpp"
#include "ff/field.hpp"
#include "ff/immersion.hpp"

namespace ff {

/// Unit-vector valued map from a codimension-one chart into S^d in R^{d+1}.
/// May carry a reference map for the boundary-zero hypothesis; the boundary
/// condition is recorded, not enforced.
template <typename Scalar>
class SphereMap : public ImmersionField<Scalar> {
 public:
  SphereMap() = default;

  explicit SphereMap(Field<Scalar> f, Scalar tol = Scalar(1e-12)) : ImmersionField<Scalar>(std::move(f)) {
    require(this->chart().codim() == 1, "sphere map: chart must have codimension 1");
    if (!(this->sphere_deviation() <= tol))
      throw ValidationError("sphere map: values leave the unit sphere");
  }

  void set_boundary_reference(ImmersionField<Scalar> ref) {
    require(ref.chart() == this->chart(), "sphere map: boundary reference on a different chart");
    boundary_reference_ = std::move(ref);
  }
  bool has_boundary_reference() const { return boundary_reference_.has_value(); }

  /// Largest |f - f_ref| over boundary points (0 without a reference).
  Scalar boundary_deviation() const;

 private:
  std::optional<ImmersionField<Scalar>> boundary_reference_;
};

/// Orthonormal frame of T_y S^d (rows, d x (d+1)) with det[T; y] > 0. The first
/// d ambient axes are projected and orthonormalised; where |y_{d+1}| is small
/// the axis of largest |y_j| is dropped instead.
template <typename Scalar>
MatrixX<Scalar> sphere_tangent_frame(const VectorX<Scalar>& y);

/// Frobenius distance to SO(d) via the signed SVD: sqrt(sum (sigma_i - 1)^2)
/// with the smallest singular value negated when det F < 0.
template <typename Scalar>
Scalar so_distance(const MatrixX<Scalar>& F);

/// Adjugate transpose (cofactor matrix); equals det(F) F^-T where F is invertible.
template <typename Scalar>
MatrixX<Scalar> cofactor_matrix(const MatrixX<Scalar>& F);

/// F = T J^T E at one point: the differential J (rows d_i f) in the
/// g-orthonormal source frame E (columns) and the target frame T (rows).
template <typename Scalar>
MatrixX<Scalar> frame_differential(const MatrixX<Scalar>& J, const MatrixX<Scalar>& E, const MatrixX<Scalar>& T);

/// Pointwise dist(df, SO(g, can)), scalar field (shape {}).
template <typename Scalar>
Field<Scalar> dist_to_so(const VectorOneFormField<Scalar>& df, const MetricField<Scalar>& g,
                         const SphereMap<Scalar>& f);

/// cof(df): cofactor_matrix of the frame differential mapped back to
/// coordinates, C = E^-T cof(F)^T T. Shape {d, d+1}.
template <typename Scalar>
VectorOneFormField<Scalar> riemannian_cofactor(const VectorOneFormField<Scalar>& df, const MetricField<Scalar>& g,
                                               const SphereMap<Scalar>& f);

/// df of a sampled map by finite differences, as a vector 1-form.
template <typename Scalar>
VectorOneFormField<Scalar> differential(const ImmersionField<Scalar>& f);

/// Weak Piola identity for S^d targets, tested against zeta = phi_j e_c for
/// every dictionary element phi_j and ambient axis c:
///   int g^ij <C_i, d_j zeta> dV_g  -  int g^ij <df_i, C_j> <f, zeta> dV_g,
/// C = cof(df). Returns the largest Euclidean norm over c of this defect,
/// maximised over j. The second form of the sphere enters as
/// B(u, v) = <u, v> f for the outward normal f.
template <typename Scalar>
Scalar piola_residual(const SphereMap<Scalar>& f, const VectorOneFormField<Scalar>& df,
                      const MetricField<Scalar>& g, int dictionary_size = 4);

template <typename Scalar>
Scalar piola_residual(const SphereMap<Scalar>& f, const MetricField<Scalar>& g, int dictionary_size = 4);

/// Q in SO(d+1) minimising int |Q f_ref - f|^2 dV_g (weighted Procrustes, no
/// translation). Returned as a RigidMotion with zero translation.
template <typename Scalar>
RigidMotion<Scalar> best_sphere_rigid_motion(const SphereMap<Scalar>& f, const ImmersionField<Scalar>& f_ref,
                                             const MetricField<Scalar>& g);

/// |df - Q d(f_ref)|_{L^2(dV_g)} with the g-norm on 1-forms.
template <typename Scalar>
Scalar rigid_motion_gap(const VectorOneFormField<Scalar>& df, const VectorOneFormField<Scalar>& dref,
                        const MatrixX<Scalar>& Q, const MetricField<Scalar>& g);

/// Haar-distributed element of SO(n).
template <typename Scalar>
MatrixX<Scalar> random_rotation(int n, std::mt19937_64& rng);

template <typename Scalar>
struct RigidityReport {
  Scalar t = 0;
  Scalar defect = 0;  // |dist(df, SO(g, can))|_{L^2}
  Scalar lhs = 0;     // |df - d(Q iota_ref)|_{L^2}
  Scalar ratio = 0;   // lhs / defect, NaN for an exact isometry
  bool exact_isometry = false;
  RigidMotion<Scalar> motion;
  Scalar boundary_deviation = 0;
  /// Smallest lhs over the random rotations (infinity if none were drawn).
  Scalar random_min_lhs = 0;
  bool beats_random = true;
};

/// Defect below which a map counts as an exact isometry.
inline constexpr double kExactIsometry = 1e-13;

/// Report for one map: defect, optimal rotation of iota_ref, lhs and ratio,
/// plus the comparison against `random_rotations` seeded rotations.
template <typename Scalar>
RigidityReport<Scalar> rigidity_report(const SphereMap<Scalar>& f, const VectorOneFormField<Scalar>& df,
                                       const MetricField<Scalar>& g, const ImmersionField<Scalar>& iota_ref,
                                       const VectorOneFormField<Scalar>& diota_ref, int random_rotations = 20,
                                       std::uint64_t seed = 0);

/// f_t = normalize(Q0 iota + t phi) on the round-metric chart
/// (phi, theta) in [0.5, 2.5] x [0, 2] of S^2, iota the standard
/// parametrisation and phi = amplitude * s(x)^2 s(y)^2 * direction with
/// s the first sine mode of each axis, so phi vanishes on the boundary.
/// Differentials are evaluated in closed form.
template <typename Scalar>
struct PerturbedRotationFamily {
  MatrixX<Scalar> base_rotation = MatrixX<Scalar>::Identity(3, 3);
  Scalar amplitude = 1;
  VectorX<Scalar> direction = (VectorX<Scalar>(3) << Scalar(0.3), Scalar(-0.5), Scalar(0.8)).finished();
  int resolution = 65;

  Chart<Scalar> chart() const;
  MetricField<Scalar> metric() const;
  ImmersionField<Scalar> reference() const;
  VectorOneFormField<Scalar> reference_differential() const;
  SphereMap<Scalar> map(Scalar t) const;
  VectorOneFormField<Scalar> map_differential(Scalar t) const;
};

template <typename Scalar>
std::vector<RigidityReport<Scalar>> rigidity_experiment(const PerturbedRotationFamily<Scalar>& family,
                                                        const std::vector<Scalar>& t_values,
                                                        int random_rotations = 20, std::uint64_t seed = 0);

/// Least-squares slope of log y against log x.
template <typename Scalar>
Scalar loglog_slope(const std::vector<Scalar>& x, const std::vector<Scalar>& y);

}  // namespace ff

#endif  // FF_RIGIDITY_HPP
