#ifndef FF_CARTAN_HPP
#define FF_CARTAN_HPP

#include <vector>

#include "ff/curvature.hpp"
#include "ff/field.hpp"

namespace ff {

// Frame conventions used throughout this module:
//
//   * A frame is an orthogonal n x n matrix (n = d + k) whose ROWS are the
//     adapted frame: rows 0..d-1 the images of an orthonormal tangent frame,
//     rows d.. the unit normals.
//   * The connection form is W_i[a][b] = <d_i A_a, A_b>, so the Pfaff system
//     reads d_i A = W_i A, and the coframe w_i (a row vector of length n)
//     satisfies d_i f = w_i A.
//   * The off-diagonal block is W_i[a][d+al] = E^m_a B^al_im. With B taken
//     from an immersion (B^al_ij = <d_i d_j f, nu_al>, positively oriented
//     adapted frame) the reconstruction reproduces the immersion and its
//     normal. Feeding B = +g on the round sphere chart gives a unit sphere
//     whose reconstructed normal points to the centre.
//   * Replacing A0 by A0 Q (Q constant orthogonal) replaces A by A Q and f by
//     a rigid rotation of f.

/// Coframe: per point a d x n matrix, row i = w(d_i) = (row i of L, 0, ..., 0).
template <typename Scalar>
class CoframeField : public Field<Scalar> {
 public:
  CoframeField() = default;
  explicit CoframeField(Field<Scalar> f) : Field<Scalar>(std::move(f)) {
    const int d = this->chart().dim(), n = this->chart().ambient_dim();
    detail::check_shape(*this, {d, n}, "coframe");
  }

  MatrixX<Scalar> at(Index p) const {
    return Field<Scalar>::block(p, this->chart().dim(), this->chart().ambient_dim());
  }

  const typename Field<Scalar>::Storage& values() const { return Field<Scalar>::values(); }
  const Field<Scalar>& field() const { return *this; }
};

/// so(n)-valued 1-form: per point d antisymmetric n x n matrices W_i.
template <typename Scalar>
class ConnectionForm : public Field<Scalar> {
 public:
  ConnectionForm() = default;
  explicit ConnectionForm(Field<Scalar> f);

  MatrixX<Scalar> at(Index p, int i) const {
    const int n = this->chart().ambient_dim();
    return Field<Scalar>::block(p, n, n, Index(i) * n * n);
  }

  const typename Field<Scalar>::Storage& values() const { return Field<Scalar>::values(); }
  const Field<Scalar>& field() const { return *this; }
};

/// Per point an n x n orthogonal matrix.
template <typename Scalar>
class FrameField : public Field<Scalar> {
 public:
  FrameField() = default;
  explicit FrameField(Field<Scalar> f) : Field<Scalar>(std::move(f)) {
    const int n = this->chart().ambient_dim();
    detail::check_shape(*this, {n, n}, "frame");
  }

  MatrixX<Scalar> at(Index p) const {
    const int n = this->chart().ambient_dim();
    return Field<Scalar>::block(p, n, n);
  }

  /// max_x |A^T A - I|_F.
  Scalar orthogonality_defect() const;

  const typename Field<Scalar>::Storage& values() const { return Field<Scalar>::values(); }
  const Field<Scalar>& field() const { return *this; }
};

template <typename Scalar>
struct OrthonormalFrame {
  /// Per point E with E^T g E = I (columns = orthonormal frame in coordinates), shape {d, d}.
  Field<Scalar> E;
  CoframeField<Scalar> coframe;
};

/// Cholesky g = L L^T (positive diagonal), E = L^-T, coframe = L padded with k zero columns.
template <typename Scalar>
OrthonormalFrame<Scalar> orthonormal_frame(const MetricField<Scalar>& g);

template <typename Scalar>
ConnectionForm<Scalar> connection_form(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B,
                                       const NormalConnectionField<Scalar>& N);

/// exp of an antisymmetric matrix: closed form for n = 2, 3 (Rodrigues),
/// scaling-and-squaring Pade otherwise.
template <typename Scalar>
MatrixX<Scalar> so_exp(const MatrixX<Scalar>& M);

/// Nearest orthogonal matrix (polar factor U V^T of the SVD).
template <typename Scalar>
MatrixX<Scalar> polar_projection(const MatrixX<Scalar>& A);

/// Sweep of grid edges used by both integrators. Axes are visited in
/// `axis_order` (default 0, 1, ..., d-1): the first axis is swept from x0 in
/// both directions, each later axis from every point reached so far.
struct Sweep {
  std::vector<int> x0;          // multi-index; empty = lowest corner
  std::vector<int> axis_order;  // empty = 0, 1, ..., d-1
};

/// Solves d_i A = W_i A with A(x0) = A0 along the sweep. Each edge step is
/// A_q = exp(+-h W_mid) A_p with W_mid the average of the endpoint values,
/// followed by polar re-orthonormalisation.
template <typename Scalar>
FrameField<Scalar> integrate_pfaff(const ConnectionForm<Scalar>& W, const MatrixX<Scalar>& A0,
                                   const Sweep& sweep = {});

/// Solves d_i f = w_i A with f(x0) = f0 along the same sweep (trapezoidal edge rule).
template <typename Scalar>
ImmersionField<Scalar> integrate_poincare(const CoframeField<Scalar>& w, const FrameField<Scalar>& A,
                                          const VectorX<Scalar>& f0, const Sweep& sweep = {});

/// |loop - I|_F for every plaquette (all axis pairs a < b), where loop is the
/// product of the four edge exponentials around the plaquette.
template <typename Scalar>
std::vector<Scalar> plaquette_defects(const ConnectionForm<Scalar>& W);

/// Largest plaquette defect.
template <typename Scalar>
Scalar holonomy_defect(const ConnectionForm<Scalar>& W);

/// Largest plaquette defect accepted as compatible: kappa h^3 (1 + max|W|)^3.
inline constexpr double kHolonomyKappa = 0.1;

template <typename Scalar>
Scalar holonomy_threshold(const ConnectionForm<Scalar>& W);

/// lp norm at the grid nodes of d_i w_j - d_j w_i - (w_i W_j - w_j W_i), i < j.
template <typename Scalar>
Scalar first_structural_residual(const CoframeField<Scalar>& w, const ConnectionForm<Scalar>& W,
                                 Scalar p = 2);

/// Throws ValidationError unless A is orthogonal within tol with det A = +1.
template <typename Scalar>
void require_special_orthogonal(const MatrixX<Scalar>& A, Scalar tol, const char* what);

}  // namespace ff

#endif  // FF_CARTAN_HPP
