#include "ff/immersion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ff/parallel.hpp"

namespace ff {

template <typename Scalar>
ImmersionField<Scalar> RigidMotion<Scalar>::apply(const ImmersionField<Scalar>& f) const {
  Field<Scalar> out = f.field();
  out.values() = (f.values() * rotation.transpose()).rowwise() + translation.transpose();
  return ImmersionField<Scalar>(std::move(out));
}

template <typename Scalar>
MetricField<Scalar> induced_metric(const ImmersionField<Scalar>& f, Scalar det_floor) {
  const auto& chart = f.chart();
  const int d = chart.dim(), n = chart.ambient_dim();
  const Field<Scalar> df = grad(f.field());
  Field<Scalar> g(chart, {d, d});
  std::vector<char> bad(chart.num_points(), 0);
  parallel_for(chart.num_points(), [&](Index p) {
    const auto J = df.block(p, d, n);
    const MatrixX<Scalar> gp = J * J.transpose();
    g.block(p, d, d) = gp;
    if (!(gp.determinant() > det_floor)) bad[p] = 1;
  });
  std::vector<Index> points;
  for (Index p = 0; p < chart.num_points(); ++p)
    if (bad[p]) points.push_back(p);
  if (!points.empty())
    throw NumericalError("induced_metric: immersion degenerates at points " + detail::point_list(points));
  return MetricField<Scalar>(std::move(g), Scalar(0));
}

namespace {

// Orthonormal basis of the complement of the rows of J (d x n), oriented.
template <typename Scalar>
MatrixX<Scalar> normals_at(const MatrixX<Scalar>& J) {
  const Index d = J.rows(), n = J.cols(), k = n - d;
  MatrixX<Scalar> nu(k, n);
  if (k == 1) {
    for (Index c = 0; c < n; ++c) {
      MatrixX<Scalar> minor(d, d);
      for (Index m = 0, col = 0; m < n; ++m)
        if (m != c) minor.col(col++) = J.col(m);
      nu(0, c) = ((d + c) % 2 == 0 ? 1 : -1) * minor.determinant();
    }
    const Scalar len = nu.norm();
    if (!(len > 0)) throw NumericalError("normal_field: degenerate differential");
    return nu / len;
  }
  const MatrixX<Scalar> g = J * J.transpose();
  const MatrixX<Scalar> P = MatrixX<Scalar>::Identity(n, n) - J.transpose() * g.ldlt().solve(J);
  auto orthonormalise = [&](const std::vector<Index>& axes, MatrixX<Scalar>& out) {
    for (Index a = 0; a < k; ++a) {
      VectorX<Scalar> v = P.col(axes[a]);
      for (Index b = 0; b < a; ++b) v -= out.row(b).dot(v) * out.row(b).transpose();
      const Scalar len = v.norm();
      if (len < Scalar(0.1)) return false;
      out.row(a) = v.transpose() / len;
    }
    return true;
  };
  std::vector<Index> axes(k);
  std::iota(axes.begin(), axes.end(), d);
  if (!orthonormalise(axes, nu)) {
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return P(a, a) > P(b, b); });
    axes.assign(order.begin(), order.begin() + k);
    std::sort(axes.begin(), axes.end());
    if (!orthonormalise(axes, nu)) throw NumericalError("normal_field: degenerate differential");
  }
  MatrixX<Scalar> full(n, n);
  full << J, nu;
  if (full.determinant() < 0) nu.row(k - 1) *= -1;
  return nu;
}

}  // namespace

template <typename Scalar>
Field<Scalar> normal_field(const ImmersionField<Scalar>& f) {
  const auto& chart = f.chart();
  const int d = chart.dim(), k = chart.codim(), n = chart.ambient_dim();
  const Field<Scalar> df = grad(f.field());
  Field<Scalar> out(chart, {k, n});
  parallel_for(chart.num_points(), [&](Index p) {
    out.block(p, k, n) = normals_at<Scalar>(df.block(p, d, n));
  });
  return out;
}

template <typename Scalar>
SecondFormResult<Scalar> second_form(const ImmersionField<Scalar>& f) {
  const auto& chart = f.chart();
  const int d = chart.dim(), k = chart.codim(), n = chart.ambient_dim();
  const Field<Scalar> df = grad(f.field());
  const Field<Scalar> d2f = grad(df);  // (i, j, c)
  Field<Scalar> nu(chart, {k, n});
  parallel_for(chart.num_points(), [&](Index p) {
    nu.block(p, k, n) = normals_at<Scalar>(df.block(p, d, n));
  });
  const Field<Scalar> dnu = grad(nu);  // (i, a, c)
  Field<Scalar> B(chart, {k, d, d});
  Field<Scalar> N(chart, {d, k, k});
  std::vector<Scalar> asym(chart.num_points()), nasym(chart.num_points());
  parallel_for(chart.num_points(), [&](Index p) {
    const auto np = nu.block(p, k, n);
    const auto H = d2f.block(p, d * d, n);  // row i*d + j
    const MatrixX<Scalar> proj = H * np.transpose();  // (i*d + j, a)
    Scalar worst = 0;
    for (int a = 0; a < k; ++a)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          B(p, (Index(a) * d + i) * d + j) = proj(i * d + j, a);
          worst = std::max(worst, std::abs(proj(i * d + j, a) - proj(j * d + i, a)));
        }
    asym[p] = worst;
    Scalar nworst = 0;
    for (int i = 0; i < d; ++i) {
      const MatrixX<Scalar> Ni = dnu.block(p, k, n, Index(i) * k * n) * np.transpose();
      N.block(p, k, k, Index(i) * k * k) = Ni;
      nworst = std::max(nworst, (Ni + Ni.transpose()).cwiseAbs().maxCoeff());
    }
    nasym[p] = nworst;
  });
  SecondFormResult<Scalar> out{SecondFormField<Scalar>(std::move(B)), NormalConnectionField<Scalar>(std::move(N)),
                               std::move(nu), 0, 0};
  out.asymmetry = *std::max_element(asym.begin(), asym.end());
  out.normal_asymmetry = *std::max_element(nasym.begin(), nasym.end());
  return out;
}

template <typename Scalar>
FundamentalForms<Scalar> fundamental_forms(const ImmersionField<Scalar>& f) {
  auto g = induced_metric(f);
  auto s = second_form(f);
  return {std::move(g), std::move(s.B), std::move(s.N), s.asymmetry, s.normal_asymmetry};
}

template <typename Scalar>
RigidMotion<Scalar> best_rigid_motion(const ImmersionField<Scalar>& f, const ImmersionField<Scalar>& f_ref) {
  require(f.chart() == f_ref.chart(), "best_rigid_motion: immersions live on different charts");
  const int n = f.chart().ambient_dim();
  const VectorX<Scalar> cf = f.values().colwise().mean().transpose();
  const VectorX<Scalar> cr = f_ref.values().colwise().mean().transpose();
  const MatrixX<Scalar> X = f.values().rowwise() - cf.transpose();
  const MatrixX<Scalar> Y = f_ref.values().rowwise() - cr.transpose();
  const MatrixX<Scalar> H = X.transpose() * Y;  // sum x y^T
  const Eigen::JacobiSVD<MatrixX<Scalar>> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  VectorX<Scalar> s = VectorX<Scalar>::Ones(n);
  s[n - 1] = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1 : 1;
  const MatrixX<Scalar> Q = svd.matrixV() * s.asDiagonal() * svd.matrixU().transpose();
  return {Q, cr - Q * cf};
}

template <typename Scalar>
Scalar quotient_distance(const ImmersionField<Scalar>& f, const ImmersionField<Scalar>& f_ref, int order,
                         Scalar p) {
  const auto motion = best_rigid_motion(f, f_ref);
  return sobolev_norm(motion.apply(f).field() - f_ref.field(), order, p);
}

template struct RigidMotion<double>;
template MetricField<double> induced_metric(const ImmersionField<double>&, double);
template Field<double> normal_field(const ImmersionField<double>&);
template SecondFormResult<double> second_form(const ImmersionField<double>&);
template FundamentalForms<double> fundamental_forms(const ImmersionField<double>&);
template RigidMotion<double> best_rigid_motion(const ImmersionField<double>&, const ImmersionField<double>&);
template double quotient_distance(const ImmersionField<double>&, const ImmersionField<double>&, int, double);

}  // namespace ff
