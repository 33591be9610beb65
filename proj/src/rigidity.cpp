#include "ff/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ff/cartan.hpp"
#include "ff/curvature.hpp"
#include "ff/parallel.hpp"

namespace ff {

template <typename Scalar>
Scalar SphereMap<Scalar>::boundary_deviation() const {
  if (!boundary_reference_) return 0;
  Scalar worst = 0;
  for (Index p = 0; p < this->num_points(); ++p)
    if (this->chart().on_boundary(p))
      worst = std::max(worst, (this->values().row(p) - boundary_reference_->values().row(p)).norm());
  return worst;
}

template <typename Scalar>
MatrixX<Scalar> sphere_tangent_frame(const VectorX<Scalar>& y) {
  const Index n = y.size(), d = n - 1;
  std::vector<Index> axes;
  if (std::abs(y[d]) >= Scalar(1) / std::sqrt(Scalar(n))) {
    for (Index a = 0; a < d; ++a) axes.push_back(a);
  } else {
    Index drop = 0;
    y.cwiseAbs().maxCoeff(&drop);
    for (Index a = 0; a < n; ++a)
      if (a != drop) axes.push_back(a);
  }
  MatrixX<Scalar> T(d, n);
  for (Index a = 0; a < d; ++a) {
    VectorX<Scalar> v = -y[axes[a]] * y;
    v[axes[a]] += 1;
    for (Index b = 0; b < a; ++b) v -= T.row(b).dot(v) * T.row(b).transpose();
    T.row(a) = v.transpose() / v.norm();
  }
  MatrixX<Scalar> full(n, n);
  full << T, y.transpose();
  if (full.determinant() < 0) T.row(d - 1) *= -1;
  return T;
}

template <typename Scalar>
Scalar so_distance(const MatrixX<Scalar>& F) {
  const Eigen::JacobiSVD<MatrixX<Scalar>> svd(F);
  VectorX<Scalar> s = svd.singularValues();
  if (F.determinant() < 0) s[s.size() - 1] = -s[s.size() - 1];
  return (s.array() - Scalar(1)).matrix().norm();
}

template <typename Scalar>
MatrixX<Scalar> cofactor_matrix(const MatrixX<Scalar>& F) {
  const Index d = F.rows();
  require(F.cols() == d, "cofactor_matrix: matrix must be square");
  if (d == 1) return MatrixX<Scalar>::Ones(1, 1);
  MatrixX<Scalar> C(d, d);
  if (d == 2) {
    C << F(1, 1), -F(1, 0), -F(0, 1), F(0, 0);
    return C;
  }
  MatrixX<Scalar> minor(d - 1, d - 1);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      for (Index r = 0, mr = 0; r < d; ++r) {
        if (r == i) continue;
        for (Index c = 0, mc = 0; c < d; ++c)
          if (c != j) minor(mr, mc++) = F(r, c);
        ++mr;
      }
      C(i, j) = ((i + j) % 2 ? -1 : 1) * minor.determinant();
    }
  return C;
}

template <typename Scalar>
MatrixX<Scalar> frame_differential(const MatrixX<Scalar>& J, const MatrixX<Scalar>& E, const MatrixX<Scalar>& T) {
  return T * J.transpose() * E;
}

namespace {

template <typename Scalar>
void check_inputs(const VectorOneFormField<Scalar>& df, const MetricField<Scalar>& g, const SphereMap<Scalar>& f,
                  const char* what) {
  const auto& chart = f.chart();
  require(df.chart() == chart && g.chart() == chart, std::string(what) + ": inputs live on different charts");
  require(df.width() == chart.ambient_dim(), std::string(what) + ": differential must have d+1 columns");
}

}  // namespace

template <typename Scalar>
Field<Scalar> dist_to_so(const VectorOneFormField<Scalar>& df, const MetricField<Scalar>& g,
                         const SphereMap<Scalar>& f) {
  check_inputs(df, g, f, "dist_to_so");
  const int d = f.chart().dim();
  const auto frame = orthonormal_frame(g);
  Field<Scalar> out(f.chart(), {});
  parallel_for(f.num_points(), [&](Index p) {
    const MatrixX<Scalar> F = frame_differential<Scalar>(df.at(p), frame.E.block(p, d, d),
                                                         sphere_tangent_frame<Scalar>(f.at(p)));
    out(p, 0) = so_distance(F);
  });
  return out;
}

template <typename Scalar>
VectorOneFormField<Scalar> riemannian_cofactor(const VectorOneFormField<Scalar>& df, const MetricField<Scalar>& g,
                                               const SphereMap<Scalar>& f) {
  check_inputs(df, g, f, "riemannian_cofactor");
  const int d = f.chart().dim(), n = f.chart().ambient_dim();
  const auto frame = orthonormal_frame(g);
  Field<Scalar> out(f.chart(), {d, n});
  parallel_for(f.num_points(), [&](Index p) {
    const MatrixX<Scalar> E = frame.E.block(p, d, d);
    const MatrixX<Scalar> T = sphere_tangent_frame<Scalar>(f.at(p));
    const MatrixX<Scalar> C = cofactor_matrix<Scalar>(frame_differential<Scalar>(df.at(p), E, T));
    out.block(p, d, n) = E.transpose().partialPivLu().solve(C.transpose() * T);
  });
  return VectorOneFormField<Scalar>(std::move(out));
}

template <typename Scalar>
VectorOneFormField<Scalar> differential(const ImmersionField<Scalar>& f) {
  return VectorOneFormField<Scalar>(grad(f.field()));
}

template <typename Scalar>
Scalar piola_residual(const SphereMap<Scalar>& f, const VectorOneFormField<Scalar>& df,
                      const MetricField<Scalar>& g, int dictionary_size) {
  const auto& chart = f.chart();
  const int d = chart.dim(), n = chart.ambient_dim();
  const auto C = riemannian_cofactor(df, g, f);
  const TestDictionary<Scalar> dict(chart, dictionary_size, Scalar(2));
  // Per point: weighted flux G = w g^-1 C (d x n) and source s = w tr_g<df, C> f (n).
  RowMatrixX<Scalar> flux(chart.num_points(), d * n), source(chart.num_points(), n);
  parallel_for(chart.num_points(), [&](Index p) {
    const MatrixX<Scalar> gp = g.at(p);
    const MatrixX<Scalar> ginv = spd_inverse(gp);
    const Scalar w = chart.quadrature_weight(p) * std::sqrt(gp.determinant());
    const MatrixX<Scalar> Cp = C.at(p), Jp = df.at(p);
    const MatrixX<Scalar> G = w * ginv * Cp;
    flux.row(p) = Eigen::Map<const RowMatrixX<Scalar>>(RowMatrixX<Scalar>(G).data(), 1, d * n);
    source.row(p) = w * (ginv.cwiseProduct(Jp * Cp.transpose())).sum() * f.values().row(p);
  });
  Scalar worst = 0;
  for (Index j = 0; j < dict.count(); ++j) {
    const auto& phi = dict.values(j);
    const auto& dphi = dict.gradient(j);
    VectorX<Scalar> lhs = VectorX<Scalar>::Zero(n);
    for (Index p = 0; p < chart.num_points(); ++p)
      for (int i = 0; i < d; ++i) lhs += dphi(p, i) * flux.row(p).segment(Index(i) * n, n).transpose();
    const VectorX<Scalar> rhs = source.transpose() * phi;
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

template <typename Scalar>
Scalar piola_residual(const SphereMap<Scalar>& f, const MetricField<Scalar>& g, int dictionary_size) {
  return piola_residual(f, differential<Scalar>(f), g, dictionary_size);
}

namespace {

template <typename Scalar>
VectorX<Scalar> volume_weights(const MetricField<Scalar>& g) {
  VectorX<Scalar> w(g.num_points());
  for (Index p = 0; p < g.num_points(); ++p)
    w[p] = g.chart().quadrature_weight(p) * std::sqrt(g.at(p).determinant());
  return w;
}

}  // namespace

template <typename Scalar>
RigidMotion<Scalar> best_sphere_rigid_motion(const SphereMap<Scalar>& f, const ImmersionField<Scalar>& f_ref,
                                             const MetricField<Scalar>& g) {
  require(f.chart() == f_ref.chart() && g.chart() == f.chart(),
          "best_sphere_rigid_motion: inputs live on different charts");
  const int n = f.chart().ambient_dim();
  const VectorX<Scalar> w = volume_weights(g);
  const MatrixX<Scalar> M = f.values().transpose() * w.asDiagonal() * f_ref.values();  // sum w f f_ref^T
  const Eigen::JacobiSVD<MatrixX<Scalar>> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  VectorX<Scalar> s = VectorX<Scalar>::Ones(n);
  s[n - 1] = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1 : 1;
  return {svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose(), VectorX<Scalar>::Zero(n)};
}

template <typename Scalar>
Scalar rigid_motion_gap(const VectorOneFormField<Scalar>& df, const VectorOneFormField<Scalar>& dref,
                        const MatrixX<Scalar>& Q, const MetricField<Scalar>& g) {
  require(df.chart() == dref.chart() && g.chart() == df.chart(), "rigid_motion_gap: inputs live on different charts");
  Field<Scalar> density(df.chart(), {});
  parallel_for(df.num_points(), [&](Index p) {
    const MatrixX<Scalar> diff = df.at(p) - dref.at(p) * Q.transpose();
    density(p, 0) = std::sqrt(std::max(Scalar(0), (spd_inverse<Scalar>(g.at(p)) *
                                                   (diff * diff.transpose())).trace()));
  });
  return lp_norm(density, Scalar(2), g);
}

template <typename Scalar>
MatrixX<Scalar> random_rotation(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  MatrixX<Scalar> a(n, n);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = Scalar(n01(rng));
  const Eigen::HouseholderQR<MatrixX<Scalar>> qr(a);
  MatrixX<Scalar> q = qr.householderQ();
  const VectorX<Scalar> diag = qr.matrixQR().diagonal();
  for (int i = 0; i < n; ++i)
    if (diag[i] < 0) q.col(i) *= -1;
  if (q.determinant() < 0) q.col(0) *= -1;
  return q;
}

template <typename Scalar>
RigidityReport<Scalar> rigidity_report(const SphereMap<Scalar>& f, const VectorOneFormField<Scalar>& df,
                                       const MetricField<Scalar>& g, const ImmersionField<Scalar>& iota_ref,
                                       const VectorOneFormField<Scalar>& diota_ref, int random_rotations,
                                       std::uint64_t seed) {
  RigidityReport<Scalar> r;
  r.defect = lp_norm(dist_to_so(df, g, f), Scalar(2), g);
  r.motion = best_sphere_rigid_motion(f, iota_ref, g);
  r.lhs = rigid_motion_gap(df, diota_ref, r.motion.rotation, g);
  r.exact_isometry = r.defect < Scalar(kExactIsometry);
  r.ratio = r.exact_isometry ? std::numeric_limits<Scalar>::quiet_NaN() : r.lhs / r.defect;
  r.boundary_deviation = f.boundary_deviation();
  r.random_min_lhs = std::numeric_limits<Scalar>::infinity();
  std::mt19937_64 rng(seed);
  for (int i = 0; i < random_rotations; ++i) {
    const MatrixX<Scalar> Q = random_rotation<Scalar>(f.chart().ambient_dim(), rng);
    r.random_min_lhs = std::min(r.random_min_lhs, rigid_motion_gap(df, diota_ref, Q, g));
  }
  r.beats_random = r.lhs <= r.random_min_lhs;
  return r;
}

namespace {

template <typename Scalar>
VectorX<Scalar> sphere_point(Scalar phi, Scalar theta) {
  VectorX<Scalar> v(3);
  v << std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta), std::cos(phi);
  return v;
}

template <typename Scalar>
MatrixX<Scalar> sphere_jacobian(Scalar phi, Scalar theta) {
  MatrixX<Scalar> J(2, 3);
  J << std::cos(phi) * std::cos(theta), std::cos(phi) * std::sin(theta), -std::sin(phi),
      -std::sin(phi) * std::sin(theta), std::sin(phi) * std::cos(theta), 0;
  return J;
}

// u = Q0 iota + t phi and its Jacobian (rows d_i u) at chart point x.
template <typename Scalar>
std::pair<VectorX<Scalar>, MatrixX<Scalar>> perturbed(const PerturbedRotationFamily<Scalar>& fam,
                                                      const Chart<Scalar>& chart, const VectorX<Scalar>& x,
                                                      Scalar t) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  Scalar s[2], ds[2];
  for (int a = 0; a < 2; ++a) {
    const Scalar L = chart.upper(a) - chart.lower(a);
    const Scalar arg = pi * (x[a] - chart.lower(a)) / L;
    s[a] = std::sin(arg) * std::sin(arg);
    ds[a] = 2 * std::sin(arg) * std::cos(arg) * pi / L;
  }
  const Scalar bump = fam.amplitude * s[0] * s[1];
  const VectorX<Scalar> u = fam.base_rotation * sphere_point(x[0], x[1]) + t * bump * fam.direction;
  MatrixX<Scalar> du = sphere_jacobian(x[0], x[1]) * fam.base_rotation.transpose();
  du.row(0) += t * fam.amplitude * ds[0] * s[1] * fam.direction.transpose();
  du.row(1) += t * fam.amplitude * s[0] * ds[1] * fam.direction.transpose();
  return {u, du};
}

}  // namespace

template <typename Scalar>
Chart<Scalar> PerturbedRotationFamily<Scalar>::chart() const {
  return Chart<Scalar>(2, 1, {{Scalar(0.5), Scalar(2.5)}, {Scalar(0), Scalar(2)}}, {resolution, resolution});
}

template <typename Scalar>
MetricField<Scalar> PerturbedRotationFamily<Scalar>::metric() const {
  return MetricField<Scalar>(sample(chart(), {2, 2}, [](const VectorX<Scalar>& x) {
    MatrixX<Scalar> g = MatrixX<Scalar>::Zero(2, 2);
    g(0, 0) = 1;
    g(1, 1) = std::sin(x[0]) * std::sin(x[0]);
    return g;
  }));
}

template <typename Scalar>
ImmersionField<Scalar> PerturbedRotationFamily<Scalar>::reference() const {
  return ImmersionField<Scalar>(sample(chart(), {3}, [](const VectorX<Scalar>& x) { return sphere_point(x[0], x[1]); }));
}

template <typename Scalar>
VectorOneFormField<Scalar> PerturbedRotationFamily<Scalar>::reference_differential() const {
  return VectorOneFormField<Scalar>(
      sample(chart(), {2, 3}, [](const VectorX<Scalar>& x) { return sphere_jacobian(x[0], x[1]); }));
}

template <typename Scalar>
SphereMap<Scalar> PerturbedRotationFamily<Scalar>::map(Scalar t) const {
  require(base_rotation.rows() == 3 && base_rotation.cols() == 3, "rigidity family: base rotation must be 3x3");
  require_special_orthogonal<Scalar>(base_rotation, Scalar(1e-9), "rigidity family: base rotation");
  require(direction.size() == 3, "rigidity family: bump direction must have 3 entries");
  const auto c = chart();
  SphereMap<Scalar> f(sample(c, {3}, [&](const VectorX<Scalar>& x) {
    const VectorX<Scalar> u = perturbed(*this, c, x, t).first;
    const Scalar len = u.norm();
    if (!(len > Scalar(1e-8))) throw ValidationError("rigidity family: perturbation passes through the origin");
    return VectorX<Scalar>(u / len);
  }));
  f.set_boundary_reference(
      ImmersionField<Scalar>(Field<Scalar>(c, {3}, reference().values() * base_rotation.transpose())));
  return f;
}

template <typename Scalar>
VectorOneFormField<Scalar> PerturbedRotationFamily<Scalar>::map_differential(Scalar t) const {
  const auto c = chart();
  return VectorOneFormField<Scalar>(sample(c, {2, 3}, [&](const VectorX<Scalar>& x) {
    const auto [u, du] = perturbed(*this, c, x, t);
    const Scalar len = u.norm();
    const VectorX<Scalar> f = u / len;
    MatrixX<Scalar> df = du / len;
    df -= (df * f) * f.transpose();
    return df;
  }));
}

template <typename Scalar>
std::vector<RigidityReport<Scalar>> rigidity_experiment(const PerturbedRotationFamily<Scalar>& family,
                                                        const std::vector<Scalar>& t_values, int random_rotations,
                                                        std::uint64_t seed) {
  const auto g = family.metric();
  const auto iota = family.reference();
  const auto diota = family.reference_differential();
  std::vector<RigidityReport<Scalar>> out;
  for (const Scalar t : t_values) {
    auto r = rigidity_report(family.map(t), family.map_differential(t), g, iota, diota, random_rotations, seed);
    r.t = t;
    out.push_back(std::move(r));
  }
  return out;
}

template <typename Scalar>
Scalar loglog_slope(const std::vector<Scalar>& x, const std::vector<Scalar>& y) {
  require(x.size() == y.size() && x.size() >= 2, "loglog_slope: need at least two matching samples");
  const Index n = static_cast<Index>(x.size());
  VectorX<Scalar> lx(n), ly(n);
  for (Index i = 0; i < n; ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const VectorX<Scalar> cx = lx.array() - lx.mean();
  const VectorX<Scalar> cy = ly.array() - ly.mean();
  return cx.dot(cy) / cx.squaredNorm();
}

template class SphereMap<double>;
template MatrixX<double> sphere_tangent_frame(const VectorX<double>&);
template double so_distance(const MatrixX<double>&);
template MatrixX<double> cofactor_matrix(const MatrixX<double>&);
template MatrixX<double> frame_differential(const MatrixX<double>&, const MatrixX<double>&, const MatrixX<double>&);
template Field<double> dist_to_so(const VectorOneFormField<double>&, const MetricField<double>&,
                                  const SphereMap<double>&);
template VectorOneFormField<double> riemannian_cofactor(const VectorOneFormField<double>&, const MetricField<double>&,
                                                        const SphereMap<double>&);
template VectorOneFormField<double> differential(const ImmersionField<double>&);
template double piola_residual(const SphereMap<double>&, const VectorOneFormField<double>&,
                               const MetricField<double>&, int);
template double piola_residual(const SphereMap<double>&, const MetricField<double>&, int);
template RigidMotion<double> best_sphere_rigid_motion(const SphereMap<double>&, const ImmersionField<double>&,
                                                      const MetricField<double>&);
template double rigid_motion_gap(const VectorOneFormField<double>&, const VectorOneFormField<double>&,
                                 const MatrixX<double>&, const MetricField<double>&);
template MatrixX<double> random_rotation(int, std::mt19937_64&);
template RigidityReport<double> rigidity_report(const SphereMap<double>&, const VectorOneFormField<double>&,
                                                const MetricField<double>&, const ImmersionField<double>&,
                                                const VectorOneFormField<double>&, int, std::uint64_t);
template struct PerturbedRotationFamily<double>;
template std::vector<RigidityReport<double>> rigidity_experiment(const PerturbedRotationFamily<double>&,
                                                                 const std::vector<double>&, int, std::uint64_t);
template double loglog_slope(const std::vector<double>&, const std::vector<double>&);

}  // namespace ff
