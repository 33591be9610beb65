#include "ff/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "ff/curvature.hpp"
#include "ff/fixtures.hpp"
#include "ff/rigidity.hpp"

namespace ff {

template <typename Scalar>
Reconstruction<Scalar> reconstruct(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B,
                                   const NormalConnectionField<Scalar>& N, const MatrixX<Scalar>& A0,
                                   const VectorX<Scalar>& f0, Scalar p) {
  require(B.chart() == g.chart() && N.chart() == g.chart(), "reconstruct: fields live on different charts");
  require(f0.size() == g.chart().ambient_dim(), "reconstruct: f0 has the wrong length");
  Reconstruction<Scalar> out;
  out.W = connection_form(g, B, N);
  out.coframe = orthonormal_frame(g).coframe;
  out.A = integrate_pfaff(out.W, A0);
  out.f = integrate_poincare(out.coframe, out.A, f0);
  out.holonomy = holonomy_defect(out.W);
  out.structural = first_structural_residual(out.coframe, out.W, p);
  out.isometry_defect = lp_norm(induced_metric(out.f).field() - g.field(), p);
  return out;
}

namespace {

using V = VectorX<double>;
using M = MatrixX<double>;

M mat2(double a, double b, double c, double d) { return (M(2, 2) << a, b, c, d).finished(); }

Chart<double> family_chart(const std::string& family, int n) {
  if (family == "sphere_radius") return Chart<double>::square(2, 1, -0.35, 0.35, n);
  if (family == "cylinder_radius") return Chart<double>(2, 1, {{0, 1.5}, {0, 1}}, {n, n});
  if (family == "graph_amplitude") return Chart<double>::square(2, 1, -1, 1, n);
  throw ValidationError("unknown compatible family '" + family +
                        "' (expected sphere_radius, cylinder_radius or graph_amplitude)");
}

double spread(const std::vector<double>& v) {
  if (v.empty()) return 0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

}  // namespace

const std::vector<std::string>& compatible_families() {
  static const std::vector<std::string> names{"sphere_radius", "cylinder_radius", "graph_amplitude"};
  return names;
}

FundamentalForms<double> compatible_forms(const std::string& family, double s, int n) {
  require(s > -1 && std::isfinite(s), "compatible_forms: s must be finite and > -1");
  const auto chart = family_chart(family, n);
  std::function<std::pair<M, M>(const V&)> forms;
  if (family == "sphere_radius") {
    const double r = 1 / (1 + s);
    fixtures::sphere_graph(r, 3);  // validates the radius against the chart
    forms = [r](const V& x) {
      const double z2 = r * r - x.squaredNorm();
      const M g = M::Identity(2, 2) + x * x.transpose() / z2;
      return std::pair{g, M(-g / r)};
    };
  } else if (family == "cylinder_radius") {
    const double r = 1 / (1 + s);
    forms = [r](const V&) { return std::pair{mat2(r * r, 0, 0, 1), mat2(-r, 0, 0, 0)}; };
  } else {
    const double c = 1 + s;
    forms = [c](const V& x) {
      const V grad = (V(2) << c * x[1], c * x[0]).finished();
      const double w = std::sqrt(1 + grad.squaredNorm());
      return std::pair{M(M::Identity(2, 2) + grad * grad.transpose()), mat2(0, c / w, c / w, 0)};
    };
  }
  Field<double> g(chart, {2, 2}), B(chart, {1, 2, 2});
  for (Index p = 0; p < chart.num_points(); ++p) {
    const auto [gp, Bp] = forms(chart.point(p));
    g.block(p, 2, 2) = gp;
    B.block(p, 2, 2) = Bp;
  }
  FundamentalForms<double> out;
  out.g = MetricField<double>(std::move(g));
  out.B = SecondFormField<double>(std::move(B));
  out.N = NormalConnectionField<double>::zero(chart);
  return out;
}

ImmersionField<double> compatible_immersion(const std::string& family, double s, int n) {
  const auto chart = family_chart(family, n);
  require(s > -1 && std::isfinite(s), "compatible_immersion: s must be finite and > -1");
  if (family == "sphere_radius") return fixtures::sphere_graph(1 / (1 + s), n);
  const double r = 1 / (1 + s), c = 1 + s;
  const bool cylinder = family == "cylinder_radius";
  return ImmersionField<double>(sample(chart, {3}, [&](const V& x) {
    return cylinder ? V((V(3) << r * std::cos(x[0]), r * std::sin(x[0]), x[1]).finished())
                    : V((V(3) << x[0], x[1], c * x[0] * x[1]).finished());
  }));
}

LipschitzStudy lipschitz_study(const std::string& family, const std::vector<double>& s_values, int n, double p) {
  require(p > 2, "lipschitz_study: p must exceed the dimension 2");
  require(!s_values.empty(), "lipschitz_study: s list is empty");
  const M A0 = M::Identity(3, 3);
  const V f0 = V::Zero(3);
  const auto base = compatible_forms(family, 0.0, n);
  const auto rec0 = reconstruct(base.g, base.B, base.N, A0, f0, p);
  // Connection gaps below this are rounding noise (the cylinder's W does not depend on s).
  const double noise = 1e-12 * (1 + lp_norm(rec0.W.field(), p));

  LipschitzStudy study;
  study.family = family;
  study.p = p;
  study.resolution = n;
  study.samples.resize(s_values.size());
  for (std::size_t i = 0; i < s_values.size(); ++i) {
    const double s = s_values[i];
    const auto forms = compatible_forms(family, s, n);
    const auto rec = reconstruct(forms.g, forms.B, forms.N, A0, f0, p);
    auto& out = study.samples[i];
    out.s = s;
    out.metric_distance = sobolev_norm(forms.g.field() - base.g.field(), 1, p);
    out.t_distance = out.metric_distance + lp_norm(forms.B.field() - base.B.field(), p);
    out.v_distance = quotient_distance(rec.f, rec0.f, 2, p);
    out.frame_distance = sobolev_norm(rec.A.field() - rec0.A.field(), 1, p);
    out.connection_distance = lp_norm(rec.W.field() - rec0.W.field(), p);
    out.coframe_distance = sobolev_norm(rec.coframe.field() - rec0.coframe.field(), 1, p);
    out.holonomy = rec.holonomy;
    const auto gcr = gcr_residuals(forms.g, forms.B, forms.N, p);
    out.gauss = gcr.gauss;
    out.compatible = gcr.compatible;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.ratio = out.t_distance > 0 ? out.v_distance / out.t_distance : nan;
    out.pfaff_ratio = out.connection_distance > noise ? out.frame_distance / out.connection_distance : nan;
    out.coframe_ratio = out.metric_distance > 0 ? out.coframe_distance / out.metric_distance : nan;
  }

  std::vector<double> t, v, ratio, pfaff, coframe;
  for (const auto& smp : study.samples) {
    if (!(smp.s != 0 && smp.t_distance > 0)) continue;
    t.push_back(smp.t_distance);
    v.push_back(smp.v_distance);
    ratio.push_back(smp.ratio);
    if (std::isfinite(smp.pfaff_ratio)) pfaff.push_back(smp.pfaff_ratio);
    if (std::isfinite(smp.coframe_ratio)) coframe.push_back(smp.coframe_ratio);
  }
  study.slope = t.size() >= 2 ? loglog_slope(t, v) : std::numeric_limits<double>::quiet_NaN();
  study.ratio_spread = spread(ratio);
  study.pfaff_spread = spread(pfaff);
  study.coframe_spread = spread(coframe);
  return study;
}

double gauge_distance(const FundamentalForms<double>& forms, const MatrixX<double>& Q, double p) {
  require_special_orthogonal<double>(Q, 1e-10, "gauge_distance: Q");
  const V f0 = V::Zero(Q.rows());
  const auto a = reconstruct(forms.g, forms.B, forms.N, M(M::Identity(Q.rows(), Q.cols())), f0, p);
  const auto b = reconstruct(forms.g, forms.B, forms.N, Q, f0, p);
  return quotient_distance(b.f, a.f, 2, p);
}

template struct Reconstruction<double>;
template Reconstruction<double> reconstruct(const MetricField<double>&, const SecondFormField<double>&,
                                            const NormalConnectionField<double>&, const MatrixX<double>&,
                                            const VectorX<double>&, double);

}  // namespace ff
