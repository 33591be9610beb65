#ifndef FF_STABILITY_HPP
#define FF_STABILITY_HPP

#include <string>
#include <vector>

#include "ff/cartan.hpp"
#include "ff/immersion.hpp"

namespace ff {

/// Output of the frame/position integration for one triple (g, B, N).
template <typename Scalar>
struct Reconstruction {
  ConnectionForm<Scalar> W;
  CoframeField<Scalar> coframe;
  FrameField<Scalar> A;
  ImmersionField<Scalar> f;
  Scalar holonomy = 0;
  /// first_structural_residual(coframe, W, p).
  Scalar structural = 0;
  /// lp_norm(induced_metric(f) - g, p).
  Scalar isometry_defect = 0;
};

/// integrate_pfaff from A0, then integrate_poincare from f0, both swept from
/// the lowest grid corner.
template <typename Scalar>
Reconstruction<Scalar> reconstruct(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B,
                                   const NormalConnectionField<Scalar>& N, const MatrixX<Scalar>& A0,
                                   const VectorX<Scalar>& f0, Scalar p = 4);

/// Closed-form compatible families indexed by s >= 0 on a fixed chart:
///   sphere_radius    graph of the sphere of radius 1/(1+s) over [-0.35, 0.35]^2:
///                    g = I + x x^T / z^2, B = -g (1+s)
///   cylinder_radius  (r cos u, r sin u, v), r = 1/(1+s), (u, v) in [0, 1.5] x [0, 1]:
///                    g = diag(r^2, 1), B = diag(-r, 0)
///   graph_amplitude  graph of c x y over [-1, 1]^2, c = 1 + s:
///                    g = I + c^2 (y, x)(y, x)^T, B_12 = c / sqrt(1 + c^2 (x^2 + y^2))
/// N = 0 throughout. Forms are sampled from the formulas, not differentiated.
const std::vector<std::string>& compatible_families();

FundamentalForms<double> compatible_forms(const std::string& family, double s, int n);

/// The family's immersion at s, sampled on the same chart.
ImmersionField<double> compatible_immersion(const std::string& family, double s, int n);

struct LipschitzSample {
  double s = 0;
  /// sobolev_norm(g_s - g_0, 1, p) + lp_norm(B_s - B_0, p).
  double t_distance = 0;
  /// quotient_distance(f_s, f_0, 2, p).
  double v_distance = 0;
  double ratio = 0;
  /// sobolev_norm(A_s - A_0, 1, p) and lp_norm(W_s - W_0, p); pfaff_ratio is
  /// NaN when W_s equals W_0 up to rounding.
  double frame_distance = 0;
  double connection_distance = 0;
  double pfaff_ratio = 0;
  /// sobolev_norm(w_s - w_0, 1, p) and sobolev_norm(g_s - g_0, 1, p).
  double coframe_distance = 0;
  double metric_distance = 0;
  double coframe_ratio = 0;
  double holonomy = 0;
  double gauss = 0;
  bool compatible = true;
};

struct LipschitzStudy {
  std::string family;
  double p = 4;
  int resolution = 33;
  std::vector<LipschitzSample> samples;
  /// Least-squares slope of log v_distance against log t_distance (s > 0 only).
  double slope = 0;
  /// max / min over s > 0; ratios that are undefined (NaN) are skipped and
  /// a spread with no defined ratio is 0.
  double ratio_spread = 0;
  double pfaff_spread = 0;
  double coframe_spread = 0;
};

/// Reconstructs every member with A0 = I, f0 = 0 and compares with s = 0.
/// Incompatible members are reported through `compatible`, not thrown.
LipschitzStudy lipschitz_study(const std::string& family, const std::vector<double>& s_values, int n = 33,
                               double p = 4);

/// quotient_distance between reconstructions of the same triple from A0 = I
/// and A0 = Q (Q in SO(3)).
double gauge_distance(const FundamentalForms<double>& forms, const MatrixX<double>& Q, double p = 4);

}  // namespace ff

#endif  // FF_STABILITY_HPP
