#ifndef FF_ASYMPTOTICS_HPP
#define FF_ASYMPTOTICS_HPP

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ff/calculus.hpp"
#include "ff/curvature.hpp"
#include "ff/field.hpp"

namespace ff {

/// A family of codimension-one membranes Phi^e o F^e sampled on one chart,
/// indexed by decreasing eps, with the base metric g of the limit.
template <typename Scalar>
struct MembraneSequence {
  std::string name;
  std::vector<Scalar> eps_values;
  MetricField<Scalar> g;
  /// Composed immersions Phi^e o F^e, one per eps.
  std::vector<ImmersionField<Scalar>> immersions;
  /// Range of det DF^e over the chart, one pair per eps.
  std::vector<std::pair<Scalar, Scalar>> jacobian_range;
  /// Uniform bi-Lipschitz bound: every det DF^e lies in [1/L, L].
  Scalar lipschitz = 1;
  /// Analytic decay rate of |g^e - g|_{W^{1,p'}} in eps (NaN when the
  /// generator has no decay).
  Scalar metric_rate = std::numeric_limits<Scalar>::quiet_NaN();

  std::size_t size() const { return eps_values.size(); }
  const Chart<Scalar>& chart() const { return g.chart(); }
  /// Position of eps in eps_values; ValidationError if absent.
  std::size_t index_of(Scalar eps) const;
};

/// Built-in generators on [0, 1]^2:
///   wrinkles          Phi(x, y) = (x, y, e^2 sin(x/e)), F = id, g = I;
///                     |g^e - g|_{W^{1,p'}} ~ e (metric_rate 1), default 513 x 33
///   sheared_wrinkles  Phi(u, v) = (u, v, e^2 sin((u + v/2)/e)) composed with
///                     F(x, y) = (x + e^3 x(1-x) sin(y/e), y), g = I; rate 1, default 257 x 257
///   constant          the unit sphere cap graph over [-0.35, 0.35]^2 for every e,
///                     g its own induced metric, default 33 x 33
///   flat              (x, y, 0), g = I, default 33 x 33
const std::vector<std::string>& membrane_generators();

/// eps_values must be strictly decreasing and positive. An empty resolution
/// selects the generator default.
MembraneSequence<double> membrane_sequence(const std::string& generator, const std::vector<double>& eps_values,
                                           std::vector<int> resolution = {});

/// Induced metric of the composed immersion at eps.
template <typename Scalar>
MetricField<Scalar> pullback_metric(const MembraneSequence<Scalar>& seq, Scalar eps);

/// Second form of the composed immersion at eps.
template <typename Scalar>
SecondFormField<Scalar> pullback_second_form(const MembraneSequence<Scalar>& seq, Scalar eps);

/// Four coordinate vector fields (shape {d} each).
template <typename Scalar>
struct VectorFields {
  Field<Scalar> X, Y, Z, W;
};

/// X = (1 + y/4, x/5), Y = (3x/10, 1 + y/10), Z = (1 + xy, sin(pi y)), W = (1, 1).
template <typename Scalar>
VectorFields<Scalar> default_vector_fields(const Chart<Scalar>& chart);

/// nabla_X V = X^i (d_i V^k + Gamma^k_ij V^j).
template <typename Scalar>
Field<Scalar> covariant_derivative(const ChristoffelField<Scalar>& G, const Field<Scalar>& X, const Field<Scalar>& V);

/// X^i V^j Delta^k_ij for a (k, i, j) tensor Delta.
template <typename Scalar>
Field<Scalar> contract_connection(const Field<Scalar>& Delta, const Field<Scalar>& X, const Field<Scalar>& V);

/// [X, Y] = X^i d_i Y - Y^i d_i X.
template <typename Scalar>
Field<Scalar> lie_bracket(const Field<Scalar>& X, const Field<Scalar>& Y);

/// h(A, B) for a {d, d} field h, scalar field.
template <typename Scalar>
Field<Scalar> bilinear(const Field<Scalar>& h, const Field<Scalar>& A, const Field<Scalar>& B);

/// The eight-term split of (R^ - R)(X, Y, Z, W), D = Gamma^ - Gamma:
///   J1 =  (g^ - g)(nabla^_X nabla^_Y Z, W)     J2 =  g(D(X, nabla_Y Z), W)
///   J3 =  g(nabla_X D(Y, Z), W)                J4 = -(g^ - g)(nabla^_Y nabla^_X Z, W)
///   J5 = -g(D(Y, nabla_X Z), W)                J6 = -g(nabla_Y D(X, Z), W)
///   J7 = -(g^ - g)(nabla^_[X,Y] Z, W)          J8 = -g(D([X, Y], Z), W)
/// The eight terms omit g(D(X, D(Y, Z)) - D(Y, D(X, Z)), W), reported as
/// `remainder`, so exact = J1 + ... + J8 + remainder holds identically.
template <typename Scalar>
struct DecompositionFields {
  std::array<Field<Scalar>, 8> J;
  Field<Scalar> remainder;
  /// g^(R^(X,Y)Z, W) - g(R(X,Y)Z, W) evaluated with the same operators.
  Field<Scalar> exact;
};

template <typename Scalar>
DecompositionFields<Scalar> error_decomposition_fields(const MetricField<Scalar>& g_hat, const MetricField<Scalar>& g,
                                                       const VectorFields<Scalar>& v);

/// Negative-norm sizes of the decomposition.
template <typename Scalar>
struct ErrorDecomposition {
  std::array<Scalar, 8> J{};
  /// J[0] + ... + J[7].
  Scalar sum = 0;
  /// Norm of the summed field J1 + ... + J8.
  Scalar total = 0;
  Scalar remainder = 0;
  Scalar exact = 0;
};

/// Each field measured with negative_norm_estimate(., r, dictionary_size).
template <typename Scalar>
ErrorDecomposition<Scalar> error_decomposition(const MetricField<Scalar>& g_hat, const MetricField<Scalar>& g,
                                               const VectorFields<Scalar>& v, Scalar r = Scalar(1.5),
                                               int dictionary_size = 8);

template <typename Scalar>
ErrorDecomposition<Scalar> error_decomposition(const MembraneSequence<Scalar>& seq, Scalar eps,
                                               const VectorFields<Scalar>& v, Scalar r = Scalar(1.5),
                                               int dictionary_size = 8);

/// Richardson extrapolation to eps -> 0 of values a(eps_coarse), a(eps_fine)
/// with error ~ eps^q.
template <typename Scalar, typename T>
T richardson(const T& coarse, const T& fine, Scalar eps_coarse, Scalar eps_fine, Scalar q) {
  const Scalar rho = std::pow(eps_coarse / eps_fine, q);
  return (rho * fine - coarse) * (Scalar(1) / (rho - Scalar(1)));
}

template <typename Scalar>
struct WeakLimitReport {
  std::vector<Scalar> eps_values;
  /// Dictionary pairings of B^e: count x components, one per eps.
  std::vector<MatrixX<Scalar>> pairings;
  /// max_j |P_{i+1} - P_i| (Euclidean over components), length size - 1.
  std::vector<Scalar> deltas;
  /// deltas[i] / deltas[i+1].
  std::vector<Scalar> delta_ratios;
  /// Richardson-extrapolated pairings from the two smallest eps.
  MatrixX<Scalar> limit_pairings;
  /// Weak-limit surrogate: L^2 projection of limit_pairings onto the
  /// dictionary span.
  SecondFormField<Scalar> weak_limit;
  /// |B^e - weak_limit|_{L^p}, one per eps.
  std::vector<Scalar> strong_distance;
  /// Second form of the Richardson-extrapolated composed immersion.
  SecondFormField<Scalar> limit_form;
  /// max_j |<limit_form, zeta_j> - limit_pairings|.
  Scalar extrapolation_gap = 0;
  /// |B^e|_{L^p}, one per eps.
  std::vector<Scalar> second_form_norms;
  /// gauss_residual(g, limit_form) against the calibrated (or given) threshold.
  Scalar gauss = 0;
  Scalar threshold = 0;
  bool gauss_ok = false;
  /// gauss_residual(g, weak_limit), informational.
  Scalar weak_gauss = 0;
  /// strong_distance stays above 0.1 x its first value.
  bool weak_not_strong = false;
};

/// Richardson exponent used for the limit (error ~ eps^2).
inline constexpr double kRichardsonOrder = 2;

/// Dictionary of the given size normalised with the exponent dual to p.
template <typename Scalar>
WeakLimitReport<Scalar> weak_limit_check(const MembraneSequence<Scalar>& seq, int dictionary_size, Scalar p = 4,
                                         Scalar tol = -1);

}  // namespace ff

#endif  // FF_ASYMPTOTICS_HPP
