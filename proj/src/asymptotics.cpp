#include "ff/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "ff/fixtures.hpp"
#include "ff/immersion.hpp"
#include "ff/parallel.hpp"

namespace ff {

template <typename Scalar>
std::size_t MembraneSequence<Scalar>::index_of(Scalar eps) const {
  for (std::size_t i = 0; i < eps_values.size(); ++i)
    if (eps_values[i] == eps) return i;
  throw ValidationError("membrane sequence: eps not in the sequence");
}

namespace {

using V = VectorX<double>;
using M = MatrixX<double>;

// Value of Phi^e o F^e at x and the Jacobian DF^e.
using Generator = std::function<std::pair<V, M>(double eps, const V& x)>;

MembraneSequence<double> build(const std::string& name, const std::vector<double>& eps_values,
                               MetricField<double> g, const Generator& gen, double rate) {
  MembraneSequence<double> seq;
  seq.name = name;
  seq.eps_values = eps_values;
  seq.metric_rate = rate;
  const auto& chart = g.chart();
  for (const double eps : eps_values) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    Field<double> f(chart, {3});
    for (Index p = 0; p < chart.num_points(); ++p) {
      const auto [value, DF] = gen(eps, chart.point(p));
      f.values().row(p) = value.transpose();
      const double det = DF.determinant();
      lo = std::min(lo, det);
      hi = std::max(hi, det);
    }
    if (!(lo > 0)) throw ValidationError("membrane sequence: F^eps is not orientation preserving");
    ImmersionField<double> imm(std::move(f));
    induced_metric(imm);  // throws on degenerate immersions
    seq.immersions.push_back(std::move(imm));
    seq.jacobian_range.emplace_back(lo, hi);
    seq.lipschitz = std::max({seq.lipschitz, hi, 1 / lo});
  }
  seq.g = std::move(g);
  return seq;
}

MetricField<double> identity_metric(const Chart<double>& chart) {
  return MetricField<double>(sample(chart, {2, 2}, [](const V&) { return M(M::Identity(2, 2)); }));
}

V point(double a, double b, double c) { return (V(3) << a, b, c).finished(); }

}  // namespace

const std::vector<std::string>& membrane_generators() {
  static const std::vector<std::string> names{"wrinkles", "sheared_wrinkles", "constant", "flat"};
  return names;
}

MembraneSequence<double> membrane_sequence(const std::string& generator, const std::vector<double>& eps_values,
                                           std::vector<int> resolution) {
  require(!eps_values.empty(), "membrane sequence: eps list is empty");
  for (std::size_t i = 0; i < eps_values.size(); ++i) {
    require(eps_values[i] > 0 && std::isfinite(eps_values[i]), "membrane sequence: eps values must be positive");
    require(i == 0 || eps_values[i] < eps_values[i - 1], "membrane sequence: eps values must strictly decrease");
  }
  require(resolution.empty() || resolution.size() == 2, "membrane sequence: resolution needs two entries");
  auto res = [&](int nx, int ny) { return resolution.empty() ? std::vector<int>{nx, ny} : resolution; };
  const M id = M::Identity(2, 2);

  if (generator == "wrinkles") {
    const Chart<double> chart(2, 1, {{0, 1}, {0, 1}}, res(513, 33));
    return build(generator, eps_values, identity_metric(chart), [id](double e, const V& x) {
      return std::pair{point(x[0], x[1], e * e * std::sin(x[0] / e)), id};
    }, 1.0);
  }
  if (generator == "sheared_wrinkles") {
    const Chart<double> chart(2, 1, {{0, 1}, {0, 1}}, res(257, 257));
    return build(generator, eps_values, identity_metric(chart), [](double e, const V& x) {
      const double s = std::sin(x[1] / e), c = std::cos(x[1] / e);
      const double u = x[0] + e * e * e * x[0] * (1 - x[0]) * s, v = x[1];
      M DF(2, 2);
      DF << 1 + e * e * e * (1 - 2 * x[0]) * s, e * e * x[0] * (1 - x[0]) * c, 0, 1;
      return std::pair{point(u, v, e * e * std::sin((u + 0.5 * v) / e)), DF};
    }, 1.0);
  }
  if (generator == "constant") {
    const auto r = res(33, 33);
    require(r[0] == r[1], "membrane sequence: the constant generator needs a square resolution");
    return build(generator, eps_values, induced_metric(fixtures::sphere_graph(1.0, r[0])), [id](double, const V& x) {
      const double z = std::sqrt(1 - x[0] * x[0] - x[1] * x[1]);
      return std::pair{point(x[0], x[1], z), id};
    }, std::numeric_limits<double>::quiet_NaN());
  }
  if (generator == "flat") {
    const Chart<double> chart(2, 1, {{0, 1}, {0, 1}}, res(33, 33));
    return build(generator, eps_values, identity_metric(chart), [id](double, const V& x) {
      return std::pair{point(x[0], x[1], 0), id};
    }, std::numeric_limits<double>::quiet_NaN());
  }
  throw ValidationError("unknown membrane generator '" + generator +
                        "' (expected wrinkles, sheared_wrinkles, constant or flat)");
}

template <typename Scalar>
MetricField<Scalar> pullback_metric(const MembraneSequence<Scalar>& seq, Scalar eps) {
  return induced_metric(seq.immersions[seq.index_of(eps)]);
}

template <typename Scalar>
SecondFormField<Scalar> pullback_second_form(const MembraneSequence<Scalar>& seq, Scalar eps) {
  return second_form(seq.immersions[seq.index_of(eps)]).B;
}

template <typename Scalar>
VectorFields<Scalar> default_vector_fields(const Chart<Scalar>& chart) {
  require(chart.dim() == 2, "default_vector_fields: chart must be two-dimensional");
  using Vec = VectorX<Scalar>;
  auto field = [&](auto fn) {
    return sample(chart, {2}, [&](const Vec& x) {
      Vec v(2);
      fn(x[0], x[1], v);
      return v;
    });
  };
  const Scalar pi = std::numbers::pi_v<Scalar>;
  return {field([](Scalar x, Scalar y, Vec& v) { v << 1 + y / 4, x / 5; }),
          field([](Scalar x, Scalar y, Vec& v) { v << 3 * x / 10, 1 + y / 10; }),
          field([pi](Scalar x, Scalar y, Vec& v) { v << 1 + x * y, std::sin(pi * y); }),
          field([](Scalar, Scalar, Vec& v) { v << 1, 1; })};
}

namespace {

template <typename Scalar>
void check_vector(const Field<Scalar>& X, const Chart<Scalar>& chart, const char* what) {
  require(X.chart() == chart && X.shape() == std::vector<int>{chart.dim()},
          std::string(what) + ": vector field must have shape {d} on the same chart");
}

}  // namespace

template <typename Scalar>
Field<Scalar> contract_connection(const Field<Scalar>& Delta, const Field<Scalar>& X, const Field<Scalar>& V) {
  const auto& chart = Delta.chart();
  const int d = chart.dim();
  require(Delta.shape() == std::vector<int>{d, d, d}, "contract_connection: connection must have shape {d, d, d}");
  check_vector(X, chart, "contract_connection");
  check_vector(V, chart, "contract_connection");
  Field<Scalar> out(chart, {d});
  parallel_for(chart.num_points(), [&](Index p) {
    for (int k = 0; k < d; ++k) {
      Scalar s = 0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s += X(p, i) * V(p, j) * Delta(p, (Index(k) * d + i) * d + j);
      out(p, k) = s;
    }
  });
  return out;
}

template <typename Scalar>
Field<Scalar> covariant_derivative(const ChristoffelField<Scalar>& G, const Field<Scalar>& X, const Field<Scalar>& V) {
  const auto& chart = G.chart();
  const int d = chart.dim();
  check_vector(X, chart, "covariant_derivative");
  check_vector(V, chart, "covariant_derivative");
  const Field<Scalar> dV = grad(V);  // (i, k)
  Field<Scalar> out = contract_connection(G.field(), X, V);
  parallel_for(chart.num_points(), [&](Index p) {
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i) out(p, k) += X(p, i) * dV(p, Index(i) * d + k);
  });
  return out;
}

template <typename Scalar>
Field<Scalar> lie_bracket(const Field<Scalar>& X, const Field<Scalar>& Y) {
  const auto& chart = X.chart();
  const int d = chart.dim();
  check_vector(X, chart, "lie_bracket");
  check_vector(Y, chart, "lie_bracket");
  const Field<Scalar> dX = grad(X), dY = grad(Y);
  Field<Scalar> out(chart, {d});
  parallel_for(chart.num_points(), [&](Index p) {
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i) out(p, k) += X(p, i) * dY(p, Index(i) * d + k) - Y(p, i) * dX(p, Index(i) * d + k);
  });
  return out;
}

template <typename Scalar>
Field<Scalar> bilinear(const Field<Scalar>& h, const Field<Scalar>& A, const Field<Scalar>& B) {
  const auto& chart = h.chart();
  const int d = chart.dim();
  require(h.shape() == std::vector<int>{d, d}, "bilinear: form must have shape {d, d}");
  check_vector(A, chart, "bilinear");
  check_vector(B, chart, "bilinear");
  Field<Scalar> out(chart, {});
  parallel_for(chart.num_points(), [&](Index p) {
    Scalar s = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s += h(p, Index(i) * d + j) * A(p, i) * B(p, j);
    out(p, 0) = s;
  });
  return out;
}

template <typename Scalar>
DecompositionFields<Scalar> error_decomposition_fields(const MetricField<Scalar>& g_hat, const MetricField<Scalar>& g,
                                                       const VectorFields<Scalar>& v) {
  require(g_hat.chart() == g.chart(), "error_decomposition: metrics live on different charts");
  const auto G = christoffel(g), Gh = christoffel(g_hat);
  const Field<Scalar> D = Gh.field() - G.field();
  const Field<Scalar> dg = g_hat.field() - g.field();
  const auto &X = v.X, &Y = v.Y, &Z = v.Z, &W = v.W;
  const Field<Scalar> XY = lie_bracket(X, Y);
  const Field<Scalar> nYZ = covariant_derivative(G, Y, Z), nXZ = covariant_derivative(G, X, Z);
  const Field<Scalar> hYZ = covariant_derivative(Gh, Y, Z), hXZ = covariant_derivative(Gh, X, Z);
  const Field<Scalar> hXhYZ = covariant_derivative(Gh, X, hYZ), hYhXZ = covariant_derivative(Gh, Y, hXZ);
  const Field<Scalar> hXYZ = covariant_derivative(Gh, XY, Z);
  const Field<Scalar> DYZ = contract_connection(D, Y, Z), DXZ = contract_connection(D, X, Z);

  DecompositionFields<Scalar> out;
  out.J[0] = bilinear(dg, hXhYZ, W);
  out.J[1] = bilinear(g.field(), contract_connection(D, X, nYZ), W);
  out.J[2] = bilinear(g.field(), covariant_derivative(G, X, DYZ), W);
  out.J[3] = Scalar(-1) * bilinear(dg, hYhXZ, W);
  out.J[4] = Scalar(-1) * bilinear(g.field(), contract_connection(D, Y, nXZ), W);
  out.J[5] = Scalar(-1) * bilinear(g.field(), covariant_derivative(G, Y, DXZ), W);
  out.J[6] = Scalar(-1) * bilinear(dg, hXYZ, W);
  out.J[7] = Scalar(-1) * bilinear(g.field(), contract_connection(D, XY, Z), W);
  out.remainder = bilinear(g.field(), contract_connection(D, X, DYZ) - contract_connection(D, Y, DXZ), W);
  const Field<Scalar> Rh = hXhYZ - hYhXZ - hXYZ;
  const Field<Scalar> R = covariant_derivative(G, X, nYZ) - covariant_derivative(G, Y, nXZ) -
                          covariant_derivative(G, XY, Z);
  out.exact = bilinear(g_hat.field(), Rh, W) - bilinear(g.field(), R, W);
  return out;
}

template <typename Scalar>
ErrorDecomposition<Scalar> error_decomposition(const MetricField<Scalar>& g_hat, const MetricField<Scalar>& g,
                                               const VectorFields<Scalar>& v, Scalar r, int dictionary_size) {
  require(r > 1, "error_decomposition: r must be > 1");
  const auto fields = error_decomposition_fields(g_hat, g, v);
  const TestDictionary<Scalar> dict(g.chart(), dictionary_size, r / (r - 1));
  ErrorDecomposition<Scalar> out;
  Field<Scalar> total = fields.J[0];
  for (int l = 0; l < 8; ++l) {
    out.J[l] = negative_norm_estimate(fields.J[l], dict);
    out.sum += out.J[l];
    if (l > 0) total += fields.J[l];
  }
  out.total = negative_norm_estimate(total, dict);
  out.remainder = negative_norm_estimate(fields.remainder, dict);
  out.exact = negative_norm_estimate(fields.exact, dict);
  return out;
}

template <typename Scalar>
ErrorDecomposition<Scalar> error_decomposition(const MembraneSequence<Scalar>& seq, Scalar eps,
                                               const VectorFields<Scalar>& v, Scalar r, int dictionary_size) {
  return error_decomposition(pullback_metric(seq, eps), seq.g, v, r, dictionary_size);
}

template <typename Scalar>
WeakLimitReport<Scalar> weak_limit_check(const MembraneSequence<Scalar>& seq, int dictionary_size, Scalar p,
                                         Scalar tol) {
  const std::size_t n = seq.size();
  require(n >= 3, "weak_limit_check: need at least three eps values");
  require(p > 1, "weak_limit_check: p must be > 1");
  const auto& chart = seq.chart();
  const TestDictionary<Scalar> dict(chart, dictionary_size, p / (p - 1));

  WeakLimitReport<Scalar> rep;
  rep.eps_values = seq.eps_values;
  std::vector<SecondFormField<Scalar>> forms;
  for (const Scalar eps : seq.eps_values) {
    forms.push_back(pullback_second_form(seq, eps));
    rep.pairings.push_back(dict.pairings(forms.back()));
    rep.second_form_norms.push_back(lp_norm(forms.back().field(), p));
  }
  for (std::size_t i = 0; i + 1 < n; ++i)
    rep.deltas.push_back((rep.pairings[i + 1] - rep.pairings[i]).rowwise().norm().maxCoeff());
  for (std::size_t i = 0; i + 1 < rep.deltas.size(); ++i) rep.delta_ratios.push_back(rep.deltas[i] / rep.deltas[i + 1]);

  const Scalar ec = seq.eps_values[n - 2], ef = seq.eps_values[n - 1], q = Scalar(kRichardsonOrder);
  rep.limit_pairings = richardson<Scalar>(rep.pairings[n - 2], rep.pairings[n - 1], ec, ef, q);

  // L^2 projection onto span{zeta_j}: Gram c = P.
  MatrixX<Scalar> Zeta(chart.num_points(), dict.count());
  for (Index j = 0; j < dict.count(); ++j) Zeta.col(j) = dict.values(j);
  VectorX<Scalar> w(chart.num_points());
  for (Index pt = 0; pt < chart.num_points(); ++pt) w[pt] = chart.quadrature_weight(pt);
  const MatrixX<Scalar> gram = Zeta.transpose() * w.asDiagonal() * Zeta;
  const MatrixX<Scalar> coeff = gram.ldlt().solve(rep.limit_pairings);
  const int d = chart.dim();
  rep.weak_limit = SecondFormField<Scalar>(
      Field<Scalar>(chart, {1, d, d}, typename Field<Scalar>::Storage(Zeta * coeff)));
  for (const auto& B : forms) rep.strong_distance.push_back(lp_norm(B.field() - rep.weak_limit.field(), p));

  const ImmersionField<Scalar> phi_lim(
      richardson<Scalar>(seq.immersions[n - 2].field(), seq.immersions[n - 1].field(), ec, ef, q));
  rep.limit_form = second_form(phi_lim).B;
  rep.extrapolation_gap = (dict.pairings(rep.limit_form) - rep.limit_pairings).rowwise().norm().maxCoeff();

  rep.gauss = gauss_residual(seq.g, rep.limit_form, p);
  rep.threshold = tol >= 0 ? tol : compatibility_threshold(seq.g, rep.limit_form, p);
  rep.gauss_ok = rep.gauss <= rep.threshold;
  rep.weak_gauss = gauss_residual(seq.g, rep.weak_limit, p);
  rep.weak_not_strong = rep.strong_distance.back() >= Scalar(0.1) * rep.strong_distance.front();
  return rep;
}

template struct MembraneSequence<double>;
template MetricField<double> pullback_metric(const MembraneSequence<double>&, double);
template SecondFormField<double> pullback_second_form(const MembraneSequence<double>&, double);
template VectorFields<double> default_vector_fields(const Chart<double>&);
template Field<double> covariant_derivative(const ChristoffelField<double>&, const Field<double>&,
                                            const Field<double>&);
template Field<double> contract_connection(const Field<double>&, const Field<double>&, const Field<double>&);
template Field<double> lie_bracket(const Field<double>&, const Field<double>&);
template Field<double> bilinear(const Field<double>&, const Field<double>&, const Field<double>&);
template DecompositionFields<double> error_decomposition_fields(const MetricField<double>&, const MetricField<double>&,
                                                                const VectorFields<double>&);
template ErrorDecomposition<double> error_decomposition(const MetricField<double>&, const MetricField<double>&,
                                                        const VectorFields<double>&, double, int);
template ErrorDecomposition<double> error_decomposition(const MembraneSequence<double>&, double,
                                                        const VectorFields<double>&, double, int);
template WeakLimitReport<double> weak_limit_check(const MembraneSequence<double>&, int, double, double);

}  // namespace ff
