#include "ff/calculus.hpp"

#include <cmath>
#include <numbers>

namespace ff {

namespace {

// Derivative of samples u[0..n-1] (stride `step` in `data`) at index i.
template <typename Scalar>
Scalar stencil(const Scalar* data, Index step, int n, int i, Scalar h) {
  auto u = [&](int m) { return data[Index(m) * step]; };
  if (i > 0 && i < n - 1) return (u(i + 1) - u(i - 1)) / (2 * h);
  if (n >= 7) {
    // Central stencil with a quintic-extrapolated ghost value.
    if (i == 0) {
      return (-6 * u(0) + 16 * u(1) - 20 * u(2) + 15 * u(3) - 6 * u(4) + u(5)) / (2 * h);
    }
    const int e = n - 1;
    return (6 * u(e) - 16 * u(e - 1) + 20 * u(e - 2) - 15 * u(e - 3) + 6 * u(e - 4) - u(e - 5)) /
           (2 * h);
  }
  if (i == 0) return (-3 * u(0) + 4 * u(1) - u(2)) / (2 * h);
  const int e = n - 1;
  return (3 * u(e) - 4 * u(e - 1) + u(e - 2)) / (2 * h);
}

}  // namespace

template <typename Scalar>
Field<Scalar> partial(const Field<Scalar>& field, int axis) {
  const auto& chart = field.chart();
  require(axis >= 0 && axis < chart.dim(), "partial: axis out of range");
  Field<Scalar> out(chart, field.shape());
  const Index nc = field.components();
  const Index step = chart.stride(axis) * nc;
  const int n = chart.resolution(axis);
  const Scalar h = chart.spacing(axis);
  const Scalar* src = field.values().data();
  Scalar* dst = out.values().data();
  for (Index p = 0; p < chart.num_points(); ++p) {
    const int i = chart.axis_index(p, axis);
    const Index line_start = (p - Index(i) * chart.stride(axis)) * nc;
    for (Index c = 0; c < nc; ++c)
      dst[p * nc + c] = stencil(src + line_start + c, step, n, i, h);
  }
  return out;
}

template <typename Scalar>
Field<Scalar> grad(const Field<Scalar>& field) {
  const auto& chart = field.chart();
  const int d = chart.dim();
  std::vector<int> shape{d};
  shape.insert(shape.end(), field.shape().begin(), field.shape().end());
  Field<Scalar> out(chart, shape);
  const Index nc = field.components();
  for (int a = 0; a < d; ++a) {
    const Field<Scalar> da = partial(field, a);
    out.values().middleCols(Index(a) * nc, nc) = da.values();
  }
  return out;
}

template <typename Scalar>
static Scalar weighted_lp(const Field<Scalar>& field, Scalar p, const VectorX<Scalar>* volume) {
  require(p >= 1, "lp_norm: p must be >= 1");
  const auto& chart = field.chart();
  if (std::isinf(static_cast<double>(p))) {
    if (field.num_points() == 0) return 0;
    return field.values().rowwise().norm().maxCoeff();
  }
  Scalar sum = 0;
  for (Index p_idx = 0; p_idx < chart.num_points(); ++p_idx) {
    Scalar w = chart.quadrature_weight(p_idx);
    if (volume) w *= (*volume)[p_idx];
    const Scalar mag = field.values().row(p_idx).norm();
    if (mag != 0) sum += std::pow(mag, p) * w;
  }
  return std::pow(sum, Scalar(1) / p);
}

template <typename Scalar>
Scalar lp_norm(const Field<Scalar>& field, Scalar p) {
  return weighted_lp<Scalar>(field, p, nullptr);
}

template <typename Scalar>
Scalar lp_norm(const Field<Scalar>& field, Scalar p, const MetricField<Scalar>& g) {
  require(field.chart() == g.chart(), "lp_norm: metric lives on a different chart");
  VectorX<Scalar> vol(g.num_points());
  for (Index q = 0; q < g.num_points(); ++q) vol[q] = std::sqrt(g.at(q).determinant());
  return weighted_lp<Scalar>(field, p, &vol);
}

template <typename Scalar>
Scalar sobolev_norm(const Field<Scalar>& field, int order, Scalar p) {
  require(order == 1 || order == 2, "sobolev_norm: order must be 1 or 2");
  Field<Scalar> d1 = grad(field);
  Scalar total = lp_norm(field, p) + lp_norm(d1, p);
  if (order == 2) total += lp_norm(grad(d1), p);
  return total;
}

template <typename Scalar>
VectorX<Scalar> pair(const Field<Scalar>& field, const VectorX<Scalar>& zeta) {
  const auto& chart = field.chart();
  require(zeta.size() == chart.num_points(), "pair: test field has wrong length");
  VectorX<Scalar> out = VectorX<Scalar>::Zero(field.components());
  for (Index p = 0; p < chart.num_points(); ++p) {
    const Scalar w = chart.quadrature_weight(p) * zeta[p];
    if (w != 0) out += w * field.values().row(p).transpose();
  }
  return out;
}

template <typename Scalar>
TestDictionary<Scalar>::TestDictionary(const Chart<Scalar>& chart, int size, Scalar q)
    : chart_(chart), size_(size), q_(q) {
  require(size >= 1, "dictionary: size must be >= 1");
  require(q >= 1, "dictionary: dual exponent must be >= 1");
  const int d = chart.dim();
  const Scalar pi = std::numbers::pi_v<Scalar>;
  std::vector<int> freq(d, 1);
  while (true) {
    VectorX<Scalar> v(chart.num_points());
    MatrixX<Scalar> g(chart.num_points(), d);
    for (Index p = 0; p < chart.num_points(); ++p) {
      const auto x = chart.point(p);
      std::vector<Scalar> s(d), c(d);
      for (int a = 0; a < d; ++a) {
        const Scalar len = chart.upper(a) - chart.lower(a);
        const Scalar k = Scalar(freq[a]) * pi / len;
        s[a] = std::sin(k * (x[a] - chart.lower(a)));
        c[a] = k * std::cos(k * (x[a] - chart.lower(a)));
      }
      Scalar prod = 1;
      for (int a = 0; a < d; ++a) prod *= s[a];
      v[p] = prod;
      for (int a = 0; a < d; ++a) {
        Scalar partial_prod = c[a];
        for (int b = 0; b < d; ++b)
          if (b != a) partial_prod *= s[b];
        g(p, a) = partial_prod;
      }
    }
    // Unit discrete W^{1,q} norm.
    Scalar sv = 0, sg = 0;
    for (Index p = 0; p < chart.num_points(); ++p) {
      const Scalar w = chart.quadrature_weight(p);
      sv += std::pow(std::abs(v[p]), q) * w;
      sg += std::pow(g.row(p).norm(), q) * w;
    }
    const Scalar norm = std::pow(sv, 1 / q) + std::pow(sg, 1 / q);
    values_.push_back(v / norm);
    grads_.push_back(g / norm);
    freqs_.push_back(freq);

    int a = d - 1;
    while (a >= 0 && freq[a] == size) freq[a--] = 1;
    if (a < 0) break;
    ++freq[a];
  }
}

template <typename Scalar>
MatrixX<Scalar> TestDictionary<Scalar>::pairings(const Field<Scalar>& field) const {
  require(field.chart() == chart_, "dictionary: field lives on a different chart");
  MatrixX<Scalar> out(count(), field.components());
  for (Index j = 0; j < count(); ++j) out.row(j) = pair(field, values_[j]).transpose();
  return out;
}

template <typename Scalar>
Scalar negative_norm_estimate(const Field<Scalar>& field, const TestDictionary<Scalar>& dict) {
  const MatrixX<Scalar> pr = dict.pairings(field);
  return pr.rows() ? pr.rowwise().norm().maxCoeff() : Scalar(0);
}

template <typename Scalar>
Scalar negative_norm_estimate(const Field<Scalar>& field, Scalar r, int dictionary_size) {
  require(r > 1, "negative_norm_estimate: r must be > 1");
  const TestDictionary<Scalar> dict(field.chart(), dictionary_size, r / (r - 1));
  return negative_norm_estimate(field, dict);
}

template Field<double> grad(const Field<double>&);
template Field<double> partial(const Field<double>&, int);
template double lp_norm(const Field<double>&, double);
template double lp_norm(const Field<double>&, double, const MetricField<double>&);
template double sobolev_norm(const Field<double>&, int, double);
template VectorX<double> pair(const Field<double>&, const VectorX<double>&);
template class TestDictionary<double>;
template double negative_norm_estimate(const Field<double>&, double, int);
template double negative_norm_estimate(const Field<double>&, const TestDictionary<double>&);

}  // namespace ff
