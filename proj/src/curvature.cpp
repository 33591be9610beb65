#include "ff/curvature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "ff/parallel.hpp"

namespace ff {

template <typename Scalar>
MatrixX<Scalar> spd_inverse(const MatrixX<Scalar>& g) {
  const Index d = g.rows();
  MatrixX<Scalar> inv(d, d);
  if (d == 1) {
    inv(0, 0) = 1 / g(0, 0);
  } else if (d == 2) {
    const Scalar det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    inv << g(1, 1), -g(0, 1), -g(1, 0), g(0, 0);
    inv /= det;
  } else if (d == 3) {
    inv(0, 0) = g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1);
    inv(0, 1) = g(0, 2) * g(2, 1) - g(0, 1) * g(2, 2);
    inv(0, 2) = g(0, 1) * g(1, 2) - g(0, 2) * g(1, 1);
    inv(1, 0) = g(1, 2) * g(2, 0) - g(1, 0) * g(2, 2);
    inv(1, 1) = g(0, 0) * g(2, 2) - g(0, 2) * g(2, 0);
    inv(1, 2) = g(0, 2) * g(1, 0) - g(0, 0) * g(1, 2);
    inv(2, 0) = g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0);
    inv(2, 1) = g(0, 1) * g(2, 0) - g(0, 0) * g(2, 1);
    inv(2, 2) = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    inv /= g(0, 0) * inv(0, 0) + g(0, 1) * inv(1, 0) + g(0, 2) * inv(2, 0);
  } else {
    inv = g.ldlt().solve(MatrixX<Scalar>::Identity(d, d));
  }
  return inv;
}

template <typename Scalar>
Field<Scalar> inverse_metric(const MetricField<Scalar>& g) {
  const int d = g.chart().dim();
  Field<Scalar> out(g.chart(), {d, d});
  parallel_for(g.num_points(), [&](Index p) { out.block(p, d, d) = spd_inverse<Scalar>(g.at(p)); });
  return out;
}

template <typename Scalar>
ChristoffelField<Scalar>::ChristoffelField(Field<Scalar> f) : Field<Scalar>(std::move(f)) {
  const int d = this->chart().dim();
  detail::check_shape(*this, {d, d, d}, "christoffel");
  for (Index p = 0; p < this->num_points(); ++p)
    for (int k = 0; k < d; ++k) {
      auto G = Field<Scalar>::block(p, d, d, Index(k) * d * d);
      const MatrixX<Scalar> sym = Scalar(0.5) * (G + G.transpose());
      G = sym;
    }
}

template <typename Scalar>
RiemannField<Scalar>::RiemannField(Field<Scalar> f) : Field<Scalar>(std::move(f)) {
  const int d = this->chart().dim();
  detail::check_shape(*this, {d, d, d, d}, "riemann");
}

template <typename Scalar>
Scalar RiemannField<Scalar>::symmetry_defect() const {
  const int d = this->chart().dim();
  const auto& R = *this;
  Scalar worst = 0;
  for (Index p = 0; p < this->num_points(); ++p)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l) {
            const Scalar r = R(p, i, j, k, l);
            worst = std::max({worst, std::abs(r + R(p, j, i, k, l)), std::abs(r + R(p, i, j, l, k)),
                              std::abs(r - R(p, k, l, i, j)),
                              std::abs(r + R(p, j, k, i, l) + R(p, k, i, j, l))});
          }
  return worst;
}

template <typename Scalar>
ChristoffelField<Scalar> christoffel(const MetricField<Scalar>& g) {
  const auto& chart = g.chart();
  const int d = chart.dim();
  const Field<Scalar> dg = grad(g.field());  // (m, i, j) -> d_m g_ij
  Field<Scalar> out(chart, {d, d, d});
  parallel_for(g.num_points(), [&](Index p) {
    const MatrixX<Scalar> ginv = spd_inverse<Scalar>(g.at(p));
    auto D = [&](int m, int i, int j) { return dg(p, (Index(m) * d + i) * d + j); };
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        VectorX<Scalar> lowered(d);
        for (int l = 0; l < d; ++l) lowered[l] = Scalar(0.5) * (D(i, j, l) + D(j, i, l) - D(l, i, j));
        const VectorX<Scalar> raised = ginv * lowered;
        for (int k = 0; k < d; ++k) {
          out(p, (Index(k) * d + i) * d + j) = raised[k];
          out(p, (Index(k) * d + j) * d + i) = raised[k];
        }
      }
  });
  return ChristoffelField<Scalar>(std::move(out));
}

template <typename Scalar>
RiemannField<Scalar> riemann(const MetricField<Scalar>& g) {
  const auto& chart = g.chart();
  const int d = chart.dim();
  const ChristoffelField<Scalar> G = christoffel(g);
  const Field<Scalar> dG = grad(G.field());  // (a, m, j, l) -> d_a Gamma^m_jl
  Field<Scalar> out(chart, {d, d, d, d});
  parallel_for(g.num_points(), [&](Index p) {
    auto dGam = [&](int a, int m, int j, int l) {
      return dG(p, ((Index(a) * d + m) * d + j) * d + l);
    };
    const MatrixX<Scalar> gp = g.at(p);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        MatrixX<Scalar> up(d, d);  // (m, l)
        for (int m = 0; m < d; ++m)
          for (int l = 0; l < d; ++l) {
            Scalar v = dGam(i, m, j, l) - dGam(j, m, i, l);
            for (int n = 0; n < d; ++n) v += G(p, m, i, n) * G(p, n, j, l) - G(p, m, j, n) * G(p, n, i, l);
            up(m, l) = v;
          }
        const MatrixX<Scalar> low = gp * up;  // (k, l) -> g_km R^m_ijl
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l) out(p, ((Index(i) * d + j) * d + k) * d + l) = low(k, l);
      }
  });
  return RiemannField<Scalar>(std::move(out));
}

namespace {

template <typename Scalar>
void check_pair(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B) {
  require(g.chart() == B.chart(), "residual: metric and second form live on different charts");
}

}  // namespace

template <typename Scalar>
Field<Scalar> gauss_residual_field(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B) {
  check_pair(g, B);
  const int d = g.chart().dim(), k = g.chart().codim();
  const RiemannField<Scalar> R = riemann(g);
  Field<Scalar> out(g.chart(), {d, d, d, d});
  parallel_for(g.num_points(), [&](Index p) {
    std::vector<MatrixX<Scalar>> b(k);
    for (int a = 0; a < k; ++a) b[a] = B.at(p, a);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int kk = 0; kk < d; ++kk)
          for (int l = 0; l < d; ++l) {
            Scalar v = -R(p, i, j, kk, l);
            for (int a = 0; a < k; ++a) v += b[a](i, kk) * b[a](j, l) - b[a](i, l) * b[a](j, kk);
            out(p, ((Index(i) * d + j) * d + kk) * d + l) = v;
          }
  });
  return out;
}

template <typename Scalar>
Field<Scalar> codazzi_residual_field(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B,
                                     const NormalConnectionField<Scalar>& N) {
  check_pair(g, B);
  require(N.chart() == g.chart(), "residual: normal connection lives on a different chart");
  const int d = g.chart().dim(), k = g.chart().codim();
  const ChristoffelField<Scalar> G = christoffel(g);
  const Field<Scalar> dB = grad(B.field());  // (i, b, j, l) -> d_i B^b_jl
  Field<Scalar> out(g.chart(), {k, d, d, d});
  parallel_for(g.num_points(), [&](Index p) {
    auto Bv = [&](int b, int j, int l) { return B.values()(p, (Index(b) * d + j) * d + l); };
    auto dBv = [&](int i, int b, int j, int l) {
      return dB(p, ((Index(i) * k + b) * d + j) * d + l);
    };
    auto Nv = [&](int i, int a, int b) { return N.values()(p, (Index(i) * k + a) * k + b); };
    for (int b = 0; b < k; ++b)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          for (int l = 0; l < d; ++l) {
            Scalar v = dBv(i, b, j, l) - dBv(j, b, i, l);
            for (int m = 0; m < d; ++m) v += -G(p, m, i, l) * Bv(b, j, m) + G(p, m, j, l) * Bv(b, i, m);
            for (int a = 0; a < k; ++a) v += Nv(i, a, b) * Bv(a, j, l) - Nv(j, a, b) * Bv(a, i, l);
            out(p, ((Index(b) * d + i) * d + j) * d + l) = v;
          }
  });
  return out;
}

template <typename Scalar>
Field<Scalar> ricci_residual_field(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B,
                                   const NormalConnectionField<Scalar>& N) {
  check_pair(g, B);
  require(N.chart() == g.chart(), "residual: normal connection lives on a different chart");
  const int d = g.chart().dim(), k = g.chart().codim();
  Field<Scalar> out(g.chart(), {d, d, k, k});
  if (k == 1) return out;
  const Field<Scalar> dN = grad(N.field());  // (i, j, a, b) -> d_i N_j[a][b]
  parallel_for(g.num_points(), [&](Index p) {
    const MatrixX<Scalar> ginv = spd_inverse<Scalar>(g.at(p));
    std::vector<MatrixX<Scalar>> b(k), n(d);
    for (int a = 0; a < k; ++a) b[a] = B.at(p, a);
    for (int i = 0; i < d; ++i) n[i] = N.at(p, i);
    for (int al = 0; al < k; ++al)
      for (int be = 0; be < k; ++be) {
        const MatrixX<Scalar> shape = b[al] * ginv * b[be] - b[be] * ginv * b[al];
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) {
            const MatrixX<Scalar> nn = n[j] * n[i] - n[i] * n[j];
            const Scalar F = dN(p, ((Index(i) * d + j) * k + al) * k + be) -
                             dN(p, ((Index(j) * d + i) * k + al) * k + be) + nn(al, be);
            out(p, ((Index(i) * d + j) * k + al) * k + be) = shape(i, j) + F;
          }
      }
  });
  return out;
}

namespace {

// lp norm over points of the components selected by `keep`.
template <typename Scalar, typename Keep>
Scalar restricted_norm(const Field<Scalar>& f, Scalar p, Keep&& keep) {
  std::vector<Index> cols;
  for (Index c = 0; c < f.components(); ++c)
    if (keep(c)) cols.push_back(c);
  Field<Scalar> sub(f.chart(), {static_cast<int>(cols.size())});
  for (std::size_t c = 0; c < cols.size(); ++c) sub.values().col(Index(c)) = f.values().col(cols[c]);
  return lp_norm(sub, p);
}

}  // namespace

template <typename Scalar>
Scalar gauss_residual(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B, Scalar p) {
  const int d = g.chart().dim();
  return restricted_norm(gauss_residual_field(g, B), p, [d](Index c) {
    const Index l = c % d, k = (c / d) % d, j = (c / d / d) % d, i = c / d / d / d;
    return i < j && k < l;
  });
}

template <typename Scalar>
Scalar codazzi_residual(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B,
                        const NormalConnectionField<Scalar>& N, Scalar p) {
  const int d = g.chart().dim();
  return restricted_norm(codazzi_residual_field(g, B, N), p, [d](Index c) {
    const Index j = (c / d) % d, i = (c / d / d) % d;
    return i < j;
  });
}

template <typename Scalar>
Scalar ricci_residual(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B,
                      const NormalConnectionField<Scalar>& N, Scalar p) {
  const int d = g.chart().dim(), k = g.chart().codim();
  if (k == 1) return 0;
  return restricted_norm(ricci_residual_field(g, B, N), p, [d, k](Index c) {
    const Index b = c % k, a = (c / k) % k, j = (c / k / k) % d, i = c / k / k / d;
    return i < j && a < b;
  });
}

namespace {

double data_scale(const MetricField<double>& g, const SecondFormField<double>& B, double p) {
  const auto& chart = g.chart();
  double volume = 1;
  for (int a = 0; a < chart.dim(); ++a) volume *= chart.upper(a) - chart.lower(a);
  const double m = std::max({g.values().cwiseAbs().maxCoeff(), B.values().cwiseAbs().maxCoeff(),
                             grad(g.field()).values().cwiseAbs().maxCoeff(),
                             grad(B.field()).values().cwiseAbs().maxCoeff()});
  return std::pow(volume, 1 / p) * std::pow(1 + m, 3);
}

double calibrated_kappa(double p) {
  static std::mutex mutex;
  static std::map<double, double> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(p); it != cache.end()) return it->second;
  const Chart<double> chart(2, 1, {{0.5, 2.5}, {0.0, 2.0}}, {17, 17});
  const MetricField<double> g(sample(chart, {2, 2}, [](const VectorX<double>& x) {
    Eigen::Matrix2d m;
    m << 1, 0, 0, std::sin(x[0]) * std::sin(x[0]);
    return m;
  }));
  const SecondFormField<double> B(Field<double>(chart, {1, 2, 2}, g.values()));
  const auto N = NormalConnectionField<double>::zero(chart);
  const double h = chart.max_spacing();
  const double worst = std::max(gauss_residual(g, B, p), codazzi_residual(g, B, N, p));
  const double kappa = 10 * worst / (h * h * data_scale(g, B, p));
  cache.emplace(p, kappa);
  return kappa;
}

}  // namespace

double compatibility_threshold(const MetricField<double>& g, const SecondFormField<double>& B,
                               double p) {
  const double h = g.chart().max_spacing();
  return calibrated_kappa(p) * h * h * data_scale(g, B, p);
}

ResidualReport gcr_residuals(const MetricField<double>& g, const SecondFormField<double>& B,
                             const NormalConnectionField<double>& N, double p, double tol) {
  ResidualReport r;
  r.p = p;
  r.gauss = gauss_residual(g, B, p);
  r.codazzi = codazzi_residual(g, B, N, p);
  if (g.chart().codim() == 1) {
    r.flags.push_back("codimension-one: Ricci vacuous");
  } else {
    r.ricci = ricci_residual(g, B, N, p);
  }
  r.threshold = tol >= 0 ? tol : compatibility_threshold(g, B, p);
  r.compatible = std::max({r.gauss, r.codazzi, r.ricci}) <= r.threshold;
  return r;
}

template MatrixX<double> spd_inverse(const MatrixX<double>&);
template Field<double> inverse_metric(const MetricField<double>&);
template class ChristoffelField<double>;
template class RiemannField<double>;
template ChristoffelField<double> christoffel(const MetricField<double>&);
template RiemannField<double> riemann(const MetricField<double>&);
template Field<double> gauss_residual_field(const MetricField<double>&, const SecondFormField<double>&);
template Field<double> codazzi_residual_field(const MetricField<double>&, const SecondFormField<double>&,
                                              const NormalConnectionField<double>&);
template Field<double> ricci_residual_field(const MetricField<double>&, const SecondFormField<double>&,
                                            const NormalConnectionField<double>&);
template double gauss_residual(const MetricField<double>&, const SecondFormField<double>&, double);
template double codazzi_residual(const MetricField<double>&, const SecondFormField<double>&,
                                 const NormalConnectionField<double>&, double);
template double ricci_residual(const MetricField<double>&, const SecondFormField<double>&,
                               const NormalConnectionField<double>&, double);

}  // namespace ff
