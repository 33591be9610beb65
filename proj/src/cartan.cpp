#include "ff/cartan.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ff/parallel.hpp"

namespace ff {

template <typename Scalar>
ConnectionForm<Scalar>::ConnectionForm(Field<Scalar> f) : Field<Scalar>(std::move(f)) {
  const int d = this->chart().dim(), n = this->chart().ambient_dim();
  detail::check_shape(*this, {d, n, n}, "connection form");
  for (Index p = 0; p < this->num_points(); ++p)
    for (int i = 0; i < d; ++i) {
      auto w = Field<Scalar>::block(p, n, n, Index(i) * n * n);
      const MatrixX<Scalar> skew = Scalar(0.5) * (w - w.transpose());
      w = skew;
    }
}

template <typename Scalar>
Scalar FrameField<Scalar>::orthogonality_defect() const {
  const int n = this->chart().ambient_dim();
  Scalar worst = 0;
  for (Index p = 0; p < this->num_points(); ++p) {
    const MatrixX<Scalar> A = at(p);
    worst = std::max(worst, (A.transpose() * A - MatrixX<Scalar>::Identity(n, n)).norm());
  }
  return worst;
}

template <typename Scalar>
void require_special_orthogonal(const MatrixX<Scalar>& A, Scalar tol, const char* what) {
  const Index n = A.rows();
  require(A.cols() == n, std::string(what) + ": matrix must be square");
  require(A.allFinite(), std::string(what) + ": non-finite entries");
  require((A.transpose() * A - MatrixX<Scalar>::Identity(n, n)).norm() <= tol,
          std::string(what) + ": matrix is not orthogonal");
  require(A.determinant() > 0, std::string(what) + ": determinant must be +1");
}

template <typename Scalar>
OrthonormalFrame<Scalar> orthonormal_frame(const MetricField<Scalar>& g) {
  const auto& chart = g.chart();
  const int d = chart.dim(), n = chart.ambient_dim();
  Field<Scalar> E(chart, {d, d});
  Field<Scalar> w(chart, {d, n});
  parallel_for(g.num_points(), [&](Index p) {
    const Eigen::LLT<MatrixX<Scalar>> llt(g.at(p));
    if (llt.info() != Eigen::Success) throw ValidationError("orthonormal_frame: metric is not SPD");
    const MatrixX<Scalar> L = llt.matrixL();
    const MatrixX<Scalar> Linv = L.template triangularView<Eigen::Lower>().solve(
        MatrixX<Scalar>::Identity(d, d));
    E.block(p, d, d) = Linv.transpose();
    w.block(p, d, n).leftCols(d) = L;
  });
  return {std::move(E), CoframeField<Scalar>(std::move(w))};
}

template <typename Scalar>
ConnectionForm<Scalar> connection_form(const MetricField<Scalar>& g, const SecondFormField<Scalar>& B,
                                       const NormalConnectionField<Scalar>& N) {
  const auto& chart = g.chart();
  require(B.chart() == chart && N.chart() == chart,
          "connection_form: inputs live on different charts");
  const int d = chart.dim(), k = chart.codim(), n = chart.ambient_dim();
  const auto frame = orthonormal_frame(g);
  const Field<Scalar> dE = grad(frame.E);  // (i, m, a)
  const ChristoffelField<Scalar> G = christoffel(g);
  Field<Scalar> out(chart, {d, n, n});
  parallel_for(g.num_points(), [&](Index p) {
    const MatrixX<Scalar> E = frame.E.block(p, d, d);
    const MatrixX<Scalar> gp = g.at(p);
    for (int i = 0; i < d; ++i) {
      MatrixX<Scalar> Gi(d, d);  // (m, l) -> Gamma^m_il
      for (int m = 0; m < d; ++m)
        for (int l = 0; l < d; ++l) Gi(m, l) = G(p, m, i, l);
      const MatrixX<Scalar> DE = MatrixX<Scalar>(dE.block(p, d, d, Index(i) * d * d)) + Gi * E;
      const MatrixX<Scalar> T = DE.transpose() * gp * E;
      auto Wi = out.block(p, n, n, Index(i) * n * n);
      Wi.topLeftCorner(d, d) = Scalar(0.5) * (T - T.transpose());
      for (int al = 0; al < k; ++al) {
        const VectorX<Scalar> row = (B.at(p, al).row(i) * E).transpose();
        Wi.block(0, d + al, d, 1) = row;
        Wi.block(d + al, 0, 1, d) = -row.transpose();
      }
      Wi.bottomRightCorner(k, k) = N.at(p, i);
    }
  });
  return ConnectionForm<Scalar>(std::move(out));
}

template <typename Scalar>
MatrixX<Scalar> so_exp(const MatrixX<Scalar>& M) {
  const Index n = M.rows();
  if (n == 2) {
    const Scalar t = M(1, 0), c = std::cos(t), s = std::sin(t);
    MatrixX<Scalar> R(2, 2);
    R << c, -s, s, c;
    return R;
  }
  if (n == 3) {
    const Eigen::Matrix<Scalar, 3, 1> omega(M(2, 1), M(0, 2), M(1, 0));
    const Scalar t2 = omega.squaredNorm();
    Scalar a, b;
    if (t2 < Scalar(1e-8)) {
      a = 1 - t2 / 6 + t2 * t2 / 120;
      b = Scalar(0.5) - t2 / 24 + t2 * t2 / 720;
    } else {
      const Scalar t = std::sqrt(t2);
      a = std::sin(t) / t;
      b = (1 - std::cos(t)) / t2;
    }
    return MatrixX<Scalar>::Identity(3, 3) + a * M + b * M * M;
  }
  return M.exp();
}

template <typename Scalar>
MatrixX<Scalar> polar_projection(const MatrixX<Scalar>& A) {
  const Eigen::JacobiSVD<MatrixX<Scalar>> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

namespace {

struct Step {
  Index from, to;
  int axis, direction;
};

// Groups of edge paths; paths inside a group are independent, groups run in order.
template <typename Scalar>
std::vector<std::vector<std::vector<Step>>> sweep_paths(const Chart<Scalar>& chart, const Sweep& sweep) {
  const int d = chart.dim();
  std::vector<int> x0 = sweep.x0.empty() ? std::vector<int>(d, 0) : sweep.x0;
  std::vector<int> order = sweep.axis_order;
  if (order.empty()) {
    order.resize(d);
    std::iota(order.begin(), order.end(), 0);
  }
  require(static_cast<int>(x0.size()) == d, "sweep: x0 needs one index per axis");
  for (int a = 0; a < d; ++a)
    require(x0[a] >= 0 && x0[a] < chart.resolution(a), "sweep: x0 is off the grid");
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> all(d);
  std::iota(all.begin(), all.end(), 0);
  require(sorted == all, "sweep: axis order must be a permutation of the axes");

  std::vector<std::vector<std::vector<Step>>> groups;
  for (int s = 0; s < d; ++s) {
    const int a = order[s];
    std::vector<std::vector<Step>> paths;
    for (Index p = 0; p < chart.num_points(); ++p) {
      bool source = chart.axis_index(p, a) == x0[a];
      for (int t = s + 1; t < d && source; ++t) source = chart.axis_index(p, order[t]) == x0[order[t]];
      if (!source) continue;
      const Index stride = chart.stride(a);
      std::vector<Step> forward, backward;
      for (int i = x0[a]; i + 1 < chart.resolution(a); ++i) {
        const Index from = p + Index(i - x0[a]) * stride;
        forward.push_back({from, from + stride, a, +1});
      }
      for (int i = x0[a]; i > 0; --i) {
        const Index from = p - Index(x0[a] - i) * stride;
        backward.push_back({from, from - stride, a, -1});
      }
      if (!forward.empty()) paths.push_back(std::move(forward));
      if (!backward.empty()) paths.push_back(std::move(backward));
    }
    groups.push_back(std::move(paths));
  }
  return groups;
}

template <typename Scalar>
Index start_index(const Chart<Scalar>& chart, const Sweep& sweep) {
  return sweep.x0.empty() ? 0 : chart.flat_index(sweep.x0);
}

}  // namespace

template <typename Scalar>
FrameField<Scalar> integrate_pfaff(const ConnectionForm<Scalar>& W, const MatrixX<Scalar>& A0,
                                   const Sweep& sweep) {
  const auto& chart = W.chart();
  const int n = chart.ambient_dim();
  require(A0.rows() == n && A0.cols() == n, "integrate_pfaff: A0 has the wrong size");
  require_special_orthogonal<Scalar>(A0, Scalar(1e-9), "integrate_pfaff: A0");
  const auto groups = sweep_paths(chart, sweep);
  Field<Scalar> A(chart, {n, n});
  A.block(start_index(chart, sweep), n, n) = A0;
  for (const auto& paths : groups) {
    parallel_for(static_cast<Index>(paths.size()), [&](Index j) {
      for (const Step& s : paths[j]) {
        const Scalar h = chart.spacing(s.axis) * s.direction;
        const MatrixX<Scalar> Wmid = Scalar(0.5) * (W.at(s.from, s.axis) + W.at(s.to, s.axis));
        const MatrixX<Scalar> next = so_exp<Scalar>(h * Wmid) * MatrixX<Scalar>(A.block(s.from, n, n));
        A.block(s.to, n, n) = polar_projection<Scalar>(next);
      }
    }, 1);
  }
  return FrameField<Scalar>(std::move(A));
}

template <typename Scalar>
ImmersionField<Scalar> integrate_poincare(const CoframeField<Scalar>& w, const FrameField<Scalar>& A,
                                          const VectorX<Scalar>& f0, const Sweep& sweep) {
  const auto& chart = w.chart();
  require(A.chart() == chart, "integrate_poincare: coframe and frame live on different charts");
  const int n = chart.ambient_dim();
  require(f0.size() == n, "integrate_poincare: f0 has the wrong length");
  const auto groups = sweep_paths(chart, sweep);
  Field<Scalar> f(chart, {n});
  f.values().row(start_index(chart, sweep)) = f0.transpose();
  for (const auto& paths : groups) {
    parallel_for(static_cast<Index>(paths.size()), [&](Index j) {
      for (const Step& s : paths[j]) {
        const Scalar h = chart.spacing(s.axis) * s.direction;
        const RowMatrixX<Scalar> ep = w.at(s.from).row(s.axis) * A.at(s.from);
        const RowMatrixX<Scalar> eq = w.at(s.to).row(s.axis) * A.at(s.to);
        f.values().row(s.to) = f.values().row(s.from) + Scalar(0.5) * h * (ep + eq);
      }
    }, 1);
  }
  return ImmersionField<Scalar>(std::move(f));
}

template <typename Scalar>
std::vector<Scalar> plaquette_defects(const ConnectionForm<Scalar>& W) {
  const auto& chart = W.chart();
  const int d = chart.dim(), n = chart.ambient_dim();
  // Corner points of plaquettes in the (a, b) plane: all points with index < n-1 on a and b.
  std::vector<std::pair<Index, std::pair<int, int>>> plaquettes;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      for (Index p = 0; p < chart.num_points(); ++p)
        if (chart.axis_index(p, a) + 1 < chart.resolution(a) &&
            chart.axis_index(p, b) + 1 < chart.resolution(b))
          plaquettes.push_back({p, {a, b}});
  std::vector<Scalar> out(plaquettes.size());
  parallel_for(static_cast<Index>(plaquettes.size()), [&](Index j) {
    const auto [p0, axes] = plaquettes[j];
    const auto [a, b] = axes;
    const Index p1 = p0 + chart.stride(a), p2 = p1 + chart.stride(b), p3 = p0 + chart.stride(b);
    const Scalar ha = chart.spacing(a), hb = chart.spacing(b);
    auto edge = [&](Index from, Index to, int axis, Scalar h) {
      return so_exp<Scalar>(h * Scalar(0.5) * (W.at(from, axis) + W.at(to, axis)));
    };
    const MatrixX<Scalar> loop = edge(p3, p0, b, -hb) * edge(p2, p3, a, -ha) * edge(p1, p2, b, hb) *
                                 edge(p0, p1, a, ha);
    out[j] = (loop - MatrixX<Scalar>::Identity(n, n)).norm();
  });
  return out;
}

template <typename Scalar>
Scalar holonomy_defect(const ConnectionForm<Scalar>& W) {
  const auto defects = plaquette_defects(W);
  return defects.empty() ? Scalar(0) : *std::max_element(defects.begin(), defects.end());
}

template <typename Scalar>
Scalar holonomy_threshold(const ConnectionForm<Scalar>& W) {
  const Scalar h = W.chart().max_spacing();
  const Scalar scale = Scalar(1) + W.values().cwiseAbs().maxCoeff();
  return Scalar(kHolonomyKappa) * h * h * h * scale * scale * scale;
}

template <typename Scalar>
Scalar first_structural_residual(const CoframeField<Scalar>& w, const ConnectionForm<Scalar>& W,
                                 Scalar p) {
  const auto& chart = w.chart();
  require(W.chart() == chart, "first_structural_residual: inputs live on different charts");
  const int d = chart.dim(), n = chart.ambient_dim();
  const Field<Scalar> dw = grad(w.field());  // (i, j, c) -> d_i w_j[c]
  const int pairs = d * (d - 1) / 2;
  Field<Scalar> res(chart, {pairs, n});
  parallel_for(chart.num_points(), [&](Index q) {
    const MatrixX<Scalar> wq = w.at(q);
    int slot = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j, ++slot) {
        const auto dij = dw.block(q, 1, n, (Index(i) * d + j) * n);
        const auto dji = dw.block(q, 1, n, (Index(j) * d + i) * n);
        const MatrixX<Scalar> wedge = wq.row(i) * W.at(q, j) - wq.row(j) * W.at(q, i);
        res.block(q, 1, n, Index(slot) * n) = dij - dji - wedge;
      }
  });
  return lp_norm(res, p);
}

template class ConnectionForm<double>;
template class FrameField<double>;
template void require_special_orthogonal(const MatrixX<double>&, double, const char*);
template OrthonormalFrame<double> orthonormal_frame(const MetricField<double>&);
template ConnectionForm<double> connection_form(const MetricField<double>&, const SecondFormField<double>&,
                                                const NormalConnectionField<double>&);
template MatrixX<double> so_exp(const MatrixX<double>&);
template MatrixX<double> polar_projection(const MatrixX<double>&);
template FrameField<double> integrate_pfaff(const ConnectionForm<double>&, const MatrixX<double>&,
                                            const Sweep&);
template ImmersionField<double> integrate_poincare(const CoframeField<double>&, const FrameField<double>&,
                                                   const VectorX<double>&, const Sweep&);
template std::vector<double> plaquette_defects(const ConnectionForm<double>&);
template double holonomy_defect(const ConnectionForm<double>&);
template double holonomy_threshold(const ConnectionForm<double>&);
template double first_structural_residual(const CoframeField<double>&, const ConnectionForm<double>&,
                                          double);

}  // namespace ff
