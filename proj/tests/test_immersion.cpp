#include <doctest.h>

#include <cmath>
#include <random>

#include "ff/cartan.hpp"
#include "ff/curvature.hpp"
#include "ff/fixtures.hpp"
#include "ff/immersion.hpp"

using namespace ff;
using Chart2 = Chart<double>;
using F = Field<double>;
using V = VectorX<double>;
using M = MatrixX<double>;

namespace {

ImmersionField<double> immersion(const Chart2& chart, auto fn) {
  return ImmersionField<double>(sample(chart, {chart.ambient_dim()}, [&](const V& x) { return V(fn(x)); }));
}

V vec(std::initializer_list<double> v) {
  V out(v.size());
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

M random_rotation(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  M a(n, n);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = n01(rng);
  M q = polar_projection<double>(a);
  if (q.determinant() < 0) q.col(0) *= -1;
  return q;
}

ImmersionField<double> cylinder(int n) {
  const Chart2 chart(2, 1, {{0, 1.5}, {0, 1}}, {n, n});
  return immersion(chart, [](const V& x) { return vec({std::cos(x[0]), std::sin(x[0]), x[1]}); });
}

ImmersionField<double> round_sphere(int n) {
  const Chart2 chart(2, 1, {{0.5, 2.5}, {0.0, 2.0}}, {n, n});
  return immersion(chart, [](const V& x) {
    return vec({std::sin(x[0]) * std::cos(x[1]), std::sin(x[0]) * std::sin(x[1]), std::cos(x[0])});
  });
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace

TEST_CASE("induced metric") {
  const auto chart = Chart2::square(2, 1, 0, 1, 9);
  const auto flat = immersion(chart, [](const V& x) { return vec({x[0], x[1], 0}); });
  const auto g = induced_metric(flat);
  for (Index p = 0; p < chart.num_points(); ++p) CHECK((g.at(p) - M::Identity(2, 2)).norm() < 1e-14);

  const auto g2 = induced_metric(ImmersionField<double>(2.0 * flat.field()));
  for (Index p = 0; p < chart.num_points(); ++p) CHECK((g2.at(p) - 4 * M::Identity(2, 2)).norm() < 1e-13);

  auto cyl_error = [](int n) {
    const auto gc = induced_metric(cylinder(n));
    double err = 0;
    for (Index p = 0; p < gc.num_points(); ++p) err = std::max(err, (gc.at(p) - M::Identity(2, 2)).norm());
    return err;
  };
  CHECK(cyl_error(33) < 1e-3);
  CHECK(order(cyl_error(17), cyl_error(33)) >= 1.9);

  const auto collapsed = immersion(chart, [](const V& x) { return vec({x[0], 0, 0}); });
  CHECK_THROWS_AS(induced_metric(collapsed), NumericalError);

  // Rigid motions leave the metric unchanged.
  std::mt19937_64 rng(1);
  const RigidMotion<double> motion{random_rotation(3, rng), vec({1, -2, 0.5})};
  const auto f = cylinder(17);
  const auto gm = induced_metric(motion.apply(f));
  CHECK((gm.values() - induced_metric(f).values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normal field") {
  const auto chart = Chart2::square(2, 1, 0, 1, 9);
  const auto flat = immersion(chart, [](const V& x) { return vec({x[0], x[1], 0}); });
  const F nu = normal_field(flat);
  for (Index p = 0; p < chart.num_points(); ++p) CHECK((nu.values().row(p) - vec({0, 0, 1}).transpose()).norm() < 1e-14);

  const auto cyl = cylinder(17);
  const F nc = normal_field(cyl);
  double err = 0;
  for (Index p = 0; p < cyl.num_points(); ++p) {
    const double u = cyl.chart().point(p)[0];
    err = std::max(err, (nc.values().row(p) - vec({std::cos(u), std::sin(u), 0}).transpose()).norm());
  }
  CHECK(err < 1e-3);

  const auto s = round_sphere(17);
  const F ns = normal_field(s);
  err = 0;
  for (Index p = 0; p < s.num_points(); ++p) err = std::max(err, (ns.values().row(p) - s.values().row(p)).norm());
  CHECK(err < 1e-2);

  // Codimension 2: orthonormal, normal to the tangent plane, positively oriented.
  const Chart2 chart2(2, 2, {{0, 1}, {0, 1}}, {9, 9});
  const auto torus = immersion(chart2, [](const V& x) {
    return vec({std::cos(x[0]), std::sin(x[0]), std::cos(x[1]), std::sin(x[1])});
  });
  const F n2 = normal_field(torus);
  const F df = grad(torus.field());
  for (Index p = 0; p < chart2.num_points(); ++p) {
    const M nup = n2.block(p, 2, 4), J = df.block(p, 2, 4);
    CHECK((nup * nup.transpose() - M::Identity(2, 2)).norm() < 1e-12);
    CHECK((J * nup.transpose()).norm() < 1e-12);
    M full(4, 4);
    full << J, nup;
    CHECK(full.determinant() > 0);
  }
}

TEST_CASE("second fundamental form") {
  const auto chart = Chart2::square(2, 1, 0, 1, 9);
  const auto flat = immersion(chart, [](const V& x) { return vec({x[0], x[1], 0}); });
  CHECK(second_form(flat).B.values().cwiseAbs().maxCoeff() < 1e-13);

  auto cyl_error = [](int n) {
    const auto r = second_form(cylinder(n));
    double err = 0;
    for (Index p = 0; p < r.B.num_points(); ++p)
      err = std::max(err, (r.B.at(p, 0) - Eigen::Vector2d(-1, 0).asDiagonal().toDenseMatrix()).norm());
    return err;
  };
  CHECK(cyl_error(33) < 1e-3);
  CHECK(order(cyl_error(17), cyl_error(33)) >= 1.9);

  // Outward orientation on the (phi, theta) chart: B = -g.
  const auto s = round_sphere(33);
  const auto r = second_form(s);
  const auto g = induced_metric(s);
  double err = 0;
  for (Index p = 0; p < s.num_points(); ++p) err = std::max(err, (r.B.at(p, 0) + g.at(p)).norm());
  CHECK(err < 1e-2);
  CHECK(r.asymmetry < 1e-10);
}

TEST_CASE("harvested forms satisfy Gauss-Codazzi-Ricci") {
  // Codimension 1.
  auto residuals = [](int n) {
    const auto f = fixtures::surface("saddle", n);
    const auto ff = fundamental_forms(f);
    return std::pair{gauss_residual(ff.g, ff.B, 2.0), codazzi_residual(ff.g, ff.B, ff.N, 2.0)};
  };
  const auto [g1, c1] = residuals(17);
  const auto [g2, c2] = residuals(33);
  CHECK(order(g1, g2) >= 1.8);
  CHECK(order(c1, c2) >= 1.8);

  // Codimension 2 (flat torus in R^4): Ricci residual converges as well.
  auto ricci = [](int n) {
    const Chart2 chart(2, 2, {{0, 1.5}, {0.2, 1.4}}, {n, n});
    const auto f = immersion(chart, [](const V& x) {
      return vec({std::cos(x[0]), std::sin(x[0]), 0.5 * std::cos(x[1] + x[0] * x[0]), 0.5 * std::sin(x[1] + x[0] * x[0])});
    });
    const auto ff = fundamental_forms(f);
    return std::tuple{ricci_residual(ff.g, ff.B, ff.N, 2.0), gauss_residual(ff.g, ff.B, 2.0),
                      codazzi_residual(ff.g, ff.B, ff.N, 2.0)};
  };
  const auto [r1, ga1, co1] = ricci(17);
  const auto [r2, ga2, co2] = ricci(33);
  CHECK(order(r1, r2) >= 1.8);
  CHECK(order(ga1, ga2) >= 1.8);
  CHECK(order(co1, co2) >= 1.8);
}

TEST_CASE("best rigid motion and quotient distance") {
  const auto f = fixtures::surface("saddle", 17);
  const auto id = best_rigid_motion(f, f);
  CHECK((id.rotation - M::Identity(3, 3)).norm() < 1e-12);
  CHECK(id.translation.norm() < 1e-12);

  std::mt19937_64 rng(9);
  const RigidMotion<double> motion{random_rotation(3, rng), vec({0.3, 1, -4})};
  const auto moved = motion.apply(f);
  const auto back = best_rigid_motion(moved, f);
  CHECK((back.apply(moved).values() - f.values()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((back.rotation.transpose() * back.rotation - M::Identity(3, 3)).norm() < 1e-12);
  CHECK(back.rotation.determinant() == doctest::Approx(1.0));
  CHECK(quotient_distance(moved, f, 2, 4.0) < 1e-9);

  F shifted = f.field();
  shifted.values().rowwise() += vec({1, 2, 3}).transpose();
  CHECK(quotient_distance(ImmersionField<double>(shifted), f, 2, 4.0) < 1e-9);

  // A mirror image cannot be undone by a proper rotation.
  F mirrored = f.field();
  mirrored.values().col(2) *= -1;
  const auto mr = best_rigid_motion(ImmersionField<double>(mirrored), f);
  CHECK(mr.rotation.determinant() == doctest::Approx(1.0));

  // Bump perturbation: 0 < distance <= |bump|.
  const double eps = 1e-2;
  const F bump = sample(f.chart(), {3}, [](const V& x) {
    return vec({0, 0, std::exp(-4 * (x[0] * x[0] + x[1] * x[1])) * x[0]});
  });
  const ImmersionField<double> perturbed(f.field() + eps * bump);
  const double q = quotient_distance(perturbed, f, 2, 4.0);
  CHECK(q > 0);
  CHECK(q <= sobolev_norm(eps * bump, 2, 4.0) * (1 + 1e-12));

  // Residual is invariant under a common rigid motion of both inputs.
  const RigidMotion<double> common{random_rotation(3, rng), vec({-1, 0, 2})};
  const auto m1 = best_rigid_motion(perturbed, f);
  const auto m2 = best_rigid_motion(common.apply(perturbed), common.apply(f));
  const double res1 = (m1.apply(perturbed).values() - f.values()).norm();
  const double res2 = (m2.apply(common.apply(perturbed)).values() - common.apply(f).values()).norm();
  CHECK(res1 == doctest::Approx(res2).epsilon(1e-9));
}

TEST_CASE("round trip: forms, reconstruction, alignment") {
  for (const auto& name : fixtures::surface_names()) {
    CAPTURE(name);
    std::vector<double> dist;
    for (int n : {17, 33}) {
      const auto f = fixtures::surface(name, n);
      const auto ff = fundamental_forms(f);
      const auto A = integrate_pfaff(connection_form(ff.g, ff.B, ff.N), M(M::Identity(3, 3)));
      const auto rec = integrate_poincare(orthonormal_frame(ff.g).coframe, A, V(V::Zero(3)));
      dist.push_back(quotient_distance(rec, f, 2, 4.0));
      // Isometry recovered.
      CHECK((induced_metric(rec).values() - ff.g.values()).cwiseAbs().maxCoeff() < 0.05);
    }
    CHECK(order(dist[0], dist[1]) >= 1.8);
  }
}
