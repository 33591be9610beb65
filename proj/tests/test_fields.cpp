#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "ff/calculus.hpp"
#include "ff/io.hpp"

using namespace ff;
using Chart2 = Chart<double>;
using F = Field<double>;
using V = VectorX<double>;
constexpr double kPi = std::numbers::pi;

namespace {

F scalar_field(const Chart2& chart, auto fn) {
  return sample(chart, {1}, [&](const V& x) { return (V(1) << fn(x)).finished(); });
}

}  // namespace

TEST_CASE("chart invariants") {
  CHECK_THROWS_AS(Chart2(2, 1, {{0, 1}, {0, 1}}, {2, 5}), ValidationError);
  CHECK_THROWS_AS(Chart2(1, 1, {{0, 1}}, {5}), ValidationError);
  CHECK_THROWS_AS(Chart2(2, 1, {{1, 0}, {0, 1}}, {5, 5}), ValidationError);
  const Chart2 c(2, 1, {{0, 1}, {-1, 1}}, {5, 9});
  CHECK(c.spacing(0) == doctest::Approx(0.25));
  CHECK(c.spacing(1) == doctest::Approx(0.25));
  CHECK(c.num_points() == 45);
  CHECK(c.flat_index(c.multi_index(31)) == 31);
  CHECK(c.point(c.flat_index({4, 8}))[1] == doctest::Approx(1.0));
}

TEST_CASE("grad of constants and affine data is exact") {
  const auto chart = Chart2::square(2, 1, 0, 1, 9);
  const F c = scalar_field(chart, [](const V&) { return 3.5; });
  CHECK(grad(c).values().cwiseAbs().maxCoeff() == 0.0);

  const F x = scalar_field(chart, [](const V& p) { return p[0]; });
  const F gx = grad(x);
  CHECK(gx.shape() == std::vector<int>{2, 1});
  CHECK((gx.values().col(0).array() - 1.0).abs().maxCoeff() < 1e-13);
  CHECK(gx.values().col(1).cwiseAbs().maxCoeff() < 1e-13);

  // Affine data on a short axis exercises the 3-point fallback stencil.
  const Chart2 small(2, 1, {{0, 1}, {0, 2}}, {4, 3});
  const F a = scalar_field(small, [](const V& p) { return 2 * p[0] - 3 * p[1] + 1; });
  const F ga = grad(a);
  CHECK((ga.values().col(0).array() - 2.0).abs().maxCoeff() < 1e-13);
  CHECK((ga.values().col(1).array() + 3.0).abs().maxCoeff() < 1e-13);
}

TEST_CASE("central stencil is exact on quadratics") {
  // h = 0.1 on [0, 1]; x = 0.5 is index 5.
  const Chart2 chart(2, 1, {{0, 1}, {0, 1}}, {11, 5});
  const F sq = scalar_field(chart, [](const V& p) { return p[0] * p[0]; });
  const F g = grad(sq);
  const Index p = chart.flat_index({5, 2});
  CHECK(g(p, 0) == doctest::Approx(1.0).epsilon(1e-14));
  // The edge closure is exact for polynomials up to degree 5 too.
  const F quint = scalar_field(chart, [](const V& p) { return std::pow(p[0], 5); });
  const F gq = grad(quint);
  for (int i : {0, 10}) {
    const double x = 0.1 * i;
    // The ghost value is exact, so the edge matches the central difference.
    const double h = 0.1;
    const double central = (std::pow(x + h, 5) - std::pow(x - h, 5)) / (2 * h);
    CHECK(gq(chart.flat_index({i, 2}), 0) == doctest::Approx(central).epsilon(1e-12));
  }
}

TEST_CASE("grad is linear") {
  const auto chart = Chart2::square(2, 1, 0, 1, 12);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  F u(chart, {2}), v(chart, {2});
  for (Index i = 0; i < u.values().size(); ++i) {
    u.values().data()[i] = n01(rng);
    v.values().data()[i] = n01(rng);
  }
  const double a = 1.7, b = -0.3;
  const F lhs = grad(a * u + b * v);
  const F rhs = a * grad(u) + b * grad(v);
  CHECK((lhs.values() - rhs.values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("grad converges at second order, edges included") {
  auto sup_error = [](int n) {
    const auto chart = Chart2::square(2, 1, 0, 1, n);
    const F f = scalar_field(chart, [](const V& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]); });
    const F g = grad(f);
    double err = 0;
    for (Index p = 0; p < chart.num_points(); ++p) {
      const auto x = chart.point(p);
      err = std::max(err, std::abs(g(p, 0) - kPi * std::cos(kPi * x[0]) * std::sin(kPi * x[1])));
      err = std::max(err, std::abs(g(p, 1) - kPi * std::sin(kPi * x[0]) * std::cos(kPi * x[1])));
    }
    return err;
  };
  const double e1 = sup_error(17), e2 = sup_error(33), e3 = sup_error(65);
  CHECK(std::log2(e1 / e2) >= 1.9);
  CHECK(std::log2(e2 / e3) >= 1.9);
}

TEST_CASE("lp_norm") {
  const auto chart = Chart2::square(2, 1, 0, 1, 101);
  CHECK(lp_norm(F(chart, {3}), 2.0) == 0.0);
  const F one = scalar_field(chart, [](const V&) { return 1.0; });
  CHECK(lp_norm(one, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  const F x = scalar_field(chart, [](const V& p) { return p[0]; });
  CHECK(std::abs(lp_norm(x, 2.0) - std::sqrt(1.0 / 3.0)) < 1e-3);
  CHECK(lp_norm(x, kInfinity) == doctest::Approx(1.0));
  CHECK(lp_norm(-2.5 * x, 3.0) == doctest::Approx(2.5 * lp_norm(x, 3.0)).epsilon(1e-12));
  CHECK_THROWS_AS(lp_norm(x, 0.5), ValidationError);

  // Volume weight: g = 4 I doubles areas in 2-D.
  const MetricField<double> g(sample(chart, {2, 2}, [](const V&) {
    return Eigen::Matrix2d(4 * Eigen::Matrix2d::Identity());
  }));
  CHECK(lp_norm(one, 1.0, g) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("sobolev_norm") {
  const auto chart = Chart2::square(2, 1, 0, 1, 101);
  const F c = scalar_field(chart, [](const V&) { return 2.0; });
  CHECK(sobolev_norm(c, 1, 2.0) == doctest::Approx(lp_norm(c, 2.0)).epsilon(1e-12));
  const F x = scalar_field(chart, [](const V& p) { return p[0]; });
  CHECK(std::abs(sobolev_norm(x, 1, 2.0) - (std::sqrt(1.0 / 3.0) + 1.0)) < 1e-3);
  CHECK(sobolev_norm(F(chart, {1}), 2, 2.0) == 0.0);
  CHECK_THROWS_AS(sobolev_norm(x, 3, 2.0), ValidationError);
}

TEST_CASE("metric validation") {
  const auto chart = Chart2::square(2, 1, 0, 1, 5);
  F bad = sample(chart, {2, 2}, [](const V& x) {
    Eigen::Matrix2d m;
    m << 1, 0, 0, x[0] - 0.5;
    return m;
  });
  CHECK_THROWS_AS(MetricField<double>{bad}, ValidationError);
  F asym = sample(chart, {2, 2}, [](const V&) {
    Eigen::Matrix2d m;
    m << 2, 0.5, 0.1, 2;
    return m;
  });
  const MetricField<double> g(asym);
  CHECK(g.at(3)(1, 0) == g.at(3)(0, 1));
}

TEST_CASE("negative_norm_estimate") {
  const Chart2 chart(2, 1, {{0, 1}, {0, 1}}, {129, 33});
  CHECK(negative_norm_estimate(F(chart, {2}), 1.5) == 0.0);

  // A dictionary element paired with itself.
  const TestDictionary<double> dict(chart, 8, 3.0);
  const F z1 = scalar_field(chart, [](const V& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]); });
  const V raw = z1.values().col(0);
  const double self = raw.dot(dict.values(0).cwiseProduct(
      V::NullaryExpr(chart.num_points(), [&](Index p) { return chart.quadrature_weight(p); })));
  CHECK(self > 0);
  CHECK(negative_norm_estimate(z1, dict) == doctest::Approx(self).epsilon(1e-12));
}

TEST_CASE("negative_norm_estimate decays on oscillatory fields (closed-form oracle)") {
  // Oracle: continuous pairings of sin(N pi x) v against sin(j pi x) sin(k pi y),
  // normalised by the exact W^{1,2} norm 1/2 + pi sqrt(j^2 + k^2) / 2.
  auto I = [](double a, double b) {
    auto s = [](double c) { return std::abs(c) < 1e-14 ? 1.0 : std::sin(c * kPi) / (c * kPi); };
    return 0.5 * (s(a - b) - s(a + b));
  };
  const double vnorm = std::hypot(0.6, 0.8);
  auto oracle = [&](double N) {
    double best = 0;
    for (int j = 1; j <= 8; ++j)
      for (int k = 1; k <= 8; ++k) {
        const double J = (1 - std::cos(k * kPi)) / (k * kPi);
        const double norm = 0.5 + kPi * std::sqrt(double(j * j + k * k)) / 2;
        best = std::max(best, vnorm * std::abs(I(N, j)) * J / norm);
      }
    return best;
  };
  const Chart2 chart(2, 1, {{0, 1}, {0, 1}}, {2049, 65});
  const TestDictionary<double> dict(chart, 8, 2.0);
  double previous = 1e300;
  for (double N : {16.5, 32.5, 64.5}) {
    const F f = sample(chart, {2}, [&](const V& x) {
      return V((V(2) << 0.6, 0.8).finished() * std::sin(N * kPi * x[0]));
    });
    const double est = negative_norm_estimate(f, dict);
    CHECK(est == doctest::Approx(oracle(N)).epsilon(0.02));
    CHECK(est < previous);
    previous = est;
  }
}

TEST_CASE("field files round-trip and reject malformed input") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ff_test_io";
  fs::remove_all(dir);
  const Chart2 chart(2, 1, {{0, 1}, {-1, 2}}, {5, 7});
  const F f = sample(chart, {2, 2}, [](const V& x) {
    Eigen::Matrix2d m;
    m << x[0], x[1], 1.0 / 3.0, std::exp(x[0]);
    return m;
  });
  const auto header = io::write_field(f, dir / "m", "metric");
  const F back = io::read_field(header);
  CHECK(back.same_layout(f));
  CHECK(back.values() == f.values());
  CHECK(io::read_kind(header) == "metric");

  std::ofstream(dir / "bad.json") << "{\"dim_d\": 2";
  CHECK_THROWS_AS(io::read_field(dir / "bad.json"), ValidationError);
  fs::resize_file(dir / "m.bin", 8);
  CHECK_THROWS_AS(io::read_field(header), ValidationError);
  CHECK_THROWS_AS(io::read_field(dir / "missing.json"), ValidationError);

  io::write_csv(f, dir / "m.csv");
  std::ifstream csv(dir / "m.csv");
  std::string first;
  std::getline(csv, first);
  CHECK(first == "x,y,c0,c1,c2,c3");
}
