#include <doctest.h>

#include <cmath>

#include "ff/rigidity.hpp"
#include "ff/stability.hpp"

using namespace ff;
using M = MatrixX<double>;
using V = VectorX<double>;

namespace {

std::vector<double> amplitudes() {
  std::vector<double> s{0.0};
  for (int k = 2; k <= 7; ++k) s.push_back(std::ldexp(1.0, -k));
  return s;
}

double forms_gap(const std::string& family, double s, int n) {
  const auto exact = compatible_forms(family, s, n);
  const auto fd = fundamental_forms(compatible_immersion(family, s, n));
  return std::max((exact.g.values() - fd.g.values()).cwiseAbs().maxCoeff(),
                  (exact.B.values() - fd.B.values()).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("closed-form families match their immersions") {
  for (const auto& family : compatible_families()) {
    CAPTURE(family);
    for (const double s : {0.0, 0.25}) {
      const double coarse = forms_gap(family, s, 33), fine = forms_gap(family, s, 65);
      CHECK(fine < 1e-2);
      if (coarse > 1e-12) CHECK(std::log2(coarse / fine) >= 1.8);
    }
    const auto f = compatible_forms(family, 0.1, 17);
    CHECK(f.N.values().norm() == 0.0);
  }
  // Sphere of radius r: B = -g / r exactly.
  const auto sph = compatible_forms("sphere_radius", 0.5, 9);
  CHECK((sph.B.values() + 1.5 * sph.g.values()).norm() < 1e-14);
}

TEST_CASE("family validation") {
  CHECK_THROWS_AS(compatible_forms("torus", 0.1, 9), ValidationError);
  CHECK_THROWS_AS(compatible_forms("sphere_radius", -1.0, 9), ValidationError);
  // Radius 1/(1+s) must still cover the chart.
  CHECK_THROWS_AS(compatible_forms("sphere_radius", 1.5, 9), ValidationError);
  CHECK_THROWS_AS(lipschitz_study("sphere_radius", {0.1}, 17, 2.0), ValidationError);
  CHECK_THROWS_AS(lipschitz_study("sphere_radius", {}, 17), ValidationError);
}

TEST_CASE("reconstruction diagnostics") {
  std::vector<double> iso;
  for (const int n : {17, 33}) {
    const auto f = compatible_forms("graph_amplitude", 0.0, n);
    const auto rec = reconstruct(f.g, f.B, f.N, M(M::Identity(3, 3)), V(V::Zero(3)));
    CHECK(rec.A.orthogonality_defect() < 1e-12);
    CHECK(rec.f.at(0).norm() == 0.0);
    iso.push_back(rec.isometry_defect);
  }
  CHECK(std::log2(iso[0] / iso[1]) >= 1.8);
  const auto f = compatible_forms("cylinder_radius", 0.0, 9);
  CHECK_THROWS_AS(reconstruct(f.g, f.B, f.N, M(M::Identity(3, 3)), V(V::Zero(2))), ValidationError);
}

TEST_CASE("zero perturbation gives zero distances") {
  for (const auto& family : compatible_families()) {
    CAPTURE(family);
    const auto st = lipschitz_study(family, {0.0, 0.0}, 17);
    for (const auto& smp : st.samples) {
      CHECK(smp.t_distance == 0.0);
      CHECK(smp.v_distance < 1e-10);
      CHECK(smp.frame_distance == 0.0);
      CHECK(std::isnan(smp.ratio));
    }
  }
}

TEST_CASE("Lipschitz dependence on the sphere radius") {
  const auto st = lipschitz_study("sphere_radius", amplitudes(), 33);
  CHECK(std::abs(st.slope - 1.0) <= 0.15);
  CHECK(st.ratio_spread < 3.0);
  CHECK(st.pfaff_spread < 3.0);
  CHECK(st.coframe_spread < 3.0);
  for (const auto& smp : st.samples) {
    CHECK(smp.compatible);
    if (smp.s == 0) continue;
    // Distances grow with the perturbation.
    CHECK(smp.t_distance > 0);
    CHECK(smp.v_distance > 0);
  }
  for (std::size_t i = 2; i < st.samples.size(); ++i)
    CHECK(st.samples[i].t_distance < st.samples[i - 1].t_distance);
}

TEST_CASE("other compatible families") {
  const auto graph = lipschitz_study("graph_amplitude", amplitudes(), 33);
  CHECK(std::abs(graph.slope - 1.0) <= 0.15);
  CHECK(graph.ratio_spread < 3.0);
  CHECK(graph.pfaff_spread < 3.0);

  // The cylinder's frame in (angle, height) coordinates does not depend on
  // the radius: the Pfaff ratio is undefined.
  const auto cyl = lipschitz_study("cylinder_radius", amplitudes(), 33);
  CHECK(std::abs(cyl.slope - 1.0) <= 0.15);
  CHECK(cyl.ratio_spread < 3.0);
  CHECK(cyl.pfaff_spread == 0.0);
  for (const auto& smp : cyl.samples) {
    CHECK(std::isnan(smp.pfaff_ratio));
    CHECK(smp.frame_distance < 1e-12);
  }
}

TEST_CASE("pure gauge perturbations vanish in the quotient") {
  std::mt19937_64 rng(11);
  for (const auto& family : compatible_families()) {
    CAPTURE(family);
    const auto forms = compatible_forms(family, 0.1, 17);
    CHECK(gauge_distance(forms, random_rotation<double>(3, rng)) < 1e-9);
  }
  const auto forms = compatible_forms("sphere_radius", 0.1, 9);
  CHECK_THROWS_AS(gauge_distance(forms, M(2 * M::Identity(3, 3))), ValidationError);
}
