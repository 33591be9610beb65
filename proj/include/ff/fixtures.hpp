#ifndef FF_FIXTURES_HPP
#define FF_FIXTURES_HPP

#include <string>
#include <vector>

#include "ff/field.hpp"

namespace ff::fixtures {

/// Analytic surfaces in R^3 (d = 2, k = 1) sampled on n x n charts:
///   plane       polar coordinates (u cos v, u sin v, 0), u in [1, 2], v in [0, 1]
///   cylinder    (cos u, sin u, v), u in [0, 1.5], v in [0, 1]
///   sphere_cap  graph of sqrt(1 - x^2 - y^2) over [-0.35, 0.35]^2
///   saddle      graph of x y over [-1, 1]^2
/// The plane uses curvilinear coordinates so its reconstruction error is a
/// genuine discretisation error rather than exact.
const std::vector<std::string>& surface_names();

ImmersionField<double> surface(const std::string& name, int n);

/// Sphere of radius r centred at the origin, as the graph of
/// sqrt(r^2 - x^2 - y^2) over [-a, a]^2.
ImmersionField<double> sphere_graph(double r, int n, double a = 0.35);

}  // namespace ff::fixtures

#endif  // FF_FIXTURES_HPP
