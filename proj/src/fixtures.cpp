#include "ff/fixtures.hpp"

#include <cmath>

namespace ff::fixtures {

namespace {

using V = VectorX<double>;

ImmersionField<double> on_chart(const Chart<double>& chart, auto fn) {
  return ImmersionField<double>(sample(chart, {3}, [&](const V& x) { return V(fn(x[0], x[1])); }));
}

V point(double a, double b, double c) { return (V(3) << a, b, c).finished(); }

}  // namespace

const std::vector<std::string>& surface_names() {
  static const std::vector<std::string> names{"plane", "cylinder", "sphere_cap", "saddle"};
  return names;
}

ImmersionField<double> surface(const std::string& name, int n) {
  if (name == "plane") {
    const Chart<double> chart(2, 1, {{1, 2}, {0, 1}}, {n, n});
    return on_chart(chart, [](double u, double v) { return point(u * std::cos(v), u * std::sin(v), 0); });
  }
  if (name == "cylinder") {
    const Chart<double> chart(2, 1, {{0, 1.5}, {0, 1}}, {n, n});
    return on_chart(chart, [](double u, double v) { return point(std::cos(u), std::sin(u), v); });
  }
  if (name == "sphere_cap") return sphere_graph(1.0, n, 0.35);
  if (name == "saddle") {
    const auto chart = Chart<double>::square(2, 1, -1, 1, n);
    return on_chart(chart, [](double x, double y) { return point(x, y, x * y); });
  }
  throw ValidationError("unknown fixture '" + name + "' (expected plane, cylinder, sphere_cap or saddle)");
}

ImmersionField<double> sphere_graph(double r, int n, double a) {
  require(r > a * std::sqrt(2.0), "sphere_graph: radius too small for the chart");
  const auto chart = Chart<double>::square(2, 1, -a, a, n);
  return on_chart(chart, [r](double x, double y) { return point(x, y, std::sqrt(r * r - x * x - y * y)); });
}

}  // namespace ff::fixtures
