#ifndef FF_CHART_HPP
#define FF_CHART_HPP

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ff/error.hpp"

namespace ff {

using Index = Eigen::Index;

/// Uniform rectangular grid over a box in R^d: the discretized coordinate
/// patch of a simply-connected d-manifold carrying a codimension-k immersion.
///
/// Grid points are numbered row-major (last axis fastest).
template <typename Scalar>
class Chart {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Chart() = default;

  Chart(int dim, int codim, std::vector<std::pair<Scalar, Scalar>> extent,
        std::vector<int> resolution)
      : dim_(dim), codim_(codim), extent_(std::move(extent)),
        resolution_(std::move(resolution)) {
    require(dim_ >= 2, "chart: intrinsic dimension must be >= 2");
    require(codim_ >= 1, "chart: codimension must be >= 1");
    require(static_cast<int>(extent_.size()) == dim_ &&
                static_cast<int>(resolution_.size()) == dim_,
            "chart: extent/resolution length must equal the dimension");
    strides_.assign(dim_, 1);
    for (int a = dim_ - 1; a >= 0; --a) {
      require(resolution_[a] >= 3, "chart: every axis needs at least 3 points");
      require(std::isfinite(static_cast<double>(extent_[a].first)) &&
                  std::isfinite(static_cast<double>(extent_[a].second)) &&
                  extent_[a].second > extent_[a].first,
              "chart: every axis needs a finite interval a < b");
      if (a + 1 < dim_) strides_[a] = strides_[a + 1] * resolution_[a + 1];
    }
    num_points_ = strides_[0] * resolution_[0];
  }

  /// Square chart [lo, hi]^d with n points per axis.
  static Chart square(int dim, int codim, Scalar lo, Scalar hi, int n) {
    return Chart(dim, codim, std::vector<std::pair<Scalar, Scalar>>(dim, {lo, hi}),
                 std::vector<int>(dim, n));
  }

  int dim() const { return dim_; }
  int codim() const { return codim_; }
  int ambient_dim() const { return dim_ + codim_; }
  Index num_points() const { return num_points_; }

  Scalar lower(int axis) const { return extent_[axis].first; }
  Scalar upper(int axis) const { return extent_[axis].second; }
  int resolution(int axis) const { return resolution_[axis]; }
  Index stride(int axis) const { return strides_[axis]; }
  Scalar spacing(int axis) const {
    return (upper(axis) - lower(axis)) / Scalar(resolution_[axis] - 1);
  }
  Scalar max_spacing() const {
    Scalar h = 0;
    for (int a = 0; a < dim_; ++a) h = std::max(h, spacing(a));
    return h;
  }
  Scalar cell_volume() const {
    Scalar v = 1;
    for (int a = 0; a < dim_; ++a) v *= spacing(a);
    return v;
  }

  const std::vector<std::pair<Scalar, Scalar>>& extent() const { return extent_; }
  const std::vector<int>& resolutions() const { return resolution_; }

  /// Grid index along `axis` of the flat point index p.
  int axis_index(Index p, int axis) const {
    return static_cast<int>((p / strides_[axis]) % resolution_[axis]);
  }

  Index flat_index(const std::vector<int>& multi) const {
    Index p = 0;
    for (int a = 0; a < dim_; ++a) p += strides_[a] * multi[a];
    return p;
  }

  std::vector<int> multi_index(Index p) const {
    std::vector<int> m(dim_);
    for (int a = 0; a < dim_; ++a) m[a] = axis_index(p, a);
    return m;
  }

  Scalar coordinate(int axis, int i) const { return lower(axis) + Scalar(i) * spacing(axis); }

  Vector point(Index p) const {
    Vector x(dim_);
    for (int a = 0; a < dim_; ++a) x[a] = coordinate(a, axis_index(p, a));
    return x;
  }

  bool on_boundary(Index p) const {
    for (int a = 0; a < dim_; ++a) {
      const int i = axis_index(p, a);
      if (i == 0 || i == resolution_[a] - 1) return true;
    }
    return false;
  }

  /// Composite trapezoidal weight of point p (cell volume included).
  Scalar quadrature_weight(Index p) const {
    Scalar w = cell_volume();
    for (int a = 0; a < dim_; ++a) {
      const int i = axis_index(p, a);
      if (i == 0 || i == resolution_[a] - 1) w *= Scalar(0.5);
    }
    return w;
  }

  friend bool operator==(const Chart& a, const Chart& b) {
    return a.dim_ == b.dim_ && a.codim_ == b.codim_ && a.extent_ == b.extent_ &&
           a.resolution_ == b.resolution_;
  }
  friend bool operator!=(const Chart& a, const Chart& b) { return !(a == b); }

 private:
  int dim_ = 0;
  int codim_ = 0;
  std::vector<std::pair<Scalar, Scalar>> extent_;
  std::vector<int> resolution_;
  std::vector<Index> strides_;
  Index num_points_ = 0;
};

}  // namespace ff

#endif  // FF_CHART_HPP
