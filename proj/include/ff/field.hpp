#ifndef FF_FIELD_HPP
#define FF_FIELD_HPP

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ff/chart.hpp"
#include "ff/error.hpp"

namespace ff {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowMatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A tensor field sampled on a Chart: one row per grid point, one column per
/// tensor component, components flattened row-major over `shape`.
template <typename Scalar>
class Field {
 public:
  using Storage = RowMatrixX<Scalar>;

  Field() = default;

  Field(Chart<Scalar> chart, std::vector<int> shape)
      : chart_(std::move(chart)), shape_(std::move(shape)) {
    values_ = Storage::Zero(chart_.num_points(), components());
  }

  Field(Chart<Scalar> chart, std::vector<int> shape, Storage values)
      : chart_(std::move(chart)), shape_(std::move(shape)), values_(std::move(values)) {
    if (values_.rows() != chart_.num_points() || values_.cols() != components()) {
      std::ostringstream msg;
      msg << "field: payload is " << values_.rows() << "x" << values_.cols() << ", expected "
          << chart_.num_points() << "x" << components();
      throw ValidationError(msg.str());
    }
  }

  const Chart<Scalar>& chart() const { return chart_; }
  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  Index components() const {
    return std::accumulate(shape_.begin(), shape_.end(), Index{1}, std::multiplies<>());
  }
  Index num_points() const { return chart_.num_points(); }

  const Storage& values() const { return values_; }
  Storage& values() { return values_; }

  Scalar operator()(Index p, Index c) const { return values_(p, c); }
  Scalar& operator()(Index p, Index c) { return values_(p, c); }

  /// Components of point p viewed as a rows x cols row-major block starting at `offset`.
  Eigen::Map<const RowMatrixX<Scalar>> block(Index p, Index rows, Index cols,
                                             Index offset = 0) const {
    return {values_.data() + p * values_.cols() + offset, rows, cols};
  }
  Eigen::Map<RowMatrixX<Scalar>> block(Index p, Index rows, Index cols, Index offset = 0) {
    return {values_.data() + p * values_.cols() + offset, rows, cols};
  }

  bool all_finite() const { return values_.allFinite(); }

  bool same_layout(const Field& other) const {
    return chart_ == other.chart_ && shape_ == other.shape_;
  }

  Field& operator+=(const Field& o) {
    require(same_layout(o), "field: layout mismatch in +=");
    values_ += o.values_;
    return *this;
  }
  Field& operator-=(const Field& o) {
    require(same_layout(o), "field: layout mismatch in -=");
    values_ -= o.values_;
    return *this;
  }
  Field& operator*=(Scalar s) {
    values_ *= s;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Scalar s, Field a) { return a *= s; }
  friend Field operator*(Field a, Scalar s) { return a *= s; }

 private:
  Chart<Scalar> chart_;
  std::vector<int> shape_;
  Storage values_;
};

/// Samples fn(x) (any Eigen expression with `components` entries, read
/// row-major) at every grid point.
template <typename Scalar, typename Fn>
Field<Scalar> sample(const Chart<Scalar>& chart, std::vector<int> shape, Fn&& fn) {
  Field<Scalar> out(chart, std::move(shape));
  const Index nc = out.components();
  for (Index p = 0; p < chart.num_points(); ++p) {
    const auto value = fn(chart.point(p));
    RowMatrixX<Scalar> flat = value;
    require(flat.size() == nc, "sample: function returned wrong number of components");
    out.values().row(p) = Eigen::Map<const VectorX<Scalar>>(flat.data(), nc).transpose();
  }
  return out;
}

namespace detail {
inline std::string point_list(const std::vector<Index>& points) {
  std::ostringstream s;
  for (std::size_t i = 0; i < points.size() && i < 8; ++i) s << (i ? ", " : "") << points[i];
  if (points.size() > 8) s << ", ... (" << points.size() << " total)";
  return s.str();
}

template <typename Scalar>
void check_shape(const Field<Scalar>& f, const std::vector<int>& expected, const char* what) {
  if (f.shape() != expected) throw ValidationError(std::string(what) + ": unexpected tensor shape");
  if (!f.all_finite()) throw ValidationError(std::string(what) + ": non-finite entries");
}
}  // namespace detail

/// Riemannian metric: symmetric positive definite d x d matrix per point.
/// Symmetry is exact (lower triangle mirrored from the upper one on load).
template <typename Scalar>
class MetricField : public Field<Scalar> {
 public:
  MetricField() = default;

  explicit MetricField(Field<Scalar> f, Scalar spd_floor = Scalar(1e-10))
      : Field<Scalar>(std::move(f)) {
    const int d = this->chart().dim();
    detail::check_shape(*this, {d, d}, "metric");
    std::vector<Index> bad;
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig;
    for (Index p = 0; p < this->num_points(); ++p) {
      auto g = Field<Scalar>::block(p, d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < i; ++j) g(i, j) = g(j, i);
      eig.compute(MatrixX<Scalar>(g), Eigen::EigenvaluesOnly);
      if (!(eig.eigenvalues().minCoeff() > spd_floor)) bad.push_back(p);
    }
    if (!bad.empty())
      throw ValidationError("metric: not positive definite at points " + detail::point_list(bad));
  }

  MatrixX<Scalar> at(Index p) const {
    const int d = this->chart().dim();
    return Field<Scalar>::block(p, d, d);
  }

  const typename Field<Scalar>::Storage& values() const { return Field<Scalar>::values(); }
  const Field<Scalar>& field() const { return *this; }
};

/// k symmetric d x d slices per point, one per normal direction.
template <typename Scalar>
class SecondFormField : public Field<Scalar> {
 public:
  SecondFormField() = default;

  explicit SecondFormField(Field<Scalar> f) : Field<Scalar>(std::move(f)) {
    const int d = this->chart().dim(), k = this->chart().codim();
    detail::check_shape(*this, {k, d, d}, "second form");
    for (Index p = 0; p < this->num_points(); ++p)
      for (int a = 0; a < k; ++a) {
        auto b = Field<Scalar>::block(p, d, d, Index(a) * d * d);
        const MatrixX<Scalar> sym = Scalar(0.5) * (b + b.transpose());
        b = sym;
      }
  }

  static SecondFormField zero(const Chart<Scalar>& chart) {
    return SecondFormField(Field<Scalar>(chart, {chart.codim(), chart.dim(), chart.dim()}));
  }

  MatrixX<Scalar> at(Index p, int alpha) const {
    const int d = this->chart().dim();
    return Field<Scalar>::block(p, d, d, Index(alpha) * d * d);
  }

  const typename Field<Scalar>::Storage& values() const { return Field<Scalar>::values(); }
  const Field<Scalar>& field() const { return *this; }
};

/// Normal-bundle connection: per point, d antisymmetric k x k matrices
/// N_i[a][b] = <D_i nu_a, nu_b>.
template <typename Scalar>
class NormalConnectionField : public Field<Scalar> {
 public:
  NormalConnectionField() = default;

  explicit NormalConnectionField(Field<Scalar> f) : Field<Scalar>(std::move(f)) {
    const int d = this->chart().dim(), k = this->chart().codim();
    detail::check_shape(*this, {d, k, k}, "normal connection");
    for (Index p = 0; p < this->num_points(); ++p)
      for (int i = 0; i < d; ++i) {
        auto n = Field<Scalar>::block(p, k, k, Index(i) * k * k);
        const MatrixX<Scalar> skew = Scalar(0.5) * (n - n.transpose());
        n = skew;
      }
  }

  static NormalConnectionField zero(const Chart<Scalar>& chart) {
    const int k = chart.codim();
    return NormalConnectionField(Field<Scalar>(chart, {chart.dim(), k, k}));
  }

  MatrixX<Scalar> at(Index p, int i) const {
    const int k = this->chart().codim();
    return Field<Scalar>::block(p, k, k, Index(i) * k * k);
  }

  const typename Field<Scalar>::Storage& values() const { return Field<Scalar>::values(); }
  const Field<Scalar>& field() const { return *this; }
};

/// Map from the chart into R^{d+k}.
template <typename Scalar>
class ImmersionField : public Field<Scalar> {
 public:
  ImmersionField() = default;

  explicit ImmersionField(Field<Scalar> f) : Field<Scalar>(std::move(f)) {
    detail::check_shape(*this, {this->chart().ambient_dim()}, "immersion");
  }

  VectorX<Scalar> at(Index p) const { return Field<Scalar>::values().row(p).transpose(); }

  /// Largest deviation of |f| from 1.
  Scalar sphere_deviation() const {
    return (Field<Scalar>::values().rowwise().norm().array() - Scalar(1)).abs().maxCoeff();
  }

  const typename Field<Scalar>::Storage& values() const { return Field<Scalar>::values(); }
  const Field<Scalar>& field() const { return *this; }
};

/// m-vector of 1-forms: per point a d x m matrix, row i = value on the i-th coordinate vector.
template <typename Scalar>
class VectorOneFormField : public Field<Scalar> {
 public:
  VectorOneFormField() = default;

  explicit VectorOneFormField(Field<Scalar> f) : Field<Scalar>(std::move(f)) {
    require(this->rank() == 2 && this->shape()[0] == this->chart().dim(),
            "vector 1-form: shape must be {d, m}");
    require(this->all_finite(), "vector 1-form: non-finite entries");
  }

  int width() const { return this->shape()[1]; }

  MatrixX<Scalar> at(Index p) const {
    return Field<Scalar>::block(p, this->chart().dim(), width());
  }

  const typename Field<Scalar>::Storage& values() const { return Field<Scalar>::values(); }
  const Field<Scalar>& field() const { return *this; }
};

}  // namespace ff

#endif  // FF_FIELD_HPP
