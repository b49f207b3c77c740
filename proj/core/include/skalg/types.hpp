#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace skalg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Coordinates x^i of a point of the base manifold (single chart).
using BasePoint = Vector;
/// Coefficients y^A of a fiber vector relative to the declared basis {e_A}.
using FiberPoint = Vector;

struct TotalPoint {
  BasePoint base;
  FiberPoint fiber;

  Vector stacked() const;
  static TotalPoint split(const Vector& q, std::size_t base_dim);
};

/// Dense rank-3 array T(i, j, k), each index in [0, dim).
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(std::size_t dim) : dim_(dim), data_(dim * dim * dim, 0.0) {}

  std::size_t dim() const { return dim_; }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * dim_ + j) * dim_ + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * dim_ + j) * dim_ + k];
  }
  double max_abs() const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Smoothness bookkeeping for pointwise-evaluated functions. Level 0 means
/// "evaluated directly from expressions"; each level counts the finite
/// differences already folded into a value. The differentiation step grows
/// with the level of the function being differentiated.
using DiffLevel = int;

/// Real function on the base.
class ScalarField {
 public:
  using Fn = std::function<double(const BasePoint&)>;

  ScalarField() : fn_([](const BasePoint&) { return 0.0; }) {}
  ScalarField(Fn fn, DiffLevel level = 0) : fn_(std::move(fn)), level_(level) {}

  static ScalarField constant(double c) {
    return ScalarField([c](const BasePoint&) { return c; });
  }

  double operator()(const BasePoint& x) const { return fn_(x); }
  DiffLevel level() const { return level_; }

 private:
  Fn fn_;
  DiffLevel level_ = 0;
};

/// Vector-valued function on the base, evaluated pointwise. Tag separates
/// sections of D, one-forms on D and vector fields on M at the type level.
template <class Tag>
class BaseField {
 public:
  using Fn = std::function<Vector(const BasePoint&)>;

  BaseField() = default;
  BaseField(std::size_t dim, Fn fn, DiffLevel level = 0, std::string label = {})
      : dim_(dim), fn_(std::move(fn)), level_(level), label_(std::move(label)) {}

  static BaseField zero(std::size_t dim) {
    return BaseField(dim, [dim](const BasePoint&) { return Vector::Zero(static_cast<Eigen::Index>(dim)).eval(); },
                     0, "0");
  }
  static BaseField constant(Vector v, std::string label = {}) {
    const std::size_t dim = static_cast<std::size_t>(v.size());
    return BaseField(dim, [v = std::move(v)](const BasePoint&) { return v; }, 0, std::move(label));
  }
  static BaseField basis(std::size_t dim, std::size_t index) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return constant(std::move(v), "e" + std::to_string(index + 1));
  }

  Vector operator()(const BasePoint& x) const { return fn_(x); }
  std::size_t dim() const { return dim_; }
  DiffLevel level() const { return level_; }
  const std::string& label() const { return label_; }
  BaseField with_label(std::string label) const {
    BaseField f = *this;
    f.label_ = std::move(label);
    return f;
  }
  explicit operator bool() const { return static_cast<bool>(fn_); }

 private:
  std::size_t dim_ = 0;
  Fn fn_;
  DiffLevel level_ = 0;
  std::string label_;
};

struct SectionTag {};
struct OneFormTag {};
struct VectorFieldTag {};

/// Section X = X^A e_A of D.
using Section = BaseField<SectionTag>;
/// One-form kappa = kappa_A e^A on D.
using OneForm = BaseField<OneFormTag>;
/// Vector field on the base manifold, components along d/dx^i.
using BaseVectorField = BaseField<VectorFieldTag>;

template <class Tag>
BaseField<Tag> operator+(const BaseField<Tag>& a, const BaseField<Tag>& b) {
  return BaseField<Tag>(a.dim(), [a, b](const BasePoint& x) { return (a(x) + b(x)).eval(); },
                        std::max(a.level(), b.level()), a.label() + "+" + b.label());
}

template <class Tag>
BaseField<Tag> operator*(double c, const BaseField<Tag>& a) {
  return BaseField<Tag>(a.dim(), [a, c](const BasePoint& x) { return (c * a(x)).eval(); }, a.level(),
                        std::to_string(c) + "*" + a.label());
}

template <class Tag>
BaseField<Tag> operator*(const ScalarField& f, const BaseField<Tag>& a) {
  return BaseField<Tag>(a.dim(), [a, f](const BasePoint& x) { return (f(x) * a(x)).eval(); },
                        std::max(a.level(), f.level()), "f*" + a.label());
}

inline double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace skalg
