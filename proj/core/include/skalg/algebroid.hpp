#pragma once

// Skew-symmetric algebroid over a single chart: local structure functions
// C^C_AB, anchor rho^i_A, and the operations built from them (bracket of
// sections, almost differential, Jacobiator, admissibility, nonholonomy rank).

#include "skalg/chart.hpp"
#include "skalg/expr.hpp"
#include "skalg/types.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace skalg {

/// C^upper_{a b} = value, zero-based indices.
struct StructureEntry {
  std::size_t upper = 0;
  std::size_t a = 0;
  std::size_t b = 0;
  Expr value;
};

class Algebroid {
 public:
  /// Anchor matrix at x, n rows (base directions) by m columns (basis sections).
  using AnchorFn = std::function<Matrix(const BasePoint&)>;
  /// Structure functions at x as C(upper, a, b).
  using StructureFn = std::function<Tensor3(const BasePoint&)>;

  /// Rank-zero bundle over a point.
  Algebroid();
  Algebroid(std::vector<std::string> coordinates, std::size_t rank, AnchorFn anchor, DiffLevel anchor_level,
            StructureFn structure, DiffLevel structure_level);

  /// Builds the structure from expressions over the coordinates.
  /// `anchor[A][i]` is rho^i_A. Entries with a < b are stored and the other
  /// triangle is filled by antisymmetry. An entry with a > b whose partner is
  /// also supplied must be its exact negative at every check point; a == b
  /// and repeated entries are rejected with std::invalid_argument.
  static Algebroid from_expressions(std::vector<std::string> coordinates, std::size_t rank,
                                    const std::vector<std::vector<Expr>>& anchor,
                                    const std::vector<StructureEntry>& structure, const Bindings& parameters,
                                    const std::vector<BasePoint>& check_points = {});

  /// Tangent bundle of the chart with coordinate fields as basis.
  static Algebroid tangent_bundle(std::vector<std::string> coordinates);

  std::size_t base_dim() const { return coordinates_.size(); }
  std::size_t rank() const { return rank_; }
  const std::vector<std::string>& coordinates() const { return coordinates_; }

  Matrix anchor(const BasePoint& x) const { return anchor_(x); }
  Tensor3 structure(const BasePoint& x) const { return structure_(x); }
  DiffLevel anchor_level() const { return anchor_level_; }
  DiffLevel structure_level() const { return structure_level_; }

 private:
  std::vector<std::string> coordinates_;
  std::size_t rank_;
  AnchorFn anchor_;
  DiffLevel anchor_level_;
  StructureFn structure_;
  DiffLevel structure_level_;
};

/// Time-stamped samples of a curve in D.
struct Trajectory {
  std::vector<double> times;
  std::vector<BasePoint> base;
  std::vector<FiberPoint> fiber;
  double step = 0.0;
  std::string integrator;
  bool truncated = false;
  std::string diagnostic;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  /// Appends a sample; throws std::invalid_argument if time does not
  /// increase or dimensions change.
  void append(double t, BasePoint x, FiberPoint y);
};

/// Coefficients of [[X, Y]] at p:
/// X^A Y^B C^C_AB + rho(X)(Y^C) - rho(Y)(X^C).
Vector bracket(const Algebroid& s, const Section& x, const Section& y, const BasePoint& p);

/// The bracket as a lazily evaluated section.
Section bracket_section(const Algebroid& s, const Section& x, const Section& y);

/// rho^i_A(p) X^A(p).
Vector anchor_apply(const Algebroid& s, const Section& x, const BasePoint& p);

/// Vector field rho(X) on the base.
BaseVectorField anchored(const Algebroid& s, const Section& x);

/// Coefficients (d^D f)_A = rho^i_A df/dx^i.
Vector d_function(const Algebroid& s, const ScalarField& f, const BasePoint& p);

/// rho(X) applied to a function, evaluated at p.
double anchor_derivative(const Algebroid& s, const Section& x, const ScalarField& f, const BasePoint& p);

/// (d^D kappa)(X, Y) = rho(X)(kappa(Y)) - rho(Y)(kappa(X)) - kappa([[X, Y]]).
double d_oneform(const Algebroid& s, const OneForm& kappa, const Section& x, const Section& y, const BasePoint& p);

/// [[X, [[Y, Z]]]] + [[Y, [[Z, X]]]] + [[Z, [[X, Y]]]] at p.
Vector jacobiator(const Algebroid& s, const Section& x, const Section& y, const Section& z, const BasePoint& p);

/// Max over interior samples of |central-difference base velocity - rho(x_k) y_k|.
double admissibility_residual(const Algebroid& s, const Trajectory& gamma);

/// Singular values above 1e-8 * max(sigma_max, 1).
std::size_t numerical_rank(const Matrix& m, double relative_threshold = 1e-8);

/// Rank at p of the anchored basis sections together with their iterated Lie
/// brackets up to `depth` (depth 1: anchors only). Per-point value only.
std::size_t lie_closure_rank(const Algebroid& s, const BasePoint& p, int depth);

/// Rank at p of an explicit family of vector fields and their iterated
/// brackets.
std::size_t lie_closure_rank(std::span<const BaseVectorField> fields, const BasePoint& p, int depth);

/// Sections e_A with constant coefficients.
std::vector<Section> basis_sections(std::size_t rank);

/// Section whose coefficients are expressions over the coordinates.
Section expression_section(const std::vector<Expr>& coefficients, const std::vector<std::string>& coordinates,
                           const Bindings& parameters, std::string label = {});

/// Scalar field from an expression over the coordinates.
ScalarField expression_field(const Expr& e, const std::vector<std::string>& coordinates, const Bindings& parameters);

}  // namespace skalg
