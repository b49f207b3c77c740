#pragma once

// Control distributions, metric projectors and the sample-based verification
// predicates for decoupling, kinematic reduction, geodesic invariance,
// maximal reducibility, Hamilton-Jacobi sections and reparametrization.

#include "skalg/dynamics.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>

namespace skalg {

struct Subbundle {
  std::vector<Section> spanning;
  std::size_t rank = 0;
  std::string label;

  Subbundle() = default;
  Subbundle(std::vector<Section> sections, std::string name = {});
  /// The whole bundle spanned by e_1..e_m.
  static Subbundle full(std::size_t bundle_rank, std::string name = "D");

  std::size_t bundle_rank() const { return spanning.empty() ? 0 : spanning.front().dim(); }
  /// Spanning sections evaluated at p as columns.
  Matrix evaluate(const BasePoint& p) const;
};

/// Smallest Gram singular value over the points; ok is false where the
/// evaluated span drops rank.
struct RankDiagnostic {
  bool ok = true;
  double worst = 0.0;
  std::optional<BasePoint> witness;
};
RankDiagnostic check_subbundle(const Subbundle& sub, const BundleMetric& g, const std::vector<BasePoint>& points);

/// G-orthogonal projection onto a subbundle and its complement.
class Projector {
 public:
  Projector(Subbundle sub, BundleMetric g) : sub_(std::move(sub)), g_(std::move(g)) {}

  struct Frame {
    Matrix g;           // metric at p
    Matrix inside;      // G-orthonormal basis of the subbundle (columns)
    Matrix complement;  // G-orthonormal basis of the complement (columns)
    Matrix p;           // projector onto the subbundle
    Matrix q;           // Id - p
  };

  /// Gram-Schmidt under G(p) on the spanning sections, then on e_1..e_m for
  /// the complement.
  Frame frame(const BasePoint& p) const;
  Matrix P(const BasePoint& p) const { return frame(p).p; }
  Matrix Q(const BasePoint& p) const { return frame(p).q; }
  Vector project(const Vector& v, const BasePoint& p) const { return P(p) * v; }
  Vector reject(const Vector& v, const BasePoint& p) const { return Q(p) * v; }
  Matrix complement_basis(const BasePoint& p) const { return frame(p).complement; }

  const Subbundle& subbundle() const { return sub_; }
  const BundleMetric& metric() const { return g_; }

 private:
  Subbundle sub_;
  BundleMetric g_;
};

/// Worst relative size of the subbundle part of each declared complement
/// section, together with a rank check of the declared family.
struct ComplementCheck {
  double worst_residual = 0.0;
  std::optional<BasePoint> witness;
  bool rank_ok = true;
};
ComplementCheck check_declared_complement(const Projector& proj, const Subbundle& declared,
                                          const std::vector<BasePoint>& points);

enum class Verdict { Pass, Fail, Inconclusive };
std::string to_string(Verdict v);

struct ComponentResidual {
  std::string name;
  double worst = 0.0;
  std::optional<BasePoint> where;
  double tolerance = 0.0;
};

struct VerificationReport {
  std::string predicate;
  std::string subject;
  Verdict verdict = Verdict::Pass;
  double worst_residual = 0.0;
  std::optional<BasePoint> witness_point;
  std::size_t samples = 0;
  double tolerance = 0.0;
  std::optional<std::uint64_t> seed;
  std::string note;
  std::vector<ComponentResidual> components;

  bool passed() const { return verdict == Verdict::Pass; }
};

void to_json(nlohmann::json& j, const VerificationReport& r);

/// Shared settings of a verification run.
struct CheckSettings {
  double tolerance = 1e-5;
  double trajectory_tolerance = 1e-3;
  /// Integration settings for empirical criteria.
  double step = 1e-2;
  double horizon = 1.0;
  std::size_t trajectories = 6;
  std::uint64_t seed = 0;
  const Chart* chart = nullptr;
};

/// max over samples of |Q_c F(x, y)|_G for y drawn from the fiber.
double force_in_distribution_residual(const Projector& controls, const ForceField& f,
                                      const std::vector<BasePoint>& samples, std::uint64_t seed);

/// Q_c(X) = 0 and Q_c(nabla_X X) = 0 on the samples.
VerificationReport is_decoupling(const Algebroid& s, const BundleMetric& g, const ForceField& f,
                                 const Subbundle& controls, const Section& x, const std::vector<BasePoint>& samples,
                                 double tol);

/// Q_c(X_a) = 0 and Q_c(<X_b:X_c>) = 0 for the spanning sections of the
/// candidate distribution.
VerificationReport kinematic_reduction_check(const Algebroid& s, const BundleMetric& g, const ForceField& f,
                                             const Subbundle& controls, const Subbundle& candidate,
                                             const std::vector<BasePoint>& samples, double tol);

struct ClosureResult {
  /// Rank after each round; ranks[0] is the rank of the input.
  std::vector<std::size_t> ranks;
  std::vector<Section> generators;
  std::size_t rank() const { return ranks.empty() ? 0 : ranks.back(); }
};

/// Appends symmetric products of generators while they add a direction at p
/// (relative G-orthogonal remainder above `independence`).
ClosureResult symmetric_closure(const Algebroid& s, const BundleMetric& g, const Subbundle& sub, int max_depth,
                                const BasePoint& p, double independence = 1e-6);

/// Algebraic closure under the symmetric product and, empirically, geodesics
/// started in the subbundle staying in it.
VerificationReport geodesic_invariance_check(const Algebroid& s, const BundleMetric& g, const Subbundle& sub,
                                             const std::vector<BasePoint>& samples, const CheckSettings& settings);

/// Candidate equals D_c (mutual projection) and D_c is geodesically
/// invariant. Inconclusive when the force does not vanish.
VerificationReport maximal_reducibility_check(const Algebroid& s, const BundleMetric& g, const ForceField& f,
                                              const Subbundle& controls, const Subbundle& candidate,
                                              const std::vector<BasePoint>& samples, const CheckSettings& settings);

struct HjResidual {
  /// max over complement basis Y of |G(nabla_X X, Y) - G(nabla_Y X, X)|.
  double closedness = 0.0;
  /// max over complement basis Y of |rho(Y)(1/2 G(X, X) + V)|.
  double hj = 0.0;
};

HjResidual hj_residual(const Algebroid& s, const BundleMetric& g, const ScalarField& v, const Subbundle& controls,
                       const Section& x, const BasePoint& p);
/// Uses every basis direction instead of the complement.
HjResidual hj_residual_unconstrained(const Algebroid& s, const BundleMetric& g, const ScalarField& v,
                                     const Section& x, const BasePoint& p);

VerificationReport hj_check(const Algebroid& s, const BundleMetric& g, const ScalarField& v, const Subbundle& controls,
                            const Section& x, const std::vector<BasePoint>& samples, double tol);
/// Unconstrained variant; also reports the spread of 1/2 G(X, X) + V over the
/// samples as a separate component.
VerificationReport hj_check_unconstrained(const Algebroid& s, const BundleMetric& g, const ScalarField& v,
                                          const Section& x, const std::vector<BasePoint>& samples, double tol);

/// Integrates the base flow of X from p0, lifts it, and measures
/// |Q_c(nabla_gamma gamma + grad V)|_G along the curve. Inconclusive when the
/// closedness condition fails on the curve.
VerificationReport hj_trajectory_equivalence(const Algebroid& s, const BundleMetric& g, const ScalarField& v,
                                             const Subbundle& controls, const Section& x, const BasePoint& p0,
                                             double horizon, double step, double tol,
                                             double closedness_tol = 1e-5, const Chart* chart = nullptr);

/// rho(Y)(f) = 0 for every complement direction Y.
VerificationReport reparam_admissible(const Algebroid& s, const BundleMetric& g, const Subbundle& controls,
                                      const ScalarField& f, const std::vector<BasePoint>& samples, double tol);

/// max_k |nabla_gamma gamma - F(gamma)| along a sampled curve in D, interior
/// samples only.
double forced_equation_residual(const Algebroid& s, const BundleMetric& g, const ForceField& f,
                                const Trajectory& gamma);
/// max over samples of |nabla_X X - F(X)|.
double section_equation_residual(const Algebroid& s, const BundleMetric& g, const ForceField& f, const Section& x,
                                 const std::vector<BasePoint>& samples);

/// Driftless controls u(t_k) minimizing |sum u^a X_a - y_k|_G along gamma.
struct ControlRecovery {
  std::vector<Vector> controls;
  double worst_residual = 0.0;
};
ControlRecovery recover_controls(const BundleMetric& g, const Subbundle& driftless, const Trajectory& gamma);

}  // namespace skalg
