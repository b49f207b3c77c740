#pragma once

// Catalogue of example systems, emitted as system descriptions so they go
// through the same loader and checks as user documents.

#include "skalg/system.hpp"

#include <array>

namespace skalg::builtins {

/// Planar rigid body with a variable-direction thruster at distance h from
/// the centre of mass, in the orthogonal frame Y1, Y2, Y3.
SystemSpec planar_body(double m = 1.0, double J = 1.0, double h = 1.0);
/// Same system given as the tangent bundle of R^2 x S^1 with the frame as a
/// distribution basis.
SystemSpec planar_body_embedded(double m = 1.0, double J = 1.0, double h = 1.0);

/// Extensible leg on a rotating base, frame Y1, Y2, Y3.
SystemSpec robotic_leg(double m = 1.0, double J = 1.0);
SystemSpec robotic_leg_embedded(double m = 1.0, double J = 1.0);

/// Snakeboard as the constraint distribution of its wheels inside TQ,
/// Q = SE(2) x S^1 x S^1 with coordinates (x, y, theta, psi, phi).
SystemSpec snakeboard(double mc = 1.0, double mr = 1.0, double mw = 1.0, double Jc = 1.0, double Jr = 1.0,
                      double Jw = 1.0, double l = 1.0);

/// Tangent bundle of R^n with the identity metric.
SystemSpec euclidean(std::size_t n = 2);

/// Constrained rigid body on so(3): the subspace spanned by the listed basis
/// indices (zero-based) with the diagonal inertia metric. The bracket is the
/// projected so(3) bracket; the base is a point.
SystemSpec suslov(std::array<double, 3> inertia = {1.0, 2.0, 3.0}, std::vector<std::size_t> indices = {0, 1, 2});

/// Names accepted by `builtin`.
std::vector<std::string> names();

/// Looks a builtin up by name ('-' and '_' are interchangeable; "euclideanN"
/// selects the dimension). Throws SpecError for unknown names.
SystemSpec builtin(const std::string& name);

bool is_builtin(const std::string& name);

}  // namespace skalg::builtins
