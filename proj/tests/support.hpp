#pragma once

#include "skalg/builtins.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>

namespace skalg::testing {

/// Loaded builtin, cached per name.
inline const SystemDefinition& loaded(const std::string& name) {
  static std::map<std::string, SystemDefinition> cache;
  static std::mutex lock;
  std::lock_guard<std::mutex> guard(lock);
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, load_spec(builtins::builtin(name))).first;
  return it->second;
}

inline std::string data_path(const std::string& file) { return std::string(SKALG_TEST_DATA) + "/" + file; }

/// Section with smooth non-polynomial coefficients depending on every
/// coordinate; `seed` varies the coefficients.
inline Section wiggly_section(std::size_t n, std::size_t m, int seed) {
  return Section(m, [n, m, seed](const BasePoint& x) {
    Vector v(static_cast<Eigen::Index>(m));
    for (std::size_t a = 0; a < m; ++a) {
      double s = 0.3 * (seed + 1) + 0.1 * static_cast<double>(a);
      for (std::size_t i = 0; i < n; ++i) {
        s += std::sin(0.4 * (a + 1) * x(static_cast<Eigen::Index>(i)) + seed) * 0.5 / (i + 1);
      }
      v(static_cast<Eigen::Index>(a)) = s;
    }
    return v;
  });
}

inline ScalarField wiggly_function(std::size_t n, int seed) {
  return ScalarField([n, seed](const BasePoint& x) {
    double s = 0.2 * seed;
    for (std::size_t i = 0; i < n; ++i) s += std::cos(0.7 * x(static_cast<Eigen::Index>(i)) + 0.3 * seed) / (i + 1);
    return s;
  });
}

inline const std::vector<std::string>& tm_systems() {
  static const std::vector<std::string> v = {"planar_body", "robotic_leg", "euclidean3", "planar_body_embedded",
                                             "robotic_leg_embedded"};
  return v;
}

/// The five systems used for cross-checks.
inline const std::vector<std::string>& oracle_systems() {
  static const std::vector<std::string> v = {"planar_body", "robotic_leg", "snakeboard", "euclidean2", "suslov"};
  return v;
}

}  // namespace skalg::testing
