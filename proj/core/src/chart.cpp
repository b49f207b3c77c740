#include "skalg/chart.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace skalg {

namespace {

constexpr std::uint32_t kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                     43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};

double radical_inverse(std::uint64_t index, std::uint32_t base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

bool Chart::in_box(const BasePoint& x) const {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) < lower(i) || x(i) > upper(i)) return false;
  }
  return true;
}

double Chart::exclusion_clearance(const BasePoint& x) const {
  double clearance = std::numeric_limits<double>::infinity();
  for (const auto& ex : exclusions) {
    const double d = std::abs(x(static_cast<Eigen::Index>(ex.coordinate)) - ex.value) - ex.margin;
    clearance = std::min(clearance, d);
  }
  return clearance;
}

bool Chart::admissible(const BasePoint& x) const { return in_box(x) && exclusion_clearance(x) >= 0.0; }

Chart Chart::unit_box(std::vector<std::string> coordinates) {
  Chart c;
  const auto n = static_cast<Eigen::Index>(coordinates.size());
  c.coordinates = std::move(coordinates);
  c.lower = Vector::Constant(n, -1.0);
  c.upper = Vector::Constant(n, 1.0);
  return c;
}

std::vector<BasePoint> sample_points(const Chart& chart, std::size_t count, std::uint64_t seed) {
  const std::size_t n = chart.dim();
  if (n > std::size(kPrimes)) throw std::invalid_argument("sample_points: chart dimension too large");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> shift(n);
  for (auto& s : shift) s = unit(rng);

  std::vector<BasePoint> out;
  out.reserve(count);
  const std::uint64_t max_index = 1000 * static_cast<std::uint64_t>(count) + 1000;
  for (std::uint64_t index = 1; out.size() < count; ++index) {
    if (index > max_index) throw std::runtime_error("sample_points: exclusions reject almost every point");
    BasePoint x(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      double u = radical_inverse(index, kPrimes[i]) + shift[i];
      u -= std::floor(u);
      const auto k = static_cast<Eigen::Index>(i);
      x(k) = chart.lower(k) + u * (chart.upper(k) - chart.lower(k));
    }
    if (chart.exclusion_clearance(x) >= 0.0) out.push_back(std::move(x));
  }
  return out;
}

std::vector<FiberPoint> sample_fibers(std::size_t rank, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<FiberPoint> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    FiberPoint y(static_cast<Eigen::Index>(rank));
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = normal(rng);
    const double norm = y.norm();
    if (norm > 0.0) y /= norm;
    out.push_back(std::move(y));
  }
  return out;
}

}  // namespace skalg
