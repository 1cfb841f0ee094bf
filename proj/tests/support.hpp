#ifndef DIPOLEKIT_TESTS_SUPPORT_HPP
#define DIPOLEKIT_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace testing {

using Vec = Eigen::Vector3d;
using Mat = Eigen::Matrix3d;

inline constexpr double pi = std::numbers::pi;

/// Seeded generator with a portable double mapping.
class Gen {
public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double a = 0.0, double b = 1.0) { return a + (b - a) * ((rng_() >> 11) * 0x1.0p-53); }
  int integer(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }

  Vec direction() {
    const double z = uniform(-1.0, 1.0), phi = uniform(0.0, 2.0 * pi);
    const double s = std::sqrt(1.0 - z * z);
    return {s * std::cos(phi), s * std::sin(phi), z};
  }
  Vec moment(double lo = 0.3, double hi = 3.0) { return uniform(lo, hi) * direction(); }
  Vec vector(double scale) { return {uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)}; }

  /// Uniform rotation from a random unit quaternion.
  Mat rotation() {
    Eigen::Quaterniond q(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
    while (q.norm() < 1e-3) q = Eigen::Quaterniond(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
    return q.normalized().toRotationMatrix();
  }

private:
  std::mt19937_64 rng_;
};

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

/// Relative error, switching to absolute below `floor`.
inline double mixed_err(double a, double b, double floor) { return std::abs(a - b) / std::max(std::abs(b), floor); }

/// Sweep moment direction (cos phi, 0, sin phi) and separation direction.
inline Vec sweep_moment(double phi) { return {std::cos(phi), 0.0, std::sin(phi)}; }
inline Vec sweep_direction() { return Vec(1.0, 2.0, 3.0).normalized(); }

/// Zeros in [0, 2 pi) of 1 - 3 (m(phi).e)^2 for the sweep geometry:
/// m.e = (cos phi + 3 sin phi)/sqrt(14) = +-1/sqrt(3).
inline std::vector<double> sweep_zeros() {
  const double amp = std::sqrt(10.0 / 14.0), shift = std::atan2(1.0, 3.0);
  std::vector<double> out;
  for (double target : {1.0 / std::sqrt(3.0), -1.0 / std::sqrt(3.0)}) {
    const double a = std::asin(target / amp);
    for (double psi : {a, pi - a}) {
      double phi = psi - shift;
      phi = std::fmod(phi + 4.0 * pi, 2.0 * pi);
      out.push_back(phi);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace testing

#endif // DIPOLEKIT_TESTS_SUPPORT_HPP
