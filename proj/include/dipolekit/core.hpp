#ifndef DIPOLEKIT_CORE_HPP
#define DIPOLEKIT_CORE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "dipolekit/errors.hpp"

namespace dipolekit {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
using Vector3 = Vec3<double>;

template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

/// Tolerance used to decide whether a direction vector is "unit".
template <typename Scalar>
constexpr Scalar unit_tolerance() {
  return Scalar(1e4) * std::numeric_limits<Scalar>::epsilon();
}

template <typename Derived>
bool is_finite(const Eigen::MatrixBase<Derived>& v) {
  return v.allFinite();
}

// ---------------------------------------------------------------------------
// Units

enum class UnitMode { Natural, SI };

/// Physical constants in the selected unit system. In natural units
/// mu0/(4 pi) = hbar = c = 1, so every coupling is a pure geometry x magnitude
/// product.
class UnitSystem {
public:
  constexpr UnitSystem() = default;

  static constexpr UnitSystem natural() { return UnitSystem(UnitMode::Natural); }
  static constexpr UnitSystem si() { return UnitSystem(UnitMode::SI); }

  constexpr UnitMode mode() const { return mode_; }

  // CODATA 2018
  constexpr double mu0_over_4pi() const { return mode_ == UnitMode::SI ? 1.00000000055e-7 : 1.0; }
  constexpr double mu0() const { return 4.0 * 3.14159265358979323846 * mu0_over_4pi(); }
  constexpr double hbar() const { return mode_ == UnitMode::SI ? 1.054571817e-34 : 1.0; }
  constexpr double c() const { return mode_ == UnitMode::SI ? 299792458.0 : 1.0; }

  friend constexpr bool operator==(UnitSystem a, UnitSystem b) { return a.mode_ == b.mode_; }

private:
  constexpr explicit UnitSystem(UnitMode m) : mode_(m) {}
  UnitMode mode_ = UnitMode::Natural;
};

// ---------------------------------------------------------------------------
// Dipoles and geometry

enum class DipoleKind { PermanentE, PermanentG, Transition };

inline const char* to_string(DipoleKind k) {
  switch (k) {
  case DipoleKind::PermanentE: return "permanent-e";
  case DipoleKind::PermanentG: return "permanent-g";
  case DipoleKind::Transition: return "transition";
  }
  return "?";
}

/// A real magnetic moment with a tag telling which matrix element of the
/// two-level dipole operator it is. Transition moments are real by choice of
/// phase, so a single real vector covers all three kinds.
template <typename Scalar = double>
class DipoleVector {
public:
  DipoleVector(const Vec3<Scalar>& m, DipoleKind kind) : m_(m), kind_(kind) {
    if (!is_finite(m_)) throw ValidationError("dipole moment must be finite");
  }

  static DipoleVector permanent_e(const Vec3<Scalar>& m) { return {m, DipoleKind::PermanentE}; }
  static DipoleVector permanent_g(const Vec3<Scalar>& m) { return {m, DipoleKind::PermanentG}; }
  static DipoleVector transition(const Vec3<Scalar>& m) { return {m, DipoleKind::Transition}; }

  const Vec3<Scalar>& moment() const { return m_; }
  DipoleKind kind() const { return kind_; }
  bool is_permanent() const { return kind_ != DipoleKind::Transition; }

private:
  Vec3<Scalar> m_;
  DipoleKind kind_;
};

/// Two dipole positions. Construction rejects coincident or non-finite
/// positions; the separation always points from dipole 1 to dipole 2.
template <typename Scalar = double>
class PairGeometry {
public:
  static PairGeometry from_positions(const Vec3<Scalar>& x1, const Vec3<Scalar>& x2) {
    return PairGeometry(x1, x2);
  }
  static PairGeometry from_separation(const Vec3<Scalar>& r) {
    return PairGeometry(Vec3<Scalar>::Zero(), r);
  }

  const Vec3<Scalar>& x1() const { return x1_; }
  const Vec3<Scalar>& x2() const { return x2_; }
  const Vec3<Scalar>& separation() const { return r_vec_; }
  Scalar distance() const { return r_; }
  const Vec3<Scalar>& direction() const { return e_r_; }

  /// Same pair with the labels exchanged (r -> -r).
  PairGeometry swapped() const { return PairGeometry(x2_, x1_); }

private:
  PairGeometry(const Vec3<Scalar>& x1, const Vec3<Scalar>& x2) : x1_(x1), x2_(x2) {
    if (!is_finite(x1) || !is_finite(x2)) throw ValidationError("dipole positions must be finite");
    r_vec_ = x2_ - x1_;
    r_ = r_vec_.norm();
    if (!(r_ > Scalar(0))) throw DomainError("coincident dipoles (r = 0) are not supported");
    e_r_ = r_vec_ / r_;
  }

  Vec3<Scalar> x1_, x2_, r_vec_, e_r_;
  Scalar r_{};
};

/// Resonant transition frequency shared by both dipoles.
template <typename Scalar = double>
class TransitionSpec {
public:
  explicit TransitionSpec(Scalar omega) : omega_(omega) {
    if (!(omega > Scalar(0)) || !std::isfinite(static_cast<double>(omega)))
      throw DomainError("transition frequency Omega must be positive and finite");
  }

  /// Resonant transition for a pair, rejecting detuned dipoles.
  static TransitionSpec resonant(Scalar omega1, Scalar omega2) {
    using std::abs;
    if (abs(omega1 - omega2) > Scalar(1e-12) * std::max(abs(omega1), abs(omega2)))
      throw DomainError("detuned dipoles (Omega1 != Omega2) are not supported");
    return TransitionSpec(omega1);
  }

  Scalar omega() const { return omega_; }
  Scalar wavelength(const UnitSystem& u = {}) const {
    return Scalar(2.0 * 3.14159265358979323846 * u.c()) / omega_;
  }
  /// x_Omega = Omega r / c = 2 pi r / lambda.
  Scalar x_omega(Scalar r, const UnitSystem& u = {}) const { return omega_ * r / Scalar(u.c()); }

private:
  Scalar omega_;
};

// ---------------------------------------------------------------------------
// Angular kernels

namespace detail {
template <typename Derived>
void require_unit(const Eigen::MatrixBase<Derived>& e, const char* name) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  if (!is_finite(e) || abs(e.norm() - Scalar(1)) > unit_tolerance<Scalar>())
    throw ValidationError(std::string(name) + " must be a unit vector");
}
} // namespace detail

/// m1.m2 - 3 (m1.e)(m2.e): the static dipole-dipole contraction.
template <typename D1, typename D2, typename D3>
typename D1::Scalar angular_factor(const Eigen::MatrixBase<D1>& m1, const Eigen::MatrixBase<D2>& m2,
                                   const Eigen::MatrixBase<D3>& e_r) {
  detail::require_unit(e_r, "e_r");
  return m1.dot(m2) - typename D1::Scalar(3) * m1.dot(e_r) * m2.dot(e_r);
}

/// m1.m2 - (m1.e)(m2.e): the polarization sum over the two transverse
/// directions of a plane wave travelling along e_k.
template <typename D1, typename D2, typename D3>
typename D1::Scalar transverse_factor(const Eigen::MatrixBase<D1>& m1, const Eigen::MatrixBase<D2>& m2,
                                      const Eigen::MatrixBase<D3>& e_k) {
  detail::require_unit(e_k, "e_k");
  return m1.dot(m2) - m1.dot(e_k) * m2.dot(e_k);
}

/// Dimensionless coupling xi r^3 / ((mu0/4pi)|m1||m2|). Zero moments give 0.
template <typename Scalar>
Scalar reduced_coupling(Scalar xi, Scalar r, Scalar m1_norm, Scalar m2_norm, const UnitSystem& u = {}) {
  const Scalar scale = Scalar(u.mu0_over_4pi()) * m1_norm * m2_norm;
  if (scale == Scalar(0)) return Scalar(0);
  return xi * r * r * r / scale;
}

} // namespace dipolekit

#endif // DIPOLEKIT_CORE_HPP
