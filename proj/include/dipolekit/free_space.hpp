#ifndef DIPOLEKIT_FREE_SPACE_HPP
#define DIPOLEKIT_FREE_SPACE_HPP

#include <cmath>
#include <string>
#include <vector>

#include "dipolekit/core.hpp"

namespace dipolekit {

/// How a numerically truncated or extrapolated value was obtained.
/// Empty for closed forms.
struct ConvergenceMeta {
  std::string method;
  int truncation = 0;          ///< shells, nodes or panels actually used
  double residual = 0.0;       ///< estimated absolute error of `xi`
  std::vector<double> history; ///< partial values (regulator sequence, shell sums)

  bool empty() const { return method.empty(); }
};

template <typename Scalar = double>
struct CouplingResult {
  Scalar xi{};      ///< coupling energy in the active unit system
  Scalar reduced{}; ///< xi r^3 / ((mu0/4pi)|m1||m2|)
  ConvergenceMeta meta;
};

template <typename Scalar = double>
struct SpectralPoint {
  Scalar omega{};
  Scalar value{};
};

namespace detail {

/// The three radial functions of the spectral density braces at x = kr:
/// sinc = j0, f1 = j1/x, g = j1/x - j2. All even in x.
template <typename Scalar>
struct RadialTerms {
  Scalar sinc, f1, g;
};

template <typename Scalar>
RadialTerms<Scalar> radial_terms(Scalar x) {
  using std::abs;
  using std::cos;
  using std::sin;
  x = abs(x);
  if (x < Scalar(0.5)) {
    // j_n(x) = x^n sum_k (-x^2/2)^k / (k! (2n+2k+1)!!)
    const Scalar h = -x * x / Scalar(2);
    Scalar term = Scalar(1), j0 = 0, j1x = 0, j2x2 = 0;
    Scalar df1 = 1, df3 = 3, df5 = 15; // (2k+1)!!, (2k+3)!!, (2k+5)!!
    for (int k = 0; k < 12; ++k) {
      j0 += term / df1;
      j1x += term / df3;
      j2x2 += term / df5;
      term *= h / Scalar(k + 1);
      df1 *= Scalar(2 * k + 3);
      df3 *= Scalar(2 * k + 5);
      df5 *= Scalar(2 * k + 7);
    }
    return {j0, j1x, j1x - x * x * j2x2};
  }
  const Scalar s = sin(x), c = cos(x);
  const Scalar inv = Scalar(1) / x;
  const Scalar inv2 = inv * inv, inv3 = inv2 * inv;
  const Scalar f1 = s * inv3 - c * inv2;
  const Scalar j2 = (Scalar(3) * inv3 - inv) * s - Scalar(3) * c * inv2;
  return {s * inv, f1, f1 - j2};
}

/// Scalar invariants of a moment pair relative to e_r.
template <typename Scalar>
struct PairInvariants {
  Scalar dot;   ///< m1.m2
  Scalar cross; ///< (m1 x e).(m2 x e) = m1.m2 - (m1.e)(m2.e)
  Scalar along; ///< (m1.e)(m2.e)
};

template <typename Scalar>
PairInvariants<Scalar> pair_invariants(const Vec3<Scalar>& m1, const Vec3<Scalar>& m2,
                                       const Vec3<Scalar>& e_r) {
  const Scalar along = m1.dot(e_r) * m2.dot(e_r);
  return {m1.dot(m2), m1.cross(e_r).dot(m2.cross(e_r)), along};
}

template <typename Scalar>
CouplingResult<Scalar> closed_form(Scalar xi, const Vec3<Scalar>& m1, const Vec3<Scalar>& m2,
                                   Scalar r, const UnitSystem& u) {
  return {xi, reduced_coupling(xi, r, m1.norm(), m2.norm(), u), {}};
}

inline void require_kind(bool ok, const char* op, const char* wanted) {
  if (!ok) throw ValidationError(std::string(op) + " requires " + wanted + " dipoles");
}

} // namespace detail

/// Classical magnetostatic dipole-dipole energy (mu0/4pi)[m1.m2 - 3(m1.e)(m2.e)]/r^3.
template <typename Scalar>
CouplingResult<Scalar> classical_coupling(const Vec3<Scalar>& m1, const Vec3<Scalar>& m2,
                                          const PairGeometry<Scalar>& geom, const UnitSystem& u = {}) {
  const Scalar r = geom.distance();
  const Scalar xi = Scalar(u.mu0_over_4pi()) * angular_factor(m1, m2, geom.direction()) / (r * r * r);
  return detail::closed_form(xi, m1, m2, r, u);
}

/// Braces of the free-space coupling spectral density at x = kr (even in x).
template <typename Scalar>
Scalar spectral_braces(Scalar x, const Vec3<Scalar>& m1, const Vec3<Scalar>& m2, const Vec3<Scalar>& e_r) {
  const auto inv = detail::pair_invariants(m1, m2, e_r);
  const auto t = detail::radial_terms(x);
  return inv.dot * t.sinc - inv.cross * t.f1 - inv.along * t.g;
}

/// Coupling spectral density J12(omega) = (mu0 hbar k^3 / 2pi){...}, k = omega/c,
/// extended to negative omega as an odd function.
template <typename Scalar>
SpectralPoint<Scalar> spectral_density(Scalar omega, const Vec3<Scalar>& m1, const Vec3<Scalar>& m2,
                                       const PairGeometry<Scalar>& geom, const UnitSystem& u = {}) {
  using std::abs;
  if (omega == Scalar(0)) return {omega, Scalar(0)};
  const Scalar k = abs(omega) / Scalar(u.c());
  const Scalar braces = spectral_braces(k * geom.distance(), m1, m2, geom.direction());
  const Scalar prefactor = Scalar(2 * u.mu0_over_4pi() * u.hbar()) * k * k * k;
  const Scalar value = prefactor * braces;
  return {omega, omega > Scalar(0) ? value : -value};
}

/// Time-local coupling of permanent dipoles. Identical to the classical form.
template <typename Scalar>
CouplingResult<Scalar> xi_permanent(const DipoleVector<Scalar>& d1, const DipoleVector<Scalar>& d2,
                                    const PairGeometry<Scalar>& geom, const UnitSystem& u = {}) {
  detail::require_kind(d1.is_permanent() && d2.is_permanent(), "xi_permanent", "permanent");
  return classical_coupling(d1.moment(), d2.moment(), geom, u);
}

/// Resonant transition-dipole exchange coupling
///   (mu0/4pi r^3){ -[(m1 x e).(m2 x e)] x^2 cos x + [m1.m2 - 3(m1.e)(m2.e)](cos x + x sin x) },
/// x = Omega r / c. Tends to the classical coupling as x -> 0.
template <typename Scalar>
CouplingResult<Scalar> xi_transition(const Vec3<Scalar>& m1, const Vec3<Scalar>& m2,
                                     const PairGeometry<Scalar>& geom, const TransitionSpec<Scalar>& ts,
                                     const UnitSystem& u = {}) {
  using std::cos;
  using std::sin;
  const Scalar r = geom.distance();
  const Scalar x = ts.x_omega(r, u);
  const auto inv = detail::pair_invariants(m1, m2, geom.direction());
  const Scalar static_part = inv.dot - Scalar(3) * inv.along;
  const Scalar c = cos(x), s = sin(x);
  const Scalar braces = -inv.cross * x * x * c + static_part * (c + x * s);
  const Scalar xi = Scalar(u.mu0_over_4pi()) * braces / (r * r * r);
  return detail::closed_form(xi, m1, m2, r, u);
}

template <typename Scalar>
CouplingResult<Scalar> xi_transition(const DipoleVector<Scalar>& d1, const DipoleVector<Scalar>& d2,
                                     const PairGeometry<Scalar>& geom, const TransitionSpec<Scalar>& ts,
                                     const UnitSystem& u = {}) {
  detail::require_kind(d1.kind() == DipoleKind::Transition && d2.kind() == DipoleKind::Transition,
                       "xi_transition", "transition");
  return xi_transition(d1.moment(), d2.moment(), geom, ts, u);
}

} // namespace dipolekit

#endif // DIPOLEKIT_FREE_SPACE_HPP
