#ifndef DIPOLEKIT_ORACLES_HPP
#define DIPOLEKIT_ORACLES_HPP

#include <optional>
#include <span>
#include <vector>

#include "dipolekit/core.hpp"
#include "dipolekit/free_space.hpp"

namespace dipolekit {

/// Node counts, regulator schedule and cutoffs for the numerical oracles.
struct QuadratureSpec {
  int n_theta = 64;
  int n_phi = 32;
  /// Decreasing regulator strengths for the Abel factor exp(-eta k r).
  std::vector<double> eta_schedule{0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125};
  /// Degree of the eta -> 0 polynomial; at most eta_schedule.size() - 1.
  int extrapolation_order = 6;
  /// Half-width of the excluded principal-value window, as a fraction of Omega.
  double pv_window = 1.0 / 50.0;
  /// Kernel frequency cutoff. Unset selects 50 c / r.
  std::optional<double> omega_cut;
  /// Largest accepted extrapolation residual, in units of (mu0/4pi)|m1||m2|/r^3.
  double tol = 1e-3;

  void validate() const;
};

/// A quadrature value with its error estimate.
struct OracleValue {
  double value = 0.0;
  double error = 0.0;
};

struct KernelPoint {
  double s = 0.0;
  double value = 0.0;
};

/// J12(omega) from the direct solid-angle integral of e^{ik.r} times the
/// transverse kernel. Gauss-Legendre in cos(theta), trapezoid in phi.
OracleValue j12_angular_quadrature(double omega, const Vector3& m1, const Vector3& m2,
                                   const PairGeometry<double>& geom, const QuadratureSpec& spec = {},
                                   const UnitSystem& u = {});

/// Principal-value frequency integral -PV int J12(w)/(w - Omega) dw/(2 pi hbar),
/// Abel-regulated and extrapolated to zero regulator.
CouplingResult<double> xi_transition_pv(const Vector3& m1, const Vector3& m2, const PairGeometry<double>& geom,
                                        const TransitionSpec<double>& ts, const QuadratureSpec& spec = {},
                                        const UnitSystem& u = {});

/// -int J12(w)/w dw/(2 pi hbar), regulated and extrapolated like xi_transition_pv.
CouplingResult<double> xi_permanent_quadrature(const Vector3& m1, const Vector3& m2,
                                               const PairGeometry<double>& geom, const QuadratureSpec& spec = {},
                                               const UnitSystem& u = {});

/// K(s) = -(1/(pi hbar)) int_0^wc J12(w) sin(w s) dw with a cos^2 taper on the
/// last tenth of [0, wc]. Odd in s; K(0) = 0.
std::vector<KernelPoint> retarded_kernel(const Vector3& m1, const Vector3& m2, const PairGeometry<double>& geom,
                                         std::span<const double> s_grid, const QuadratureSpec& spec = {},
                                         const UnitSystem& u = {});

/// K r^4 / (c (mu0/4pi)|m1||m2|): the kernel in units where r = c = 1.
double reduced_kernel(double k, double r, double m1_norm, double m2_norm, const UnitSystem& u = {});

} // namespace dipolekit

#endif // DIPOLEKIT_ORACLES_HPP
