#ifndef DIPOLEKIT_PERIODIC_BOX_HPP
#define DIPOLEKIT_PERIODIC_BOX_HPP

#include <array>
#include <limits>
#include <span>
#include <vector>

#include "dipolekit/core.hpp"
#include "dipolekit/free_space.hpp"

namespace dipolekit {

/// Periodic cube of edge L. Modes k = 2 pi n / L, images r_n = L n.
class BoxSpec {
public:
  explicit BoxSpec(double L);

  double L() const { return L_; }
  double volume() const { return L_ * L_ * L_; }
  /// Separation reduced component-wise into [-L/2, L/2).
  Vector3 minimum_image(const Vector3& r) const;
  /// Pair geometry with the separation replaced by its minimum image.
  PairGeometry<double> reduce(const PairGeometry<double>& geom) const;

private:
  double L_;
};

struct LatticeSumReport {
  double value = 0.0;
  int shells_used = 0;          ///< cubic image shells or mode cutoff |n|max
  double last_shell_delta = 0.0;
  double regulator_sigma = 0.0; ///< smallest regulator width used, 0 if none
  long long modes_used = 0;     ///< plane-wave modes summed
  bool empty_window = false;    ///< near-resonant window held no mode
};

struct BoxResult {
  CouplingResult<double> coupling;
  LatticeSumReport report;
};

/// Uniform term (2/3) mu0 m1.m2 / V left over when the image sum is taken in
/// cubic shells rather than as the k != 0 mode sum.
double background_term(const Vector3& m1, const Vector3& m2, const BoxSpec& box, const UnitSystem& u = {});

/// Partial sums S_0..S_N of the image series over complete cubic shells
/// max|n_i| = N, including the background term in S_0. S_0 minus the
/// background is the free-space value.
std::vector<double> image_shell_sums(const Vector3& m1, const Vector3& m2, const PairGeometry<double>& geom,
                                     const BoxSpec& box, int shells, const UnitSystem& u = {});

struct ImageSumParams {
  int shell_max = 64;
  /// Stop when a shell increment is below tol max(|partial sum|, scale), with
  /// scale = (mu0/4pi)|m1||m2|/r^3: relative for O(1) reduced sums, absolute near zero.
  double tol = 1e-6;
};

/// Image-lattice sum for permanent dipoles, summed shell by shell until the
/// increment test passes.
BoxResult xi_permanent_images(const Vector3& m1, const Vector3& m2, const PairGeometry<double>& geom,
                              const BoxSpec& box, const ImageSumParams& params = {}, const UnitSystem& u = {});

struct ModeSumParams {
  /// Gaussian widths as fractions of the distance from r to the nearest lattice point.
  std::vector<double> sigma_schedule{1.0 / 7.0, 1.0 / 8.0, 1.0 / 9.0, 1.0 / 10.0};
  int k_shell_max = 400; ///< largest |n_i| allowed
  double tol = 1e-6;     ///< accepted residual, relative to (mu0/4pi)|m1||m2|/r^3
};

/// Direct sum over box modes k != 0 of -(mu0/V) T_k cos(k.r) with a Gaussian
/// factor exp(-k^2 sigma^2), evaluated along a decreasing sigma schedule.
BoxResult xi_permanent_modesum(const Vector3& m1, const Vector3& m2, const PairGeometry<double>& geom,
                               const BoxSpec& box, const ModeSumParams& params = {}, const UnitSystem& u = {});

enum class Estimator { NearResonant, FullSum };

struct TransitionBoxParams {
  double delta_min = 1e-6; ///< resonance guard, fraction of Omega
  double window = 0.2;     ///< near-resonant half-width W, fraction of Omega
  ImageSumParams images{};
};

/// Smallest |omega_k - Omega| over all box modes, with the mode attaining it.
struct NearestMode {
  std::array<int, 3> n{};
  double omega_k = 0.0;
  double detuning = 0.0;
};
NearestMode nearest_mode(const BoxSpec& box, double omega, const UnitSystem& u = {});

/// One field mode seen by the pair: frequency and Re sum_sigma g1* g2 (energy^2).
struct ModeCoupling {
  double omega_k = 0.0;
  double g12 = 0.0;
};

/// Pole-approximation sum -sum g12 / (hbar (omega_k - Omega)).
double near_resonant_sum(std::span<const ModeCoupling> modes, double omega, const UnitSystem& u = {});

/// Transition-dipole coupling in the box. FullSum weighs every mode by
/// omega_k^2 / (omega_k^2 - Omega^2); NearResonant keeps only modes with
/// |omega_k - Omega| <= W in the pole approximation.
BoxResult xi_transition_box(const Vector3& m1, const Vector3& m2, const PairGeometry<double>& geom,
                            const BoxSpec& box, const TransitionSpec<double>& ts, Estimator estimator,
                            const TransitionBoxParams& params = {}, const UnitSystem& u = {});

enum class CouplingKind { Permanent, Transition };

struct RatioParams {
  ImageSumParams images{};
  TransitionBoxParams transition{};
  Estimator estimator = Estimator::FullSum;
  double omega = 0.0;          ///< transition frequency, Transition kind only
  double free_floor = 1e-12;   ///< reduced free-space magnitude below which the ratio is flagged
};

struct RatioResult {
  double ratio = std::numeric_limits<double>::infinity();
  bool divergent = true;
  double free_reduced = 0.0;
  BoxResult box;
};

/// Box coupling divided by the free-space coupling of the minimum-image pair.
RatioResult ratio_to_free(const Vector3& m1, const Vector3& m2, const PairGeometry<double>& geom,
                          const BoxSpec& box, CouplingKind kind, const RatioParams& params = {},
                          const UnitSystem& u = {});

} // namespace dipolekit

#endif // DIPOLEKIT_PERIODIC_BOX_HPP
