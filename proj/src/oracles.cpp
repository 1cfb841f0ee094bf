#include "dipolekit/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dipolekit/parallel.hpp"
#include "dipolekit/quadrature.hpp"

namespace dipolekit {

namespace {

constexpr double pi = std::numbers::pi;
constexpr int kPanelNodes = 16;

const quad::GaussLegendre& panel_rule() {
  static const quad::GaussLegendre rule(kPanelNodes);
  return rule;
}

/// Orthonormal pair spanning the plane normal to e.
std::pair<Vector3, Vector3> transverse_basis(const Vector3& e) {
  const Vector3 seed = std::abs(e.x()) < 0.9 ? Vector3::UnitX() : Vector3::UnitY();
  const Vector3 e1 = (seed - seed.dot(e) * e).normalized();
  return {e1, e.cross(e1)};
}

double angular_braces(double kr, const Vector3& m1, const Vector3& m2, const Vector3& e_r, int n_theta,
                      int n_phi) {
  const quad::GaussLegendre rule(n_theta);
  const auto [e1, e2] = transverse_basis(e_r);
  const double dphi = 2.0 * pi / n_phi;
  double total = 0.0;
  for (int i = 0; i < n_theta; ++i) {
    const double c = rule.nodes()[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    double ring = 0.0;
    for (int j = 0; j < n_phi; ++j) {
      const double phi = j * dphi;
      const Vector3 ek = s * std::cos(phi) * e1 + s * std::sin(phi) * e2 + c * e_r;
      ring += m1.dot(m2) - m1.dot(ek) * m2.dot(ek);
    }
    total += rule.weights()[i] * std::cos(kr * c) * ring * dphi;
  }
  return total / (4.0 * pi);
}

struct Extrapolated {
  double value;
  double residual;
};

Extrapolated extrapolate(const std::vector<double>& eta, const std::vector<double>& vals, int order) {
  const std::size_t n = static_cast<std::size_t>(order) + 1;
  const std::span<const double> x(eta.data() + eta.size() - n, n), y(vals.data() + vals.size() - n, n);
  const double full = quad::extrapolate_to_zero(x, y);
  const double reduced = n > 1 ? quad::extrapolate_to_zero(x.subspan(1), y.subspan(1)) : y[0];
  return {full, std::abs(full - reduced)};
}

/// Neumaier compensated sum.
struct Accumulator {
  double sum = 0.0, carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

/// Abel-regulated integrals int_0^inf 2 x^4 B(x) e^{-eta x} / (x^2 - a^2) dx for every
/// eta in the schedule (principal value at x = a when a > 0).
std::vector<double> regulated_integrals(const Vector3& m1, const Vector3& m2, const Vector3& e_r, double a,
                                        const QuadratureSpec& spec, double width) {
  const auto& eta = spec.eta_schedule;
  const std::size_t n = eta.size();
  const double x_max = 47.0 / eta.back();
  const auto& rule = panel_rule();
  std::vector<Accumulator> acc(n);
  auto collect = [&] {
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = acc[j].value();
    return out;
  };

  auto braces = [&](double x) { return spectral_braces(x, m1, m2, e_r); };
  auto add = [&](double lo, double hi, auto&& f) {
    const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
    const double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = lo + (p + 0.5) * h, half = 0.5 * h;
      for (int i = 0; i < kPanelNodes; ++i) {
        const double x = mid + half * rule.nodes()[i];
        const double w = half * rule.weights()[i];
        f(x, w);
      }
    }
  };

  if (a == 0.0) {
    add(0.0, x_max, [&](double x, double w) {
      const double base = 2.0 * x * x * braces(x) * w;
      for (std::size_t j = 0; j < n; ++j) acc[j].add(base * std::exp(-eta[j] * x));
    });
    return collect();
  }

  const double delta = a * spec.pv_window;
  // g_j(x) = 2 x^4 B e^{-eta_j x} / (x + a); the integrand is g_j(x) / (x - a).
  auto g_base = [&](double x) { return 2.0 * x * x * x * x * braces(x) / (x + a); };
  const double ga = g_base(a);
  auto outside = [&](double x, double w) {
    const double gx = g_base(x);
    for (std::size_t j = 0; j < n; ++j)
      acc[j].add(w * (gx * std::exp(-eta[j] * x) - ga * std::exp(-eta[j] * a)) / (x - a));
  };
  add(0.0, a - delta, outside);
  add(a + delta, x_max, outside);
  for (std::size_t j = 0; j < n; ++j) acc[j].add(ga * std::exp(-eta[j] * a) * std::log((x_max - a) / a));
  // window [a - delta, a + delta] folded onto [0, delta]
  for (int i = 0; i < kPanelNodes; ++i) {
    const double t = 0.5 * delta * (1.0 + rule.nodes()[i]);
    const double w = 0.5 * delta * rule.weights()[i];
    const double gp = g_base(a + t), gm = g_base(a - t);
    for (std::size_t j = 0; j < n; ++j)
      acc[j].add(w * (gp * std::exp(-eta[j] * (a + t)) - gm * std::exp(-eta[j] * (a - t))) / t);
  }
  return collect();
}

CouplingResult<double> frequency_integral(const Vector3& m1, const Vector3& m2, const PairGeometry<double>& geom,
                                          double a, const QuadratureSpec& spec, const UnitSystem& u,
                                          const char* method) {
  spec.validate();
  const double r = geom.distance();
  const double unit = u.mu0_over_4pi() / (pi * r * r * r);
  // half-width panels give the value, unit panels the discretization part of the residual
  const auto sums = regulated_integrals(m1, m2, geom.direction(), a, spec, 0.5);
  const auto coarse_sums = regulated_integrals(m1, m2, geom.direction(), a, spec, 1.0);
  std::vector<double> history(sums.size()), coarse(sums.size());
  for (std::size_t j = 0; j < sums.size(); ++j) {
    history[j] = -unit * sums[j];
    coarse[j] = -unit * coarse_sums[j];
  }
  auto ex = extrapolate(spec.eta_schedule, history, spec.extrapolation_order);
  ex.residual += std::abs(ex.value - extrapolate(spec.eta_schedule, coarse, spec.extrapolation_order).value);

  CouplingResult<double> out;
  out.xi = ex.value;
  out.reduced = reduced_coupling(ex.value, r, m1.norm(), m2.norm(), u);
  out.meta.method = method;
  out.meta.truncation = spec.extrapolation_order + 1;
  out.meta.residual = ex.residual;
  out.meta.history = history;

  const double scale = u.mu0_over_4pi() * m1.norm() * m2.norm() / (r * r * r);
  if (ex.residual > spec.tol * scale)
    throw ConvergenceError(std::string(method) + ": regulator extrapolation did not converge", history);
  return out;
}

} // namespace

void QuadratureSpec::validate() const {
  if (n_theta < 8 || n_phi < 8) throw ValidationError("n_theta and n_phi must be at least 8");
  if (eta_schedule.empty()) throw ValidationError("eta_schedule must not be empty");
  for (std::size_t i = 0; i < eta_schedule.size(); ++i) {
    if (!(eta_schedule[i] > 0.0)) throw ValidationError("eta_schedule entries must be positive");
    if (i > 0 && !(eta_schedule[i] < eta_schedule[i - 1]))
      throw ValidationError("eta_schedule must be strictly decreasing");
  }
  if (extrapolation_order < 0 || extrapolation_order >= static_cast<int>(eta_schedule.size()))
    throw ValidationError("extrapolation_order must be below the eta_schedule length");
  if (!(pv_window > 0.0 && pv_window < 1.0)) throw ValidationError("pv_window must lie in (0, 1)");
  if (omega_cut && !(*omega_cut > 0.0)) throw DomainError("omega_cut must be positive");
  if (!(tol > 0.0)) throw ValidationError("tol must be positive");
}

OracleValue j12_angular_quadrature(double omega, const Vector3& m1, const Vector3& m2,
                                   const PairGeometry<double>& geom, const QuadratureSpec& spec,
                                   const UnitSystem& u) {
  spec.validate();
  if (!(omega > 0.0)) throw DomainError("j12_angular_quadrature requires omega > 0");
  const double k = omega / u.c();
  const double kr = k * geom.distance();
  const int needed = 8 + static_cast<int>(std::ceil(4.0 * kr));
  if (spec.n_theta < needed)
    throw ValidationError("n_theta = " + std::to_string(spec.n_theta) + " is too small for kr = " +
                          std::to_string(kr) + "; use n_theta >= " + std::to_string(needed));
  const double prefactor = 2.0 * u.mu0_over_4pi() * u.hbar() * k * k * k;
  const Vector3& e = geom.direction();
  const double fine = angular_braces(kr, m1, m2, e, spec.n_theta, spec.n_phi);
  const double coarse = angular_braces(kr, m1, m2, e, spec.n_theta / 2, spec.n_phi / 2);
  const double floor = 1e-14 * m1.norm() * m2.norm();
  return {prefactor * fine, prefactor * std::max(std::abs(fine - coarse), floor)};
}

CouplingResult<double> xi_transition_pv(const Vector3& m1, const Vector3& m2, const PairGeometry<double>& geom,
                                        const TransitionSpec<double>& ts, const QuadratureSpec& spec,
                                        const UnitSystem& u) {
  return frequency_integral(m1, m2, geom, ts.x_omega(geom.distance(), u), spec, u, "abel-pv");
}

CouplingResult<double> xi_permanent_quadrature(const Vector3& m1, const Vector3& m2,
                                               const PairGeometry<double>& geom, const QuadratureSpec& spec,
                                               const UnitSystem& u) {
  return frequency_integral(m1, m2, geom, 0.0, spec, u, "abel");
}

std::vector<KernelPoint> retarded_kernel(const Vector3& m1, const Vector3& m2, const PairGeometry<double>& geom,
                                         std::span<const double> s_grid, const QuadratureSpec& spec,
                                         const UnitSystem& u) {
  spec.validate();
  if (!std::is_sorted(s_grid.begin(), s_grid.end())) throw ValidationError("s_grid must be sorted");
  const double r = geom.distance();
  const double wc = spec.omega_cut.value_or(50.0 * u.c() / r);
  const double xc = wc * r / u.c();
  const double x_taper = 0.9 * xc;
  const Vector3& e = geom.direction();
  const double unit = u.mu0_over_4pi() * u.c() / (r * r * r * r);
  const auto& rule = panel_rule();

  auto at = [&](std::size_t idx) {
    const double s = s_grid[idx];
    if (s == 0.0) return KernelPoint{s, 0.0};
    const double tau = std::abs(s) * u.c() / r;
    auto f = [&](double x) { return x * x * x * spectral_braces(x, m1, m2, e) * std::sin(x * tau); };
    auto taper = [&](double x) {
      const double c = std::cos(0.5 * pi * (x - x_taper) / (xc - x_taper));
      return f(x) * c * c;
    };
    const int body = std::max(1, static_cast<int>(std::ceil(x_taper * (1.0 + tau))));
    const int tail = std::max(1, static_cast<int>(std::ceil((xc - x_taper) * (1.0 + tau))));
    const double integral = rule.integrate(f, 0.0, x_taper, body) + rule.integrate(taper, x_taper, xc, tail);
    const double value = -(2.0 / pi) * unit * integral;
    return KernelPoint{s, s < 0.0 ? -value : value};
  };
  return parallel_map<KernelPoint>(s_grid.size(), at);
}

double reduced_kernel(double k, double r, double m1_norm, double m2_norm, const UnitSystem& u) {
  const double scale = u.c() * u.mu0_over_4pi() * m1_norm * m2_norm;
  if (scale == 0.0) return 0.0;
  return k * r * r * r * r / scale;
}

} // namespace dipolekit
