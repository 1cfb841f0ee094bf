#include "dipolekit/periodic_box.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "dipolekit/parallel.hpp"
#include "dipolekit/quadrature.hpp"

namespace dipolekit {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double kCoincidence = 1e-9;

double pair_scale(const Vector3& m1, const Vector3& m2, double r, const UnitSystem& u) {
  return u.mu0_over_4pi() * m1.norm() * m2.norm() / (r * r * r);
}

CouplingResult<double> box_coupling(double xi, const Vector3& m1, const Vector3& m2, double r,
                                    const UnitSystem& u) {
  CouplingResult<double> out;
  out.xi = xi;
  out.reduced = reduced_coupling(xi, r, m1.norm(), m2.norm(), u);
  return out;
}

/// Calls f(n) for every n with max|n_i| = N, in lexicographic order.
template <typename F>
void for_each_in_shell(int N, F&& f) {
  if (N == 0) {
    f(Eigen::Vector3i(0, 0, 0));
    return;
  }
  for (int x = -N; x <= N; ++x)
    for (int y = -N; y <= N; ++y) {
      if (std::abs(x) == N || std::abs(y) == N) {
        for (int z = -N; z <= N; ++z) f(Eigen::Vector3i(x, y, z));
      } else {
        f(Eigen::Vector3i(x, y, -N));
        f(Eigen::Vector3i(x, y, N));
      }
    }
}

double shell_increment(const Vector3& m1, const Vector3& m2, const Vector3& r, const BoxSpec& box, int N,
                       const UnitSystem& u) {
  const double L = box.L();
  const double dot = m1.dot(m2);
  double sum = 0.0;
  for_each_in_shell(N, [&](const Eigen::Vector3i& n) {
    const Vector3 d = r - L * n.cast<double>();
    const double R2 = d.squaredNorm();
    const double R = std::sqrt(R2);
    if (R < kCoincidence * L)
      throw ImageCoincidenceError("an image of dipole 1 coincides with dipole 2");
    sum += (dot - 3.0 * m1.dot(d) * m2.dot(d) / R2) / (R2 * R);
  });
  return u.mu0_over_4pi() * sum;
}

bool is_sum_of_three_squares(long long m, Eigen::Vector3i* out) {
  for (long long x = 0; x * x <= m; ++x)
    for (long long y = x; x * x + y * y <= m; ++y) {
      const long long rest = m - x * x - y * y;
      const long long z = std::llround(std::sqrt(static_cast<double>(rest)));
      if (z * z == rest) {
        if (out) *out = Eigen::Vector3i(int(x), int(y), int(z));
        return true;
      }
    }
  return false;
}

/// Calls f(n, |n|^2) for all n != 0 with |n_i| <= nmax and lo2 <= |n|^2 <= hi2.
template <typename F>
void for_each_mode(int nmax, double lo2, double hi2, F&& f) {
  for (int x = -nmax; x <= nmax; ++x)
    for (int y = -nmax; y <= nmax; ++y)
      for (int z = -nmax; z <= nmax; ++z) {
        const double m = double(x) * x + double(y) * y + double(z) * z;
        if (m == 0.0 || m < lo2 || m > hi2) continue;
        f(Eigen::Vector3i(x, y, z), m);
      }
}

/// Per-axis phase and Gaussian tables so that each mode costs a few products.
struct AxisTables {
  std::vector<std::complex<double>> phase[3];
  int nmax;

  AxisTables(const Vector3& r, double L, int nmax_) : nmax(nmax_) {
    for (int a = 0; a < 3; ++a) {
      phase[a].resize(2 * nmax + 1);
      for (int n = -nmax; n <= nmax; ++n) phase[a][n + nmax] = std::polar(1.0, 2.0 * pi * n * r[a] / L);
    }
  }
  std::complex<double> at(int a, int n) const { return phase[a][n + nmax]; }
};

// ---------------------------------------------------------------------------
// Ewald splitting of the Helmholtz lattice sum

/// A q^2 G_q + m1.(H_q - H_0).m2 where G_q = (1/V) sum_{k != 0} e^{ik.r}/(k^2 - q^2)
/// and H_q is its Hessian in r; t is the splitting parameter.
struct EwaldValue {
  double value;
  long long modes;
};

EwaldValue envelope_lattice_sum(const Vector3& m1, const Vector3& m2, const Vector3& r, const BoxSpec& box,
                                double q, double t) {
  const double L = box.L(), V = box.volume();
  const double A = m1.dot(m2);
  const double q2 = q * q;

  // reciprocal part
  const double k2max = q2 + 40.0 / t;
  const int nmax = static_cast<int>(std::ceil(std::sqrt(k2max) * L / (2.0 * pi)));
  const double dk = 2.0 * pi / L;
  const double hi2 = k2max / (dk * dk);
  const AxisTables tab(r, L, nmax);
  struct Slice {
    double sum = 0.0;
    long long count = 0;
  };
  const auto slices = parallel_map<Slice>(2 * nmax + 1, [&](std::size_t ix) {
    Slice s;
    const int x = static_cast<int>(ix) - nmax;
    for (int y = -nmax; y <= nmax; ++y)
      for (int z = -nmax; z <= nmax; ++z) {
        const double m = double(x) * x + double(y) * y + double(z) * z;
        if (m == 0.0 || m > hi2) continue;
        const Vector3 k = dk * Vector3(x, y, z);
        const double k2 = dk * dk * m;
        const double c = (tab.at(0, x) * tab.at(1, y) * tab.at(2, z)).real();
        const double gq = std::exp(-(k2 - q2) * t) / (k2 - q2);
        const double g0 = std::exp(-k2 * t) / k2;
        s.sum += c * (A * q2 * gq - m1.dot(k) * m2.dot(k) * (gq - g0));
        ++s.count;
      }
    return s;
  });
  double recip = 0.0;
  long long modes = 0;
  for (const auto& s : slices) {
    recip += s.sum;
    modes += s.count;
  }
  recip /= V;

  const double constant = -A * std::expm1(q2 * t) / V;

  // real-space part over images within the Gaussian range
  static const quad::GaussLegendre rule(16);
  const double range = std::sqrt(160.0 * t);
  const int nr = static_cast<int>(std::ceil(range / L)) + 1;
  double real = 0.0;
  for (int x = -nr; x <= nr; ++x)
    for (int y = -nr; y <= nr; ++y)
      for (int z = -nr; z <= nr; ++z) {
        const Vector3 d = r - L * Vector3(x, y, z);
        const double R = d.norm();
        if (R > range) continue;
        const Vector3 e = d / R;
        const double along = m1.dot(e) * m2.dot(e);
        const double v0 = R / (2.0 * std::sqrt(t));
        const double norm = 2.0 / (4.0 * std::pow(pi, 1.5) * R);
        auto f = [&](double v) {
          const double uu = v * v;
          const double shift = q2 * R * R / (4.0 * uu);
          const double base0 = norm * std::exp(-uu);
          const double baseq = norm * std::exp(-uu + shift);
          const double hess = (4.0 * uu * uu * along - 2.0 * uu * A) / (R * R);
          return A * q2 * baseq + base0 * std::expm1(shift) * hess;
        };
        real += rule.integrate(f, v0, v0 + 7.0, 7);
      }
  return {recip + constant + real, modes};
}

} // namespace

// ---------------------------------------------------------------------------

BoxSpec::BoxSpec(double L) : L_(L) {
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("box edge L must be positive and finite");
}

Vector3 BoxSpec::minimum_image(const Vector3& r) const {
  Vector3 out;
  for (int a = 0; a < 3; ++a) out[a] = r[a] - L_ * std::floor(r[a] / L_ + 0.5);
  return out;
}

PairGeometry<double> BoxSpec::reduce(const PairGeometry<double>& geom) const {
  const Vector3 r = minimum_image(geom.separation());
  if (r.norm() < kCoincidence * L_) throw ImageCoincidenceError("dipole 2 sits on a lattice image of dipole 1");
  return PairGeometry<double>::from_separation(r);
}

double background_term(const Vector3& m1, const Vector3& m2, const BoxSpec& box, const UnitSystem& u) {
  return u.mu0_over_4pi() * (8.0 * pi / 3.0) * m1.dot(m2) / box.volume();
}

std::vector<double> image_shell_sums(const Vector3& m1, const Vector3& m2, const PairGeometry<double>& geom,
                                     const BoxSpec& box, int shells, const UnitSystem& u) {
  if (shells < 0) throw ValidationError("shell count must be non-negative");
  const auto g = box.reduce(geom);
  std::vector<double> partial;
  partial.reserve(shells + 1);
  partial.push_back(classical_coupling(m1, m2, g, u).xi + background_term(m1, m2, box, u));
  for (int N = 1; N <= shells; ++N) partial.push_back(partial.back() + shell_increment(m1, m2, g.separation(), box, N, u));
  return partial;
}

BoxResult xi_permanent_images(const Vector3& m1, const Vector3& m2, const PairGeometry<double>& geom,
                              const BoxSpec& box, const ImageSumParams& params, const UnitSystem& u) {
  if (params.shell_max < 2) throw ValidationError("shell_max must be at least 2");
  if (!(params.tol > 0.0)) throw ValidationError("image tolerance must be positive");
  const auto g = box.reduce(geom);
  const double r = g.distance();
  const double scale = pair_scale(m1, m2, r, u);
  std::vector<double> partial{classical_coupling(m1, m2, g, u).xi + background_term(m1, m2, box, u)};
  for (int N = 1; N <= params.shell_max; ++N) {
    const double delta = shell_increment(m1, m2, g.separation(), box, N, u);
    partial.push_back(partial.back() + delta);
    const double sum = partial.back();
    const double ref = std::max(std::abs(sum), scale);
    if (N >= 2 && std::abs(delta) <= params.tol * ref) {
      BoxResult out{box_coupling(sum, m1, m2, r, u), {}};
      // increments fall off like N^-3, so the remaining tail is about N/2 of the last one
      out.coupling.meta = {"image-shells", N, 0.5 * N * std::abs(delta), partial};
      out.report = {sum, N, std::abs(delta), 0.0, 0, false};
      return out;
    }
  }
  throw ConvergenceError("image sum did not converge within " + std::to_string(params.shell_max) + " shells",
                         partial);
}

BoxResult xi_permanent_modesum(const Vector3& m1, const Vector3& m2, const PairGeometry<double>& geom,
                               const BoxSpec& box, const ModeSumParams& params, const UnitSystem& u) {
  const auto& sched = params.sigma_schedule;
  if (sched.size() < 2) throw ValidationError("sigma_schedule needs at least two entries");
  for (std::size_t i = 0; i < sched.size(); ++i)
    if (!(sched[i] > 0.0) || (i > 0 && !(sched[i] < sched[i - 1])))
      throw ValidationError("sigma_schedule must be positive and strictly decreasing");

  const auto g = box.reduce(geom);
  const Vector3 r = g.separation();
  const double L = box.L(), V = box.volume();
  double d_min = r.norm();
  for (int x = -1; x <= 1; ++x)
    for (int y = -1; y <= 1; ++y)
      for (int z = -1; z <= 1; ++z) d_min = std::min(d_min, (r - L * Vector3(x, y, z)).norm());

  const std::size_t ns = sched.size();
  std::vector<double> sigma(ns);
  for (std::size_t j = 0; j < ns; ++j) sigma[j] = sched[j] * d_min;
  const double dk = 2.0 * pi / L;
  const double kmax = 6.1 / sigma.back();
  const int nmax = static_cast<int>(std::ceil(kmax / dk));
  if (nmax > params.k_shell_max)
    throw ConvergenceError("mode sum needs |n| up to " + std::to_string(nmax) + ", above k_shell_max = " +
                               std::to_string(params.k_shell_max),
                           {});

  const AxisTables tab(r, L, nmax);
  std::vector<std::vector<double>> gauss(ns, std::vector<double>(2 * nmax + 1));
  for (std::size_t j = 0; j < ns; ++j)
    for (int n = -nmax; n <= nmax; ++n) gauss[j][n + nmax] = std::exp(-dk * dk * n * n * sigma[j] * sigma[j]);

  const double hi2 = (kmax / dk) * (kmax / dk);
  const double dot = m1.dot(m2);
  struct Slice {
    std::vector<double> sums;
    long long count = 0;
  };
  const auto slices = parallel_map<Slice>(2 * nmax + 1, [&](std::size_t ix) {
    Slice s;
    s.sums.assign(ns, 0.0);
    const int x = static_cast<int>(ix) - nmax;
    for (int y = -nmax; y <= nmax; ++y)
      for (int z = -nmax; z <= nmax; ++z) {
        const double m = double(x) * x + double(y) * y + double(z) * z;
        if (m == 0.0 || m > hi2) continue;
        const Vector3 n(x, y, z);
        const double t = dot - m1.dot(n) * m2.dot(n) / m;
        const double c = t * (tab.at(0, x) * tab.at(1, y) * tab.at(2, z)).real();
        for (std::size_t j = 0; j < ns; ++j)
          s.sums[j] += c * gauss[j][x + nmax] * gauss[j][y + nmax] * gauss[j][z + nmax];
        ++s.count;
      }
    return s;
  });
  std::vector<double> history(ns, 0.0);
  long long modes = 0;
  for (const auto& s : slices) {
    for (std::size_t j = 0; j < ns; ++j) history[j] += s.sums[j];
    modes += s.count;
  }
  for (auto& h : history) h *= -u.mu0() / V;

  const double value = history.back();
  const double residual = std::abs(history[ns - 1] - history[ns - 2]);
  const double rr = g.distance();
  if (residual > params.tol * pair_scale(m1, m2, rr, u))
    throw ConvergenceError("regulated mode sum did not settle along the sigma schedule", history);
  BoxResult out{box_coupling(value, m1, m2, rr, u), {}};
  out.coupling.meta = {"gaussian-modesum", nmax, residual, history};
  out.report = {value, nmax, residual, sigma.back(), modes, false};
  return out;
}

double near_resonant_sum(std::span<const ModeCoupling> modes, double omega, const UnitSystem& u) {
  double sum = 0.0;
  for (const auto& m : modes) sum -= m.g12 / (u.hbar() * (m.omega_k - omega));
  return sum;
}

NearestMode nearest_mode(const BoxSpec& box, double omega, const UnitSystem& u) {
  const double unit = 2.0 * pi * u.c() / box.L();
  const double target = omega / unit;
  const double t2 = target * target;
  NearestMode best;
  best.detuning = std::numeric_limits<double>::infinity();
  auto consider = [&](long long m) {
    Eigen::Vector3i n;
    if (m < 1 || !is_sum_of_three_squares(m, &n)) return false;
    const double wk = unit * std::sqrt(double(m));
    if (std::abs(wk - omega) < std::abs(best.detuning)) best = {{n.x(), n.y(), n.z()}, wk, wk - omega};
    return true;
  };
  for (long long m = std::max<long long>(1, static_cast<long long>(std::floor(t2))); m >= 1; --m)
    if (consider(m)) break;
  for (long long m = static_cast<long long>(std::floor(t2)) + 1;; ++m)
    if (consider(m)) break;
  return best;
}

BoxResult xi_transition_box(const Vector3& m1, const Vector3& m2, const PairGeometry<double>& geom,
                            const BoxSpec& box, const TransitionSpec<double>& ts, Estimator estimator,
                            const TransitionBoxParams& params, const UnitSystem& u) {
  if (!(params.delta_min > 0.0)) throw ValidationError("delta_min must be positive");
  const double omega = ts.omega();
  const auto near = nearest_mode(box, omega, u);
  if (std::abs(near.detuning) < params.delta_min * omega)
    throw ResonanceError("a box mode is resonant with the transition (|omega_k - Omega| < delta_min)", near.n,
                         near.omega_k, near.detuning);

  const auto g = box.reduce(geom);
  const Vector3 r = g.separation();
  const double rr = g.distance();
  const double L = box.L(), V = box.volume();
  const double dk = 2.0 * pi / L;

  if (estimator == Estimator::NearResonant) {
    if (!(params.window > 0.0)) throw ValidationError("near-resonant window must be positive");
    const double lo = std::max(0.0, (1.0 - params.window) * omega / (u.c() * dk));
    const double hi = (1.0 + params.window) * omega / (u.c() * dk);
    const int nmax = static_cast<int>(std::floor(hi));
    const AxisTables tab(r, L, std::max(nmax, 0));
    const double dot = m1.dot(m2);
    std::vector<ModeCoupling> window;
    for_each_mode(nmax, lo * lo, hi * hi, [&](const Eigen::Vector3i& n, double m) {
      const Vector3 nv = n.cast<double>();
      const double wk = u.c() * dk * std::sqrt(m);
      const double t = dot - m1.dot(nv) * m2.dot(nv) / m;
      const double c = (tab.at(0, n.x()) * tab.at(1, n.y()) * tab.at(2, n.z())).real();
      window.push_back({wk, u.mu0() * u.hbar() * wk / (2.0 * V) * t * c});
    });
    const double sum = near_resonant_sum(window, omega, u);
    const auto modes = static_cast<long long>(window.size());
    BoxResult out;
    if (modes == 0) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      out.coupling = box_coupling(nan, m1, m2, rr, u);
      out.coupling.meta = {"near-resonant", 0, 0.0, {}};
      out.report = {nan, 0, 0.0, 0.0, 0, true};
      return out;
    }
    out.coupling = box_coupling(sum, m1, m2, rr, u);
    out.coupling.meta = {"near-resonant", nmax, 0.0, {sum}};
    out.report = {sum, nmax, 0.0, 0.0, modes, false};
    return out;
  }

  const auto base = xi_permanent_images(m1, m2, g, box, params.images, u);
  const double q = omega / u.c();
  const double t1 = std::min(std::pow(0.12 * L, 2), 9.0 / (q * q));
  const double t2 = 0.7 * t1;
  const auto e1 = envelope_lattice_sum(m1, m2, r, box, q, t1);
  const auto e2 = envelope_lattice_sum(m1, m2, r, box, q, t2);
  const double env1 = -u.mu0() * e1.value, env2 = -u.mu0() * e2.value;
  const double xi = base.report.value + env1;
  const double residual = base.coupling.meta.residual + std::abs(env1 - env2);

  BoxResult out{box_coupling(xi, m1, m2, rr, u), {}};
  out.coupling.meta = {"images+ewald-envelope", base.report.shells_used, residual,
                       {base.report.value + env2, xi}};
  out.report = {xi, base.report.shells_used, base.report.last_shell_delta, std::sqrt(t1), e1.modes, false};
  return out;
}

RatioResult ratio_to_free(const Vector3& m1, const Vector3& m2, const PairGeometry<double>& geom,
                          const BoxSpec& box, CouplingKind kind, const RatioParams& params, const UnitSystem& u) {
  const auto g = box.reduce(geom);
  RatioResult out;
  if (kind == CouplingKind::Permanent) {
    out.free_reduced = classical_coupling(m1, m2, g, u).reduced;
    out.box = xi_permanent_images(m1, m2, g, box, params.images, u);
  } else {
    const TransitionSpec<double> ts(params.omega);
    out.free_reduced = xi_transition(m1, m2, g, ts, u).reduced;
    out.box = xi_transition_box(m1, m2, g, box, ts, params.estimator, params.transition, u);
  }
  if (std::abs(out.free_reduced) > params.free_floor) {
    out.ratio = out.box.coupling.reduced / out.free_reduced;
    out.divergent = false;
  }
  return out;
}

} // namespace dipolekit
