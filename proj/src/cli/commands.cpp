#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <variant>

#include "dipolekit/free_space.hpp"
#include "dipolekit/oracles.hpp"
#include "dipolekit/parallel.hpp"
#include "dipolekit/periodic_box.hpp"

namespace dipolekit::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kFreeFloor = 1e-12;

// ---------------------------------------------------------------------------
// Flat records for single-point commands

using Field = std::variant<double, long long, std::string>;
using Record = std::vector<std::pair<std::string, Field>>;

std::string field_text(const Field& f) {
  if (auto d = std::get_if<double>(&f)) return format_number(*d);
  if (auto i = std::get_if<long long>(&f)) return std::to_string(*i);
  return std::get<std::string>(f);
}

void write_record(const Record& rec, Format fmt, std::ostream& os) {
  if (fmt == Format::Json) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : rec) std::visit([&, &k = k](const auto& x) { j[k] = x; }, v);
    os << j.dump(2) << '\n';
    return;
  }
  for (std::size_t i = 0; i < rec.size(); ++i) os << (i ? "," : "") << rec[i].first;
  os << '\n';
  for (std::size_t i = 0; i < rec.size(); ++i) os << (i ? "," : "") << field_text(rec[i].second);
  os << '\n';
}

Field ratio_field(double num, double den) {
  if (std::abs(den) <= kFreeFloor) return std::string("DIV");
  return num / den;
}

// ---------------------------------------------------------------------------
// Output sink: file when --out is given, otherwise the provided stream

class Sink {
public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw ConfigError("out", "cannot open '" + path + "' for writing");
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }

private:
  std::ofstream file_;
  std::ostream* os_;
};

// ---------------------------------------------------------------------------
// free

int cmd_free(const RunConfig& cfg, std::ostream& out) {
  const auto u = cfg.unit_system();
  const auto geom = PairGeometry<double>::from_separation(*cfg.r);
  const auto d1 = DipoleVector<double>::permanent_e(*cfg.m1);
  const auto d2 = DipoleVector<double>::permanent_e(*cfg.m2);
  const auto cl = classical_coupling(*cfg.m1, *cfg.m2, geom, u);
  const auto p = xi_permanent(d1, d2, geom, u);
  Record rec{{"classical", cl.xi}, {"classical_reduced", cl.reduced}, {"xi_P", p.xi}, {"xi_P_reduced", p.reduced}};
  if (cfg.omega) {
    const TransitionSpec<double> ts(*cfg.omega);
    const auto t = xi_transition(*cfg.m1, *cfg.m2, geom, ts, u);
    rec.emplace_back("x_omega", ts.x_omega(geom.distance(), u));
    rec.emplace_back("xi_T", t.xi);
    rec.emplace_back("xi_T_reduced", t.reduced);
    rec.emplace_back("xi_T_over_xi_P", ratio_field(t.reduced, p.reduced));
  }
  Sink sink(cfg.out, out);
  write_record(rec, cfg.format, sink.stream());
  return kOk;
}

// ---------------------------------------------------------------------------
// box

RatioParams ratio_params(const RunConfig& cfg) {
  RatioParams p;
  p.images.shell_max = cfg.shell_max;
  if (cfg.tol) p.images.tol = *cfg.tol;
  p.transition.images = p.images;
  p.estimator = cfg.estimator;
  p.free_floor = kFreeFloor;
  if (cfg.omega) p.omega = *cfg.omega;
  return p;
}

int cmd_box(const RunConfig& cfg, std::ostream& out) {
  const auto u = cfg.unit_system();
  const BoxSpec box(*cfg.L);
  const auto geom = PairGeometry<double>::from_separation(*cfg.r);
  const auto kind = cfg.omega ? CouplingKind::Transition : CouplingKind::Permanent;
  const auto res = ratio_to_free(*cfg.m1, *cfg.m2, geom, box, kind, ratio_params(cfg), u);
  const auto& rep = res.box.report;
  Record rec{{"kind", std::string(kind == CouplingKind::Permanent ? "permanent" : "transition")}};
  if (kind == CouplingKind::Transition)
    rec.emplace_back("estimator", std::string(cfg.estimator == Estimator::FullSum ? "full" : "near"));
  if (rep.empty_window) {
    rec.emplace_back("xi_box", std::string("EMPTY"));
    rec.emplace_back("xi_box_reduced", std::string("EMPTY"));
  } else {
    rec.emplace_back("xi_box", res.box.coupling.xi);
    rec.emplace_back("xi_box_reduced", res.box.coupling.reduced);
  }
  rec.emplace_back("xi_free_reduced", res.free_reduced);
  rec.emplace_back("ratio", res.divergent || rep.empty_window ? Field(std::string("DIV")) : Field(res.ratio));
  rec.emplace_back("shells_used", static_cast<long long>(rep.shells_used));
  rec.emplace_back("modes_used", rep.modes_used);
  rec.emplace_back("residual", res.box.coupling.meta.residual);
  rec.emplace_back("method", res.box.coupling.meta.method);
  Sink sink(cfg.out, out);
  write_record(rec, cfg.format, sink.stream());
  return kOk;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  int warnings = 0;
  const auto rows = sweep_rows(cfg, warnings);
  Sink sink(cfg.out, out);
  auto& os = sink.stream();
  if (cfg.format == Format::Json) {
    ordered_json j;
    j["rows"] = ordered_json::array();
    for (const auto& row : rows) j["rows"].push_back(to_json(row));
    j["warnings"] = warnings;
    os << j.dump(2) << '\n';
  } else {
    os << kSweepHeader << '\n';
    for (const auto& row : rows) os << to_csv(row) << '\n';
  }
  if (warnings > 0) err << "dipolekit: warning: " << warnings << " sweep rows did not converge\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// kernel

int cmd_kernel(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto u = cfg.unit_system();
  const auto geom = PairGeometry<double>::from_separation(*cfg.r);
  const double r = geom.distance();
  const double t_unit = r / u.c();
  std::vector<double> s(cfg.n_s);
  for (int i = 0; i < cfg.n_s; ++i) s[i] = cfg.n_s == 1 ? 0.0 : cfg.s_max * t_unit * i / (cfg.n_s - 1);
  QuadratureSpec spec;
  spec.omega_cut = cfg.omega_cut;
  const auto pts = retarded_kernel(*cfg.m1, *cfg.m2, geom, s, spec, u);

  double peak_s = 0.0, peak = -1.0;
  std::vector<std::pair<double, double>> rows;
  for (const auto& p : pts) {
    const double value = reduced_kernel(p.value, r, cfg.m1->norm(), cfg.m2->norm(), u);
    rows.emplace_back(p.s / t_unit, value);
    if (std::abs(value) > peak) {
      peak = std::abs(value);
      peak_s = p.s / t_unit;
    }
  }
  Sink sink(cfg.out, out);
  auto& os = sink.stream();
  if (cfg.format == Format::Json) {
    ordered_json j;
    j["rows"] = ordered_json::array();
    for (const auto& [x, v] : rows) j["rows"].push_back({{"s_c_over_r", x}, {"kernel_reduced", v}});
    j["peak_s_c_over_r"] = peak_s;
    os << j.dump(2) << '\n';
  } else {
    os << "s_c_over_r,kernel_reduced\n";
    for (const auto& [x, v] : rows) os << format_number(x) << ',' << format_number(v) << '\n';
  }
  err << "peak |K| at s c/r = " << format_number(peak_s) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// check

/// Reproducible uniform doubles from a 64-bit Mersenne twister.
class Sampler {
public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}
  double uniform(double a, double b) { return a + (b - a) * ((rng_() >> 11) * 0x1.0p-53); }
  Vector3 direction() {
    const double z = uniform(-1.0, 1.0), phi = uniform(0.0, 2.0 * std::numbers::pi);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(phi), s * std::sin(phi), z};
  }
  Vector3 moment() { return uniform(0.5, 2.0) * direction(); }

private:
  std::mt19937_64 rng_;
};

struct SuiteResult {
  std::string name;
  int configs = 0;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool pass() const { return deviation <= tolerance; }
};

double deviation(double value, double ref) { return std::abs(value - ref) / std::max(std::abs(ref), 0.1); }

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const auto u = cfg.unit_system();
  auto tol = [&](double dflt) { return cfg.tol.value_or(dflt); };
  std::vector<SuiteResult> suites;

  {
    Sampler rng(cfg.seed);
    SuiteResult s{"classical_identity", cfg.count, 0.0, tol(1e-12)};
    for (int i = 0; i < cfg.count; ++i) {
      const Vector3 m1 = rng.moment(), m2 = rng.moment();
      const auto g = PairGeometry<double>::from_separation(rng.uniform(0.5, 2.0) * rng.direction());
      const auto p = xi_permanent(DipoleVector<double>::permanent_e(m1), DipoleVector<double>::permanent_g(m2), g, u);
      s.deviation = std::max(s.deviation, deviation(p.reduced, classical_coupling(m1, m2, g, u).reduced));
    }
    suites.push_back(s);
  }
  {
    Sampler rng(cfg.seed + 1);
    const int n = std::min(cfg.count, 20);
    SuiteResult s{"spectral_density_quadrature", 3 * n, 0.0, tol(1e-8)};
    for (int i = 0; i < n; ++i) {
      const Vector3 m1 = rng.moment(), m2 = rng.moment();
      const auto g = PairGeometry<double>::from_separation(rng.uniform(0.5, 2.0) * rng.direction());
      for (double kr : {0.1, 1.0, 10.0}) {
        const double omega = kr * u.c() / g.distance();
        const double k = omega / u.c();
        const double unit = 2.0 * u.mu0_over_4pi() * u.hbar() * k * k * k * m1.norm() * m2.norm();
        const double q = j12_angular_quadrature(omega, m1, m2, g, {}, u).value;
        const double c = spectral_density(omega, m1, m2, g, u).value;
        s.deviation = std::max(s.deviation, deviation(q / unit, c / unit));
      }
    }
    suites.push_back(s);
  }
  {
    Sampler rng(cfg.seed + 2);
    const int n = std::min(cfg.count, 10);
    SuiteResult s{"transition_pv_quadrature", 3 * n, 0.0, tol(1e-4)};
    for (int i = 0; i < n; ++i) {
      const Vector3 m1 = rng.moment(), m2 = rng.moment();
      const auto g = PairGeometry<double>::from_separation(rng.uniform(0.5, 2.0) * rng.direction());
      for (double x : {0.5, 2.0, 5.0}) {
        const TransitionSpec<double> ts(x * u.c() / g.distance());
        const auto pv = xi_transition_pv(m1, m2, g, ts, {}, u);
        s.deviation = std::max(s.deviation, deviation(pv.reduced, xi_transition(m1, m2, g, ts, u).reduced));
      }
    }
    suites.push_back(s);
  }
  {
    Sampler rng(cfg.seed + 3);
    const int n = std::min(cfg.count, 10);
    SuiteResult s{"permanent_quadrature", n, 0.0, tol(1e-4)};
    for (int i = 0; i < n; ++i) {
      const Vector3 m1 = rng.moment(), m2 = rng.moment();
      const auto g = PairGeometry<double>::from_separation(rng.uniform(0.5, 2.0) * rng.direction());
      const auto q = xi_permanent_quadrature(m1, m2, g, {}, u);
      s.deviation = std::max(s.deviation, deviation(q.reduced, classical_coupling(m1, m2, g, u).reduced));
    }
    suites.push_back(s);
  }
  {
    Sampler rng(cfg.seed + 4);
    const int n = std::min(cfg.count, 20);
    SuiteResult s{"images_vs_modesum", n, 0.0, tol(1e-3)};
    const double L = cfg.L.value_or(1.0);
    const BoxSpec box(L);
    for (int i = 0; i < n; ++i) {
      const Vector3 m1 = rng.moment(), m2 = rng.moment();
      const auto g = PairGeometry<double>::from_separation(0.3 * L * rng.direction());
      const auto im = xi_permanent_images(m1, m2, g, box, {}, u);
      const auto ms = xi_permanent_modesum(m1, m2, g, box, {}, u);
      s.deviation = std::max(s.deviation, deviation(ms.coupling.reduced, im.coupling.reduced));
    }
    suites.push_back(s);
  }

  bool ok = true;
  Sink sink(cfg.out, out);
  auto& os = sink.stream();
  if (cfg.format == Format::Json) {
    ordered_json j;
    j["seed"] = cfg.seed;
    j["suites"] = ordered_json::array();
    for (const auto& s : suites) {
      j["suites"].push_back({{"suite", s.name},
                             {"configs", s.configs},
                             {"deviation", s.deviation},
                             {"tolerance", s.tolerance},
                             {"status", s.pass() ? "PASS" : "FAIL"}});
      ok = ok && s.pass();
    }
    j["passed"] = ok;
    os << j.dump(2) << '\n';
  } else {
    os << "suite,configs,deviation,tolerance,status\n";
    for (const auto& s : suites) {
      os << s.name << ',' << s.configs << ',' << format_number(s.deviation) << ',' << format_number(s.tolerance)
         << ',' << (s.pass() ? "PASS" : "FAIL") << '\n';
      ok = ok && s.pass();
    }
  }
  return ok ? kOk : kCheckFailed;
}

const char* flag_text(RowFlag f) {
  switch (f) {
  case RowFlag::Divergent: return "DIV";
  case RowFlag::NotConverged: return "NCONV";
  case RowFlag::None: break;
  }
  return "";
}

} // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered_json to_json(const SweepRow& row) {
  ordered_json j;
  j["phi"] = row.phi;
  j["r_over_L"] = row.r_over_L;
  j["xi_free_reduced"] = row.xi_free_reduced;
  j["xi_box_reduced"] = row.xi_box_reduced;
  if (row.flag == RowFlag::None) j["ratio"] = row.ratio;
  else j["ratio"] = flag_text(row.flag);
  j["shells_used"] = row.shells_used;
  return j;
}

SweepRow sweep_row_from_json(const ordered_json& j) {
  SweepRow row;
  row.phi = j.at("phi").get<double>();
  row.r_over_L = j.at("r_over_L").get<double>();
  row.xi_free_reduced = j.at("xi_free_reduced").get<double>();
  row.xi_box_reduced = j.at("xi_box_reduced").get<double>();
  const auto& ratio = j.at("ratio");
  if (ratio.is_string()) {
    const auto s = ratio.get<std::string>();
    if (s == "DIV") row.flag = RowFlag::Divergent;
    else if (s == "NCONV") row.flag = RowFlag::NotConverged;
    else throw ConfigError("ratio", "unknown flag '" + s + "'");
  } else {
    row.ratio = ratio.get<double>();
  }
  row.shells_used = j.at("shells_used").get<int>();
  return row;
}

std::string to_csv(const SweepRow& row) {
  std::string s = format_number(row.phi) + ',' + format_number(row.r_over_L) + ',' +
                  format_number(row.xi_free_reduced) + ',' + format_number(row.xi_box_reduced) + ',';
  s += row.flag == RowFlag::None ? format_number(row.ratio) : flag_text(row.flag);
  s += ',' + std::to_string(row.shells_used);
  return s;
}

std::vector<SweepRow> sweep_rows(const RunConfig& cfg, int& warnings) {
  const auto u = cfg.unit_system();
  const double L = cfg.L.value_or(1.0);
  const BoxSpec box(L);
  const Vector3 e = cfg.e_r.normalized();
  const auto params = ratio_params(cfg);
  const auto kind = cfg.omega ? CouplingKind::Transition : CouplingKind::Permanent;
  const int n = cfg.n_phi;
  const double step = (cfg.phi_end - cfg.phi_start) / n;
  const bool wraps = std::abs(cfg.phi_end - cfg.phi_start - 2.0 * std::numbers::pi) < 1e-12;

  std::vector<SweepRow> rows;
  warnings = 0;
  for (double rl : cfg.r_over_L) {
    const auto geom = PairGeometry<double>::from_separation(rl * L * e);
    auto block = parallel_map<SweepRow>(n, [&](std::size_t i) {
      SweepRow row;
      row.phi = cfg.phi_start + step * static_cast<double>(i);
      row.r_over_L = rl;
      const Vector3 m(std::cos(row.phi), 0.0, std::sin(row.phi));
      try {
        const auto res = ratio_to_free(m, m, geom, box, kind, params, u);
        row.xi_free_reduced = res.free_reduced;
        row.xi_box_reduced = res.box.coupling.reduced;
        row.shells_used = res.box.report.shells_used;
        if (res.divergent || res.box.report.empty_window) row.flag = RowFlag::Divergent;
        else row.ratio = res.ratio;
      } catch (const ConvergenceError& ex) {
        const auto g = box.reduce(geom);
        row.xi_free_reduced = classical_coupling(m, m, g, u).reduced;
        const double last = ex.history().empty() ? std::numeric_limits<double>::quiet_NaN() : ex.history().back();
        row.xi_box_reduced = reduced_coupling(last, g.distance(), m.norm(), m.norm(), u);
        row.shells_used = cfg.shell_max;
        row.flag = RowFlag::NotConverged;
      }
      return row;
    });
    // rows bracketing a sign change of the free-space value
    for (int i = 0; i < n; ++i) {
      const int j = i + 1 < n ? i + 1 : (wraps ? 0 : -1);
      if (j < 0 || j == i) continue;
      if ((block[i].xi_free_reduced > 0.0) != (block[j].xi_free_reduced > 0.0)) {
        for (int k : {i, j})
          if (block[k].flag == RowFlag::None) block[k].flag = RowFlag::Divergent;
      }
    }
    for (auto& row : block) {
      if (row.flag == RowFlag::NotConverged) ++warnings;
      rows.push_back(row);
    }
  }
  return rows;
}

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate(cfg);
    switch (cfg.command) {
    case Command::Free: return cmd_free(cfg, out);
    case Command::Box: return cmd_box(cfg, out);
    case Command::Sweep: return cmd_sweep(cfg, out, err);
    case Command::Kernel: return cmd_kernel(cfg, out, err);
    case Command::Check: return cmd_check(cfg, out);
    }
  } catch (const ResonanceError& e) {
    const auto n = e.mode();
    err << "dipolekit: error: " << e.what() << " (mode n = " << n[0] << ',' << n[1] << ',' << n[2]
        << ", omega_k = " << format_number(e.omega_k()) << ", detuning = " << format_number(e.detuning()) << ")\n";
    return kInvalid;
  } catch (const ConvergenceError& e) {
    err << "dipolekit: error: " << e.what() << '\n';
    return kNotConverged;
  } catch (const Error& e) {
    err << "dipolekit: error: " << e.what() << '\n';
    return kInvalid;
  }
  return kInvalid;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::optional<RunConfig> cfg;
  try {
    cfg = parse_args(args, out);
  } catch (const Error& e) {
    err << "dipolekit: error: " << e.what() << '\n';
    return kInvalid;
  }
  if (!cfg) return kOk;
  return execute(*cfg, out, err);
}

} // namespace dipolekit::cli
