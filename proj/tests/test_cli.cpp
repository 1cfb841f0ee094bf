#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli/commands.hpp"
#include "support.hpp"

using namespace dipolekit::cli;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "dipolekit-tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("free: reference record") {
  const auto r = call({"free", "--m1", "0,0,1", "--m2", "0,0,1", "--r", "0,0,1"});
  REQUIRE(r.code == kOk);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 2);
  CHECK(ls[0] == "classical,classical_reduced,xi_P,xi_P_reduced");
  const auto f = fields(ls[1]);
  CHECK(std::stod(f[3]) == -2.0);
}

TEST_CASE("free: short-distance transition ratio") {
  const auto r = call({"free", "--m1", "0,0,1", "--m2", "0,0,1", "--r", "0,0,1", "--omega", "1e-3", "--format", "json"});
  REQUIRE(r.code == kOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("x_omega").get<double>() == doctest::Approx(1e-3));
  CHECK(std::abs(j.at("xi_T_over_xi_P").get<double>() - 1.0) <= 1e-5);
}

TEST_CASE("malformed input exits 2 naming the field") {
  auto r = call({"free", "--m1", "1,2", "--m2", "0,0,1", "--r", "0,0,1"});
  CHECK(r.code == kInvalid);
  CHECK(r.err.find("m1") != std::string::npos);
  CHECK(lines(r.err).size() == 1);
  r = call({"free", "--m1", "0,0,1", "--m2", "0,0,1", "--r", "0,0,x"});
  CHECK(r.code == kInvalid);
  CHECK(r.err.find("r:") != std::string::npos);
  r = call({"free", "--m1", "0,0,1", "--m2", "0,0,1"});
  CHECK(r.code == kInvalid);
  r = call({"bogus"});
  CHECK(r.code == kInvalid);
  r = call({"box", "--m1", "0,0,1", "--m2", "0,0,1", "--r", "0.1,0.2,0.3", "--L", "-1"});
  CHECK(r.code == kInvalid);
  CHECK(r.err.find("L") != std::string::npos);
}

TEST_CASE("box: record and resonance exit") {
  auto r = call({"box", "--m1", "0,0,1", "--m2", "0,0,1", "--r", "0.1,0.2,0.3", "--L", "1"});
  REQUIRE(r.code == kOk);
  auto ls = lines(r.out);
  REQUIRE(ls.size() == 2);
  CHECK(fields(ls[0]).size() == fields(ls[1]).size());
  CHECK(fields(ls[1])[0] == "permanent");

  r = call({"box", "--m1", "0,0,1", "--m2", "0,0,1", "--r", "0.1,0.2,0.3", "--L", "1", "--omega",
            dipolekit::cli::format_number(2.0 * testing::pi)});
  CHECK(r.code == kInvalid);
  CHECK(r.err.find("mode n") != std::string::npos);

  r = call({"box", "--m1", "0,0,1", "--m2", "0,0,1", "--r", "0.1,0.2,0.3", "--L", "1", "--shell-max", "2",
            "--tol", "1e-14"});
  CHECK(r.code == kNotConverged);
}

TEST_CASE("kernel: defaults") {
  const auto r = call({"kernel", "--m1", "0,0,1", "--m2", "0,0,1", "--r", "0,0,1"});
  REQUIRE(r.code == kOk);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 302);
  CHECK(ls[0] == "s_c_over_r,kernel_reduced");
  CHECK(ls[1] == "0,0");
  const auto pos = r.err.find("peak |K| at s c/r = ");
  REQUIRE(pos != std::string::npos);
  const double peak = std::stod(r.err.substr(pos + 20));
  CHECK(peak >= 0.95);
  CHECK(peak <= 1.05);

  CHECK(call({"kernel", "--m1", "0,0,1", "--m2", "0,0,1", "--r", "0,0,1", "--omega-cut", "0"}).code == kInvalid);
  CHECK(call({"kernel", "--m1", "0,0,1", "--m2", "0,0,1", "--r", "0,0,1", "--omega-cut", "-3"}).code == kInvalid);
}

TEST_CASE("sweep: default table") {
  const auto path = scratch("sweep-a.csv");
  const auto r = call({"sweep", "--out", path.string()});
  REQUIRE(r.code == kOk);
  const auto text = slurp(path);
  CHECK(text.find('\r') == std::string::npos);
  const auto ls = lines(text);
  REQUIRE(ls.size() == 1 + 4 * 361);
  CHECK(ls[0] == kSweepHeader);
  CHECK(ls[0] == "phi,r_over_L,xi_free_reduced,xi_box_reduced,ratio,shells_used");

  const auto zeros = testing::sweep_zeros();
  const double step = 2.0 * testing::pi / 361.0;
  int flagged = 0;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto f = fields(ls[i]);
    REQUIRE(f.size() == 6);
    CHECK(f[4] != "NCONV");
    CHECK(f[4] != "nan");
    const double phi = std::stod(f[0]);
    bool brackets = false;
    for (double z : zeros) {
      const double d = phi - z;
      brackets = brackets || (d >= 0.0 && d < step) || (d < 0.0 && -d < step);
    }
    if (f[4] == "DIV") {
      ++flagged;
      CHECK(brackets);
    } else {
      CHECK_FALSE(brackets);
    }
  }
  CHECK(flagged == 4 * 8);

  const auto again = scratch("sweep-b.csv");
  REQUIRE(call({"sweep", "--out", again.string()}).code == kOk);
  CHECK(slurp(again) == text);
}

TEST_CASE("sweep: JSON round trip") {
  const auto r = call({"sweep", "--format", "json", "--n-phi", "37", "--r-over-L", "0.2,0.3"});
  REQUIRE(r.code == kOk);
  const auto j = nlohmann::ordered_json::parse(r.out);
  const auto& rows = j.at("rows");
  REQUIRE(rows.size() == 74);
  bool saw_flag = false;
  for (const auto& item : rows) {
    const SweepRow row = sweep_row_from_json(item);
    CHECK(to_json(row) == item);
    CHECK(to_json(sweep_row_from_json(to_json(row))) == to_json(row));
    saw_flag = saw_flag || row.flag != RowFlag::None;
  }
  CHECK(saw_flag);

  SweepRow row{0.25, 0.1, -0.5, 0.75, -1.5, RowFlag::None, 4};
  CHECK(sweep_row_from_json(to_json(row)) == row);
  row.flag = RowFlag::Divergent;
  row.ratio = 0.0;
  CHECK(to_json(row).at("ratio") == "DIV");
  CHECK(sweep_row_from_json(to_json(row)) == row);
}

TEST_CASE("format_number round-trips doubles") {
  testing::Gen g(61);
  for (int i = 0; i < 200; ++i) {
    const double v = g.uniform(-1.0, 1.0) * std::pow(10.0, g.integer(-300, 300));
    CHECK(std::stod(format_number(v)) == v);
  }
}

TEST_CASE("check: pass, forced failure, reproducibility") {
  const auto a = call({"check", "--count", "100"});
  CHECK(a.code == kOk);
  const auto ls = lines(a.out);
  REQUIRE(ls.size() == 6);
  CHECK(ls[0] == "suite,configs,deviation,tolerance,status");
  for (std::size_t i = 1; i < ls.size(); ++i) CHECK(fields(ls[i]).back() == "PASS");

  const auto b = call({"check", "--count", "100"});
  CHECK(b.out == a.out);

  const auto c = call({"check", "--count", "5", "--tol", "1e-16"});
  CHECK(c.code == kCheckFailed);
  const auto cl = lines(c.out);
  REQUIRE(cl.size() == 6);
  for (std::size_t i = 1; i < cl.size(); ++i) {
    const auto f = fields(cl[i]);
    CHECK(std::stod(f[2]) >= 0.0);
    CHECK(f[3] == "9.9999999999999998e-17");
  }
  const auto d = call({"check", "--count", "5", "--seed", "7"});
  const auto e = call({"check", "--count", "5", "--seed", "7"});
  CHECK(d.out == e.out);
  CHECK(d.code == kOk);
}

TEST_CASE("config file with flag override") {
  const auto path = scratch("run.json");
  {
    std::ofstream f(path);
    f << R"({"m1": [0, 0, 1], "m2": [0, 0, 1], "r": [0, 0, 2], "format": "json"})";
  }
  auto r = call({"free", "--config", path.string()});
  REQUIRE(r.code == kOk);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("xi_P").get<double>() == doctest::Approx(-0.25));
  CHECK(j.at("xi_P_reduced").get<double>() == doctest::Approx(-2.0));

  r = call({"free", "--config", path.string(), "--r", "0,0,1"});
  REQUIRE(r.code == kOk);
  j = nlohmann::json::parse(r.out);
  CHECK(j.at("xi_P").get<double>() == doctest::Approx(-2.0));

  {
    std::ofstream f(path);
    f << R"({"m1": [0, 0, 1], "colour": "red"})";
  }
  r = call({"free", "--config", path.string()});
  CHECK(r.code == kInvalid);
  CHECK(r.err.find("colour") != std::string::npos);

  r = call({"free", "--config", (path.string() + ".missing")});
  CHECK(r.code == kInvalid);
}
