#include <doctest.h>

#include "dipolekit/core.hpp"
#include "dipolekit/free_space.hpp"
#include "support.hpp"

using namespace dipolekit;
using testing::Gen;
using testing::Vec;

namespace {

/// Sum over two explicit transverse polarizations of
/// [m1.(e_k x e_s)][m2.(e_k x e_s)], basis built by Gram-Schmidt.
double polarization_sum(const Vec& m1, const Vec& m2, const Vec& ek) {
  const Vec seed = std::abs(ek.z()) < 0.5 ? Vec::UnitZ() : Vec::UnitX();
  const Vec p1 = (seed - seed.dot(ek) * ek).normalized();
  const Vec p2 = ek.cross(p1);
  double sum = 0.0;
  for (const Vec& p : {p1, p2}) sum += m1.dot(ek.cross(p)) * m2.dot(ek.cross(p));
  return sum;
}

} // namespace

TEST_CASE("angular_factor reference values") {
  CHECK(angular_factor(Vec::UnitZ(), Vec::UnitZ(), Vec::UnitZ()) == doctest::Approx(-2.0));
  CHECK(angular_factor(Vec::UnitX(), Vec::UnitX(), Vec::UnitZ()) == doctest::Approx(1.0));
  const double c = 1.0 / std::sqrt(3.0);
  const Vec m(std::sqrt(1.0 - c * c), 0.0, c);
  CHECK(std::abs(angular_factor(m, m, Vec::UnitZ())) < 1e-15);
}

TEST_CASE("transverse_factor reference values") {
  const Vec ek = Vec(1.0, -2.0, 0.5).normalized();
  CHECK(std::abs(transverse_factor(ek, ek, ek)) < 1e-15);
  CHECK(transverse_factor(Vec::UnitX(), Vec::UnitX(), Vec::UnitZ()) == doctest::Approx(1.0));
}

TEST_CASE("kernels reject non-unit directions") {
  CHECK_THROWS_AS(angular_factor(Vec::UnitX(), Vec::UnitY(), Vec(0.0, 0.0, 2.0)), ValidationError);
  CHECK_THROWS_AS(transverse_factor(Vec::UnitX(), Vec::UnitY(), Vec(0.0, 1.0, 1.0)), ValidationError);
  CHECK_THROWS_AS(angular_factor(Vec::UnitX(), Vec::UnitY(), Vec(0.0, 0.0, NAN)), ValidationError);
}

TEST_CASE("transverse_factor equals the explicit polarization sum") {
  Gen g(11);
  for (int i = 0; i < 500; ++i) {
    const Vec m1 = g.moment(), m2 = g.moment(), ek = g.direction();
    const double ref = polarization_sum(m1, m2, ek);
    CHECK(std::abs(transverse_factor(m1, m2, ek) - ref) <= 1e-14 * m1.norm() * m2.norm());
  }
}

TEST_CASE("property: kernels are bilinear") {
  Gen g(12);
  for (int i = 0; i < 200; ++i) {
    const Vec m1 = g.moment(), m2 = g.moment(), e = g.direction(), m3 = g.moment();
    const double a = g.uniform(-3.0, 3.0), b = g.uniform(-3.0, 3.0);
    const double scale = (m1.norm() + m3.norm()) * m2.norm() * 4.0;
    CHECK(std::abs(angular_factor(Vec(a * m1 + b * m3), m2, e) -
                   (a * angular_factor(m1, m2, e) + b * angular_factor(m3, m2, e))) <= 1e-13 * scale);
    CHECK(std::abs(transverse_factor(m2, Vec(a * m1), e) - a * transverse_factor(m2, m1, e)) <= 1e-13 * scale);
  }
}

TEST_CASE("property: angular_factor is rotation invariant") {
  Gen g(13);
  const Vec m1 = g.moment(), m2 = g.moment(), e = g.direction();
  const double ref = angular_factor(m1, m2, e);
  for (int i = 0; i < 100; ++i) {
    const auto R = g.rotation();
    const Vec Re = R * e;
    CHECK(std::abs(angular_factor(Vec(R * m1), Vec(R * m2), Vec(Re.normalized())) - ref) <= 1e-12);
  }
}

TEST_CASE("property: transverse = angular + 2 (m1.e)(m2.e)") {
  Gen g(14);
  for (int i = 0; i < 500; ++i) {
    const Vec m1 = g.moment(), m2 = g.moment(), e = g.direction();
    const double lhs = transverse_factor(m1, m2, e);
    const double rhs = angular_factor(m1, m2, e) + 2.0 * m1.dot(e) * m2.dot(e);
    CHECK(std::abs(lhs - rhs) <= 1e-14 * m1.norm() * m2.norm() * 4.0);
  }
}

TEST_CASE("property: kernels are symmetric in the two moments") {
  Gen g(15);
  for (int i = 0; i < 100; ++i) {
    const Vec m1 = g.moment(), m2 = g.moment(), e = g.direction();
    CHECK(angular_factor(m1, m2, e) == doctest::Approx(angular_factor(m2, m1, e)).epsilon(1e-15));
    CHECK(transverse_factor(m1, m2, e) == doctest::Approx(transverse_factor(m2, m1, e)).epsilon(1e-15));
  }
}

TEST_CASE("PairGeometry") {
  const auto g = PairGeometry<double>::from_positions(Vec(1.0, 2.0, 3.0), Vec(2.0, 4.0, 5.0));
  CHECK(g.distance() == doctest::Approx(3.0));
  CHECK(std::abs(g.direction().norm() - 1.0) <= 1e-14);
  CHECK((g.separation() - Vec(1.0, 2.0, 2.0)).norm() == 0.0);
  CHECK((g.swapped().separation() + g.separation()).norm() == 0.0);
  CHECK_THROWS_AS(PairGeometry<double>::from_positions(Vec(1, 1, 1), Vec(1, 1, 1)), DomainError);
  CHECK_THROWS_AS(PairGeometry<double>::from_separation(Vec(0, INFINITY, 0)), ValidationError);

  Gen gen(16);
  for (int i = 0; i < 100; ++i) {
    const auto p = PairGeometry<double>::from_separation(gen.vector(1e3));
    CHECK(std::abs(p.direction().norm() - 1.0) <= 1e-14);
  }
}

TEST_CASE("DipoleVector") {
  const auto d = DipoleVector<double>::transition(Vec(1, 0, 0));
  CHECK(d.kind() == DipoleKind::Transition);
  CHECK_FALSE(d.is_permanent());
  CHECK(DipoleVector<double>::permanent_g(Vec(0, 1, 0)).is_permanent());
  CHECK_THROWS_AS(DipoleVector<double>::permanent_e(Vec(NAN, 0, 0)), ValidationError);
  CHECK(std::string(to_string(DipoleKind::PermanentE)) == "permanent-e");
}

TEST_CASE("TransitionSpec") {
  const TransitionSpec<double> ts(2.0);
  CHECK(ts.wavelength() == doctest::Approx(testing::pi));
  CHECK(ts.x_omega(0.5) == doctest::Approx(1.0));
  CHECK(ts.x_omega(0.5) == doctest::Approx(2.0 * testing::pi * 0.5 / ts.wavelength()));
  CHECK_THROWS_AS(TransitionSpec<double>(0.0), DomainError);
  CHECK_THROWS_AS(TransitionSpec<double>(-1.0), DomainError);
  CHECK_THROWS_AS(TransitionSpec<double>::resonant(1.0, 1.1), DomainError);
  CHECK(TransitionSpec<double>::resonant(1.0, 1.0).omega() == 1.0);
}

TEST_CASE("UnitSystem constants") {
  constexpr auto n = UnitSystem::natural();
  static_assert(n.mu0_over_4pi() == 1.0 && n.hbar() == 1.0 && n.c() == 1.0);
  constexpr auto si = UnitSystem::si();
  CHECK(si.c() == 299792458.0);
  CHECK(si.mu0() == doctest::Approx(1.25663706212e-6).epsilon(1e-10));
}

TEST_CASE("property: reduced coupling does not depend on the unit system") {
  Gen g(17);
  const double mu_b = 9.2740100783e-24; // A m^2
  for (int i = 0; i < 50; ++i) {
    const Vec m1 = g.moment(), m2 = g.moment(), r = g.direction() * g.uniform(0.5, 2.0);
    const auto nat = classical_coupling(m1, m2, PairGeometry<double>::from_separation(r), UnitSystem::natural());
    const auto si = classical_coupling(Vec(mu_b * m1), Vec(mu_b * m2),
                                       PairGeometry<double>::from_separation(Vec(1e-9 * r)), UnitSystem::si());
    CHECK(si.reduced == doctest::Approx(nat.reduced).epsilon(1e-12));
  }
}

TEST_CASE("templated on the scalar type") {
  using V = Vec3<long double>;
  const V m(1.0L, 0.0L, 0.0L), e(0.0L, 0.0L, 1.0L);
  CHECK(static_cast<double>(angular_factor(m, m, e)) == doctest::Approx(1.0));
  const auto g = PairGeometry<float>::from_separation(Vec3<float>(0.0f, 0.0f, 2.0f));
  CHECK(g.distance() == doctest::Approx(2.0));
}
