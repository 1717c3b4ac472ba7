#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "elab/boundary_distance.hpp"
#include "elab/geometry_checks.hpp"

using namespace elab;

namespace {

ConformalMetric2 euclidean_disk() {
  return ConformalMetric2::make(ScalarField2::constant(1.0),
                                Domain2::ball(Vec2::Zero(), 1.0));
}

// Poincare metric restricted to the subdisk of radius 1/2; boundary distances
// have the closed form cosh d = 1 + 2 |z-w|^2 / ((1-|z|^2)(1-|w|^2)).
ConformalMetric2 hyperbolic_subdisk() {
  return ConformalMetric2::make(
      ScalarField2::radial_quadratic(0.5, -0.5),
      Domain2::ball(Vec2::Zero(), 0.5));
}

double hyperbolic_distance(const Vec2& z, const Vec2& w) {
  double q = 1.0 + 2.0 * (z - w).squaredNorm() /
                       ((1.0 - z.squaredNorm()) * (1.0 - w.squaredNorm()));
  return std::acosh(q);
}

// Stereographic chart of the unit round sphere on a disk of radius 2: larger
// than a hemisphere, so interior conjugate points exist and the boundary is
// concave.
ConformalMetric2 spherical_chart() {
  ConformalMetric2 m = ConformalMetric2::make(
      ScalarField2::radial_quadratic(0.5, 0.5),
      Domain2::ball(Vec2::Zero(), 2.0));
  m.inversion_symmetric = true;
  return m;
}

} // namespace

TEST_CASE("euclidean boundary distances are chord lengths") {
  ConformalMetric2 m = euclidean_disk();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  for (int rep = 0; rep < 8; ++rep) {
    double a = u(rng), b = u(rng);
    double chord = 2.0 * std::abs(std::sin(0.5 * (a - b)));
    if (chord < 0.3) continue;
    DistanceResult r = boundary_distance(m, a, b);
    CHECK(r.distance == doctest::Approx(chord).epsilon(1e-8));
    CHECK(!r.multiple);
  }
}

TEST_CASE("conformal scaling divides distances by the factor") {
  Domain2 dom = Domain2::ball(Vec2::Zero(), 1.0);
  ConformalMetric2 unit = euclidean_disk();
  ConformalMetric2 fast =
      ConformalMetric2::make(ScalarField2::constant(2.0), dom);
  for (double b : {0.8, 2.0, 3.1}) {
    double d1 = boundary_distance(unit, 0.1, b).distance;
    double d2 = boundary_distance(fast, 0.1, b).distance;
    CHECK(d2 == doctest::Approx(0.5 * d1).epsilon(1e-9));
  }
}

TEST_CASE("hyperbolic subdisk matches the closed form") {
  ConformalMetric2 m = hyperbolic_subdisk();
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  // Diametric pair first: cosh d = 41/9, d = 2 log 3.
  DistanceResult diam = boundary_distance(m, 0.0, M_PI);
  CHECK(diam.distance == doctest::Approx(2.0 * std::log(3.0)).epsilon(1e-6));
  for (int rep = 0; rep < 6; ++rep) {
    double a = u(rng), b = u(rng);
    Vec2 z = 0.5 * Vec2(std::cos(a), std::sin(a));
    Vec2 w = 0.5 * Vec2(std::cos(b), std::sin(b));
    if ((z - w).norm() < 0.2) continue;
    DistanceResult r = boundary_distance(m, a, b);
    CHECK(r.distance ==
          doctest::Approx(hyperbolic_distance(z, w)).epsilon(1e-5));
  }
}

TEST_CASE("distance tables are symmetric and satisfy the triangle inequality") {
  ConformalMetric2 m = hyperbolic_subdisk();
  TravelTimeTable t = distance_table(m, 8, "s");
  CHECK(t.mode == "s");
  CHECK(t.max_asymmetry <= 1e-6);
  CHECK(t.trapped_rays == 0);
  int n = static_cast<int>(t.params.size());
  REQUIRE(n == 8);
  for (int i = 0; i < n; ++i) {
    CHECK(t.d(i, i) == 0.0);
    for (int j = 0; j < n; ++j) {
      CHECK(t.d(i, j) == doctest::Approx(t.d(j, i)).epsilon(1e-12));
      for (int k = 0; k < n; ++k)
        CHECK(t.d(i, j) <= t.d(i, k) + t.d(k, j) + 1e-6);
    }
  }
}

TEST_CASE("diameter of the hyperbolic subdisk") {
  double d = metric_diameter(hyperbolic_subdisk(), 8);
  CHECK(d == doctest::Approx(2.0 * std::log(3.0)).epsilon(1e-5));
}

TEST_CASE("second fundamental form on circles and ellipses") {
  // Unit circle, unit speed: S = kappa_e = 1.
  ConformalMetric2 disk = euclidean_disk();
  for (double th : {0.0, 1.1, 2.9, 4.7}) {
    Vec2 xb(std::cos(th), std::sin(th));
    auto sff = second_fundamental_form(disk, xb);
    CHECK(sff.min_eigenvalue() == doctest::Approx(1.0).epsilon(1e-10));
  }
  // Ellipse (2, 1): curvature a/b^2 = 2 at (2,0) and b/a^2 = 1/4 at (0,1).
  Domain2 ell = Domain2::ellipsoid(Vec2::Zero(), Vec2(2.0, 1.0));
  ConformalMetric2 me =
      ConformalMetric2::make(ScalarField2::constant(1.0), ell);
  auto s_major = second_fundamental_form(me, Vec2(2.0, 0.0));
  auto s_minor = second_fundamental_form(me, Vec2(0.0, 1.0));
  CHECK(s_major.min_eigenvalue() == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s_minor.min_eigenvalue() == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("boundary shape operator ignores factors with vanishing 1-jet") {
  // c2 = c (1 + q) with q and grad q zero on the boundary leaves S unchanged.
  Domain2 dom = Domain2::ball(Vec2::Zero(), 1.0);
  ScalarField2 c = ScalarField2::radial_quadratic(1.0, 0.3);
  ScalarField2 one = ScalarField2::constant(1.0);
  ScalarField2 q = ScalarField2::radial_quadratic(1.0, -1.0) *
                   ScalarField2::radial_quadratic(1.0, -1.0);  // (1-|x|^2)^2
  ConformalMetric2 base = ConformalMetric2::make(c, dom);
  ConformalMetric2 pert =
      ConformalMetric2::make(c * (one + 0.35 * q), dom);
  for (double th : {0.2, 1.6, 3.3, 5.1}) {
    Vec2 xb(std::cos(th), std::sin(th));
    double s0 = second_fundamental_form(base, xb).min_eigenvalue();
    double s1 = second_fundamental_form(pert, xb).min_eigenvalue();
    CHECK(s1 == doctest::Approx(s0).epsilon(1e-10));
  }
}

TEST_CASE("convexity verdicts for the three model geometries") {
  ConvexityVerdict disk = is_strictly_convex_boundary(euclidean_disk());
  CHECK(disk.convex);
  CHECK(disk.min_eigenvalue == doctest::Approx(1.0).epsilon(1e-9));

  // Radius 1/2 hyperbolic boundary: S = c kappa_e - d_nu c = 3/4 + 1/2.
  ConvexityVerdict hyp = is_strictly_convex_boundary(hyperbolic_subdisk());
  CHECK(hyp.convex);
  CHECK(hyp.min_eigenvalue == doctest::Approx(1.25).epsilon(1e-9));

  // Radius 2 spherical chart: S = (5/2)(1/2) - 2 < 0.
  ConvexityVerdict cap = is_strictly_convex_boundary(spherical_chart());
  CHECK(!cap.convex);
  CHECK(cap.min_eigenvalue == doctest::Approx(-0.75).epsilon(1e-9));
}

TEST_CASE("conjugate points on the round sphere sit at time pi") {
  ConformalMetric2 m = spherical_chart();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  int found = 0;
  for (int rep = 0; rep < 4; ++rep) {
    Vec2 x0(u(rng), u(rng));
    double a = u(rng) * M_PI;
    Vec2 v0(std::cos(a), std::sin(a));
    auto tc = conjugate_point_scan(m, x0, v0, 3.5);
    REQUIRE(tc.has_value());
    CHECK(*tc == doctest::Approx(M_PI).epsilon(2e-4));
    ++found;
  }
  CHECK(found == 4);
}

TEST_CASE("no conjugate points on flat or hyperbolic disks") {
  CHECK(!conjugate_point_scan(euclidean_disk(), Vec2(0.1, 0.0),
                              Vec2(1.0, 0.2), 2.5)
             .has_value());
  CHECK(!conjugate_point_scan(hyperbolic_subdisk(), Vec2(0.1, 0.0),
                              Vec2(1.0, 0.2), 2.5)
             .has_value());
}

TEST_CASE("simplicity verdicts separate the model geometries") {
  SimplicityVerdict disk = simplicity_check(euclidean_disk(), 8);
  CHECK(disk.simple);
  CHECK(disk.convex_boundary);
  CHECK(disk.conjugate_free);
  CHECK(disk.multiplicity_free);
  CHECK(disk.label == "heuristic-numerical");

  SimplicityVerdict cap = simplicity_check(spherical_chart(), 8);
  CHECK(!cap.simple);
  CHECK(!cap.convex_boundary);
}

TEST_CASE("half squared distance is convex along euclidean geodesics") {
  FoliationCandidate cand;
  cand.f = 0.5 * ScalarField2::radial_quadratic(0.0, 1.0);
  cand.description = "half squared distance to the origin";
  FoliationReport r = convexity_check_function(euclidean_disk(), cand);
  CHECK(r.convex_along_geodesics);
  // Unit g-speed means (f o gamma)'' = |gamma'|^2 = 1 exactly.
  CHECK(r.min_second_derivative == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.geodesics_checked > 0);

  FoliationCandidate bad;
  bad.f = ScalarField2::radial_quadratic(0.0, -1.0);
  bad.description = "concave candidate";
  FoliationReport rb = convexity_check_function(euclidean_disk(), bad);
  CHECK(!rb.convex_along_geodesics);
}

TEST_CASE("unit speed shooting preserves g-speed and hits the boundary") {
  ConformalMetric2 m = hyperbolic_subdisk();
  Vec2 x0 = Vec2(0.5, 0.0);
  // Inward at 40 degrees from the inward normal.
  double al = 40.0 * M_PI / 180.0;
  Vec2 dir(-std::cos(al), std::sin(al));
  ExitRecord<2> rec = trace_exit(m, x0, dir);
  CHECK(rec.entered);
  CHECK(!rec.possibly_trapped);
  CHECK(rec.tau > 0.0);
  CHECK(std::abs(rec.exit_point.norm() - 0.5) <= 1e-9);

  GeodesicPath<2> path = shoot(m, x0, m.unit_g(x0, dir), rec.tau);
  CHECK(path.max_speed_drift <= 1e-9);
}
