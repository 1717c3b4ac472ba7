#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "elab/density_fit.hpp"
#include "elab/elasticity.hpp"

using namespace elab;

namespace {

template <int N>
Mat<N> random_matrix(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat<N> a;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) a(i, j) = u(rng);
  return a;
}

LameTriplet random_admissible(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    LameTriplet t{4.0 * u(rng) - 2.0, 0.1 + 3.0 * u(rng), 0.1 + 3.0 * u(rng)};
    if (n == 2 ? is_admissible<2>(t) : is_admissible<3>(t)) return t;
  }
}

} // namespace

TEST_CASE("stiffness components against the closed form") {
  StiffnessTensor<2> c{2.0, 1.0};
  CHECK(c.component(0, 0, 0, 0) == doctest::Approx(4.0));  // lam + 2 mu
  CHECK(c.component(0, 0, 1, 1) == doctest::Approx(2.0));  // lam
  CHECK(c.component(0, 1, 0, 1) == doctest::Approx(1.0));  // mu
  CHECK(c.component(0, 1, 1, 0) == doctest::Approx(1.0));
  CHECK(c.component(0, 0, 0, 1) == doctest::Approx(0.0));

  // Minor and major symmetries on every index combination.
  StiffnessTensor<3> c3{0.7, 1.3};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double v = c3.component(i, j, k, l);
          CHECK(v == c3.component(j, i, k, l));
          CHECK(v == c3.component(i, j, l, k));
          CHECK(v == c3.component(k, l, i, j));
        }
}

TEST_CASE("apply matches componentwise contraction") {
  std::mt19937_64 rng(7);
  StiffnessTensor<3> c{0.8, 1.7};
  for (int rep = 0; rep < 20; ++rep) {
    Mat3 g = random_matrix<3>(rng);
    Mat3 sigma = c.apply(g);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) s += c.component(i, j, k, l) * g(k, l);
        CHECK(sigma(i, j) == doctest::Approx(s).epsilon(1e-13));
      }
  }
}

TEST_CASE("quadratic form equals the stress-strain contraction") {
  std::mt19937_64 rng(11);
  StiffnessTensor<2> c{-0.4, 1.2};
  for (int rep = 0; rep < 20; ++rep) {
    Mat2 a = random_matrix<2>(rng);
    Mat2 s = 0.5 * (a + a.transpose());
    double direct = (c.apply(a).transpose() * s).trace();
    CHECK(c.quadratic_form(a) == doctest::Approx(direct).epsilon(1e-13));
  }
}

TEST_CASE("isotropic stiffness commutes with rotations") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  StiffnessTensor<2> c{0.9, 1.4};
  for (int rep = 0; rep < 20; ++rep) {
    double th = u(rng);
    Mat2 r;
    r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    Mat2 g = random_matrix<2>(rng);
    Mat2 lhs = c.apply(r * g * r.transpose());
    Mat2 rhs = r * c.apply(g) * r.transpose();
    CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
  }
}

TEST_CASE("static dilation pushes traction 4 nu on the unit disk") {
  // u(x) = x, lam = mu = 1 in two dimensions: sigma = 4 I.
  StiffnessTensor<2> c{1.0, 1.0};
  Mat2 grad_u = Mat2::Identity();
  for (double th : {0.0, 0.9, 2.3, 4.0, 5.8}) {
    Vec2 nu(std::cos(th), std::sin(th));
    Vec2 t = traction(c, grad_u, nu);
    CHECK((t - 4.0 * nu).norm() <= 1e-14);
  }
}

TEST_CASE("admissibility thresholds") {
  CHECK(is_admissible<2>({1.0, 1.0, 1.0}));
  CHECK(is_admissible<2>({-0.9, 1.0, 1.0}));   // 2 lam + 2 mu = 0.2
  CHECK(!is_admissible<2>({-1.1, 1.0, 1.0}));  // 2 lam + 2 mu < 0
  CHECK(!is_admissible<2>({1.0, 0.0, 1.0}));
  CHECK(!is_admissible<2>({1.0, 1.0, 0.0}));
  CHECK(is_admissible<3>({-0.6, 1.0, 1.0}));   // 3 lam + 2 mu = 0.2
  CHECK(!is_admissible<3>({-0.7, 1.0, 1.0}));
}

TEST_CASE("convexity constant is a sharp lower bound") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    LameTriplet t = random_admissible(rng, 2);
    StiffnessTensor<2> c{t.lam, t.mu};
    double kappa = sharp_convexity_constant<2>(t);
    CHECK(kappa > 0.0);
    for (int draw = 0; draw < 40; ++draw) {
      Mat2 a = random_matrix<2>(rng);
      Mat2 s = 0.5 * (a + a.transpose());
      double q = c.quadratic_form(s);
      CHECK(q >= kappa * s.squaredNorm() - 1e-12);
    }
    // Both candidate minimizers are attained: the identity direction gives
    // N lam + 2 mu, the traceless direction gives 2 mu.
    Mat2 id = Mat2::Identity();
    Mat2 dev = (Mat2() << 1.0, 0.0, 0.0, -1.0).finished();
    double r_id = c.quadratic_form(id) / id.squaredNorm();
    double r_dev = c.quadratic_form(dev) / dev.squaredNorm();
    CHECK(std::min(r_id, r_dev) == doctest::Approx(kappa).epsilon(1e-13));
  }
}

TEST_CASE("body wave speeds from the triplet") {
  LameTriplet t{2.0, 1.0, 4.0};
  CHECK(pressure_speed(t) == doctest::Approx(1.0));
  CHECK(shear_speed(t) == doctest::Approx(0.5));
  LameTriplet ones{1.0, 1.0, 1.0};
  CHECK(pressure_speed(ones) == doctest::Approx(std::sqrt(3.0)));
  CHECK(shear_speed(ones) == doctest::Approx(1.0));
}

TEST_CASE("christoffel eigenstructure over random draws") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    LameTriplet t = random_admissible(rng, 3);
    Vec3 xi(u(rng), u(rng), u(rng));
    if (xi.norm() < 1e-3) continue;
    Mat3 gamma = christoffel_matrix(t, xi);
    double n2 = xi.squaredNorm();
    double lp = pressure_speed(t) * pressure_speed(t) * n2;
    double ls = shear_speed(t) * shear_speed(t) * n2;
    Eigen::SelfAdjointEigenSolver<Mat3> es(gamma);
    CHECK(es.eigenvalues()[0] == doctest::Approx(ls).epsilon(1e-10));
    CHECK(es.eigenvalues()[1] == doctest::Approx(ls).epsilon(1e-10));
    CHECK(es.eigenvalues()[2] == doctest::Approx(lp).epsilon(1e-10));
    // xi is the pressure eigenvector.
    CHECK((gamma * xi - lp * xi).norm() <= 1e-10 * lp * xi.norm());
  }
}

TEST_CASE("speed fields of a varying material match pointwise formulas") {
  Domain2 dom = Domain2::ball(Vec2::Zero(), 1.0);
  LameField2 f{dom, ScalarField2::constant(1.0),
               ScalarField2::constant(1.0) +
                   ScalarField2::bump(0.1, Vec2::Zero(), 0.85, 4),
               ScalarField2::constant(1.0)};
  ScalarField2 cp = f.pressure_speed_field();
  ScalarField2 cs = f.shear_speed_field();
  for (double r : {0.0, 0.3, 0.6, 0.95}) {
    Vec2 x(r, 0.1 * r);
    LameTriplet t = f.at(x);
    CHECK(cp.value(x) == doctest::Approx(pressure_speed(t)).epsilon(1e-13));
    CHECK(cs.value(x) == doctest::Approx(shear_speed(t)).epsilon(1e-13));
  }
}

TEST_CASE("admissibility scan flags a sign-crossing shear modulus") {
  Domain2 dom = Domain2::ball(Vec2::Zero(), 1.0);
  LameField2 good{dom, ScalarField2::constant(1.0),
                  ScalarField2::constant(1.0) +
                      ScalarField2::bump(-0.5, Vec2::Zero(), 0.8, 4),
                  ScalarField2::constant(1.0)};
  AdmissibilityReport r = check_admissibility(good);
  CHECK(r.ok);
  CHECK(r.min_mu > 0.4);

  LameField2 bad{dom, ScalarField2::constant(1.0),
                 ScalarField2::constant(1.0) +
                     ScalarField2::bump(-1.2, Vec2::Zero(), 0.8, 4),
                 ScalarField2::constant(1.0)};
  AdmissibilityReport rb = check_admissibility(bad);
  CHECK(!rb.ok);
  CHECK(rb.min_mu <= 0.0);
}

TEST_CASE("triplet from speeds inverts the speed formulas") {
  Domain2 dom = Domain2::ball(Vec2::Zero(), 1.0);
  LameTriplet t{0.7, 1.3, 1.9};
  ScalarField2 cp = ScalarField2::constant(pressure_speed(t));
  ScalarField2 cs = ScalarField2::constant(shear_speed(t));
  LameField2 f = triplet_from_speeds(dom, cp, cs, t.rho);
  for (double r : {0.0, 0.5, 0.9}) {
    Vec2 x(r, -0.2 * r);
    LameTriplet back = f.at(x);
    CHECK(back.lam == doctest::Approx(t.lam).epsilon(1e-13));
    CHECK(back.mu == doctest::Approx(t.mu).epsilon(1e-13));
    CHECK(back.rho == doctest::Approx(t.rho).epsilon(1e-13));
  }
  CHECK_THROWS_AS(triplet_from_speeds(dom, cp, cs, 0.0), ConfigError);
}

TEST_CASE("boundary extension is continuous and keeps interior values") {
  Domain2 dom = Domain2::ball(Vec2::Zero(), 1.0);
  LameField2 f{dom,
               ScalarField2::radial_quadratic(1.0, 0.25),
               ScalarField2::constant(1.0) +
                   ScalarField2::bump(0.3, Vec2(0.2, 0.0), 0.7, 4),
               ScalarField2::constant(2.0)};
  LameField2 ext = extend_lame_field(f, 0.2);
  Vec2 dir = Vec2(0.3, -1.0).normalized();
  for (double r : {0.0, 0.4, 0.8, 0.99}) {
    Vec2 x = r * dir;
    CHECK(ext.lambda.value(x) == doctest::Approx(f.lambda.value(x)).epsilon(1e-12));
    CHECK(ext.mu.value(x) == doctest::Approx(f.mu.value(x)).epsilon(1e-12));
  }
  // Just outside, the extension stays near the boundary value.
  Vec2 xb(std::cos(0.7), std::sin(0.7));
  Vec2 out = 1.05 * xb;
  CHECK(ext.mu.value(out) == doctest::Approx(f.mu.value(xb)).epsilon(0.05));
  AdmissibilityReport r = check_admissibility(ext);
  CHECK(r.ok);
}
