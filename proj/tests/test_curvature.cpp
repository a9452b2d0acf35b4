#include <doctest.h>

#include <cmath>
#include <random>

#include "lorbundle/curvature.hpp"

using namespace lorbundle;

namespace {

ProductBase t1_s1() {
  std::vector<Factor> f{Factor::torus_circle("x"), Factor::torus_circle("u")};
  return ProductBase(std::move(f), 1, ScalarField::constant(1, 1.0));
}

ProductBase t2_s1() {
  std::vector<Factor> f{Factor::torus_circle("x1"), Factor::torus_circle("x2"),
                        Factor::torus_circle("u")};
  return ProductBase(std::move(f), 2, ScalarField::constant(1, 1.0));
}

BundleConfig flat_config() {
  auto base = t2_s1();
  return BundleConfig(base, TwoForm::zero(3), OneForm::zero(3), ScalarField::zero(4));
}

BundleConfig torus_psi_config(double c) {
  auto base = t2_s1();
  TwoForm Psi(3);
  Psi.set(0, 1, ScalarField::constant(3, c));
  OneForm P = OneForm::zero(3);
  P.comp(1) = ScalarField(3, expr::mul(expr::constant(2.0 * c), expr::variable(0)));
  return BundleConfig(base, Psi, P, ScalarField::zero(4));
}

BundleConfig fiber_f_config() {
  auto base = t1_s1();
  // f = cos v on an otherwise flat background
  ScalarField f(3, expr::cos(expr::variable(1)));
  return BundleConfig(base, TwoForm::zero(2), OneForm::zero(2), f);
}

BundleConfig ricci_flat_config() {
  auto base = t1_s1();
  OneForm alpha = OneForm::zero(2);
  alpha.comp(0) = ScalarField(
      2, expr::sub(expr::constant(1.0 / (2.0 * M_PI)), expr::sin(expr::variable(0))));
  TwoForm Psi = two_form_alpha_wedge_eta(base, alpha);
  OneForm P = gauge_alpha_wedge_eta(base, alpha);
  ScalarField f(3, expr::mul(expr::constant(-4.0), expr::cos(expr::variable(2))));
  return BundleConfig(base, Psi, P, f);
}

BundleConfig type4_config() {
  std::vector<Factor> f{Factor::warped_line("y1", ScalarField::constant(1, 1.0)),
                        Factor::torus_circle("x1"), Factor::torus_circle("x2"),
                        Factor::torus_circle("x3"), Factor::torus_circle("x4"),
                        Factor::torus_circle("u")};
  ProductBase base(std::move(f), 5, ScalarField::constant(1, 1.0));
  auto gauge = gauge_torus_blocks(base, {1.0, 1.0});
  auto chi = expr::add(expr::mul(expr::sin(expr::variable(3)), expr::sin(expr::variable(4))),
                       expr::constant(1.0));
  ScalarField fhat(7, expr::mul(expr::constant(-2.0), expr::mul(chi, expr::variable(2))));
  return BundleConfig(base, gauge.psi, gauge.potential, fhat);
}

}  // namespace

TEST_CASE("t_eta vanishes for eta = du and for recurrent eta = rho(u) du") {
  auto cfg = flat_config();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const auto& pt : cfg.sample_chart_points(5, 1)) {
    Vec X(4), Y(4);
    for (int i = 0; i < 4; ++i) {
      X[i] = dist(rng);
      Y[i] = dist(rng);
    }
    CHECK(std::abs(t_eta(cfg, X, Y, pt)) <= 1e-14);
  }
  // recurrent eta
  std::vector<Factor> fs{Factor::torus_circle("x"), Factor::torus_circle("u")};
  ProductBase base(std::move(fs), 1,
                   ScalarField(1, expr::add(expr::constant(2.0), expr::cos(expr::variable(0)))));
  BundleConfig cfg2(base, TwoForm::zero(2), OneForm::zero(2), ScalarField::zero(3));
  for (const auto& pt : cfg2.sample_chart_points(5, 2)) {
    Vec X(3), Y(3);
    for (int i = 0; i < 3; ++i) {
      X[i] = dist(rng);
      Y[i] = dist(rng);
    }
    double txy = t_eta(cfg2, X, Y, pt);
    CHECK(std::abs(txy) <= 1e-12);
    CHECK(txy == t_eta(cfg2, Y, X, pt));  // symmetry is structural
  }
}

TEST_CASE("flat configuration has identically zero curvature") {
  auto cfg = flat_config();
  for (const auto& pt : cfg.sample_chart_points(4, 3)) {
    CurvatureReport rep = curvature_report(cfg, pt);
    CHECK(rep.riemann_discrepancy <= 1e-12);
    CHECK(rep.unlisted_riemann_sup <= 1e-12);
    CHECK(rep.ricci_discrepancy <= 1e-12);
    CHECK(std::abs(rep.scalar_curvature) <= 1e-12);
    CHECK(ricci_brute_force(cfg, pt).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("constant Psi on flat T^2: R_{x++x} = c^2, R_{x++y} = 0") {
  double c = 0.9;
  auto cfg = torus_psi_config(c);
  Vec pt(4);
  pt << 0.7, 0.2, 1.1, 2.3;
  RiemannClosedForm R = riemann_closed_form(cfg, pt);
  // h(psi E_x, psi E_x) with psi E_x = c d_y
  CHECK(R.i_pp_j(0, 0) == doctest::Approx(c * c).epsilon(1e-12));
  CHECK(R.i_pp_j(1, 1) == doctest::Approx(c * c).epsilon(1e-12));
  CHECK(std::abs(R.i_pp_j(0, 1)) <= 1e-12);
  // brute force agrees
  CurvatureReport rep = curvature_report(cfg, pt);
  CHECK(rep.riemann_discrepancy <= 1e-6);
  CHECK(rep.unlisted_riemann_sup <= 1e-7);
}

TEST_CASE("fiber-dependent f = cos v: R_{+xi xi +} and Ric_{xi +} equal cos(v)/2") {
  auto cfg = fiber_f_config();
  for (double v : {0.0, 0.9, 2.5}) {
    Vec pt(3);
    pt << 0.4, v, 1.7;
    RiemannClosedForm R = riemann_closed_form(cfg, pt);
    CHECK(R.p_xi_xi_p == doctest::Approx(0.5 * std::cos(v)).epsilon(1e-12));
    RicciClosedForm ric = ricci_closed_form(cfg, pt);
    CHECK(ric.xi_p == doctest::Approx(0.5 * std::cos(v)).epsilon(1e-12));
    CurvatureReport rep = curvature_report(cfg, pt);
    CHECK(rep.riemann_discrepancy <= 1e-6);
    CHECK(rep.ricci_discrepancy <= 1e-6);
    CHECK(rep.unlisted_riemann_sup <= 1e-7);
    CHECK(rep.unlisted_ricci_sup <= 1e-7);
  }
}

TEST_CASE("Ricci-flat configuration: closed form and brute force both vanish") {
  auto cfg = ricci_flat_config();
  for (const auto& pt : cfg.sample_chart_points(6, 4)) {
    RicciClosedForm ric = ricci_closed_form(cfg, pt);
    CHECK(ric.ij.cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(ric.i_p.cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(std::abs(ric.pp) <= 1e-8);
    CHECK(std::abs(ric.xi_p) <= 1e-8);
    CHECK(ricci_brute_force(cfg, pt).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("cross-oracle sweep: closed form vs brute force on >= 50 points") {
  std::vector<BundleConfig> cfgs{flat_config(), torus_psi_config(0.7), fiber_f_config(),
                                 ricci_flat_config(), type4_config()};
  int total = 0;
  for (const auto& cfg : cfgs) {
    for (const auto& pt : cfg.sample_chart_points(12, 5)) {
      CurvatureReport rep = curvature_report(cfg, pt);
      CHECK(rep.riemann_discrepancy <= 1e-5);
      CHECK(rep.ricci_discrepancy <= 1e-5);
      CHECK(rep.unlisted_riemann_sup <= 1e-7);
      CHECK(rep.unlisted_ricci_sup <= 1e-7);
      CHECK(rep.pair_symmetry_residual <= 1e-7);
      CHECK(rep.first_bianchi_residual <= 1e-7);
      ++total;
    }
  }
  CHECK(total >= 50);
}

TEST_CASE("einstein obstruction") {
  auto flat = ricci_flat_config();
  CHECK(einstein_obstruction(flat).fiber_variation_sup <= 1e-9);
  auto fib = fiber_f_config();
  CHECK(einstein_obstruction(fib).fiber_variation_sup == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("ricci-flat residual: analytic pairs") {
  auto base = t1_s1();
  // alpha = d(cos x) = -sin x dx, f_B = -4 cos x  -> residual 0
  {
    OneForm alpha = OneForm::zero(2);
    alpha.comp(0) = ScalarField(2, expr::neg(expr::sin(expr::variable(0))));
    BundleConfig cfg(base, two_form_alpha_wedge_eta(base, alpha),
                     gauge_alpha_wedge_eta(base, alpha),
                     ScalarField(3, expr::mul(expr::constant(-4.0), expr::cos(expr::variable(2)))));
    CHECK(ricci_flat_residual(cfg).sup <= 1e-10);
  }
  // alpha harmonic (constant coefficient), f_B = 0 -> residual 0
  {
    OneForm alpha = OneForm::zero(2);
    alpha.comp(0) = ScalarField::constant(2, 1.0 / (2.0 * M_PI));
    BundleConfig cfg(base, two_form_alpha_wedge_eta(base, alpha),
                     gauge_alpha_wedge_eta(base, alpha), ScalarField::zero(3));
    CHECK(ricci_flat_residual(cfg).sup <= 1e-12);
  }
  // f_B = 0, alpha = d(cos x) -> residual = 4 div alpha = -4 cos x, sup 4
  {
    OneForm alpha = OneForm::zero(2);
    alpha.comp(0) = ScalarField(2, expr::neg(expr::sin(expr::variable(0))));
    BundleConfig cfg(base, two_form_alpha_wedge_eta(base, alpha),
                     gauge_alpha_wedge_eta(base, alpha), ScalarField::zero(3));
    auto res = ricci_flat_residual(cfg, 512);
    CHECK(res.sup <= 4.0 + 1e-12);
    CHECK(res.sup >= 3.9);
  }
}

TEST_CASE("ricci-flat residual rejects off-shape configurations") {
  // Psi not of the alpha ^ eta shape
  auto cfg = torus_psi_config(1.0);
  CHECK_THROWS_AS(ricci_flat_residual(cfg), std::invalid_argument);
  // fiber-dependent f
  auto fib = fiber_f_config();
  CHECK_THROWS_AS(ricci_flat_residual(fib), std::invalid_argument);
}

TEST_CASE("residual zero iff brute-force Ricci zero on the theorem family") {
  auto base = t1_s1();
  OneForm alpha = OneForm::zero(2);
  alpha.comp(0) = ScalarField(
      2, expr::sub(expr::constant(1.0 / (2.0 * M_PI)), expr::sin(expr::variable(0))));
  // correct f_B: residual ~ 0 and Ricci ~ 0
  {
    BundleConfig cfg(base, two_form_alpha_wedge_eta(base, alpha),
                     gauge_alpha_wedge_eta(base, alpha),
                     ScalarField(3, expr::mul(expr::constant(-4.0), expr::cos(expr::variable(2)))));
    CHECK(ricci_flat_residual(cfg).sup <= 1e-10);
    CHECK(sup_ricci_brute(cfg) <= 1e-8);
  }
  // wrong f_B: both nonzero
  {
    BundleConfig cfg(base, two_form_alpha_wedge_eta(base, alpha),
                     gauge_alpha_wedge_eta(base, alpha),
                     ScalarField(3, expr::mul(expr::constant(+4.0), expr::cos(expr::variable(2)))));
    CHECK(ricci_flat_residual(cfg).sup > 1.0);
    CHECK(sup_ricci_brute(cfg) > 0.1);
  }
}
