#include <doctest.h>

#include <cmath>
#include <random>

#include "lorbundle/bundle_chart.hpp"
#include "support/oracles.hpp"

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
  int d = base.dim();
  return BundleConfig(base, TwoForm::zero(d), OneForm::zero(d), ScalarField::zero(d + 1));
}

// T^2 x S^1 base with constant Psi = c dx1^dx2 and P = 2c x1 dx2.
BundleConfig torus_psi_config(double c, ScalarField f_chart) {
  auto base = t2_s1();
  TwoForm Psi(3);
  Psi.set(0, 1, ScalarField::constant(3, c));
  OneForm P = OneForm::zero(3);
  P.comp(1) = ScalarField(3, expr::mul(expr::constant(2.0 * c), expr::variable(0)));
  return BundleConfig(base, Psi, P, std::move(f_chart));
}

// T^1 x S^1 base, Psi = alpha ^ eta with alpha = (1/2pi - sin x) dx, f = f_B(x).
BundleConfig ricci_flat_like_config() {
  auto base = t1_s1();
  OneForm alpha = OneForm::zero(2);
  alpha.comp(0) = ScalarField(
      2, expr::sub(expr::constant(1.0 / (2.0 * M_PI)), expr::sin(expr::variable(0))));
  TwoForm Psi = two_form_alpha_wedge_eta(base, alpha);
  OneForm P = gauge_alpha_wedge_eta(base, alpha);
  // f = -4 cos x over chart (u, v, x)
  ScalarField f(3, expr::mul(expr::constant(-4.0), expr::cos(expr::variable(2))));
  return BundleConfig(base, Psi, P, f);
}

// k = 4, m = 1 torus-block family over R x T^4 x S^1 (phi == 1 branch).
BundleConfig type4_like_config() {
  std::vector<Factor> f{Factor::warped_line("y1", ScalarField::constant(1, 1.0)),
                        Factor::torus_circle("x1"), Factor::torus_circle("x2"),
                        Factor::torus_circle("x3"), Factor::torus_circle("x4"),
                        Factor::torus_circle("u")};
  ProductBase base(std::move(f), 5, ScalarField::constant(1, 1.0));
  auto gauge = gauge_torus_blocks(base, {1.0, 1.0});
  // f_hat = -2 (sin x1 sin x2 + 1) * y1, chart coords (u,v,y1,x1,x2,x3,x4)
  auto chi = expr::add(expr::mul(expr::sin(expr::variable(3)), expr::sin(expr::variable(4))),
                       expr::constant(1.0));
  ScalarField fhat(7, expr::mul(expr::constant(-2.0), expr::mul(chi, expr::variable(2))));
  return BundleConfig(base, gauge.psi, gauge.potential, fhat);
}

}  // namespace

TEST_CASE("gauge: zero two-form admits zero potential") {
  auto base = t2_s1();
  auto pts = base.sample_points(10, 1);
  CHECK(gauge_defect(TwoForm::zero(3), OneForm::zero(3), pts) == 0.0);
}

TEST_CASE("gauge: alpha wedge eta potential P = -2u alpha") {
  auto base = t1_s1();
  OneForm alpha = OneForm::zero(2);
  alpha.comp(0) = ScalarField::constant(2, 1.0);  // alpha = dx ("ds")
  OneForm P = gauge_alpha_wedge_eta(base, alpha);
  Vec p(2);
  p << 0.4, 1.3;  // (x, u)
  CHECK(P.components(p)[0] == doctest::Approx(-2.0 * 1.3).epsilon(1e-14));
  TwoForm Psi = two_form_alpha_wedge_eta(base, alpha);
  CHECK(gauge_defect(Psi, P, base.sample_points(12, 2)) <= 1e-12);
}

TEST_CASE("gauge: single sin-sin torus block") {
  std::vector<Factor> f{Factor::torus_circle("x1"), Factor::torus_circle("x2"),
                        Factor::torus_circle("u")};
  ProductBase base(std::move(f), 2, ScalarField::constant(1, 1.0));
  auto g = gauge_torus_blocks(base, {0.0});
  Vec p(3);
  p << 0.7, 2.1, 0.0;
  CHECK(g.potential.components(p)[1] ==
        doctest::Approx(-2.0 * std::cos(0.7) * std::sin(2.1)).epsilon(1e-14));
  CHECK(g.psi.component(0, 1, p) == doctest::Approx(std::sin(0.7) * std::sin(2.1)).epsilon(1e-14));
  CHECK(gauge_defect(g.psi, g.potential, base.sample_points(12, 3)) <= 1e-12);
}

TEST_CASE("chart metric: flat Walker form") {
  auto cfg = flat_config();
  cfg.validate();
  Vec pt(4);
  pt << 0.3, 1.1, 0.5, 2.2;  // (u, v, x1, x2)
  Mat g = cfg.metric().components(pt);
  Mat want(4, 4);
  want << 1, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
  CHECK((g - want).cwiseAbs().maxCoeff() == 0.0);
  CHECK(cfg.metric().negative_eigenvalues(pt) == 1);
}

TEST_CASE("chart metric: g_uu = 1 - 4 cos x for f = -4 cos x") {
  auto base = t1_s1();
  ScalarField f(3, expr::mul(expr::constant(-4.0), expr::cos(expr::variable(2))));
  BundleConfig cfg(base, TwoForm::zero(2), OneForm::zero(2), f);
  Vec pt(3);
  pt << 0.0, 0.0, 0.9;
  CHECK(cfg.metric().components(pt)(0, 0) ==
        doctest::Approx(1.0 - 4.0 * std::cos(0.9)).epsilon(1e-14));
}

TEST_CASE("chart metric: torus-block family has flat screen block and block g_ui") {
  auto cfg = type4_like_config();
  cfg.validate();
  for (const auto& pt : cfg.sample_chart_points(8, 4)) {
    Mat g = cfg.metric().components(pt);
    for (int i = 2; i < 7; ++i)
      for (int j = 2; j < 7; ++j)
        CHECK(g(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));
    // g_ui = P_i
    for (int i = 2; i < 7; ++i)
      CHECK(g(0, i) == doctest::Approx(cfg.P_chart(i).value(pt)).epsilon(1e-14));
    CHECK(cfg.metric().negative_eigenvalues(pt) == 1);
  }
}

TEST_CASE("frame: trivial config has e_+ = d_u, xi = -d_v") {
  auto cfg = flat_config();
  Vec pt(4);
  pt << 0.2, 0.4, 0.6, 0.8;
  AdaptedFrame fr = frame_at(cfg, pt);
  CHECK(fr.e_plus[0] == doctest::Approx(1.0));
  CHECK(fr.e_plus.tail(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(fr.xi[1] == doctest::Approx(-1.0));
  CHECK(frame_invariants_sup(cfg, pt) <= 1e-10);
}

TEST_CASE("frame: P_u = 0.3, f = 0.8 gives e_+ = d_u - 0.7 d_v") {
  auto base = t1_s1();
  OneForm P = OneForm::zero(2);
  P.comp(1) = ScalarField::constant(2, 0.3);  // P_u
  ScalarField f = ScalarField::constant(3, 0.8);
  BundleConfig cfg(base, TwoForm::zero(2), P, f);
  Vec pt(3);
  pt << 0.1, 0.2, 0.3;
  AdaptedFrame fr = frame_at(cfg, pt);
  CHECK(fr.e_plus[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fr.e_plus[1] == doctest::Approx(-0.7).epsilon(1e-14));
  Mat g = cfg.metric().components(pt);
  CHECK(fr.e_plus.dot(g * fr.e_plus) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("frame: generic rho gives H = f + 1/rho^2 - 1") {
  std::vector<Factor> fs{Factor::torus_circle("x"), Factor::torus_circle("u")};
  ProductBase base(std::move(fs), 1,
                   ScalarField(1, expr::add(expr::constant(2.0), expr::cos(expr::variable(0)))));
  ScalarField f = ScalarField::constant(3, 0.25);
  BundleConfig cfg(base, TwoForm::zero(2), OneForm::zero(2), f);
  Vec pt(3);
  pt << 0.8, 0.1, 1.9;  // (u, v, x)
  double rho = 2.0 + std::cos(0.8);
  AdaptedFrame fr = frame_at(cfg, pt);
  CHECK(fr.H == doctest::Approx(0.25 + 1.0 / (rho * rho) - 1.0).epsilon(1e-14));
  CHECK(frame_invariants_sup(cfg, pt) <= 1e-10);
}

TEST_CASE("frame invariants hold across configurations") {
  for (auto cfg : {flat_config(), ricci_flat_like_config(), type4_like_config()})
    for (const auto& pt : cfg.sample_chart_points(12, 5))
      CHECK(frame_invariants_sup(cfg, pt) <= 1e-10);
}

TEST_CASE("covariant derivative: flat config kills all frame derivatives") {
  auto cfg = flat_config();
  Vec pt(4);
  pt << 0.3, 0.7, 1.1, 1.9;
  std::vector<FrameVec> labels{FrameVec::screen(0), FrameVec::screen(1), FrameVec::e_plus(),
                               FrameVec::xi()};
  for (auto X : labels)
    for (auto Y : labels) {
      CHECK(cov_deriv_closed_form(cfg, X, Y, pt).cwiseAbs().maxCoeff() <= 1e-14);
      CHECK(cov_deriv_brute(cfg, X, Y, pt).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("covariant derivative: nabla xi = 0 for fiber-constant f") {
  auto cfg = ricci_flat_like_config();
  REQUIRE(cfg.fiber_constant());
  for (const auto& pt : cfg.sample_chart_points(6, 6)) {
    for (auto X : {FrameVec::screen(0), FrameVec::e_plus()})
      CHECK(cov_deriv_closed_form(cfg, X, FrameVec::xi(), pt).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("covariant derivative: xi-component of nabla_{e_x} e_y equals Psi(E_x, E_y)") {
  double c = 1.3;
  auto cfg = torus_psi_config(c, ScalarField::zero(4));
  Vec pt(4);
  pt << 0.5, 1.0, 0.4, 2.6;
  Vec closed = cov_deriv_closed_form(cfg, FrameVec::screen(0), FrameVec::screen(1), pt);
  // result should be exactly c * xi = (0, -c, 0, 0)
  AdaptedFrame fr = frame_at(cfg, pt);
  CHECK((closed - c * fr.xi).cwiseAbs().maxCoeff() <= 1e-13);
  Vec brute = cov_deriv_brute(cfg, FrameVec::screen(0), FrameVec::screen(1), pt);
  CHECK((brute - closed).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("cross-oracle: closed-form vs brute-force across configurations") {
  std::vector<BundleConfig> cfgs{flat_config(), ricci_flat_like_config(), type4_like_config(),
                                 torus_psi_config(0.7, ScalarField(
                                     4, expr::cos(expr::variable(2))))};
  for (const auto& cfg : cfgs) {
    int n = cfg.n_screen();
    std::vector<FrameVec> labels;
    for (int i = 0; i < n; ++i) labels.push_back(FrameVec::screen(i));
    labels.push_back(FrameVec::e_plus());
    labels.push_back(FrameVec::xi());
    for (const auto& pt : cfg.sample_chart_points(8, 7)) {
      for (auto X : labels)
        for (auto Y : labels) {
          Vec a = cov_deriv_closed_form(cfg, X, Y, pt);
          Vec b = cov_deriv_brute(cfg, X, Y, pt);
          double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
          CHECK((a - b).cwiseAbs().maxCoeff() / scale <= 1e-6);
        }
    }
  }
}

TEST_CASE("pi* eta is parallel; metricity residual small") {
  for (auto cfg : {ricci_flat_like_config(), type4_like_config()}) {
    for (const auto& pt : cfg.sample_chart_points(6, 8)) {
      CHECK(covariant_deriv_pi_eta(cfg, pt).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK(metricity_residual_g(cfg, pt) <= 1e-7);
    }
  }
}

TEST_CASE("screen integrability classifier") {
  // Psi = alpha ^ eta -> integrable identically
  auto rf = ricci_flat_like_config();
  auto si = screen_integrability(rf);
  CHECK(si.integrable);
  CHECK(si.sup_eta_wedge_psi <= 1e-12);
  // Psi in Omega^2(T^n), eta = du -> non-integrable
  auto tn = torus_psi_config(1.0, ScalarField::zero(4));
  auto si2 = screen_integrability(tn);
  CHECK_FALSE(si2.integrable);
  CHECK(si2.sup_eta_wedge_psi > 0.5);
  // Psi = 0 -> integrable
  auto fl = flat_config();
  CHECK(screen_integrability(fl).integrable);
}

TEST_CASE("killing field: fiber-constant f with Psi(eta#,.) = 0 gives L_K g = 0") {
  auto cfg = torus_psi_config(0.9, ScalarField(4, expr::cos(expr::variable(2))));
  auto kc = killing_candidate(cfg);
  CHECK(kc.timelike_ok);
  for (const auto& pt : cfg.sample_chart_points(6, 9)) {
    Mat lie = lie_derivative_g(cfg, kc.K, pt);
    CHECK(lie.cwiseAbs().maxCoeff() <= 1e-9);
    // g(K,K) < -eps
    Mat g = cfg.metric().components(pt);
    Vec Kv = kc.K.value(pt);
    CHECK(Kv.dot(g * Kv) < -0.05);
  }
}

TEST_CASE("killing diagnostics: u-dependent f produces the zeta(f) eta(x)eta term") {
  auto base = t1_s1();
  // f = cos(u) cos(x)
  ScalarField f(3, expr::mul(expr::cos(expr::variable(0)), expr::cos(expr::variable(2))));
  BundleConfig cfg(base, TwoForm::zero(2), OneForm::zero(2), f);
  auto kc = killing_candidate(cfg);
  for (const auto& pt : cfg.sample_chart_points(6, 10)) {
    Mat lie = lie_derivative_g(cfg, kc.K, pt);
    double zf = -std::sin(pt[0]) * std::cos(pt[2]);  // zeta(f), rho = 1
    Mat want = Mat::Zero(3, 3);
    want(0, 0) = zf;
    CHECK((lie - want).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("killing diagnostics: alpha wedge eta case matches flow oracle") {
  auto cfg = ricci_flat_like_config();
  auto kc = killing_candidate(cfg);
  oracles::FlowLieOracle oracle{
      [&](const Eigen::VectorXd& p) { return kc.K.value(p); },
      [&](const Eigen::VectorXd& p) { return cfg.metric().components(p); }};
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const auto& pt : cfg.sample_chart_points(4, 11)) {
    Mat lie = lie_derivative_g(cfg, kc.K, pt);
    // structural form: zeta(f) eta(x)eta - 2 (alpha(x)eta + eta(x)alpha); zeta(f)=0 here
    double alpha_x = 1.0 / (2.0 * M_PI) - std::sin(pt[2]);
    Mat want = Mat::Zero(3, 3);
    want(0, 2) = -2.0 * alpha_x;
    want(2, 0) = -2.0 * alpha_x;
    CHECK((lie - want).cwiseAbs().maxCoeff() <= 1e-9);
    for (int trial = 0; trial < 3; ++trial) {
      Vec X(3), Y(3);
      for (int i = 0; i < 3; ++i) {
        X[i] = dist(rng);
        Y[i] = dist(rng);
      }
      CHECK(oracle.lie(pt, X, Y) == doctest::Approx(X.dot(lie * Y)).epsilon(5e-4));
    }
  }
}

TEST_CASE("config validation rejects a non-periodic fiber dependence") {
  auto base = t1_s1();
  // f = v^2 is not periodic on the fiber circle
  ScalarField f(3, expr::pow(expr::variable(1), 2.0));
  BundleConfig cfg(base, TwoForm::zero(2), OneForm::zero(2), f);
  CHECK_THROWS_AS(cfg.validate(), std::domain_error);
}

TEST_CASE("config validation rejects dP != 2 Psi") {
  auto base = t1_s1();
  TwoForm Psi(2);
  Psi.set(0, 1, ScalarField::constant(2, 1.0));
  // P = 0 cannot satisfy dP = 2 Psi
  BundleConfig cfg(base, Psi, OneForm::zero(2), ScalarField::zero(3));
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("gauge"), std::runtime_error);
}
