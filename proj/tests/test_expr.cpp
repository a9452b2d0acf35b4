#include <doctest.h>

#include <cmath>
#include <vector>

#include "lorbundle/expr.hpp"

using namespace lorbundle;

namespace {
const std::vector<std::string> vars{"u", "v", "x1", "x2"};

double ev(const expr::ExprPtr& e, std::vector<double> at) { return expr::eval(e, at); }
}  // namespace

TEST_CASE("parse and evaluate") {
  auto e = expr::parse("2*sin(x1)*cos(x2) + u^2 - v/2", vars);
  double u = 0.7, v = -1.2, x1 = 0.3, x2 = 2.1;
  CHECK(ev(e, {u, v, x1, x2}) ==
        doctest::Approx(2 * std::sin(x1) * std::cos(x2) + u * u - v / 2).epsilon(1e-14));
}

TEST_CASE("parse pi and unary minus") {
  auto e = expr::parse("-cos(pi/2) + exp(0)", vars);
  CHECK(ev(e, {0, 0, 0, 0}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("parse errors carry position info") {
  CHECK_THROWS_AS(expr::parse("sin(q)", vars), std::runtime_error);
  CHECK_THROWS_AS(expr::parse("1 +", vars), std::runtime_error);
  CHECK_THROWS_AS(expr::parse("x1 x2", vars), std::runtime_error);
}

TEST_CASE("symbolic derivative matches finite differences") {
  auto e = expr::parse("exp(cos(x1))*sin(x2)^3 + x1*x2/(2 + sin(u))", vars);
  std::vector<double> p{0.4, 0.0, 1.1, -0.6};
  for (int i : {0, 2, 3}) {
    auto d = expr::diff(e, i);
    double h = 1e-5;
    auto pp = p, pm = p;
    pp[static_cast<size_t>(i)] += h;
    pm[static_cast<size_t>(i)] -= h;
    double fd = (expr::eval(e, pp) - expr::eval(e, pm)) / (2 * h);
    CHECK(expr::eval(d, p) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("second derivatives are exact for polynomials") {
  auto e = expr::parse("x1^3*x2 + 2*x1", vars);
  auto d = expr::diff(expr::diff(e, 2), 2);  // d^2/dx1^2 = 6 x1 x2
  CHECK(ev(d, {0, 0, 2.0, 5.0}) == doctest::Approx(60.0).epsilon(1e-14));
}

TEST_CASE("remap_vars relocates variables") {
  auto e = expr::parse("sin(x1) + u", vars);
  std::vector<int> map{3, -1, 0, -1};  // u->3, x1->0
  auto r = expr::remap_vars(e, map);
  CHECK(expr::eval(r, std::vector<double>{0.5, 0, 0, 1.25}) ==
        doctest::Approx(std::sin(0.5) + 1.25).epsilon(1e-14));
}

TEST_CASE("depends_on") {
  auto e = expr::parse("sin(x1) + u", vars);
  CHECK(expr::depends_on(e, 0));
  CHECK(expr::depends_on(e, 2));
  CHECK_FALSE(expr::depends_on(e, 1));
}
