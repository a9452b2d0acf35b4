#include "lorbundle/bundle_chart.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <stdexcept>

namespace lorbundle {

namespace {

constexpr int kU = 0;
constexpr int kV = 1;

std::vector<int> base_to_chart_map(const ProductBase& base) {
  std::vector<int> map(static_cast<size_t>(base.dim()), -1);
  map[static_cast<size_t>(base.circle_coord())] = kU;
  int next = 2;
  for (int a : base.ker_coords()) map[static_cast<size_t>(a)] = next++;
  return map;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gauge potentials
// ---------------------------------------------------------------------------

OneForm gauge_alpha_wedge_eta(const ProductBase& base, const OneForm& alpha) {
  double rho_val;
  bool rho_const = base.rho_field().ast() &&
                   expr::is_constant(base.rho_field().ast(), &rho_val) && rho_val == 1.0;
  if (!rho_const)
    throw std::invalid_argument("gauge_alpha_wedge_eta: requires rho == 1");
  int d = base.dim();
  int u = base.circle_coord();
  if (!alpha.comp(u).is_zero())
    throw std::invalid_argument("gauge_alpha_wedge_eta: alpha must have no u-component");
  // P = -2u * alpha  =>  dP = 2 alpha ^ du = 2 Psi
  ScalarField u_field(d, expr::variable(u));
  std::vector<ScalarField> comps;
  comps.reserve(static_cast<size_t>(d));
  for (int a = 0; a < d; ++a) comps.push_back(-2.0 * (u_field * alpha.comp(a)));
  return OneForm(std::move(comps));
}

TwoForm two_form_alpha_wedge_eta(const ProductBase& base, const OneForm& alpha) {
  int d = base.dim();
  int u = base.circle_coord();
  std::vector<int> id(static_cast<size_t>(1), u);
  ScalarField rho_on_base = base.rho_field().remap(d, id);
  TwoForm psi(d);
  // (alpha ^ eta)_{a,u} = alpha_a * rho
  for (int a = 0; a < d; ++a) {
    if (a == u) continue;
    if (alpha.comp(a).is_zero()) continue;
    psi.set(a, u, alpha.comp(a) * rho_on_base);
  }
  return psi;
}

TorusBlockGauge gauge_torus_blocks(const ProductBase& base, const std::vector<double>& c) {
  const auto& ker = base.ker_coords();
  std::vector<int> torus;
  for (int a : ker)
    if (base.coord_periodic(a)) torus.push_back(a);
  if (torus.size() < 2 * c.size())
    throw std::invalid_argument("gauge_torus_blocks: not enough torus coordinates");
  int d = base.dim();
  TwoForm psi(d);
  OneForm P = OneForm::zero(d);
  for (size_t l = 0; l < c.size(); ++l) {
    int x1 = torus[2 * l], x2 = torus[2 * l + 1];
    auto v1 = expr::variable(x1), v2 = expr::variable(x2);
    // chi_l = sin(x1) sin(x2) + c_l
    psi.set(x1, x2,
            ScalarField(d, expr::add(expr::mul(expr::sin(v1), expr::sin(v2)),
                                     expr::constant(c[l]))));
    // P_{x2} = 2 c_l x1 - 2 cos(x1) sin(x2)
    P.comp(x2) = ScalarField(
        d, expr::sub(expr::mul(expr::constant(2.0 * c[l]), v1),
                     expr::mul(expr::constant(2.0), expr::mul(expr::cos(v1), expr::sin(v2)))));
  }
  return {std::move(psi), std::move(P)};
}

double gauge_defect(const TwoForm& Psi, const OneForm& P, const std::vector<Vec>& pts) {
  double sup = 0.0;
  for (const auto& p : pts) {
    Mat dP = P.exterior_derivative(p);
    Mat target = 2.0 * Psi.matrix(p);
    sup = std::max(sup, (dP - target).cwiseAbs().maxCoeff());
  }
  return sup;
}

// ---------------------------------------------------------------------------
// ChartMetric
// ---------------------------------------------------------------------------

void ChartMetric::build(const BundleConfig& cfg) {
  const ProductBase& base = cfg.base();
  d_ = cfg.chart_dim();
  comp_.assign(static_cast<size_t>(d_ * d_), ScalarField::zero(d_));
  nonzero_.assign(static_cast<size_t>(d_ * d_), 0);

  const ScalarField& rho = cfg.rho_chart();
  ScalarField rho2 = rho * rho;
  const ScalarField& Pu = cfg.P_chart(kU);

  ScalarField g_uu = cfg.f() * rho2 + ScalarField::constant(d_, 1.0) + 2.0 * (rho * Pu);
  ScalarField g_uv = rho;

  auto put = [&](int a, int b, ScalarField f) {
    comp_[static_cast<size_t>(at(a, b))] = f;
    comp_[static_cast<size_t>(at(b, a))] = f;
    nonzero_[static_cast<size_t>(at(a, b))] = 1;
    nonzero_[static_cast<size_t>(at(b, a))] = 1;
  };

  put(kU, kU, g_uu);
  put(kU, kV, g_uv);
  const auto& ker = base.ker_coords();
  for (size_t i = 0; i < ker.size(); ++i) {
    int ci = 2 + static_cast<int>(i);
    const ScalarField& Pi = cfg.P_chart(ci);
    if (!Pi.is_zero()) put(kU, ci, rho * Pi);
    int a = ker[i];
    const Factor& fac = base.factors()[static_cast<size_t>(a)];
    if (fac.kind == FactorKind::WarpedLine) {
      std::vector<int> m{ci};
      ScalarField w = fac.warp.remap(d_, m);
      put(ci, ci, w * w);
    } else {
      put(ci, ci, ScalarField::constant(d_, 1.0));
    }
  }

  deps_.assign(static_cast<size_t>(d_ * d_), {});
  for (int a = 0; a < d_; ++a)
    for (int b = 0; b < d_; ++b) {
      int idx = at(a, b);
      if (!nonzero_[static_cast<size_t>(idx)]) continue;
      const ScalarField& f = comp_[static_cast<size_t>(idx)];
      for (int c = 0; c < d_; ++c) {
        if (f.analytic() && !f.depends_on(c)) continue;
        deps_[static_cast<size_t>(idx)].push_back(c);
      }
    }
}

Mat ChartMetric::components(const Vec& pt) const {
  Mat g = Mat::Zero(d_, d_);
  for (int a = 0; a < d_; ++a)
    for (int b = a; b < d_; ++b) {
      int idx = at(a, b);
      if (!nonzero_[static_cast<size_t>(idx)]) continue;
      double v = comp_[static_cast<size_t>(idx)].value(pt);
      g(a, b) = v;
      g(b, a) = v;
    }
  return g;
}

Mat ChartMetric::inverse(const Vec& pt) const {
  Mat g = components(pt);
  Eigen::FullPivLU<Mat> lu(g);
  if (!lu.isInvertible()) throw std::runtime_error("ChartMetric: singular metric matrix");
  return lu.inverse();
}

Tensor3 ChartMetric::derivatives(const Vec& pt) const {
  Tensor3 dg(d_);
  for (int a = 0; a < d_; ++a)
    for (int b = a; b < d_; ++b) {
      int idx = at(a, b);
      if (!nonzero_[static_cast<size_t>(idx)]) continue;
      const ScalarField& f = comp_[static_cast<size_t>(idx)];
      for (int c : deps_[static_cast<size_t>(idx)]) {
        double v = f.partial(c, pt);
        dg(c, a, b) = v;
        dg(c, b, a) = v;
      }
    }
  return dg;
}

Tensor4 ChartMetric::second_derivatives(const Vec& pt) const {
  Tensor4 d2(d_);
  for (int a = 0; a < d_; ++a)
    for (int b = a; b < d_; ++b) {
      int idx = at(a, b);
      if (!nonzero_[static_cast<size_t>(idx)]) continue;
      const ScalarField& f = comp_[static_cast<size_t>(idx)];
      const auto& dep = deps_[static_cast<size_t>(idx)];
      for (int c : dep)
        for (int e : dep) {
          if (e < c) continue;
          double v = f.partial2(e, c, pt);
          d2(e, c, a, b) = v;
          d2(e, c, b, a) = v;
          d2(c, e, a, b) = v;
          d2(c, e, b, a) = v;
        }
    }
  return d2;
}

const ScalarField& ChartMetric::component_field(int a, int b) const {
  return comp_[static_cast<size_t>(at(a, b))];
}

int ChartMetric::negative_eigenvalues(const Vec& pt) const {
  Eigen::SelfAdjointEigenSolver<Mat> es(components(pt));
  int neg = 0;
  for (int i = 0; i < d_; ++i)
    if (es.eigenvalues()[i] < 0.0) ++neg;
  return neg;
}

// ---------------------------------------------------------------------------
// BundleConfig
// ---------------------------------------------------------------------------

BundleConfig::BundleConfig(ProductBase base, TwoForm Psi, OneForm P, ScalarField f)
    : base_(std::make_shared<const ProductBase>(std::move(base))),
      Psi_(std::move(Psi)),
      P_(std::move(P)),
      f_(std::move(f)) {
  int bd = base_->dim();
  if (Psi_.dim() != bd || P_.dim() != bd)
    throw std::invalid_argument("BundleConfig: Psi/P dimension mismatch with base");
  if (f_.dim() != chart_dim())
    throw std::invalid_argument("BundleConfig: f must be a chart field (u, v, x...)");

  base_to_chart_ = base_to_chart_map(*base_);
  chart_to_base_.assign(static_cast<size_t>(chart_dim()), -1);
  for (int a = 0; a < bd; ++a) chart_to_base_[static_cast<size_t>(base_to_chart_[static_cast<size_t>(a)])] = a;

  // chart-coordinate gauge and rho fields
  P_chart_.assign(static_cast<size_t>(chart_dim()), ScalarField::zero(chart_dim()));
  for (int a = 0; a < bd; ++a)
    P_chart_[static_cast<size_t>(base_to_chart_[static_cast<size_t>(a)])] =
        P_.comp(a).remap(chart_dim(), base_to_chart_);
  std::vector<int> rho_map{kU};
  rho_chart_ = base_->rho_field().remap(chart_dim(), rho_map);

  if (f_.analytic()) {
    fiber_constant_ = !f_.depends_on(kV);
  } else {
    // numeric probe on a few points
    fiber_constant_ = true;
    for (const auto& pt : sample_chart_points(8, 99)) {
      if (std::abs(f_.partial(kV, pt)) > 1e-12) {
        fiber_constant_ = false;
        break;
      }
    }
  }

  metric_.build(*this);
}

int BundleConfig::chart_of_base(int a) const { return base_to_chart_[static_cast<size_t>(a)]; }
int BundleConfig::base_of_chart(int c) const { return chart_to_base_[static_cast<size_t>(c)]; }

Vec BundleConfig::base_point(const Vec& chart_pt) const {
  Vec p(base_->dim());
  for (int a = 0; a < base_->dim(); ++a) p[a] = chart_pt[chart_of_base(a)];
  return p;
}

std::vector<std::string> BundleConfig::chart_coord_names() const {
  std::vector<std::string> names(static_cast<size_t>(chart_dim()));
  names[kU] = base_->factors()[static_cast<size_t>(base_->circle_coord())].coord_name;
  names[kV] = "v";
  for (int c = 2; c < chart_dim(); ++c)
    names[static_cast<size_t>(c)] =
        base_->factors()[static_cast<size_t>(base_of_chart(c))].coord_name;
  return names;
}

bool BundleConfig::chart_coord_periodic(int c) const {
  if (c == kV) return true;
  return base_->coord_periodic(base_of_chart(c));
}

std::vector<Vec> BundleConfig::sample_chart_points(int count, unsigned seed) const {
  auto base_pts = base_->sample_points(count, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> fiber(0.0, 2.0 * M_PI);
  std::vector<Vec> pts;
  pts.reserve(base_pts.size());
  for (auto& bp : base_pts) {
    Vec pt(chart_dim());
    pt[kV] = fiber(rng);
    for (int a = 0; a < base_->dim(); ++a) pt[chart_of_base(a)] = bp[a];
    pts.push_back(std::move(pt));
  }
  return pts;
}

void BundleConfig::validate(int samples, unsigned seed) const {
  auto base_pts = base_->sample_points(samples, seed);
  auto chart_pts = sample_chart_points(samples, seed + 1);

  double gd = gauge_defect(Psi_, P_, base_pts);
  if (gd > 1e-8)
    throw std::runtime_error("BundleConfig: gauge error, sup|dP - 2 Psi| = " + std::to_string(gd));

  double dpsi = 0.0;
  for (const auto& p : base_pts) dpsi = std::max(dpsi, Psi_.d_sup(p));
  if (dpsi > 1e-9)
    throw std::runtime_error("BundleConfig: Psi not closed, sup|dPsi| = " + std::to_string(dpsi));

  double deta = base_->check_eta_closed(base_pts);
  if (deta > 1e-9)
    throw std::runtime_error("BundleConfig: eta not closed, sup|d eta| = " + std::to_string(deta));

  double eta_min = base_->check_eta_nonvanishing(base_pts);
  if (!(eta_min > 0.0)) throw std::runtime_error("BundleConfig: eta vanishes at a sample point");

  // periodicity of f in the fiber and all circle coordinates
  const double period = 2.0 * M_PI;
  for (const auto& pt : chart_pts) {
    for (int c = 0; c < chart_dim(); ++c) {
      if (!chart_coord_periodic(c)) continue;
      Vec q = pt;
      q[c] += period;
      if (std::abs(f_.value(q) - f_.value(pt)) > 1e-9)
        throw std::domain_error(
            "BundleConfig: f is not periodic in coordinate " + chart_coord_names()[static_cast<size_t>(c)]);
    }
  }
  // periodicity of Psi in torus coordinates
  for (const auto& p : base_pts) {
    for (int a = 0; a < base_->dim(); ++a) {
      if (!base_->coord_periodic(a)) continue;
      Vec q = p;
      q[a] += period;
      for (int i = 0; i < base_->dim(); ++i)
        for (int j = i + 1; j < base_->dim(); ++j)
          if (std::abs(Psi_.component(i, j, q) - Psi_.component(i, j, p)) > 1e-9)
            throw std::domain_error("BundleConfig: Psi not periodic in a torus coordinate");
    }
  }

  for (const auto& pt : chart_pts)
    if (metric_.negative_eigenvalues(pt) != 1)
      throw std::runtime_error("BundleConfig: signature violation, metric not Lorentzian");
}

// ---------------------------------------------------------------------------
// Adapted frame
// ---------------------------------------------------------------------------

AdaptedFrame frame_at(const BundleConfig& cfg, const Vec& pt) {
  const ProductBase& base = cfg.base();
  Vec bp = cfg.base_point(pt);
  int d = cfg.chart_dim();
  int n = base.n();

  AdaptedFrame fr;
  fr.point = pt;
  fr.xi = Vec::Zero(d);
  fr.xi[kV] = -1.0;

  double rho = base.rho(bp);
  Vec Pc(d);
  for (int c = 0; c < d; ++c) Pc[c] = cfg.P_chart(c).value(pt);

  fr.zeta = Vec::Zero(d);
  fr.zeta[kU] = 1.0 / rho;
  fr.zeta[kV] = -Pc[kU] / rho;

  fr.H = cfg.f().value(pt) + 1.0 / (rho * rho) - 1.0;
  fr.e_plus = fr.zeta + 0.5 * fr.H * fr.xi;
  fr.e_minus = fr.e_plus + fr.xi;
  fr.Z = 0.5 * fr.xi - fr.e_minus;

  fr.screen = Mat::Zero(d, n);
  const auto& ker = base.ker_coords();
  for (size_t i = 0; i < ker.size(); ++i) {
    int a = ker[i];
    int c = cfg.chart_of_base(a);
    double coef = 1.0 / std::sqrt(base.h_diag(a, bp));
    fr.screen(c, static_cast<int>(i)) = coef;
    fr.screen(kV, static_cast<int>(i)) = -coef * Pc[c];
    fr.screen_base_coord.push_back(a);
    if (base.factors()[static_cast<size_t>(a)].kind == FactorKind::WarpedLine)
      ++fr.m_warped;
    else
      ++fr.k_torus;
  }
  return fr;
}

double frame_invariants_sup(const BundleConfig& cfg, const Vec& pt) {
  AdaptedFrame fr = frame_at(cfg, pt);
  Mat g = cfg.metric().components(pt);
  auto ip = [&](const Vec& a, const Vec& b) { return a.dot(g * b); };
  double sup = 0.0;
  auto chk = [&](double v, double want) { sup = std::max(sup, std::abs(v - want)); };
  chk(ip(fr.xi, fr.xi), 0.0);
  chk(ip(fr.xi, fr.zeta), -1.0);
  chk(ip(fr.e_plus, fr.e_plus), 1.0);
  chk(ip(fr.e_minus, fr.e_minus), -1.0);
  chk(ip(fr.xi, fr.Z), 1.0);
  chk(ip(fr.Z, fr.Z), 0.0);
  int n = static_cast<int>(fr.screen.cols());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) chk(ip(fr.screen.col(i), fr.screen.col(j)), i == j ? 1.0 : 0.0);
    chk(ip(fr.screen.col(i), fr.e_plus), 0.0);
    chk(ip(fr.screen.col(i), fr.e_minus), 0.0);
    chk(ip(fr.screen.col(i), fr.xi), 0.0);
  }
  // pi* eta = -g(xi, .)
  Vec pe = Vec::Zero(cfg.chart_dim());
  pe[kU] = cfg.base().rho(cfg.base_point(pt));
  Vec minus_xi_flat = -(g * fr.xi);
  sup = std::max(sup, (pe - minus_xi_flat).cwiseAbs().maxCoeff());
  return sup;
}

Vec frame_vec(const BundleConfig& cfg, FrameVec X, const Vec& pt) {
  AdaptedFrame fr = frame_at(cfg, pt);
  switch (X.kind) {
    case FrameVec::Screen: return fr.screen.col(X.index);
    case FrameVec::EPlus: return fr.e_plus;
    case FrameVec::Xi: return fr.xi;
  }
  throw std::logic_error("frame_vec: bad label");
}

Vec frame_vec_partial(const BundleConfig& cfg, FrameVec X, int c, const Vec& pt) {
  const ProductBase& base = cfg.base();
  Vec bp = cfg.base_point(pt);
  int d = cfg.chart_dim();
  Vec out = Vec::Zero(d);
  if (X.kind == FrameVec::Xi) return out;

  double rho = base.rho(bp);
  double drho = (c == kU) ? base.rho_d1(bp) : 0.0;

  if (X.kind == FrameVec::Screen) {
    int a = base.ker_coords()[static_cast<size_t>(X.index)];
    int ca = cfg.chart_of_base(a);
    double h = base.h_diag(a, bp);
    double coef = 1.0 / std::sqrt(h);
    // d_c coef: nonzero only when c is the chart slot of a warped coordinate a
    double dcoef = 0.0;
    if (c == ca) {
      double dh = base.h_diag_partial(a, a, bp);
      dcoef = -0.5 * dh * coef / h;
    }
    double Pa = cfg.P_chart(ca).value(pt);
    double dPa = cfg.P_chart(ca).partial(c, pt);
    out[ca] = dcoef;
    out[kV] = -(dcoef * Pa + coef * dPa);
    return out;
  }

  // EPlus = zeta + H/2 xi
  double Pu = cfg.P_chart(kU).value(pt);
  double dPu = cfg.P_chart(kU).partial(c, pt);
  double df = cfg.f().partial(c, pt);
  double dH = df - 2.0 * drho / (rho * rho * rho);
  out[kU] = -drho / (rho * rho);
  out[kV] = -(dPu * rho - Pu * drho) / (rho * rho) - 0.5 * dH;
  return out;
}

double frame_apply(const BundleConfig& cfg, FrameVec X, const ScalarField& s, const Vec& pt) {
  Vec xv = frame_vec(cfg, X, pt);
  double r = 0.0;
  for (int c = 0; c < cfg.chart_dim(); ++c)
    if (xv[c] != 0.0) r += xv[c] * s.partial(c, pt);
  return r;
}

// ---------------------------------------------------------------------------
// Closed-form covariant derivative
// ---------------------------------------------------------------------------

namespace {

// Base frame fields are single-coordinate: F = coef(x_a) d_a.
struct BaseFrameVec {
  int coord;
  bool is_eeta;
};

double base_frame_coef(const ProductBase& base, const BaseFrameVec& F, const Vec& bp) {
  if (F.is_eeta) return 1.0 / base.rho(bp);
  return 1.0 / std::sqrt(base.h_diag(F.coord, bp));
}

double base_frame_coef_partial(const ProductBase& base, const BaseFrameVec& F, int a,
                               const Vec& bp) {
  if (F.is_eeta) {
    if (a != base.circle_coord()) return 0.0;
    double r = base.rho(bp);
    return -base.rho_d1(bp) / (r * r);
  }
  if (a != F.coord) return 0.0;
  double h = base.h_diag(F.coord, bp);
  double dh = base.h_diag_partial(a, F.coord, bp);
  return -0.5 * dh / (h * std::sqrt(h));
}

/// nabla^h_F G as a base coordinate vector.
Vec base_frame_cov_deriv(const ProductBase& base, const BaseFrameVec& F, const BaseFrameVec& G,
                         const Vec& bp) {
  int d = base.dim();
  Vec out = Vec::Zero(d);
  double cF = base_frame_coef(base, F, bp);
  double cG = base_frame_coef(base, G, bp);
  // F(c_G) d_{aG}
  out[G.coord] += cF * base_frame_coef_partial(base, G, F.coord, bp);
  // c_F c_G Gamma^b_{aF aG} d_b
  Tensor3 Gam = base.christoffel(bp);
  for (int b = 0; b < d; ++b) out[b] += cF * cG * Gam(b, F.coord, G.coord);
  return out;
}

BaseFrameVec screen_base_vec(const ProductBase& base, int i) {
  return {base.ker_coords()[static_cast<size_t>(i)], false};
}

BaseFrameVec eeta_base_vec(const ProductBase& base) {
  return {base.circle_coord(), true};
}

/// Project to ker eta and lift: chart components of (bar W)^*.
Vec lift_bar(const BundleConfig& cfg, const Vec& W_base, const Vec& pt) {
  const ProductBase& base = cfg.base();
  Vec bp = cfg.base_point(pt);
  // bar W = W - eta(W) E_eta
  double etaW = base.rho(bp) * W_base[base.circle_coord()];
  Vec bar = W_base;
  bar[base.circle_coord()] -= etaW / base.rho(bp);
  // lift: v-component is -P(bar W)
  Vec out = Vec::Zero(cfg.chart_dim());
  double PW = 0.0;
  for (int a = 0; a < base.dim(); ++a) {
    out[cfg.chart_of_base(a)] = bar[a];
    PW += cfg.P().comp(a).value(bp) * bar[a];
  }
  out[kV] = -PW;
  return out;
}

}  // namespace

Vec grad_g_closed_form(const BundleConfig& cfg, const Vec& pt) {
  AdaptedFrame fr = frame_at(cfg, pt);
  const ScalarField& f = cfg.f();
  int n = static_cast<int>(fr.screen.cols());
  double xif = -f.partial(kV, pt);  // xi = -d_v
  double epf = 0.0;
  for (int c = 0; c < cfg.chart_dim(); ++c)
    if (fr.e_plus[c] != 0.0) epf += fr.e_plus[c] * f.partial(c, pt);
  Vec out = -xif * fr.e_plus - (epf + xif) * fr.xi;
  for (int i = 0; i < n; ++i) {
    double eif = 0.0;
    for (int c = 0; c < cfg.chart_dim(); ++c)
      if (fr.screen(c, i) != 0.0) eif += fr.screen(c, i) * f.partial(c, pt);
    out += eif * fr.screen.col(i);
  }
  return out;
}

Vec cov_deriv_closed_form(const BundleConfig& cfg, FrameVec X, FrameVec Y, const Vec& pt) {
  const ProductBase& base = cfg.base();
  Vec bp = cfg.base_point(pt);
  int d = cfg.chart_dim();
  AdaptedFrame fr = frame_at(cfg, pt);
  const ScalarField& f = cfg.f();
  double xif = -f.partial(kV, pt);

  // (e): nabla_X xi = -1/2 xi(f) (pi* eta)(X) xi  with (pi* eta)(e_+) = 1
  if (Y.kind == FrameVec::Xi) {
    double etaX = (X.kind == FrameVec::EPlus) ? 1.0 : 0.0;
    return (-0.5 * xif * etaX) * fr.xi;
  }

  Mat psi = base.psi_matrix(cfg.Psi(), bp);
  BaseFrameVec eeta = eeta_base_vec(base);

  auto base_vec_of = [&](const BaseFrameVec& F) {
    Vec v = Vec::Zero(base.dim());
    v[F.coord] = base_frame_coef(base, F, bp);
    return v;
  };

  if (X.kind == FrameVec::Screen && Y.kind == FrameVec::Screen) {
    // (a)
    BaseFrameVec Ei = screen_base_vec(base, X.index), Ej = screen_base_vec(base, Y.index);
    Vec nab = base_frame_cov_deriv(base, Ei, Ej, bp);
    Vec Eiv = base_vec_of(Ei), Ejv = base_vec_of(Ej);
    double PsiIJ = Eiv.dot(cfg.Psi().matrix(bp) * Ejv);
    Vec eeta_v = base.eta_sharp(bp) / base.eta_norm2(bp);
    double h_eeta_nab = nab.dot(base.h(bp) * eeta_v);
    return lift_bar(cfg, nab, pt) + (PsiIJ - h_eeta_nab) * fr.xi;
  }

  if (X.kind == FrameVec::EPlus && Y.kind == FrameVec::Screen) {
    // (b)
    BaseFrameVec Ej = screen_base_vec(base, Y.index);
    Vec nab = base_frame_cov_deriv(base, eeta, Ej, bp);
    Vec Ejv = base_vec_of(Ej);
    Vec psiEj = psi * Ejv;
    Vec eeta_v = base.eta_sharp(bp) / base.eta_norm2(bp);
    double PsiJEta = Ejv.dot(cfg.Psi().matrix(bp) * eeta_v);
    // dH(e_j): the 1/rho^2 part of H depends only on u and e_j has no
    // u-component, so only f contributes.
    double dH_ej = 0.0;
    Vec ev = fr.screen.col(Y.index);
    for (int c = 0; c < d; ++c)
      if (ev[c] != 0.0) dH_ej += ev[c] * f.partial(c, pt);
    return lift_bar(cfg, nab, pt) + lift_bar(cfg, psiEj, pt) -
           (2.0 * PsiJEta + 0.5 * dH_ej) * fr.xi;
  }

  if (X.kind == FrameVec::Screen && Y.kind == FrameVec::EPlus) {
    // (c)
    BaseFrameVec Ei = screen_base_vec(base, X.index);
    Vec nab = base_frame_cov_deriv(base, Ei, eeta, bp);
    Vec Eiv = base_vec_of(Ei);
    Vec psiEi = psi * Eiv;
    return lift_bar(cfg, nab, pt) + lift_bar(cfg, psiEi, pt);
  }

  if (X.kind == FrameVec::EPlus && Y.kind == FrameVec::EPlus) {
    // (d)
    Vec nab = base_frame_cov_deriv(base, eeta, eeta, bp);
    Vec eeta_v = base.eta_sharp(bp) / base.eta_norm2(bp);
    Vec psiEeta = psi * eeta_v;
    double epf = 0.0;
    for (int c = 0; c < d; ++c)
      if (fr.e_plus[c] != 0.0) epf += fr.e_plus[c] * f.partial(c, pt);
    return lift_bar(cfg, nab, pt) + 2.0 * lift_bar(cfg, psiEeta, pt) -
           0.5 * grad_g_closed_form(cfg, pt) - 0.5 * epf * fr.xi;
  }

  // nabla_xi e_j = nabla_xi e_+ = 0: [xi, lifts] = 0 and the recurrence
  // terms cancel against the bracket.
  if (X.kind == FrameVec::Xi) return Vec::Zero(d);

  throw std::logic_error("cov_deriv_closed_form: unhandled label pair");
}

Vec cov_deriv_brute(const BundleConfig& cfg, FrameVec X, FrameVec Y, const Vec& pt) {
  int d = cfg.chart_dim();
  Vec Xv = frame_vec(cfg, X, pt);
  Vec Yv = frame_vec(cfg, Y, pt);
  Tensor3 G = christoffel_g(cfg, pt);
  Vec out = Vec::Zero(d);
  // directional derivative of Y's components along X, 4th-order differences
  const double h = kFdStep;
  for (int b = 0; b < d; ++b) {
    if (Xv[b] == 0.0) continue;
    Vec pp = pt, pm = pt, pp2 = pt, pm2 = pt;
    pp[b] += h;
    pm[b] -= h;
    pp2[b] += 2 * h;
    pm2[b] -= 2 * h;
    Vec dY = (-frame_vec(cfg, Y, pp2) + 8.0 * frame_vec(cfg, Y, pp) -
              8.0 * frame_vec(cfg, Y, pm) + frame_vec(cfg, Y, pm2)) /
             (12.0 * h);
    out += Xv[b] * dY;
  }
  for (int a = 0; a < d; ++a) {
    double s = 0.0;
    for (int b = 0; b < d; ++b) {
      if (Xv[b] == 0.0) continue;
      for (int c = 0; c < d; ++c) s += G(a, b, c) * Xv[b] * Yv[c];
    }
    out[a] += s;
  }
  return out;
}

double hessian_g_frame(const BundleConfig& cfg, FrameVec X, FrameVec Y, const Vec& pt) {
  const ScalarField& f = cfg.f();
  int d = cfg.chart_dim();
  Vec Xv = frame_vec(cfg, X, pt);
  Vec Yv = frame_vec(cfg, Y, pt);
  // X(Y(f)) = X^b [ d_b Y^a d_a f + Y^a d_b d_a f ]
  double xyf = 0.0;
  for (int b = 0; b < d; ++b) {
    if (Xv[b] == 0.0) continue;
    Vec dYb = frame_vec_partial(cfg, Y, b, pt);
    for (int a = 0; a < d; ++a) {
      if (dYb[a] != 0.0) xyf += Xv[b] * dYb[a] * f.partial(a, pt);
      if (Yv[a] != 0.0) xyf += Xv[b] * Yv[a] * f.partial2(b, a, pt);
    }
  }
  Vec nab = cov_deriv_closed_form(cfg, X, Y, pt);
  double nf = 0.0;
  for (int a = 0; a < d; ++a)
    if (nab[a] != 0.0) nf += nab[a] * f.partial(a, pt);
  return xyf - nf;
}

// ---------------------------------------------------------------------------
// Christoffels of g
// ---------------------------------------------------------------------------

Tensor3 christoffel_g(const BundleConfig& cfg, const Vec& pt) {
  const ChartMetric& m = cfg.metric();
  int d = m.dim();
  Mat gi = m.inverse(pt);
  Tensor3 dg = m.derivatives(pt);
  Tensor3 G(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = b; c < d; ++c) {
        double s = 0.0;
        for (int e = 0; e < d; ++e) {
          double T = dg(b, e, c) + dg(c, e, b) - dg(e, b, c);
          if (T != 0.0) s += gi(a, e) * T;
        }
        s *= 0.5;
        G(a, b, c) = s;
        G(a, c, b) = s;
      }
  return G;
}

Tensor4 christoffel_g_partials(const BundleConfig& cfg, const Vec& pt) {
  const ChartMetric& m = cfg.metric();
  int d = m.dim();
  Mat gi = m.inverse(pt);
  Tensor3 dg = m.derivatives(pt);
  Tensor4 d2g = m.second_derivatives(pt);
  Tensor4 out(d);
  std::vector<Mat> dginv(static_cast<size_t>(d));
  for (int e = 0; e < d; ++e) {
    Mat Dg(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) Dg(a, b) = dg(e, a, b);
    dginv[static_cast<size_t>(e)] = -gi * Dg * gi;
  }
  for (int e = 0; e < d; ++e)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = b; c < d; ++c) {
          double s = 0.0;
          for (int f = 0; f < d; ++f) {
            double T = dg(b, f, c) + dg(c, f, b) - dg(f, b, c);
            double dT = d2g(e, b, f, c) + d2g(e, c, f, b) - d2g(e, f, b, c);
            s += dginv[static_cast<size_t>(e)](a, f) * T + gi(a, f) * dT;
          }
          s *= 0.5;
          out(e, a, b, c) = s;
          out(e, a, c, b) = s;
        }
  return out;
}

double metricity_residual_g(const BundleConfig& cfg, const Vec& pt) {
  const ChartMetric& m = cfg.metric();
  int d = m.dim();
  Mat g = m.components(pt);
  Tensor3 dg = m.derivatives(pt);
  Tensor3 G = christoffel_g(cfg, pt);
  double sup = 0.0;
  for (int c = 0; c < d; ++c)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double v = dg(c, a, b);
        for (int e = 0; e < d; ++e) v -= G(e, c, a) * g(e, b) + G(e, c, b) * g(a, e);
        sup = std::max(sup, std::abs(v));
      }
  return sup;
}

Mat covariant_deriv_pi_eta(const BundleConfig& cfg, const Vec& pt) {
  int d = cfg.chart_dim();
  Vec bp = cfg.base_point(pt);
  double rho = cfg.base().rho(bp);
  double drho = cfg.base().rho_d1(bp);
  Tensor3 G = christoffel_g(cfg, pt);
  Mat out(d, d);
  for (int c = 0; c < d; ++c)
    for (int a = 0; a < d; ++a) {
      double v = (c == kU && a == kU) ? drho : 0.0;
      v -= G(kU, c, a) * rho;
      out(c, a) = v;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Screen integrability, Lie derivative, Killing candidate
// ---------------------------------------------------------------------------

ScreenIntegrability screen_integrability(const BundleConfig& cfg, int samples, unsigned seed,
                                         double tol) {
  const ProductBase& base = cfg.base();
  auto pts = base.sample_points(samples, seed);
  double sup = 0.0;
  for (const auto& p : pts) {
    Vec eta = base.eta_components(p);
    Mat psi = cfg.Psi().matrix(p);
    int d = base.dim();
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b)
        for (int c = b + 1; c < d; ++c) {
          double v = eta[a] * psi(b, c) - eta[b] * psi(a, c) + eta[c] * psi(a, b);
          sup = std::max(sup, std::abs(v));
        }
  }
  return {sup <= tol, sup};
}

Vec ChartVectorField::value(const Vec& pt) const {
  Vec v(static_cast<Eigen::Index>(comp.size()));
  for (size_t i = 0; i < comp.size(); ++i) v[static_cast<Eigen::Index>(i)] = comp[i].value(pt);
  return v;
}

Mat ChartVectorField::jacobian(const Vec& pt) const {
  int d = static_cast<int>(comp.size());
  Mat J(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) J(a, b) = comp[static_cast<size_t>(a)].partial(b, pt);
  return J;
}

Mat lie_derivative_g(const BundleConfig& cfg, const ChartVectorField& K, const Vec& pt) {
  int d = cfg.chart_dim();
  Mat g = cfg.metric().components(pt);
  Tensor3 G = christoffel_g(cfg, pt);
  Vec Kv = K.value(pt);
  Mat J = K.jacobian(pt);
  Mat nabK(d, d);  // nabK(a, c) = (nabla_a K)^c
  for (int a = 0; a < d; ++a)
    for (int c = 0; c < d; ++c) {
      double v = J(c, a);
      for (int e = 0; e < d; ++e) v += G(c, a, e) * Kv[e];
      nabK(a, c) = v;
    }
  Mat lie(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double v = 0.0;
      for (int c = 0; c < d; ++c) v += g(c, b) * nabK(a, c) + g(a, c) * nabK(b, c);
      lie(a, b) = v;
    }
  return lie;
}

KillingCandidate killing_candidate(const BundleConfig& cfg, double eps, int grid_per_axis) {
  int d = cfg.chart_dim();
  // g(zeta, zeta) = f + 1/rho^2 as a chart field
  ScalarField one_over_rho2 =
      cfg.rho_chart().analytic()
          ? ScalarField(d, expr::div(expr::constant(1.0),
                                     expr::mul(cfg.rho_chart().ast(), cfg.rho_chart().ast())))
          : ScalarField(d, [rc = cfg.rho_chart()](std::span<const double> x) {
              double r = rc.value(x);
              return 1.0 / (r * r);
            });
  ScalarField gzz = cfg.f() + one_over_rho2;

  std::vector<int> dep;
  for (int c = 0; c < d; ++c)
    if (!gzz.analytic() || gzz.depends_on(c)) dep.push_back(c);

  double best = -std::numeric_limits<double>::infinity();
  Vec pt = Vec::Zero(d);
  if (dep.empty()) {
    best = gzz.value(pt);
  } else {
    std::vector<int> idx(dep.size(), 0);
    for (;;) {
      for (size_t k = 0; k < dep.size(); ++k) {
        int c = dep[k];
        double t = static_cast<double>(idx[k]) / grid_per_axis;
        pt[c] = cfg.chart_coord_periodic(c) ? 2.0 * M_PI * t : -1.5 + 3.0 * t;
      }
      best = std::max(best, gzz.value(pt));
      size_t k = 0;
      while (k < dep.size() && ++idx[k] >= grid_per_axis) idx[k++] = 0;
      if (k == dep.size()) break;
    }
  }
  double C = best + 0.05 * std::abs(best) + eps;

  KillingCandidate out;
  out.C = C;
  out.max_g_zeta_zeta = best;
  // K = zeta + C/2 xi: K^u = 1/rho, K^v = -P_u/rho - C/2
  std::vector<ScalarField> comps(static_cast<size_t>(d), ScalarField::zero(d));
  if (cfg.rho_chart().analytic() && cfg.P_chart(kU).analytic()) {
    comps[kU] = ScalarField(d, expr::div(expr::constant(1.0), cfg.rho_chart().ast()));
    comps[kV] = ScalarField(d, expr::sub(expr::neg(expr::div(cfg.P_chart(kU).ast(),
                                                             cfg.rho_chart().ast())),
                                         expr::constant(0.5 * C)));
  } else {
    ScalarField rc = cfg.rho_chart(), pu = cfg.P_chart(kU);
    comps[kU] = ScalarField(d, [rc](std::span<const double> x) { return 1.0 / rc.value(x); });
    comps[kV] = ScalarField(d, [rc, pu, C](std::span<const double> x) {
      return -pu.value(x) / rc.value(x) - 0.5 * C;
    });
  }
  out.K.comp = std::move(comps);

  // g(K,K) = g(zeta,zeta) - C pointwise
  out.sup_g_KK = best - C;
  out.timelike_ok = out.sup_g_KK < -0.5 * eps;
  return out;
}

}  // namespace lorbundle
