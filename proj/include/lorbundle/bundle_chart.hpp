// Lorentzian metric of the circle bundle in explicit chart coordinates
// (u, v, x^1..x^n):
//
//   g_uv = rho,  g_uu = f rho^2 + 1 + 2 rho P_u,  g_ui = rho P_i,
//   g_ij = h_ij, g_vv = g_vi = 0,
//
// with eta = rho(u) du, iA = dv + P and dP = 2 Psi. Also the adapted null
// frame, the closed-form covariant derivative on frame fields, a brute-force
// Christoffel oracle, the screen-integrability test and Killing diagnostics.
#pragma once

#include <memory>

#include "lorbundle/base_geometry.hpp"
#include "lorbundle/fields.hpp"
#include "lorbundle/tensors.hpp"

namespace lorbundle {

// ---------------------------------------------------------------------------
// Gauge potentials (chart-local; dP = 2 Psi)
// ---------------------------------------------------------------------------

/// P = -2u * alpha for Psi = alpha ^ eta (alpha a closed 1-form on the
/// ker-eta factors, no u-component). Requires rho == 1.
OneForm gauge_alpha_wedge_eta(const ProductBase& base, const OneForm& alpha);

/// Psi = alpha ^ eta as a TwoForm over base coordinates.
TwoForm two_form_alpha_wedge_eta(const ProductBase& base, const OneForm& alpha);

struct TorusBlockGauge {
  TwoForm psi;
  OneForm potential;
};

/// Block two-form on the torus coordinates, chi_l = sin(x_{2l-1}) sin(x_{2l}) + c_l,
/// with potential P = sum_l (2 c_l x_{2l-1} - 2 cos(x_{2l-1}) sin(x_{2l})) dx_{2l}.
/// The potential is chart-local: not torus-periodic when c_l != 0.
TorusBlockGauge gauge_torus_blocks(const ProductBase& base, const std::vector<double>& c);

/// sup |dP - 2 Psi| over the sample points.
double gauge_defect(const TwoForm& Psi, const OneForm& P, const std::vector<Vec>& pts);

// ---------------------------------------------------------------------------
// BundleConfig and ChartMetric
// ---------------------------------------------------------------------------

class BundleConfig;

class ChartMetric {
 public:
  ChartMetric() = default;

  int dim() const { return d_; }
  Mat components(const Vec& pt) const;
  Mat inverse(const Vec& pt) const;
  /// dg(c, a, b) = d_c g_ab
  Tensor3 derivatives(const Vec& pt) const;
  /// d2g(e, c, a, b) = d_e d_c g_ab
  Tensor4 second_derivatives(const Vec& pt) const;
  const ScalarField& component_field(int a, int b) const;
  /// Number of negative eigenvalues (Lorentzian signature <=> exactly 1).
  int negative_eigenvalues(const Vec& pt) const;

 private:
  friend class BundleConfig;
  int d_ = 0;
  std::vector<ScalarField> comp_;        // row-major d*d, symmetric
  std::vector<char> nonzero_;            // structural sparsity
  std::vector<std::vector<int>> deps_;   // chart vars each component depends on

  void build(const BundleConfig& cfg);
  int at(int a, int b) const { return a * d_ + b; }
};

class BundleConfig {
 public:
  /// f is a field over chart coordinates (u, v, x...). Throws on structural
  /// problems; numeric invariants are checked by validate().
  BundleConfig(ProductBase base, TwoForm Psi, OneForm P, ScalarField f);

  const ProductBase& base() const { return *base_; }
  const TwoForm& Psi() const { return Psi_; }
  const OneForm& P() const { return P_; }
  const ScalarField& f() const { return f_; }
  bool fiber_constant() const { return fiber_constant_; }
  const ChartMetric& metric() const { return metric_; }

  int chart_dim() const { return base_->dim() + 1; }
  int n_screen() const { return base_->n(); }

  // chart index 0 = u, 1 = v, 2.. = ker coordinates in factor order
  int chart_of_base(int a) const;
  int base_of_chart(int c) const;  // -1 for v
  Vec base_point(const Vec& chart_pt) const;
  std::vector<std::string> chart_coord_names() const;
  bool chart_coord_periodic(int c) const;

  /// Chart-coordinate gauge components P_c (P_v = 0), as chart fields.
  const ScalarField& P_chart(int c) const { return P_chart_[static_cast<size_t>(c)]; }
  const ScalarField& rho_chart() const { return rho_chart_; }

  /// Sampled invariant checks: dP = 2 Psi, d Psi = 0, d eta = 0, eta nowhere
  /// vanishing, f periodic in the fiber and torus coordinates, Lorentzian
  /// signature. Throws std::runtime_error naming the violated invariant.
  void validate(int samples = 48, unsigned seed = 20240) const;

  std::vector<Vec> sample_chart_points(int count, unsigned seed) const;

 private:
  std::shared_ptr<const ProductBase> base_;
  TwoForm Psi_;
  OneForm P_;
  ScalarField f_;
  bool fiber_constant_ = true;
  std::vector<ScalarField> P_chart_;
  ScalarField rho_chart_;
  ChartMetric metric_;
  std::vector<int> base_to_chart_;
  std::vector<int> chart_to_base_;
};

// ---------------------------------------------------------------------------
// Adapted frame
// ---------------------------------------------------------------------------

struct AdaptedFrame {
  Vec point;
  Vec xi, zeta, e_plus, e_minus, Z;
  Mat screen;  // columns e_1..e_n (chart components)
  double H = 0.0;
  std::vector<int> screen_base_coord;
  int m_warped = 0;  // leading screen columns on warped factors (S_2)
  int k_torus = 0;   // trailing screen columns on torus factors (S_1)
};

AdaptedFrame frame_at(const BundleConfig& cfg, const Vec& pt);

/// Max violation over the g-pairings of the frame (g(xi,xi), g(xi,zeta)+1, ...).
double frame_invariants_sup(const BundleConfig& cfg, const Vec& pt);

/// Frame labels for the closed-form covariant derivative.
struct FrameVec {
  enum Kind { Screen, EPlus, Xi } kind;
  int index = 0;
  static FrameVec screen(int i) { return {Screen, i}; }
  static FrameVec e_plus() { return {EPlus, 0}; }
  static FrameVec xi() { return {Xi, 0}; }
};

/// Chart components of a frame field and their analytic partials.
Vec frame_vec(const BundleConfig& cfg, FrameVec X, const Vec& pt);
Vec frame_vec_partial(const BundleConfig& cfg, FrameVec X, int c, const Vec& pt);

/// X(s) for a chart scalar field.
double frame_apply(const BundleConfig& cfg, FrameVec X, const ScalarField& s, const Vec& pt);

/// Closed-form nabla^g_X Y on frame labels.
Vec cov_deriv_closed_form(const BundleConfig& cfg, FrameVec X, FrameVec Y, const Vec& pt);

/// Brute-force route: Christoffel contraction with finite-difference
/// derivatives of the frame fields. Independent of the closed form.
Vec cov_deriv_brute(const BundleConfig& cfg, FrameVec X, FrameVec Y, const Vec& pt);

/// grad_g f as a chart vector (closed-form frame route).
Vec grad_g_closed_form(const BundleConfig& cfg, const Vec& pt);

/// Hessian of f on frame vectors, via the closed-form covariant derivative.
double hessian_g_frame(const BundleConfig& cfg, FrameVec X, FrameVec Y, const Vec& pt);

// ---------------------------------------------------------------------------
// Christoffels of g
// ---------------------------------------------------------------------------

/// Gamma^a_bc of the chart metric (analytic component derivatives).
Tensor3 christoffel_g(const BundleConfig& cfg, const Vec& pt);
/// dGamma(e, a, b, c) = d_e Gamma^a_bc, analytic.
Tensor4 christoffel_g_partials(const BundleConfig& cfg, const Vec& pt);
/// sup |nabla g| at pt (metricity residual of the numeric pipeline).
double metricity_residual_g(const BundleConfig& cfg, const Vec& pt);

/// (nabla_a (pi* eta))_b at pt — zero iff f fiber-constant.
Mat covariant_deriv_pi_eta(const BundleConfig& cfg, const Vec& pt);

// ---------------------------------------------------------------------------
// Screen integrability and Killing diagnostics
// ---------------------------------------------------------------------------

struct ScreenIntegrability {
  bool integrable;
  double sup_eta_wedge_psi;
};

ScreenIntegrability screen_integrability(const BundleConfig& cfg, int samples = 64,
                                         unsigned seed = 7, double tol = 1e-10);

/// A chart vector field with analytic components.
struct ChartVectorField {
  std::vector<ScalarField> comp;  // chart_dim fields
  Vec value(const Vec& pt) const;
  Mat jacobian(const Vec& pt) const;  // J(a, b) = d_b K^a
};

/// (L_K g)(X, Y) = g(nabla_X K, Y) + g(X, nabla_Y K), via numeric Christoffels.
Mat lie_derivative_g(const BundleConfig& cfg, const ChartVectorField& K, const Vec& pt);

struct KillingCandidate {
  ChartVectorField K;  // zeta + C/2 xi
  double C;
  double max_g_zeta_zeta;  // sampled estimate
  bool timelike_ok;        // g(K,K) < -epsilon at all samples
  double sup_g_KK;         // max over samples of g(K,K)
};

/// K = zeta + C/2 xi with C = (sampled max of g(zeta,zeta)) * margin + eps.
/// The sample grid uses 32 points per axis over the coordinates g(zeta,zeta)
/// actually depends on.
KillingCandidate killing_candidate(const BundleConfig& cfg, double eps = 0.1,
                                   int grid_per_axis = 32);

}  // namespace lorbundle
