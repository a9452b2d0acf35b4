// Closed-form Riemann and Ricci tensors of the chart metric in the adapted
// frame, the T_eta tensor, a fully independent brute-force curvature pipeline,
// the Ricci-flatness residual and the Einstein obstruction.
//
// Sign convention: R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z
// - nabla_{[X,Y]} Z, with lowered components R(X,Y,Z,W) = g(R(X,Y)Z, W).
#pragma once

#include "lorbundle/bundle_chart.hpp"

namespace lorbundle {

// ---------------------------------------------------------------------------
// Closed-form frame components
// ---------------------------------------------------------------------------

struct RiemannClosedForm {
  Tensor4 screen;   // R_{ijkl}
  Mat i_pp_j;       // R_{i++j}
  Tensor3 ijk_p;    // R_{ijk+}
  Vec i_pp_xi;      // R_{i++xi}
  double p_xi_xi_p; // R_{+xi xi +}
};

struct RicciClosedForm {
  Mat ij;       // Ric_{ij}
  Vec i_p;      // Ric_{i+}
  double pp;    // Ric_{++}
  double xi_p;  // Ric_{xi +}
};

/// T_eta(X, Y) for chart vectors (contracted Kulkarni-Nomizu square of
/// nabla eta over the screen frame); vanishes identically when eta is
/// parallel or recurrent.
double t_eta(const BundleConfig& cfg, const Vec& X, const Vec& Y, const Vec& pt);

RiemannClosedForm riemann_closed_form(const BundleConfig& cfg, const Vec& pt);
RicciClosedForm ricci_closed_form(const BundleConfig& cfg, const Vec& pt);

// ---------------------------------------------------------------------------
// Brute force (independent oracle route)
// ---------------------------------------------------------------------------

/// Lowered chart curvature R_{abcd} from Christoffels and their analytic
/// derivatives, by the definition of R.
Tensor4 riemann_brute_force(const BundleConfig& cfg, const Vec& pt);

/// Chart Ricci tensor by contraction of the brute-force curvature.
Mat ricci_brute_force(const BundleConfig& cfg, const Vec& pt);

/// Contract a lowered chart 4-tensor with four chart vectors.
double contract4(const Tensor4& R, const Vec& A, const Vec& B, const Vec& C, const Vec& D);

// ---------------------------------------------------------------------------
// Comparison report
// ---------------------------------------------------------------------------

struct CurvatureReport {
  Vec point;
  RiemannClosedForm closed;
  RicciClosedForm ricci_closed;
  /// max over listed frame components of |closed - brute| / max(|brute|, 1e-3)
  /// (so that <= rel_tol means |closed-brute| <= max(rel_tol |brute|, 1e-8)).
  double riemann_discrepancy = 0.0;
  double ricci_discrepancy = 0.0;
  /// largest brute-force frame component outside the families the closed form
  /// lists as the only non-vanishing ones.
  double unlisted_riemann_sup = 0.0;
  double unlisted_ricci_sup = 0.0;
  /// brute-force structure residuals
  double pair_symmetry_residual = 0.0;
  double first_bianchi_residual = 0.0;
  double scalar_curvature = 0.0;
};

CurvatureReport curvature_report(const BundleConfig& cfg, const Vec& pt);

// ---------------------------------------------------------------------------
// Einstein obstruction and Ricci-flat residual
// ---------------------------------------------------------------------------

struct EinsteinObstruction {
  /// sup over sampled points of |1/2 Hess_g f (xi, xi)| — the would-be
  /// cosmological constant; must vanish identically for an Einstein metric,
  /// which forces f fiber-constant and Lambda = 0.
  double fiber_variation_sup;
};

EinsteinObstruction einstein_obstruction(const BundleConfig& cfg, int samples = 64,
                                         unsigned seed = 17);

/// 1/2 Hess_g f(xi,xi) at a point (the lambda-candidate field).
double lambda_candidate(const BundleConfig& cfg, const Vec& pt);

struct RicciFlatResidual {
  double sup;             // sup over samples of |Delta_{h_B} f_B + 4 div_{h_B} alpha|
  OneForm alpha;          // recovered from Psi = alpha ^ eta
  std::vector<double> samples;
};

/// Requires the Ricci-flat theorem shape: flat torus B x S^1, rho == 1,
/// Psi = alpha ^ eta, f = f_B independent of u and v. Throws
/// std::invalid_argument ("shape error") otherwise.
RicciFlatResidual ricci_flat_residual(const BundleConfig& cfg, int samples = 64,
                                      unsigned seed = 23);

/// sup over sampled points of the max-norm of the full brute-force Ricci.
double sup_ricci_brute(const BundleConfig& cfg, int samples = 32, unsigned seed = 29);

}  // namespace lorbundle
