// The Riemannian base (N, h): an ordered product of warped lines and unit
// circles, one circle distinguished as the S^1 carrying the closed 1-form
// eta = rho(u) du. Provides the Riemannian calculus consumed by the curvature
// formulas: Christoffels, musical isomorphisms, grad/div/Laplacian/Hessian,
// nabla eta, and the endomorphism psi of a 2-form.
#pragma once

#include <string>
#include <vector>

#include "lorbundle/fields.hpp"
#include "lorbundle/tensors.hpp"

namespace lorbundle {

enum class FactorKind { WarpedLine, TorusCircle };

struct Factor {
  FactorKind kind;
  std::string coord_name;
  // Warp phi as a field of the factor's own coordinate (1 variable).
  // Must be nowhere zero; identically 1 for TorusCircle.
  ScalarField warp;

  static Factor warped_line(std::string name, ScalarField phi) {
    return Factor{FactorKind::WarpedLine, std::move(name), std::move(phi)};
  }
  static Factor torus_circle(std::string name) {
    return Factor{FactorKind::TorusCircle, std::move(name), ScalarField::constant(1, 1.0)};
  }
};

/// Orthonormal frame at a base point: E_1..E_n spanning ker eta, plus
/// E_eta = eta^sharp / |eta^sharp|^2.
struct BaseFrame {
  Vec point;
  Mat screen;                    // columns E_1..E_n, coordinate components
  Vec e_eta;                     // coordinate components of E_eta
  std::vector<int> screen_coord; // base coordinate index of each E_i
};

class ProductBase {
 public:
  /// rho is a 1-variable field of the circle coordinate, rho > 0.
  ProductBase(std::vector<Factor> factors, int circle_index, ScalarField rho);

  int dim() const { return static_cast<int>(factors_.size()); }
  int n() const { return dim() - 1; }
  int circle_coord() const { return circle_index_; }
  const std::vector<Factor>& factors() const { return factors_; }
  const std::vector<int>& ker_coords() const { return ker_coords_; }
  std::vector<std::string> coord_names() const;
  bool coord_periodic(int a) const {
    return factors_[static_cast<size_t>(a)].kind == FactorKind::TorusCircle;
  }
  int warped_count() const { return m_warped_; }
  int torus_count() const { return static_cast<int>(ker_coords_.size()) - m_warped_; }

  // -- metric (diagonal) --
  double h_diag(int a, const Vec& p) const;
  double h_diag_partial(int c, int a, const Vec& p) const;
  double h_diag_partial2(int c, int d, int a, const Vec& p) const;
  Mat h(const Vec& p) const;
  Mat h_inv(const Vec& p) const;

  // -- eta = rho(u) du --
  double rho(const Vec& p) const;
  double rho_d1(const Vec& p) const;
  double rho_d2(const Vec& p) const;
  const ScalarField& rho_field() const { return rho_; }
  Vec eta_components(const Vec& p) const;
  Vec eta_sharp(const Vec& p) const;
  double eta_norm2(const Vec& p) const;  // |eta^sharp|^2_h
  OneForm eta_one_form() const;

  // -- connection --
  /// Gamma^k_ij of h. Throws std::domain_error on non-finite or zero warp.
  Tensor3 christoffel(const Vec& p) const;
  /// d_l Gamma^k_ij, analytic.
  double christoffel_partial(int l, int k, int i, int j, const Vec& p) const;
  /// Lowered curvature R_{abcd} = h(R(d_a,d_b)d_c, d_d) of h.
  Tensor4 riemann(const Vec& p) const;
  Mat ricci(const Vec& p) const;

  // -- calculus --
  Vec sharp(const Vec& alpha, const Vec& p) const;
  Vec flat_of(const Vec& X, const Vec& p) const;
  Vec grad(const ScalarField& f, const Vec& p) const;
  /// div of a vector field given component fields.
  double divergence_vec(const std::vector<ScalarField>& X, const Vec& p) const;
  /// Tensor divergence of a 1-form: sum_k eps_k (nabla_{E_k} alpha)(E_k).
  double divergence_form(const OneForm& alpha, const Vec& p) const;
  double laplacian(const ScalarField& f, const Vec& p) const;
  Mat hessian(const ScalarField& f, const Vec& p) const;
  /// (nabla_a alpha)_b for a 1-form.
  Mat covariant_deriv_form(const OneForm& alpha, const Vec& p) const;
  /// (nabla_a Psi)_{bc} for a 2-form.
  double covariant_deriv_two_form(const TwoForm& psi, int a, int b, int c, const Vec& p) const;

  // -- distinguished objects --
  /// (nabla eta)_{ab}; throws std::runtime_error if the result is asymmetric
  /// beyond tol (eta not closed or numerics broken).
  Mat nabla_eta(const Vec& p, double tol = 1e-9) const;
  /// nabla eta = theta (x) eta for some 1-form theta?
  bool eta_recurrent(const Vec& p, Vec* theta = nullptr, double tol = 1e-9) const;
  /// Action matrix of psi: h(psi(X), Y) = Psi(X, Y); columns act on vectors.
  Mat psi_matrix(const TwoForm& Psi, const Vec& p) const;
  /// psi restricted/projected to ker eta in the orthonormal screen frame:
  /// entries M_{ji} with psi(E_i) = sum_j M_{ji} E_j (+ eta-direction part).
  Mat psi_screen_matrix(const TwoForm& Psi, const Vec& p) const;

  BaseFrame frame(const Vec& p) const;

  // -- invariant checks (sampled) --
  /// max |d eta| over points.
  double check_eta_closed(const std::vector<Vec>& pts) const;
  /// min |eta^sharp|_h over points.
  double check_eta_nonvanishing(const std::vector<Vec>& pts) const;
  /// max |nabla h| over points.
  double check_metricity(const std::vector<Vec>& pts) const;

  /// Deterministic sample points: torus coords in [0, 2pi), warped in [-1.5, 1.5].
  std::vector<Vec> sample_points(int count, unsigned seed) const;

 private:
  std::vector<Factor> factors_;
  int circle_index_;
  ScalarField rho_;              // 1-variable
  std::vector<int> ker_coords_;
  int m_warped_ = 0;

  double warp_at(int a, const Vec& p) const;
};

}  // namespace lorbundle
