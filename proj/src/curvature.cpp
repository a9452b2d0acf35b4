#include "lorbundle/curvature.hpp"

#include <cmath>
#include <stdexcept>

namespace lorbundle {

namespace {

constexpr int kU = 0;
constexpr int kV = 1;

struct BaseData {
  Vec bp;
  BaseFrame fr;
  Mat h;
  Mat ne;       // (nabla eta)_ab
  double n2;    // |eta^sharp|^2
  Vec eeta;     // E_eta
  Mat psi_m;    // Psi coordinate matrix
  Mat psi;      // endomorphism action matrix
};

BaseData base_data(const BundleConfig& cfg, const Vec& pt) {
  const ProductBase& base = cfg.base();
  BaseData d;
  d.bp = cfg.base_point(pt);
  d.fr = base.frame(d.bp);
  d.h = base.h(d.bp);
  d.ne = base.nabla_eta(d.bp);
  d.n2 = base.eta_norm2(d.bp);
  d.eeta = base.eta_sharp(d.bp) / d.n2;
  d.psi_m = cfg.Psi().matrix(d.bp);
  d.psi = base.psi_matrix(cfg.Psi(), d.bp);
  return d;
}

double bilinear(const Mat& A, const Vec& X, const Vec& Y) { return X.dot(A * Y); }

// (nabla eta (KN) nabla eta)(X, Y, Z, W)
double kn_nabla_eta(const Mat& A, const Vec& X, const Vec& Y, const Vec& Z, const Vec& W) {
  return 2.0 * (bilinear(A, X, Z) * bilinear(A, Y, W) - bilinear(A, X, W) * bilinear(A, Y, Z));
}

// (nabla_X Psi)(Y, Z) for base vectors
double nabla_psi(const BundleConfig& cfg, const Vec& bp, const Vec& X, const Vec& Y,
                 const Vec& Z) {
  const ProductBase& base = cfg.base();
  int d = base.dim();
  double s = 0.0;
  for (int a = 0; a < d; ++a) {
    if (X[a] == 0.0) continue;
    for (int b = 0; b < d; ++b) {
      if (Y[b] == 0.0) continue;
      for (int c = 0; c < d; ++c) {
        if (Z[c] == 0.0) continue;
        s += X[a] * Y[b] * Z[c] * base.covariant_deriv_two_form(cfg.Psi(), a, b, c, bp);
      }
    }
  }
  return s;
}

// bar of psi(X): project psi(X) to ker eta
Vec psi_bar(const BaseData& d, const ProductBase& base, const Vec& X) {
  Vec img = d.psi * X;
  Vec eta = base.eta_components(d.bp);
  double etaI = eta.dot(img);
  return img - etaI * d.eeta;
}

// base components of a chart vector (dpi: drop the v slot)
Vec dpi(const BundleConfig& cfg, const Vec& W) {
  Vec out = Vec::Zero(cfg.base().dim());
  for (int a = 0; a < cfg.base().dim(); ++a) out[a] = W[cfg.chart_of_base(a)];
  return out;
}

// pi*Psi(W, V) for chart vectors
double pullback_psi(const BundleConfig& cfg, const BaseData& d, const Vec& W, const Vec& V) {
  return dpi(cfg, W).dot(d.psi_m * dpi(cfg, V));
}

// d_c [ pi*Psi(Yfield, Zfield) ](pt) summed against a chart vector X, where
// Yfield, Zfield are adapted-frame fields. Uses analytic frame partials.
double frame_deriv_pullback_psi(const BundleConfig& cfg, const BaseData& d, const Vec& pt,
                                FrameVec Xlab, FrameVec Ylab, FrameVec Zlab) {
  const ProductBase& base = cfg.base();
  int bd = base.dim();
  Vec X = frame_vec(cfg, Xlab, pt);
  Vec Y = dpi(cfg, frame_vec(cfg, Ylab, pt));
  Vec Z = dpi(cfg, frame_vec(cfg, Zlab, pt));
  double s = 0.0;
  for (int c = 0; c < cfg.chart_dim(); ++c) {
    if (X[c] == 0.0) continue;
    int cb = cfg.base_of_chart(c);
    double term = 0.0;
    // dPsi part (only when c projects to a base coordinate)
    if (cb >= 0) {
      for (int a = 0; a < bd; ++a) {
        if (Y[a] == 0.0) continue;
        for (int b = 0; b < bd; ++b) {
          if (Z[b] == 0.0) continue;
          term += cfg.Psi().partial(cb, a, b, d.bp) * Y[a] * Z[b];
        }
      }
    }
    // frame-variation parts
    Vec dY = dpi(cfg, frame_vec_partial(cfg, Ylab, c, pt));
    Vec dZ = dpi(cfg, frame_vec_partial(cfg, Zlab, c, pt));
    term += dY.dot(d.psi_m * Z) + Y.dot(d.psi_m * dZ);
    s += X[c] * term;
  }
  return s;
}

// div_g(pi*Psi)(e_i) over the g-orthonormal frame. The e_+/e_- contributions
// cancel: pi*Psi(xi, .) = 0 and nabla xi is proportional to xi, so only the
// screen sum remains.
double div_g_pullback_psi(const BundleConfig& cfg, const BaseData& d, const Vec& pt, int i) {
  int n = cfg.n_screen();
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    FrameVec ej = FrameVec::screen(j), ei = FrameVec::screen(i);
    double t = frame_deriv_pullback_psi(cfg, d, pt, ej, ej, ei);
    Vec njj = cov_deriv_closed_form(cfg, ej, ej, pt);
    Vec nji = cov_deriv_closed_form(cfg, ej, ei, pt);
    Vec ejv = frame_vec(cfg, ej, pt);
    t -= pullback_psi(cfg, d, njj, frame_vec(cfg, ei, pt));
    t -= pullback_psi(cfg, d, ejv, nji);
    s += t;
  }
  return s;
}

// Psi(nabla_{E_i} eta^sharp, E_eta)
double psi_nabla_eta_sharp(const BundleConfig& cfg, const BaseData& d, int i) {
  const ProductBase& base = cfg.base();
  int bd = base.dim();
  int u = base.circle_coord();
  Vec Ei = d.fr.screen.col(i);
  // eta^sharp component field: X^u = rho(u) / h_uu with h_uu == 1 on the circle.
  Tensor3 G = base.christoffel(d.bp);
  Vec nab = Vec::Zero(bd);
  double rho_d1 = base.rho_d1(d.bp);
  for (int a = 0; a < bd; ++a) {
    if (Ei[a] == 0.0) continue;
    if (a == u) nab[u] += Ei[a] * rho_d1;
    for (int b = 0; b < bd; ++b) nab[b] += Ei[a] * G(b, a, u) * base.rho(d.bp);
  }
  return nab.dot(d.psi_m * d.eeta);
}

}  // namespace

double t_eta(const BundleConfig& cfg, const Vec& X, const Vec& Y, const Vec& pt) {
  BaseData d = base_data(cfg, pt);
  Vec Xb = dpi(cfg, X), Yb = dpi(cfg, Y);
  int n = cfg.n_screen();
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    Vec Ek = d.fr.screen.col(k);
    s += kn_nabla_eta(d.ne, Xb, Ek, Ek, Yb);
  }
  return s / d.n2;
}

RiemannClosedForm riemann_closed_form(const BundleConfig& cfg, const Vec& pt) {
  const ProductBase& base = cfg.base();
  BaseData d = base_data(cfg, pt);
  int n = cfg.n_screen();
  Tensor4 Rh = base.riemann(d.bp);

  auto rh = [&](const Vec& A, const Vec& B, const Vec& C, const Vec& E) {
    double s = 0.0;
    int bd = base.dim();
    for (int a = 0; a < bd; ++a) {
      if (A[a] == 0.0) continue;
      for (int b = 0; b < bd; ++b) {
        if (B[b] == 0.0) continue;
        for (int c = 0; c < bd; ++c) {
          if (C[c] == 0.0) continue;
          for (int e = 0; e < bd; ++e) {
            if (E[e] == 0.0) continue;
            s += A[a] * B[b] * C[c] * E[e] * Rh(a, b, c, e);
          }
        }
      }
    }
    return s;
  };

  RiemannClosedForm out;
  out.screen = Tensor4(n);
  out.i_pp_j = Mat::Zero(n, n);
  out.ijk_p = Tensor3(n);
  out.i_pp_xi = Vec::Zero(n);

  std::vector<Vec> E(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) E[static_cast<size_t>(i)] = d.fr.screen.col(i);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          out.screen(i, j, k, l) =
              rh(E[static_cast<size_t>(i)], E[static_cast<size_t>(j)], E[static_cast<size_t>(k)],
                 E[static_cast<size_t>(l)]) +
              kn_nabla_eta(d.ne, E[static_cast<size_t>(i)], E[static_cast<size_t>(j)],
                           E[static_cast<size_t>(k)], E[static_cast<size_t>(l)]) /
                  d.n2;

  // a(X) = Psi(X, E_eta), b(X) = (nabla eta)(E_eta, X)
  auto a_of = [&](const Vec& X) { return X.dot(d.psi_m * d.eeta); };
  auto b_of = [&](const Vec& X) { return bilinear(d.ne, d.eeta, X); };

  for (int i = 0; i < n; ++i) {
    const Vec& Ei = E[static_cast<size_t>(i)];
    for (int j = 0; j < n; ++j) {
      const Vec& Ej = E[static_cast<size_t>(j)];
      double v = rh(Ei, d.eeta, d.eeta, Ej) +
                 kn_nabla_eta(d.ne, Ei, d.eeta, d.eeta, Ej) / d.n2;
      v += a_of(Ei) * b_of(Ej) + a_of(Ej) * b_of(Ei);
      v += nabla_psi(cfg, d.bp, Ei, d.eeta, Ej) + nabla_psi(cfg, d.bp, Ej, d.eeta, Ei);
      Vec pbi = psi_bar(d, base, Ei), pbj = psi_bar(d, base, Ej);
      v += pbi.dot(d.h * pbj);
      v -= 0.5 * hessian_g_frame(cfg, FrameVec::screen(i), FrameVec::screen(j), pt);
      out.i_pp_j(i, j) = v;
    }
    out.i_pp_xi[i] = -0.5 * hessian_g_frame(cfg, FrameVec::screen(i), FrameVec::xi(), pt);
  }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Vec &Ei = E[static_cast<size_t>(i)], &Ej = E[static_cast<size_t>(j)],
                  &Ek = E[static_cast<size_t>(k)];
        double v = rh(Ei, Ej, Ek, d.eeta) + kn_nabla_eta(d.ne, Ei, Ej, Ek, d.eeta) / d.n2;
        v += a_of(Ei) * bilinear(d.ne, Ek, Ej) - a_of(Ej) * bilinear(d.ne, Ek, Ei);
        v += nabla_psi(cfg, d.bp, Ek, Ei, Ej);
        out.ijk_p(i, j, k) = v;
      }

  out.p_xi_xi_p = -0.5 * hessian_g_frame(cfg, FrameVec::xi(), FrameVec::xi(), pt);
  return out;
}

RicciClosedForm ricci_closed_form(const BundleConfig& cfg, const Vec& pt) {
  const ProductBase& base = cfg.base();
  BaseData d = base_data(cfg, pt);
  int n = cfg.n_screen();
  Mat Rich = base.ricci(d.bp);
  AdaptedFrame afr = frame_at(cfg, pt);

  RicciClosedForm out;
  out.ij = Mat::Zero(n, n);
  out.i_p = Vec::Zero(n);

  std::vector<Vec> E(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) E[static_cast<size_t>(i)] = d.fr.screen.col(i);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.ij(i, j) = bilinear(Rich, E[static_cast<size_t>(i)], E[static_cast<size_t>(j)]) +
                     t_eta(cfg, afr.screen.col(i), afr.screen.col(j), pt);

  double xif = -cfg.f().partial(kV, pt);

  for (int i = 0; i < n; ++i) {
    const Vec& Ei = E[static_cast<size_t>(i)];
    double v = bilinear(Rich, Ei, d.eeta) + t_eta(cfg, afr.screen.col(i), afr.e_plus, pt);
    v += div_g_pullback_psi(cfg, d, pt, i);
    // Psi(e_i, zeta) div_g(pi* eta): the divergence vanishes identically
    // (pi* eta = -g(xi,.) is null and recurrent), so no term is added.
    v -= psi_nabla_eta_sharp(cfg, d, i);
    v -= 0.5 * hessian_g_frame(cfg, FrameVec::screen(i), FrameVec::xi(), pt);
    out.i_p[i] = v;
  }

  // Ric_++
  double v = bilinear(Rich, d.eeta, d.eeta) + t_eta(cfg, afr.e_plus, afr.e_plus, pt);
  // 2 trace_h[Psi(., E_eta) (.) (nabla eta)(E_eta)]
  double tr = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vec& Ek = E[static_cast<size_t>(k)];
    tr += Ek.dot(d.psi_m * d.eeta) * bilinear(d.ne, d.eeta, Ek);
  }
  {
    Vec Ehat = d.eeta * std::sqrt(d.n2);  // unit vector along eta
    tr += Ehat.dot(d.psi_m * d.eeta) * bilinear(d.ne, d.eeta, Ehat);
  }
  v += 2.0 * tr;
  // -2 (div_h Psi)(E_eta)
  double divPsi = 0.0;
  for (int k = 0; k < n; ++k)
    divPsi += nabla_psi(cfg, d.bp, E[static_cast<size_t>(k)], E[static_cast<size_t>(k)], d.eeta);
  {
    Vec Ehat = d.eeta * std::sqrt(d.n2);
    divPsi += nabla_psi(cfg, d.bp, Ehat, Ehat, d.eeta);
  }
  v -= 2.0 * divPsi;
  // + |psi_bar|^2 (squared frame norm)
  double psin = 0.0;
  for (int k = 0; k < n; ++k) {
    Vec pb = psi_bar(d, base, E[static_cast<size_t>(k)]);
    psin += pb.dot(d.h * pb);
  }
  v += psin;
  // -1/2 Delta_g f - xi(f)(1/2 xi(f) + 1)
  double lap = 0.0;
  for (int k = 0; k < n; ++k)
    lap += hessian_g_frame(cfg, FrameVec::screen(k), FrameVec::screen(k), pt);
  lap -= 2.0 * hessian_g_frame(cfg, FrameVec::e_plus(), FrameVec::xi(), pt);
  lap -= hessian_g_frame(cfg, FrameVec::xi(), FrameVec::xi(), pt);
  v -= 0.5 * lap;
  v -= xif * (0.5 * xif + 1.0);
  out.pp = v;

  out.xi_p = -0.5 * hessian_g_frame(cfg, FrameVec::xi(), FrameVec::xi(), pt);
  return out;
}

// ---------------------------------------------------------------------------
// Brute force
// ---------------------------------------------------------------------------

Tensor4 riemann_brute_force(const BundleConfig& cfg, const Vec& pt) {
  int d = cfg.chart_dim();
  Tensor3 G = christoffel_g(cfg, pt);
  Tensor4 dG = christoffel_g_partials(cfg, pt);
  Mat g = cfg.metric().components(pt);
  Tensor4 out(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      if (b == a) continue;
      for (int c = 0; c < d; ++c) {
        for (int e = 0; e < d; ++e) {
          // R(d_a, d_b)d_c, upper index e
          double r = dG(a, e, b, c) - dG(b, e, a, c);
          for (int f = 0; f < d; ++f) r += G(e, a, f) * G(f, b, c) - G(e, b, f) * G(f, a, c);
          for (int w = 0; w < d; ++w)
            if (g(e, w) != 0.0) out(a, b, c, w) += r * g(e, w);
        }
      }
    }
  return out;
}

Mat ricci_brute_force(const BundleConfig& cfg, const Vec& pt) {
  int d = cfg.chart_dim();
  Tensor4 R = riemann_brute_force(cfg, pt);
  Mat gi = cfg.metric().inverse(pt);
  Mat ric = Mat::Zero(d, d);
  for (int y = 0; y < d; ++y)
    for (int z = 0; z < d; ++z) {
      double s = 0.0;
      for (int a = 0; a < d; ++a)
        for (int e = 0; e < d; ++e)
          if (gi(a, e) != 0.0) s += gi(a, e) * R(a, y, z, e);
      ric(y, z) = s;
    }
  return ric;
}

double contract4(const Tensor4& R, const Vec& A, const Vec& B, const Vec& C, const Vec& D) {
  double s = 0.0;
  int d = R.d;
  for (int a = 0; a < d; ++a) {
    if (A[a] == 0.0) continue;
    for (int b = 0; b < d; ++b) {
      if (B[b] == 0.0) continue;
      for (int c = 0; c < d; ++c) {
        if (C[c] == 0.0) continue;
        for (int e = 0; e < d; ++e) {
          if (D[e] == 0.0) continue;
          s += A[a] * B[b] * C[c] * D[e] * R(a, b, c, e);
        }
      }
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

namespace {

double rel_gap(double closed, double brute) {
  return std::abs(closed - brute) / std::max(std::abs(brute), 1e-3);
}

}  // namespace

CurvatureReport curvature_report(const BundleConfig& cfg, const Vec& pt) {
  CurvatureReport rep;
  rep.point = pt;
  rep.closed = riemann_closed_form(cfg, pt);
  rep.ricci_closed = ricci_closed_form(cfg, pt);

  int n = cfg.n_screen();
  AdaptedFrame fr = frame_at(cfg, pt);
  Tensor4 R = riemann_brute_force(cfg, pt);
  Mat ric = ricci_brute_force(cfg, pt);

  // frame basis: 0 = xi, 1..n = screen, n+1 = e_+
  int m = n + 2;
  std::vector<Vec> F(static_cast<size_t>(m));
  F[0] = fr.xi;
  for (int i = 0; i < n; ++i) F[static_cast<size_t>(1 + i)] = fr.screen.col(i);
  F[static_cast<size_t>(n + 1)] = fr.e_plus;
  auto kind = [&](int a) { return a == 0 ? 'x' : (a == n + 1 ? '+' : 's'); };

  // listed families up to pair symmetries, identified by the multiset of the
  // two index pairs
  auto listed = [&](int a, int b, int c, int e) {
    auto pair_key = [&](int p, int q) {
      char kp = kind(p), kq = kind(q);
      if (kp > kq) std::swap(kp, kq);
      return std::string{kp, kq};
    };
    std::string p1 = pair_key(a, b), p2 = pair_key(c, e);
    if (p1 > p2) std::swap(p1, p2);
    // screen-screen pairs
    if (p1 == "ss" && p2 == "ss") return true;       // R_{ijkl}
    if (p1 == "+s" && p2 == "+s") return true;       // R_{i++j}
    if (p1 == "ss" && p2 == "+s") return true;       // R_{ijk+}
    if (p1 == "+s" && p2 == "+x") return true;       // R_{i++xi}
    if (p1 == "+x" && p2 == "+x") return true;       // R_{+xi xi +}
    return false;
  };

  double max_disc = 0.0, unlisted = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int e = 0; e < m; ++e) {
          double brute = contract4(R, F[static_cast<size_t>(a)], F[static_cast<size_t>(b)],
                                   F[static_cast<size_t>(c)], F[static_cast<size_t>(e)]);
          if (!listed(a, b, c, e)) {
            unlisted = std::max(unlisted, std::abs(brute));
          }
        }
  // closed-vs-brute on the listed representatives
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      max_disc = std::max(
          max_disc, rel_gap(rep.closed.i_pp_j(i, j),
                            contract4(R, fr.screen.col(i), fr.e_plus, fr.e_plus, fr.screen.col(j))));
      for (int k = 0; k < n; ++k) {
        max_disc = std::max(
            max_disc,
            rel_gap(rep.closed.ijk_p(i, j, k),
                    contract4(R, fr.screen.col(i), fr.screen.col(j), fr.screen.col(k), fr.e_plus)));
        for (int l = 0; l < n; ++l)
          max_disc = std::max(max_disc, rel_gap(rep.closed.screen(i, j, k, l),
                                                contract4(R, fr.screen.col(i), fr.screen.col(j),
                                                          fr.screen.col(k), fr.screen.col(l))));
      }
    }
  for (int i = 0; i < n; ++i)
    max_disc = std::max(max_disc, rel_gap(rep.closed.i_pp_xi[i],
                                          contract4(R, fr.screen.col(i), fr.e_plus, fr.e_plus,
                                                    fr.xi)));
  max_disc = std::max(max_disc,
                      rel_gap(rep.closed.p_xi_xi_p,
                              contract4(R, fr.e_plus, fr.xi, fr.xi, fr.e_plus)));
  rep.riemann_discrepancy = max_disc;
  rep.unlisted_riemann_sup = unlisted;

  // pair symmetries and first Bianchi on the brute-force tensor
  double sym = 0.0, bianchi = 0.0;
  int d = cfg.chart_dim();
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          sym = std::max(sym, std::abs(R(a, b, c, e) + R(b, a, c, e)));
          sym = std::max(sym, std::abs(R(a, b, c, e) + R(a, b, e, c)));
          sym = std::max(sym, std::abs(R(a, b, c, e) - R(c, e, a, b)));
          bianchi = std::max(bianchi,
                             std::abs(R(a, b, c, e) + R(b, c, a, e) + R(c, a, b, e)));
        }
  rep.pair_symmetry_residual = sym;
  rep.first_bianchi_residual = bianchi;

  // Ricci comparison
  double ric_disc = 0.0, ric_unlisted = 0.0;
  auto ric_frame = [&](const Vec& A, const Vec& B) { return A.dot(ric * B); };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      ric_disc = std::max(ric_disc, rel_gap(rep.ricci_closed.ij(i, j),
                                            ric_frame(fr.screen.col(i), fr.screen.col(j))));
    ric_disc = std::max(ric_disc,
                        rel_gap(rep.ricci_closed.i_p[i], ric_frame(fr.screen.col(i), fr.e_plus)));
    ric_unlisted = std::max(ric_unlisted, std::abs(ric_frame(fr.screen.col(i), fr.xi)));
  }
  ric_disc = std::max(ric_disc, rel_gap(rep.ricci_closed.pp, ric_frame(fr.e_plus, fr.e_plus)));
  ric_disc = std::max(ric_disc, rel_gap(rep.ricci_closed.xi_p, ric_frame(fr.xi, fr.e_plus)));
  ric_unlisted = std::max(ric_unlisted, std::abs(ric_frame(fr.xi, fr.xi)));
  rep.ricci_discrepancy = ric_disc;
  rep.unlisted_ricci_sup = ric_unlisted;

  Mat gi = cfg.metric().inverse(pt);
  rep.scalar_curvature = (gi * ric).trace();
  return rep;
}

// ---------------------------------------------------------------------------
// Einstein obstruction, Ricci-flat residual
// ---------------------------------------------------------------------------

double lambda_candidate(const BundleConfig& cfg, const Vec& pt) {
  return 0.5 * hessian_g_frame(cfg, FrameVec::xi(), FrameVec::xi(), pt);
}

EinsteinObstruction einstein_obstruction(const BundleConfig& cfg, int samples, unsigned seed) {
  double sup = 0.0;
  for (const auto& pt : cfg.sample_chart_points(samples, seed))
    sup = std::max(sup, std::abs(lambda_candidate(cfg, pt)));
  return {sup};
}

RicciFlatResidual ricci_flat_residual(const BundleConfig& cfg, int samples, unsigned seed) {
  const ProductBase& base = cfg.base();
  int bd = base.dim();
  int u = base.circle_coord();

  // shape: flat torus B (no warped lines), rho == 1, Psi = alpha ^ eta,
  // f independent of u and v
  if (base.warped_count() != 0)
    throw std::invalid_argument("ricci_flat_residual: shape error, base B must be a flat torus");
  double rv;
  if (!(base.rho_field().ast() && expr::is_constant(base.rho_field().ast(), &rv) && rv == 1.0))
    throw std::invalid_argument("ricci_flat_residual: shape error, eta must be du");
  for (int a = 0; a < bd; ++a)
    for (int b = a + 1; b < bd; ++b)
      if (a != u && b != u && cfg.Psi().has_component(a, b))
        throw std::invalid_argument("ricci_flat_residual: shape error, Psi must be alpha ^ eta");
  if (!cfg.fiber_constant() || cfg.f().depends_on(kU))
    throw std::invalid_argument("ricci_flat_residual: shape error, f must be f_B");

  // recover alpha_a = Psi_{a,u} and restrict f to the base
  OneForm alpha = OneForm::zero(bd);
  for (int a = 0; a < bd; ++a) {
    if (a == u || !cfg.Psi().has_component(a, u)) continue;
    const ScalarField& upper = cfg.Psi().comp_upper(std::min(a, u), std::max(a, u));
    if (upper.analytic()) {
      alpha.comp(a) = ScalarField(bd, a < u ? upper.ast() : expr::neg(upper.ast()));
    } else {
      alpha.comp(a) = ScalarField(bd, [cfgp = &cfg, a, u](std::span<const double> x) {
        Vec p(static_cast<Eigen::Index>(x.size()));
        for (size_t i = 0; i < x.size(); ++i) p[static_cast<Eigen::Index>(i)] = x[i];
        return cfgp->Psi().component(a, u, p);
      });
    }
  }

  ScalarField f_base(bd, [f = cfg.f(), cfgp = &cfg](std::span<const double> x) {
    Vec pt = Vec::Zero(cfgp->chart_dim());
    for (int a = 0; a < cfgp->base().dim(); ++a) pt[cfgp->chart_of_base(a)] = x[static_cast<size_t>(a)];
    return f.value(pt);
  });
  if (cfg.f().analytic()) {
    // remap chart AST back to base variables (v cannot occur)
    std::vector<int> map(static_cast<size_t>(cfg.chart_dim()), -1);
    for (int a = 0; a < bd; ++a) map[static_cast<size_t>(cfg.chart_of_base(a))] = a;
    f_base = ScalarField(bd, expr::remap_vars(cfg.f().ast(), map));
  }

  RicciFlatResidual out;
  out.alpha = alpha;
  out.sup = 0.0;
  for (const auto& p : base.sample_points(samples, seed)) {
    double r = base.laplacian(f_base, p) + 4.0 * base.divergence_form(alpha, p);
    out.samples.push_back(r);
    out.sup = std::max(out.sup, std::abs(r));
  }
  return out;
}

double sup_ricci_brute(const BundleConfig& cfg, int samples, unsigned seed) {
  double sup = 0.0;
  for (const auto& pt : cfg.sample_chart_points(samples, seed))
    sup = std::max(sup, ricci_brute_force(cfg, pt).cwiseAbs().maxCoeff());
  return sup;
}

}  // namespace lorbundle
