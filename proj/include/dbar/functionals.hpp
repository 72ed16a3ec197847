#pragma once

// Energies and Euler-Lagrange tensors of a discretized map:
//   E  = ½ ∫ |Tf|²,         K = -½ ∫ ⟨ω_M, f*ω_N⟩
//   E± = E ± K,             E_a = E + aK
//   τ^i  = g^{αβ}(f^i_{αβ} - f^i_γ Γ^γ_{αβ} + f^j_α f^k_β Γ^i_{jk})
//   2A^i = (d*ω_M)_α f^j_β ω_{lj} g^{αβ} h^{li}
//          + ω_{αβ} f^j_γ f^k_δ (dω_N)_{ljk} g^{αγ} g^{βδ} h^{li}
//   τ₊ = τ + A,             τ_a = τ + aA
// Sources here are surfaces, so the d*ω_M term of A is identically zero and
// is skipped. E₊ is accumulated twice, as E + K and directly from
// ¼|Tf + J_N Tf J_M|²; the two routes agreeing is a standing consistency
// check on the sign conventions.

#include <algorithm>
#include <limits>

#include "dbar/grid.hpp"

namespace dbar {

struct EnergyReport {
  double E = 0, K = 0, E_plus = 0, E_minus = 0, E_a = 0;
  double sup_dTf = 0;
  double a = 1.0;
  double e_plus_direct = 0;  // second route, ¼∫|Tf + J_N Tf J_M|²
  bool finite = true;
};

namespace detail {

struct SourceFrame {
  Mat g, ginv, omega;
  double sqg;
};

inline SourceFrame source_frame(const Model& src, const Vec& p) {
  SourceFrame fr;
  fr.g = src.geom.metric_at(p);
  fr.ginv = inverse(fr.g);
  fr.omega = fundamental_form(src.geom, p);
  fr.sqg = std::sqrt(det(fr.g));
  return fr;
}

// ⟨u, w⟩ for sections of T*M ⊗ f⁻¹TN, u and w given as dim×2 matrices
inline double section_inner(const Mat& u, const Mat& w, const Mat& ginv,
                            const Mat& h) {
  double s = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      if (ginv[a][b] == 0.0) continue;
      double hij = 0;
      for (int i = 0; i < u.rows; ++i)
        for (int j = 0; j < u.rows; ++j) hij += h[i][j] * u[i][a] * w[j][b];
      s += ginv[a][b] * hij;
    }
  return s;
}

// (J_N u J_M)^i_α = J_N^i_j u^j_β J_M^β_α
inline Mat conjugate_by_J(const Mat& u, const Mat& JN, const Mat& JM) {
  const int d = u.rows;
  Mat r(d, 2);
  for (int i = 0; i < d; ++i)
    for (int al = 0; al < 2; ++al) {
      double s = 0;
      for (int j = 0; j < d; ++j)
        for (int be = 0; be < 2; ++be)
          s += JN[i][j] * u[j][be] * JM[be][al];
      r[i][al] = s;
    }
  return r;
}

struct KahanSum {
  double s = 0, c = 0;
  void add(double x) {
    const double t = s + x;
    if (std::fabs(s) >= std::fabs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

}  // namespace detail

inline Mat tangent_at(const MapField& f, int is, int ith) {
  if (f.analytic_tangent) return f.analytic_tangent(is, ith);
  return derivative_at(f, is, ith);
}

inline EnergyReport energy(const MapField& f, double a) {
  const Model& src = *f.source;
  const Model& tgt = *f.target;
  const double dA = f.grid.ds() * f.grid.dtheta();
  detail::KahanSum accE, accK, accP;
  double sup2 = 0;
  bool finite = true;

  detail::SourceFrame fr0;
  Mat JM0;
  const bool const_src = src.constant_geometry;
  if (const_src) {
    fr0 = detail::source_frame(src, Vec{0.0, 0.0});
    JM0 = src.geom.J_at(Vec{0.0, 0.0});
  }
  const bool const_tgt = tgt.constant_geometry;
  Mat h0, JN0, wN0;
  if (const_tgt) {
    const Vec y0(tgt.dim);
    h0 = tgt.geom.metric_at(y0);
    JN0 = tgt.geom.J_at(y0);
    wN0 = fundamental_form(tgt.geom, y0);
  }

  for (int is = 0; is < f.grid.n_s; ++is)
    for (int ith = 0; ith < f.grid.n_theta; ++ith) {
      const Vec p = f.position(is, ith);
      const detail::SourceFrame fr =
          const_src ? fr0 : detail::source_frame(src, p);
      const Mat JM = const_src ? JM0 : src.geom.J_at(p);
      const Vec y = f.node(is, ith);
      const Mat h = const_tgt ? h0 : tgt.geom.metric_at(y);
      const Mat JN = const_tgt ? JN0 : tgt.geom.J_at(y);
      const Mat wN = const_tgt ? wN0 : fundamental_form(tgt.geom, y);
      const Mat Tf = tangent_at(f, is, ith);

      const double tf2 = detail::section_inner(Tf, Tf, fr.ginv, h);
      sup2 = std::max(sup2, tf2);

      Mat pull(2, 2);
      for (int al = 0; al < 2; ++al)
        for (int be = 0; be < 2; ++be) {
          double s = 0;
          for (int i = 0; i < tgt.dim; ++i)
            for (int j = 0; j < tgt.dim; ++j)
              s += Tf[i][al] * Tf[j][be] * wN[i][j];
          pull[al][be] = s;
        }
      const double kdens = -0.5 * two_form_inner(fr.omega, pull, fr.ginv);

      const Mat JTfJ = detail::conjugate_by_J(Tf, JN, JM);
      Mat plus(tgt.dim, 2);
      for (int i = 0; i < tgt.dim; ++i)
        for (int al = 0; al < 2; ++al) plus[i][al] = Tf[i][al] + JTfJ[i][al];
      const double pdens = 0.25 * detail::section_inner(plus, plus, fr.ginv, h);

      const double w = fr.sqg * dA;
      if (!std::isfinite(tf2) || !std::isfinite(kdens) || !std::isfinite(pdens))
        finite = false;
      accE.add(0.5 * tf2 * w);
      accK.add(kdens * w);
      accP.add(pdens * w);
    }

  EnergyReport r;
  r.a = a;
  r.finite = finite;
  if (!finite) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.E = r.K = r.E_plus = r.E_minus = r.E_a = r.sup_dTf = r.e_plus_direct = nan;
    return r;
  }
  r.E = accE.value();
  r.K = accK.value();
  r.E_plus = r.E + r.K;
  r.E_minus = r.E - r.K;
  r.E_a = r.E + a * r.K;
  r.e_plus_direct = accP.value();
  r.sup_dTf = std::sqrt(sup2);
  return r;
}

// ---------------------------------------------------------------------------

struct DecompositionReport {
  double orthogonality = 0;   // max |⟨Tf+JTfJ, Tf-JTfJ⟩| over nodes
  double norm_identity = 0;   // max |¼|Tf+JTfJ|² - ½|Tf|² - ½⟨Tf,JTfJ⟩|
  double sup_plus_part = 0;   // max |Tf + JTfJ|
  double sup_minus_part = 0;  // max |Tf - JTfJ|
};

inline DecompositionReport decomposition_check(const MapField& f) {
  const Model& src = *f.source;
  const Model& tgt = *f.target;
  DecompositionReport rep;
  for (int is = 0; is < f.grid.n_s; ++is)
    for (int ith = 0; ith < f.grid.n_theta; ++ith) {
      const Vec p = f.position(is, ith);
      const detail::SourceFrame fr = detail::source_frame(src, p);
      const Mat JM = src.geom.J_at(p);
      const Vec y = f.node(is, ith);
      const Mat h = tgt.geom.metric_at(y);
      const Mat JN = tgt.geom.J_at(y);
      const Mat Tf = tangent_at(f, is, ith);
      const Mat JTfJ = detail::conjugate_by_J(Tf, JN, JM);
      Mat up(tgt.dim, 2), um(tgt.dim, 2);
      for (int i = 0; i < tgt.dim; ++i)
        for (int al = 0; al < 2; ++al) {
          up[i][al] = Tf[i][al] + JTfJ[i][al];
          um[i][al] = Tf[i][al] - JTfJ[i][al];
        }
      const double orth = detail::section_inner(up, um, fr.ginv, h);
      const double tf2 = detail::section_inner(Tf, Tf, fr.ginv, h);
      const double cross = detail::section_inner(Tf, JTfJ, fr.ginv, h);
      const double plus2 = detail::section_inner(up, up, fr.ginv, h);
      const double minus2 = detail::section_inner(um, um, fr.ginv, h);
      rep.orthogonality = std::max(rep.orthogonality, std::fabs(orth));
      rep.norm_identity = std::max(
          rep.norm_identity, std::fabs(0.25 * plus2 - 0.5 * tf2 - 0.5 * cross));
      rep.sup_plus_part = std::max(rep.sup_plus_part, std::sqrt(std::max(0.0, plus2)));
      rep.sup_minus_part =
          std::max(rep.sup_minus_part, std::sqrt(std::max(0.0, minus2)));
    }
  return rep;
}

// ---------------------------------------------------------------------------

struct TensionField {
  int n_s = 0, n_theta = 0, dim = 0;
  double a = 1.0;
  std::vector<double> tau, A;  // node-major target tangent components
  double tau_l2 = 0, tau_sup = 0;
  double A_l2 = 0, A_sup = 0;
  double tau_plus_l2 = 0, tau_plus_sup = 0;
  double tau_a_l2 = 0, tau_a_sup = 0;
  double sup_dTf = 0;  // byproduct for CFL and blow-up monitors
  int argmax_is = 0, argmax_ith = 0;

  Vec tau_at(int is, int ith) const {
    Vec r(dim);
    const double* p = tau.data() + (static_cast<std::size_t>(is) * n_theta + ith) * dim;
    for (int c = 0; c < dim; ++c) r[c] = p[c];
    return r;
  }
  Vec A_at(int is, int ith) const {
    Vec r(dim);
    const double* p = A.data() + (static_cast<std::size_t>(is) * n_theta + ith) * dim;
    for (int c = 0; c < dim; ++c) r[c] = p[c];
    return r;
  }
  Vec tau_a_at(int is, int ith, double a) const {
    Vec r = tau_at(is, ith);
    const Vec aa = A_at(is, ith);
    for (int c = 0; c < dim; ++c) r[c] += a * aa[c];
    return r;
  }
};

inline TensionField tension(const MapField& f, double a = 1.0) {
  const Model& src = *f.source;
  const Model& tgt = *f.target;
  const int d = tgt.dim;
  const int ns = f.grid.n_s, nt = f.grid.n_theta;
  TensionField out;
  out.n_s = ns;
  out.n_theta = nt;
  out.dim = d;
  out.a = a;
  out.tau.assign(f.values.size(), 0.0);
  out.A.assign(f.values.size(), 0.0);

  const bool const_src = src.constant_geometry;
  detail::SourceFrame fr0;
  Ten3 gamma_src0(2);
  if (const_src) fr0 = detail::source_frame(src, Vec{0.0, 0.0});
  const bool const_tgt = tgt.constant_geometry;
  Mat h0;
  if (const_tgt) h0 = tgt.geom.metric_at(Vec(d));
  const bool need_A = !tgt.kahler;

  // per-node metric norms, filled in the parallel loop, reduced serially
  std::vector<double> n_tau(static_cast<std::size_t>(ns) * nt);
  std::vector<double> n_A(n_tau.size()), n_tp(n_tau.size()), n_ta(n_tau.size());
  std::vector<double> n_Tf(n_tau.size()), wq(n_tau.size());

  int bad_is = -1, bad_ith = -1;
  std::string bad_msg;
#pragma omp parallel for schedule(static)
  for (int is = 0; is < ns; ++is) {
    for (int ith = 0; ith < nt; ++ith) {
      try {
      const std::size_t node = static_cast<std::size_t>(is) * nt + ith;
      const Vec p = f.position(is, ith);
      const detail::SourceFrame fr =
          const_src ? fr0 : detail::source_frame(src, p);
      const Ten3 gamma_src =
          const_src ? gamma_src0 : christoffel(src.geom, p);
      const Vec y = f.node(is, ith);

      const Mat h = const_tgt ? h0 : tgt.geom.metric_at(y);
      Ten3 dh(d);
      if (!const_tgt) dh = tgt.geom.metric_d1(y);
      const Mat hinv = inverse(h);

      // Γ^i_{jk} of the target from the shared first jet
      Ten3 gamma(d);
      if (!const_tgt)
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            for (int k = j; k < d; ++k) {
              double s = 0;
              for (int l = 0; l < d; ++l)
                s += hinv[i][l] * (dh(l, j, k) + dh(l, k, j) - dh(j, k, l));
              gamma(i, j, k) = 0.5 * s;
              gamma(i, k, j) = gamma(i, j, k);
            }

      double nbr[3][3][kMaxDim];
      f.gather9(is, ith, nbr);
      const double ds = f.grid.ds(), dth = f.grid.dtheta();
      Mat Tf(d, 2), f2(d, 2), fst(d, 1);
      for (int c = 0; c < d; ++c) {
        Tf[c][0] = (nbr[2][1][c] - nbr[0][1][c]) / (2 * ds);
        Tf[c][1] = (nbr[1][2][c] - nbr[1][0][c]) / (2 * dth);
        f2[c][0] = (nbr[2][1][c] - 2 * nbr[1][1][c] + nbr[0][1][c]) / (ds * ds);
        f2[c][1] = (nbr[1][2][c] - 2 * nbr[1][1][c] + nbr[1][0][c]) / (dth * dth);
        fst[c][0] = (nbr[2][2][c] - nbr[2][0][c] - nbr[0][2][c] + nbr[0][0][c]) /
                    (4 * ds * dth);
      }

      double* tau_p = out.tau.data() + node * d;
      for (int i = 0; i < d; ++i) {
        double s = 0;
        for (int al = 0; al < 2; ++al)
          for (int be = 0; be < 2; ++be) {
            const double gab = fr.ginv[al][be];
            if (gab == 0.0) continue;
            double term = (al == be) ? f2[i][al] : fst[i][0];
            for (int ga = 0; ga < 2; ++ga)
              term -= Tf[i][ga] * gamma_src(ga, al, be);
            if (!const_tgt)
              for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k)
                  term += Tf[j][al] * Tf[k][be] * gamma(i, j, k);
            s += gab * term;
          }
        tau_p[i] = s;
      }

      double* A_p = out.A.data() + node * d;
      if (need_A) {
        const Mat J = tgt.geom.J_at(y);
        // ω_{lj,k} = J^m_{l,k} h_{mj} + J^m_l h_{mj,k}
        const Ten3 dJ = tgt.geom.J_jet_at(y);
        Ten3 dw(d);
        for (int l = 0; l < d; ++l)
          for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
              double s = 0;
              for (int m = 0; m < d; ++m)
                s += dJ(m, l, k) * h[m][j] + J[m][l] * dh(m, j, k);
              dw(l, j, k) = s;
            }
        // q^{γδ} = ω_{αβ} g^{αγ} g^{βδ} on the source
        Mat q(2, 2);
        for (int ga = 0; ga < 2; ++ga)
          for (int de = 0; de < 2; ++de) {
            double s = 0;
            for (int al = 0; al < 2; ++al)
              for (int be = 0; be < 2; ++be)
                s += fr.omega[al][be] * fr.ginv[al][ga] * fr.ginv[be][de];
            q[ga][de] = s;
          }
        // P^{jk} = q^{γδ} f^j_γ f^k_δ
        Mat P(d, d);
        for (int j = 0; j < d; ++j)
          for (int k = 0; k < d; ++k) {
            double s = 0;
            for (int ga = 0; ga < 2; ++ga)
              for (int de = 0; de < 2; ++de)
                s += q[ga][de] * Tf[j][ga] * Tf[k][de];
            P[j][k] = s;
          }
        for (int i = 0; i < d; ++i) {
          double s = 0;
          for (int l = 0; l < d; ++l) {
            double low = 0;
            for (int j = 0; j < d; ++j)
              for (int k = 0; k < d; ++k) {
                // (dω)_{ljk} = ω_{lj,k} + ω_{kl,j} + ω_{jk,l}
                low += P[j][k] * (dw(l, j, k) + dw(k, l, j) + dw(j, k, l));
              }
            s += hinv[l][i] * low;
          }
          A_p[i] = 0.5 * s;
        }
      }

      auto hnorm2 = [&](const double* w) {
        double s = 0;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) s += h[i][j] * w[i] * w[j];
        return s;
      };
      double tp[kMaxDim], ta[kMaxDim];
      for (int c = 0; c < d; ++c) {
        tp[c] = tau_p[c] + A_p[c];
        ta[c] = tau_p[c] + a * A_p[c];
      }
      n_tau[node] = hnorm2(tau_p);
      n_A[node] = hnorm2(A_p);
      n_tp[node] = hnorm2(tp);
      n_ta[node] = hnorm2(ta);
      n_Tf[node] = detail::section_inner(Tf, Tf, fr.ginv, h);
      wq[node] = fr.sqg;
      } catch (const std::exception& e) {
#pragma omp critical
        {
          bad_is = is;
          bad_ith = ith;
          bad_msg = e.what();
        }
      }
    }
  }
  if (bad_is >= 0) throw puncture_error(bad_msg, bad_is, bad_ith);

  // fixed-order reductions
  const double dA = f.grid.ds() * f.grid.dtheta();
  detail::KahanSum t2, a2, tp2, ta2;
  double sup_tf2 = -1;
  for (int is = 0; is < ns; ++is)
    for (int ith = 0; ith < nt; ++ith) {
      const std::size_t node = static_cast<std::size_t>(is) * nt + ith;
      t2.add(n_tau[node] * wq[node] * dA);
      a2.add(n_A[node] * wq[node] * dA);
      tp2.add(n_tp[node] * wq[node] * dA);
      ta2.add(n_ta[node] * wq[node] * dA);
      out.tau_sup = std::max(out.tau_sup, n_tau[node]);
      out.A_sup = std::max(out.A_sup, n_A[node]);
      out.tau_plus_sup = std::max(out.tau_plus_sup, n_tp[node]);
      out.tau_a_sup = std::max(out.tau_a_sup, n_ta[node]);
      if (n_Tf[node] > sup_tf2) {
        sup_tf2 = n_Tf[node];
        out.argmax_is = is;
        out.argmax_ith = ith;
      }
    }
  out.tau_sup = std::sqrt(std::max(0.0, out.tau_sup));
  out.A_sup = std::sqrt(std::max(0.0, out.A_sup));
  out.tau_plus_sup = std::sqrt(std::max(0.0, out.tau_plus_sup));
  out.tau_a_sup = std::sqrt(std::max(0.0, out.tau_a_sup));
  out.sup_dTf = std::sqrt(std::max(0.0, sup_tf2));
  out.tau_l2 = std::sqrt(std::max(0.0, t2.value()));
  out.A_l2 = std::sqrt(std::max(0.0, a2.value()));
  out.tau_plus_l2 = std::sqrt(std::max(0.0, tp2.value()));
  out.tau_a_l2 = std::sqrt(std::max(0.0, ta2.value()));
  return out;
}

// ---------------------------------------------------------------------------

// ∫⟨τ₊, v⟩ dV
inline double tension_pairing(const MapField& f, const TensionField& tf,
                              const VariationField& v) {
  std::vector<double> dens(static_cast<std::size_t>(f.grid.nodes()));
  for (int is = 0; is < f.grid.n_s; ++is)
    for (int ith = 0; ith < f.grid.n_theta; ++ith) {
      const Mat h = f.target->geom.metric_at(f.node(is, ith));
      const Vec tp = tf.tau_a_at(is, ith, 1.0);
      const Vec vv = v.node(f, is, ith);
      double s = 0;
      for (int i = 0; i < f.dim(); ++i)
        for (int j = 0; j < f.dim(); ++j) s += h[i][j] * tp[i] * vv[j];
      dens[static_cast<std::size_t>(is) * f.grid.n_theta + ith] = s;
    }
  return integrate(dens, *f.source, f.grid);
}

// Signed residual (E₊(f ⊕ εv) - E₊(f ⊖ εv))/(2ε) + ∫⟨τ₊, v⟩. The ε² and Δ²
// parts are separately observable: the Δ² part is the ε → 0 limit.
inline double first_variation_residual(const MapField& f,
                                       const VariationField& v, double eps) {
  if (!(eps >= 1e-6 && eps <= 1e-2))
    throw config_error("eps", "step must lie in [1e-6, 1e-2]");
  const EnergyReport ep = energy(perturb(f, v, eps), 1.0);
  const EnergyReport em = energy(perturb(f, v, -eps), 1.0);
  const double fd = (ep.e_plus_direct - em.e_plus_direct) / (2.0 * eps);
  return fd + tension_pairing(f, tension(f), v);
}

// |(E₊(f ⊕ εv) - E₊(f ⊖ εv))/(2ε) + ∫⟨τ₊, v⟩| — O(ε²) + O(Δ²).
inline double first_variation_check(const MapField& f, const VariationField& v,
                                    double eps) {
  return std::fabs(first_variation_residual(f, v, eps));
}

// Residual of d/dt f*ω = d f*ι_v ω + f*ι_v dω, both sides discretized with
// the same stencils. Max over nodes and components.
inline double cartan_check(const MapField& f, const VariationField& v,
                           const std::function<Mat(const Vec&)>& omega,
                           const std::function<Ten3(const Vec&)>& domega,
                           double eps) {
  if (!(eps >= 1e-6 && eps <= 1e-2))
    throw config_error("eps", "step must lie in [1e-6, 1e-2]");
  const MapField fp = perturb(f, v, eps), fm = perturb(f, v, -eps);
  const std::vector<Mat> pp = pullback_two_form(fp, omega);
  const std::vector<Mat> pm = pullback_two_form(fm, omega);

  const int ns = f.grid.n_s, nt = f.grid.n_theta, d = f.dim();
  // λ_β = f^i_β v^j ω_{ji}, a strictly periodic grid one-form
  std::vector<double> lam(static_cast<std::size_t>(ns) * nt * 2);
  for (int is = 0; is < ns; ++is)
    for (int ith = 0; ith < nt; ++ith) {
      const Mat Tf = derivative_at(f, is, ith);
      const Vec vv = v.node(f, is, ith);
      const Mat w = omega(f.node(is, ith));
      for (int be = 0; be < 2; ++be) {
        double s = 0;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) s += Tf[i][be] * vv[j] * w[j][i];
        lam[(static_cast<std::size_t>(is) * nt + ith) * 2 + be] = s;
      }
    }
  auto lam_at = [&](int is, int ith, int be) {
    const int i = ((is % ns) + ns) % ns, j = ((ith % nt) + nt) % nt;
    return lam[(static_cast<std::size_t>(i) * nt + j) * 2 + be];
  };

  double resid = 0;
  for (int is = 0; is < ns; ++is)
    for (int ith = 0; ith < nt; ++ith) {
      const std::size_t n = static_cast<std::size_t>(is) * nt + ith;
      Mat lhs(2, 2);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          lhs[a][b] = (pp[n][a][b] - pm[n][a][b]) / (2.0 * eps);

      const double dls = (lam_at(is + 1, ith, 1) - lam_at(is - 1, ith, 1)) /
                         (2.0 * f.grid.ds());
      const double dlt = (lam_at(is, ith + 1, 0) - lam_at(is, ith - 1, 0)) /
                         (2.0 * f.grid.dtheta());
      Mat rhs(2, 2);
      rhs[0][1] = dls - dlt;
      rhs[1][0] = -rhs[0][1];

      const Mat Tf = derivative_at(f, is, ith);
      const Vec vv = v.node(f, is, ith);
      const Ten3 dw = domega(f.node(is, ith));
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          double s = 0;
          for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
              double ivdw = 0;
              for (int k = 0; k < d; ++k) ivdw += vv[k] * dw(k, i, j);
              s += Tf[i][a] * Tf[j][b] * ivdw;
            }
          rhs[a][b] += s;
        }
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          resid = std::max(resid, std::fabs(lhs[a][b] - rhs[a][b]));
    }
  return resid;
}

struct SecondVariation {
  double qform = 0;
  double tau_plus_sup = 0;  // criticality indicator for the caller
};

// Centered second difference of E₊ along the retraction through v — the
// discrete realization of ∫⟨Lv, v⟩ at a critical point.
inline SecondVariation second_variation_qform(const MapField& f,
                                              const VariationField& v,
                                              double eps) {
  if (!(eps >= 1e-6 && eps <= 1e-2))
    throw config_error("eps", "step must lie in [1e-6, 1e-2]");
  const double ep = energy(perturb(f, v, eps), 1.0).e_plus_direct;
  const double e0 = energy(f, 1.0).e_plus_direct;
  const double em = energy(perturb(f, v, -eps), 1.0).e_plus_direct;
  SecondVariation r;
  r.qform = (ep - 2.0 * e0 + em) / (eps * eps);
  r.tau_plus_sup = tension(f).tau_plus_sup;
  return r;
}

}  // namespace dbar
