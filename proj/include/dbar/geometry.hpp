#pragma once

// Chart-functional representation of an almost Hermitian structure: a model
// supplies closed-form component functions g_{ij}, J^i_j and their jets on a
// single coordinate chart; everything else (ω, dω, d*ω, Γ, curvature) is
// assembled here.
//
// Index conventions, fixed once for the whole project:
//   ω(X,Y) = g(JX,Y), so ω_{ij} = J^l_i g_{lj}
//   (dω)_{ijk} = ω_{ij,k} + ω_{ki,j} + ω_{jk,i}
//   (d*ω)_j = -g^{ab} ∇_a ω_{bj}
//   ⟨a,b⟩ = a_{αβ} b_{γδ} g^{αγ} g^{βδ} on two-forms (no 1/2! factor, so
//   |ω|² = 2m in real dimension 2m)

#include <functional>

#include "dbar/linalg.hpp"

namespace dbar {

struct MetricJet {
  Ten3 d1;  // g_{ij,k}
  Ten4 d2;  // g_{ij,kl}
};

struct ChartGeometry {
  int dim = 0;
  std::function<Mat(const Vec&)> metric_at;        // g_{ij}
  std::function<MetricJet(const Vec&)> metric_jet_at;
  std::function<Mat(const Vec&)> J_at;             // J^i_j
  std::function<Ten3(const Vec&)> J_jet_at;        // J^i_{j,k}
  // optional first-jet-only fast path for inner loops
  std::function<Ten3(const Vec&)> metric_d1_at;

  Ten3 metric_d1(const Vec& p) const {
    return metric_d1_at ? metric_d1_at(p) : metric_jet_at(p).d1;
  }
};

struct CurvatureData {
  std::function<Ten4(const Vec&)> riemann_at;  // R^i_{jkl}
  std::function<Mat(const Vec&)> ricci_at;     // Rc_{jl} = R^i_{jil}
};

inline Mat metric_inverse(const ChartGeometry& geom, const Vec& p) {
  return inverse(geom.metric_at(p));
}

// Γ^i_{jk} = ½ g^{il}(g_{lj,k} + g_{lk,j} - g_{jk,l})
inline Ten3 christoffel(const ChartGeometry& geom, const Vec& p) {
  const int n = geom.dim;
  const Mat ginv = metric_inverse(geom, p);
  const Ten3 dg = geom.metric_jet_at(p).d1;
  Ten3 gamma(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        double s = 0;
        for (int l = 0; l < n; ++l)
          s += ginv[i][l] * (dg(l, j, k) + dg(l, k, j) - dg(j, k, l));
        gamma(i, j, k) = 0.5 * s;
        gamma(i, k, j) = gamma(i, j, k);
      }
  return gamma;
}

inline Mat fundamental_form(const ChartGeometry& geom, const Vec& p) {
  const int n = geom.dim;
  const Mat g = geom.metric_at(p), J = geom.J_at(p);
  Mat w(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0;
      for (int l = 0; l < n; ++l) s += J[l][i] * g[l][j];
      w[i][j] = s;
    }
  return w;
}

// ω_{ij,k} = J^l_{i,k} g_{lj} + J^l_i g_{lj,k}
inline Ten3 fundamental_form_jet(const ChartGeometry& geom, const Vec& p) {
  const int n = geom.dim;
  const Mat g = geom.metric_at(p), J = geom.J_at(p);
  const Ten3 dg = geom.metric_jet_at(p).d1;
  const Ten3 dJ = geom.J_jet_at(p);
  Ten3 dw(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0;
        for (int l = 0; l < n; ++l)
          s += dJ(l, i, k) * g[l][j] + J[l][i] * dg(l, j, k);
        dw(i, j, k) = s;
      }
  return dw;
}

inline Ten3 d_omega_from_jet(const Ten3& dw) {
  Ten3 r(dw.n);
  for (int i = 0; i < dw.n; ++i)
    for (int j = 0; j < dw.n; ++j)
      for (int k = 0; k < dw.n; ++k)
        r(i, j, k) = dw(i, j, k) + dw(k, i, j) + dw(j, k, i);
  return r;
}

inline Ten3 d_omega(const ChartGeometry& geom, const Vec& p) {
  return d_omega_from_jet(fundamental_form_jet(geom, p));
}

// Second-order finite-difference mode, used as a cross-check oracle.
inline Ten3 d_omega_fd(const ChartGeometry& geom, const Vec& p, double step) {
  const int n = geom.dim;
  Ten3 dw(n);
  for (int k = 0; k < n; ++k) {
    Vec pp = p, pm = p;
    pp[k] += step;
    pm[k] -= step;
    const Mat wp = fundamental_form(geom, pp), wm = fundamental_form(geom, pm);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        dw(i, j, k) = (wp[i][j] - wm[i][j]) / (2.0 * step);
  }
  return d_omega_from_jet(dw);
}

// (d*ω)_j = -g^{ab}(ω_{bj,a} - Γ^c_{ab} ω_{cj} - Γ^c_{aj} ω_{bc})
inline Vec d_star_omega(const ChartGeometry& geom, const Vec& p) {
  const int n = geom.dim;
  const Mat ginv = metric_inverse(geom, p);
  const Mat w = fundamental_form(geom, p);
  const Ten3 dw = fundamental_form_jet(geom, p);
  const Ten3 gamma = christoffel(geom, p);
  Vec r(n);
  for (int j = 0; j < n; ++j) {
    double s = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double cov = dw(b, j, a);
        for (int c = 0; c < n; ++c)
          cov -= gamma(c, a, b) * w[c][j] + gamma(c, a, j) * w[b][c];
        s += ginv[a][b] * cov;
      }
    r[j] = -s;
  }
  return r;
}

// Independent oracle for d*ω: the Christoffel-free divergence form
// (d*ω)^b = -(1/√g) ∂_a(√g ω^{ab}), with ∂_a by centered differences.
inline Vec d_star_omega_fd(const ChartGeometry& geom, const Vec& p, double step) {
  const int n = geom.dim;
  auto flux = [&](const Vec& x) {
    const Mat g = geom.metric_at(x);
    const Mat ginv = inverse(g);
    const Mat w = fundamental_form(geom, x);
    const double sq = std::sqrt(det(g));
    Mat up(n, n);  // √g ω^{ab}
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double s = 0;
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) s += ginv[a][c] * ginv[b][d] * w[c][d];
        up[a][b] = sq * s;
      }
    return up;
  };
  Vec div(n);
  for (int a = 0; a < n; ++a) {
    Vec pp = p, pm = p;
    pp[a] += step;
    pm[a] -= step;
    const Mat fp = flux(pp), fm = flux(pm);
    for (int b = 0; b < n; ++b) div[b] += (fp[a][b] - fm[a][b]) / (2.0 * step);
  }
  const Mat g = geom.metric_at(p);
  const double sq = std::sqrt(det(g));
  Vec r(n);
  for (int j = 0; j < n; ++j) {
    double s = 0;
    for (int b = 0; b < n; ++b) s += g[j][b] * (-div[b] / sq);
    r[j] = s;
  }
  return r;
}

// ∂_m Γ^i_{jk}, assembled from the metric 2-jet.
inline Ten4 christoffel_partial(const ChartGeometry& geom, const Vec& p) {
  const int n = geom.dim;
  const Mat ginv = metric_inverse(geom, p);
  const MetricJet jet = geom.metric_jet_at(p);
  Ten4 r(n);
  // ∂_m g^{il} = -g^{ia} g_{ab,m} g^{bl}
  Ten3 dginv(n);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l)
      for (int m = 0; m < n; ++m) {
        double s = 0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            s += ginv[i][a] * jet.d1(a, b, m) * ginv[b][l];
        dginv(i, l, m) = -s;
      }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m) {
          double s = 0;
          for (int l = 0; l < n; ++l) {
            s += dginv(i, l, m) *
                 (jet.d1(l, j, k) + jet.d1(l, k, j) - jet.d1(j, k, l));
            s += ginv[i][l] *
                 (jet.d2(l, j, k, m) + jet.d2(l, k, j, m) - jet.d2(j, k, l, m));
          }
          r(i, j, k, m) = 0.5 * s;
        }
  return r;
}

// R^i_{jkl} = ∂_k Γ^i_{lj} - ∂_l Γ^i_{kj} + Γ^i_{km} Γ^m_{lj} - Γ^i_{lm} Γ^m_{kj}
inline Ten4 riemann(const ChartGeometry& geom, const Vec& p) {
  const int n = geom.dim;
  const Ten3 gamma = christoffel(geom, p);
  const Ten4 dgamma = christoffel_partial(geom, p);
  Ten4 r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = dgamma(i, l, j, k) - dgamma(i, k, j, l);
          for (int m = 0; m < n; ++m)
            s += gamma(i, k, m) * gamma(m, l, j) - gamma(i, l, m) * gamma(m, k, j);
          r(i, j, k, l) = s;
        }
  return r;
}

inline Mat ricci(const ChartGeometry& geom, const Vec& p) {
  const int n = geom.dim;
  const Ten4 R = riemann(geom, p);
  Mat rc(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += R(i, j, i, l);
      rc[j][l] = s;
    }
  return rc;
}

inline CurvatureData make_curvature(const ChartGeometry& geom) {
  return CurvatureData{
      [geom](const Vec& p) { return riemann(geom, p); },
      [geom](const Vec& p) { return ricci(geom, p); },
  };
}

// Fourth-order centered jets of the metric, step scaled to the local
// coordinate size. Cross-check oracle only; models carry analytic jets.
inline MetricJet metric_jet_fd(const ChartGeometry& geom, const Vec& p) {
  const int n = geom.dim;
  const double scale = std::max(1.0, p.norm());
  const double h = 1e-4 * scale;
  MetricJet jet;
  jet.d1 = Ten3(n);
  jet.d2 = Ten4(n);
  auto g = [&](const Vec& x) { return geom.metric_at(x); };
  for (int k = 0; k < n; ++k) {
    Vec p1 = p, p2 = p, m1 = p, m2 = p;
    p1[k] += h;
    p2[k] += 2 * h;
    m1[k] -= h;
    m2[k] -= 2 * h;
    const Mat gp1 = g(p1), gp2 = g(p2), gm1 = g(m1), gm2 = g(m2), g0 = g(p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        jet.d1(i, j, k) =
            (-gp2[i][j] + 8 * gp1[i][j] - 8 * gm1[i][j] + gm2[i][j]) / (12 * h);
        jet.d2(i, j, k, k) = (-gp2[i][j] + 16 * gp1[i][j] - 30 * g0[i][j] +
                              16 * gm1[i][j] - gm2[i][j]) /
                             (12 * h * h);
      }
  }
  // mixed second partials from the 4th-order first-derivative stencil of d1
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      if (k == l) continue;
      Vec p1 = p, p2 = p, m1 = p, m2 = p;
      p1[l] += h;
      p2[l] += 2 * h;
      m1[l] -= h;
      m2[l] -= 2 * h;
      auto d1k = [&](const Vec& x) {
        Mat r(n, n);
        Vec a = x, b = x, c = x, d = x;
        a[k] += h;
        b[k] += 2 * h;
        c[k] -= h;
        d[k] -= 2 * h;
        const Mat ga = g(a), gb = g(b), gc = g(c), gd = g(d);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            r[i][j] = (-gb[i][j] + 8 * ga[i][j] - 8 * gc[i][j] + gd[i][j]) / (12 * h);
        return r;
      };
      const Mat q1 = d1k(p1), q2 = d1k(p2), r1 = d1k(m1), r2 = d1k(m2);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          jet.d2(i, j, k, l) =
              (-q2[i][j] + 8 * q1[i][j] - 8 * r1[i][j] + r2[i][j]) / (12 * h);
    }
  return jet;
}

// Same geometry with finite-difference jets substituted for the analytic
// ones; lets curvature be cross-checked independently of the model's jets.
inline ChartGeometry with_fd_jets(const ChartGeometry& geom) {
  ChartGeometry g = geom;
  g.metric_jet_at = [geom](const Vec& p) { return metric_jet_fd(geom, p); };
  return g;
}

// ⟨a,b⟩ = a_{αβ} b_{γδ} g^{αγ} g^{βδ}
inline double two_form_inner(const Mat& a, const Mat& b, const Mat& ginv) {
  const int n = a.rows;
  double s = 0;
  for (int al = 0; al < n; ++al)
    for (int be = 0; be < n; ++be)
      for (int ga = 0; ga < n; ++ga)
        for (int de = 0; de < n; ++de)
          s += a[al][be] * b[ga][de] * ginv[al][ga] * ginv[be][de];
  return s;
}

}  // namespace dbar
