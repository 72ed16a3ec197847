#pragma once

// Discretized maps f: source grid → target chart with deck-twisted
// periodicity. The twist lives in the accessor: wrapping an index across a
// period applies the target's deck generator to the fetched value, so there
// is no ghost-cell storage to keep in sync.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "dbar/models.hpp"

namespace dbar {

struct GridSpec {
  int n_s = 0, n_theta = 0;
  double period_s = 0, period_theta = 0;

  double ds() const { return period_s / n_s; }
  double dtheta() const { return period_theta / n_theta; }
  int nodes() const { return n_s * n_theta; }

  static GridSpec make(int ns, int ntheta, const Model& source) {
    if (ns < 8 || ntheta < 8)
      throw config_error("grid", "grid sizes must be at least 8");
    GridSpec g;
    g.n_s = ns;
    g.n_theta = ntheta;
    g.period_s = source.periods[0];
    g.period_theta = source.periods[1];
    if (!(g.period_s > 0) || !(g.period_theta > 0))
      throw config_error("grid", "source model has no periodic fundamental domain");
    return g;
  }
};

struct TwistData {
  int deck_power_s = 0;
  int deck_power_theta = 0;
  bool operator==(const TwistData&) const = default;
};

inline int floordiv(int a, int n) {
  int q = a / n, r = a % n;
  return (r < 0) ? q - 1 : q;
}

struct MapField {
  GridSpec grid;
  TwistData twist;
  ModelPtr source, target;
  std::vector<double> values;  // [(is*n_theta + ith)*dim + c]
  int stencil_order = 2;       // 2 or 4; 4 only for convergence studies

  // Exact tangent Tf^i_α at a node when the map has a closed form; energy
  // quadratures use it when present, stencils otherwise.
  std::function<Mat(int, int)> analytic_tangent;

  int dim() const { return target->dim; }

  static MapField make(ModelPtr source, ModelPtr target, int ns, int ntheta,
                       TwistData twist = {}) {
    MapField f;
    f.grid = GridSpec::make(ns, ntheta, *source);
    f.twist = twist;
    f.source = std::move(source);
    f.target = std::move(target);
    if (!f.target->has_deck &&
        (twist.deck_power_s != 0 || twist.deck_power_theta != 0))
      throw config_error("twist", "nonzero twist with a trivial deck group");
    f.values.assign(static_cast<std::size_t>(f.grid.nodes()) * f.dim(), 0.0);
    return f;
  }

  Vec position(int is, int ith) const {
    return Vec{is * grid.ds(), ith * grid.dtheta()};
  }

  double* at(int is, int ith) {
    return values.data() + (static_cast<std::size_t>(is) * grid.n_theta + ith) * dim();
  }
  const double* at(int is, int ith) const {
    return values.data() + (static_cast<std::size_t>(is) * grid.n_theta + ith) * dim();
  }

  Vec node(int is, int ith) const {
    Vec y(dim());
    const double* p = at(is, ith);
    for (int c = 0; c < dim(); ++c) y[c] = p[c];
    return y;
  }
  void set_node(int is, int ith, const Vec& y) {
    double* p = at(is, ith);
    for (int c = 0; c < dim(); ++c) p[c] = y[c];
  }

  // Deck-twisted fetch for arbitrary integer indices. `tangent` drops the
  // translational part of the deck action.
  Vec fetch(int is, int ith, bool tangent = false) const {
    const int ws = floordiv(is, grid.n_s);
    const int wt = floordiv(ith, grid.n_theta);
    Vec y = node(is - ws * grid.n_s, ith - wt * grid.n_theta);
    if (ws == 0 && wt == 0) return y;
    const int d = dim();
    const int ps = ws * twist.deck_power_s, pt = wt * twist.deck_power_theta;
    double scale = 1.0;
    if (target->deck_scale[0] != 1.0) scale *= std::pow(target->deck_scale[0], ps);
    if (target->deck_scale[1] != 1.0) scale *= std::pow(target->deck_scale[1], pt);
    for (int c = 0; c < d; ++c) {
      double v = scale * y[c];
      if (!tangent)
        v += ps * target->deck_offset[0][c] + pt * target->deck_offset[1][c];
      y[c] = v;
    }
    return y;
  }

  // 3x3 neighborhood into a local buffer; interior nodes bypass the wrap
  // machinery entirely.
  void gather9(int is, int ith, double out[3][3][kMaxDim]) const {
    const int d = dim();
    if (is >= 1 && is + 1 < grid.n_s && ith >= 1 && ith + 1 < grid.n_theta) {
      for (int di = 0; di < 3; ++di) {
        const double* row = at(is + di - 1, ith - 1);
        for (int dj = 0; dj < 3; ++dj)
          for (int c = 0; c < d; ++c) out[di][dj][c] = row[dj * d + c];
      }
      return;
    }
    for (int di = 0; di < 3; ++di)
      for (int dj = 0; dj < 3; ++dj) {
        const Vec y = fetch(is + di - 1, ith + dj - 1);
        for (int c = 0; c < d; ++c) out[di][dj][c] = y[c];
      }
  }

  // Raises puncture_error at the first offending node.
  void check_valid() const {
    if (!target->punctured) return;
    for (int is = 0; is < grid.n_s; ++is)
      for (int ith = 0; ith < grid.n_theta; ++ith)
        target->check_valid(node(is, ith), is, ith);
  }
};

struct VariationField {
  std::vector<double> values;  // same layout as the base field

  static VariationField zeros(const MapField& f) {
    VariationField v;
    v.values.assign(f.values.size(), 0.0);
    return v;
  }

  double* at(const MapField& f, int is, int ith) {
    return values.data() +
           (static_cast<std::size_t>(is) * f.grid.n_theta + ith) * f.dim();
  }
  Vec node(const MapField& f, int is, int ith) const {
    Vec y(f.dim());
    const double* p = values.data() +
                      (static_cast<std::size_t>(is) * f.grid.n_theta + ith) * f.dim();
    for (int c = 0; c < f.dim(); ++c) y[c] = p[c];
    return y;
  }
  void set_node(const MapField& f, int is, int ith, const Vec& y) {
    double* p = at(f, is, ith);
    for (int c = 0; c < f.dim(); ++c) p[c] = y[c];
  }

  Vec fetch(const MapField& f, int is, int ith) const {
    const int ws = floordiv(is, f.grid.n_s);
    const int wt = floordiv(ith, f.grid.n_theta);
    Vec y = node(f, is - ws * f.grid.n_s, ith - wt * f.grid.n_theta);
    if (ws == 0 && wt == 0) return y;
    const int ps = ws * f.twist.deck_power_s, pt = wt * f.twist.deck_power_theta;
    double scale = 1.0;
    if (f.target->deck_scale[0] != 1.0) scale *= std::pow(f.target->deck_scale[0], ps);
    if (f.target->deck_scale[1] != 1.0) scale *= std::pow(f.target->deck_scale[1], pt);
    for (int c = 0; c < f.dim(); ++c) y[c] *= scale;
    return y;
  }
};

// ---------------------------------------------------------------------------
// stencils

// Tf^i_α by centered differences with deck-twisted wraparound. Columns are
// the source directions: Tf[i][α].
inline Mat derivative_at(const MapField& f, int is, int ith) {
  const int d = f.dim();
  Mat Tf(d, 2);
  const double inv2s = 1.0 / (2.0 * f.grid.ds());
  const double inv2t = 1.0 / (2.0 * f.grid.dtheta());
  if (f.stencil_order == 2) {
    const Vec sp = f.fetch(is + 1, ith), sm = f.fetch(is - 1, ith);
    const Vec tp = f.fetch(is, ith + 1), tm = f.fetch(is, ith - 1);
    for (int c = 0; c < d; ++c) {
      Tf[c][0] = (sp[c] - sm[c]) * inv2s;
      Tf[c][1] = (tp[c] - tm[c]) * inv2t;
    }
  } else {
    const Vec sp = f.fetch(is + 1, ith), sm = f.fetch(is - 1, ith);
    const Vec sp2 = f.fetch(is + 2, ith), sm2 = f.fetch(is - 2, ith);
    const Vec tp = f.fetch(is, ith + 1), tm = f.fetch(is, ith - 1);
    const Vec tp2 = f.fetch(is, ith + 2), tm2 = f.fetch(is, ith - 2);
    for (int c = 0; c < d; ++c) {
      Tf[c][0] = (-sp2[c] + 8 * sp[c] - 8 * sm[c] + sm2[c]) / (12.0 * f.grid.ds());
      Tf[c][1] =
          (-tp2[c] + 8 * tp[c] - 8 * tm[c] + tm2[c]) / (12.0 * f.grid.dtheta());
    }
  }
  return Tf;
}

inline std::vector<Mat> derivative(const MapField& f) {
  std::vector<Mat> out(static_cast<std::size_t>(f.grid.nodes()));
#pragma omp parallel for schedule(static)
  for (int is = 0; is < f.grid.n_s; ++is)
    for (int ith = 0; ith < f.grid.n_theta; ++ith)
      out[static_cast<std::size_t>(is) * f.grid.n_theta + ith] =
          derivative_at(f, is, ith);
  return out;
}

inline Mat variation_derivative_at(const MapField& f, const VariationField& v,
                                   int is, int ith) {
  const int d = f.dim();
  Mat Tv(d, 2);
  const Vec sp = v.fetch(f, is + 1, ith), sm = v.fetch(f, is - 1, ith);
  const Vec tp = v.fetch(f, is, ith + 1), tm = v.fetch(f, is, ith - 1);
  for (int c = 0; c < d; ++c) {
    Tv[c][0] = (sp[c] - sm[c]) / (2.0 * f.grid.ds());
    Tv[c][1] = (tp[c] - tm[c]) / (2.0 * f.grid.dtheta());
  }
  return Tv;
}

// Second partials f^i_{αβ} (2nd-order stencils).
inline void second_derivative_at(const MapField& f, int is, int ith,
                                 Mat& fss_ftt, Mat& fst) {
  const int d = f.dim();
  const double ds = f.grid.ds(), dt = f.grid.dtheta();
  const Vec c0 = f.fetch(is, ith);
  const Vec sp = f.fetch(is + 1, ith), sm = f.fetch(is - 1, ith);
  const Vec tp = f.fetch(is, ith + 1), tm = f.fetch(is, ith - 1);
  const Vec pp = f.fetch(is + 1, ith + 1), pm = f.fetch(is + 1, ith - 1);
  const Vec mp = f.fetch(is - 1, ith + 1), mm = f.fetch(is - 1, ith - 1);
  fss_ftt = Mat(d, 2);
  fst = Mat(d, 1);
  for (int c = 0; c < d; ++c) {
    fss_ftt[c][0] = (sp[c] - 2 * c0[c] + sm[c]) / (ds * ds);
    fss_ftt[c][1] = (tp[c] - 2 * c0[c] + tm[c]) / (dt * dt);
    fst[c][0] = (pp[c] - pm[c] - mp[c] + mm[c]) / (4 * ds * dt);
  }
}

// ---------------------------------------------------------------------------

// (f*ω)_{αβ} = f^i_α f^j_β ω_{ij}(f)
inline Mat pullback_two_form_at(const MapField& f, int is, int ith,
                                const std::function<Mat(const Vec&)>& omega,
                                const Mat* Tf_opt = nullptr) {
  const Mat Tf = Tf_opt ? *Tf_opt : derivative_at(f, is, ith);
  const Mat w = omega(f.node(is, ith));
  const int d = f.dim();
  Mat r(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double s = 0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s += Tf[i][a] * Tf[j][b] * w[i][j];
      r[a][b] = s;
    }
  return r;
}

inline std::vector<Mat> pullback_two_form(
    const MapField& f, const std::function<Mat(const Vec&)>& omega) {
  std::vector<Mat> out(static_cast<std::size_t>(f.grid.nodes()));
#pragma omp parallel for schedule(static)
  for (int is = 0; is < f.grid.n_s; ++is)
    for (int ith = 0; ith < f.grid.n_theta; ++ith)
      out[static_cast<std::size_t>(is) * f.grid.n_theta + ith] =
          pullback_two_form_at(f, is, ith, omega);
  return out;
}

// Periodic trapezoidal quadrature: Σ density · √det g · ΔA, compensated and
// in fixed node order so repeated runs are bit-identical.
inline double integrate(const std::vector<double>& density, const Model& source,
                        const GridSpec& grid) {
  const double dA = grid.ds() * grid.dtheta();
  double sum = 0.0, comp = 0.0;
  bool nonfinite = false;
  for (int is = 0; is < grid.n_s; ++is)
    for (int ith = 0; ith < grid.n_theta; ++ith) {
      const Vec p{is * grid.ds(), ith * grid.dtheta()};
      const double sqg = std::sqrt(det(source.geom.metric_at(p)));
      const double term = density[static_cast<std::size_t>(is) * grid.n_theta + ith] * sqg * dA;
      if (!std::isfinite(term)) nonfinite = true;
      const double t = sum + term;
      if (std::fabs(sum) >= std::fabs(term))
        comp += (sum - t) + term;
      else
        comp += (term - t) + sum;
      sum = t;
    }
  if (nonfinite) return std::numeric_limits<double>::quiet_NaN();
  return sum + comp;
}

// ---------------------------------------------------------------------------

// Nodewise y ⊕ εv through the target's retraction. Analytic tangents do not
// survive a perturbation.
inline MapField perturb(const MapField& f, const VariationField& v, double eps) {
  MapField g = f;
  g.analytic_tangent = nullptr;
#pragma omp parallel for schedule(static)
  for (int is = 0; is < f.grid.n_s; ++is)
    for (int ith = 0; ith < f.grid.n_theta; ++ith)
      g.set_node(is, ith,
                 f.target->retract(f.node(is, ith), v.node(f, is, ith), eps));
  if (g.target->punctured) g.check_valid();
  return g;
}

// Straight-line (flat targets, coverings) or normalized-embedding (sphere)
// path with endpoints f0 and f1.
inline MapField homotopy_path(const MapField& f0, const MapField& f1, double t) {
  if (f0.grid.n_s != f1.grid.n_s || f0.grid.n_theta != f1.grid.n_theta)
    throw homotopy_error("homotopy endpoints on different grids");
  if (!(f0.twist == f1.twist))
    throw homotopy_error("homotopy endpoints in different twist classes");
  if (t == 0.0) return f0;
  if (t == 1.0) return f1;
  MapField g = f0;
  g.analytic_tangent = nullptr;
  const int d = f0.dim();
  for (int is = 0; is < f0.grid.n_s; ++is)
    for (int ith = 0; ith < f0.grid.n_theta; ++ith) {
      const Vec a = f0.node(is, ith), b = f1.node(is, ith);
      Vec y(d);
      if (f0.target->sphere_target) {
        const double r = f0.target->radius;
        const Vec P = sphere_embed(r, a), Q = sphere_embed(r, b);
        Vec m(3);
        for (int c = 0; c < 3; ++c) m[c] = (1 - t) * P[c] + t * Q[c];
        const double mn = m.norm();
        if (mn < 1e-8 * r)
          throw homotopy_error("antipodal pair along sphere homotopy");
        for (int c = 0; c < 3; ++c) m[c] *= r / mn;
        y = sphere_chart_south(r, m);
      } else {
        for (int c = 0; c < d; ++c) y[c] = (1 - t) * a[c] + t * b[c];
      }
      g.set_node(is, ith, y);
    }
  if (g.target->punctured) g.check_valid();
  return g;
}

// Bilinear sample at an arbitrary source position (twisted wrap applies).
inline Vec sample_map(const MapField& f, double s, double theta) {
  const double xs = s / f.grid.ds(), xt = theta / f.grid.dtheta();
  const int i0 = static_cast<int>(std::floor(xs));
  const int j0 = static_cast<int>(std::floor(xt));
  const double as = xs - i0, at = xt - j0;
  const Vec v00 = f.fetch(i0, j0), v10 = f.fetch(i0 + 1, j0);
  const Vec v01 = f.fetch(i0, j0 + 1), v11 = f.fetch(i0 + 1, j0 + 1);
  Vec y(f.dim());
  for (int c = 0; c < f.dim(); ++c)
    y[c] = (1 - as) * (1 - at) * v00[c] + as * (1 - at) * v10[c] +
           (1 - as) * at * v01[c] + as * at * v11[c];
  return y;
}

// ---------------------------------------------------------------------------
// constructors for common fields

inline MapField constant_map(ModelPtr source, ModelPtr target, int ns, int nt,
                             const Vec& y) {
  MapField f = MapField::make(std::move(source), std::move(target), ns, nt);
  for (int is = 0; is < f.grid.n_s; ++is)
    for (int ith = 0; ith < f.grid.n_theta; ++ith) f.set_node(is, ith, y);
  return f;
}

inline MapField map_from(ModelPtr source, ModelPtr target, int ns, int nt,
                         TwistData twist,
                         const std::function<Vec(const Vec&)>& fn) {
  MapField f = MapField::make(std::move(source), std::move(target), ns, nt, twist);
  for (int is = 0; is < f.grid.n_s; ++is)
    for (int ith = 0; ith < f.grid.n_theta; ++ith)
      f.set_node(is, ith, fn(f.position(is, ith)));
  return f;
}

// Identity of a flat torus: lattice-coordinate source, covering-plane target.
inline MapField identity_map(ModelPtr source, ModelPtr target, int ns, int nt) {
  const Mat B = target->lattice;
  return map_from(std::move(source), target, ns, nt, TwistData{1, 1},
                  [B](const Vec& p) {
                    Vec y(2);
                    y[0] = B[0][0] * p[0] + B[0][1] * p[1];
                    y[1] = B[1][0] * p[0] + B[1][1] * p[1];
                    return y;
                  });
}

}  // namespace dbar
