#pragma once

// Concrete almost Hermitian models. Targets are represented by a single
// covering-space chart plus an affine deck action; quotient points are never
// materialized. Sources carry flat coordinates (log coordinates for the Hopf
// torus, lattice coordinates for flat tori) so the source metric is constant.

#include <array>
#include <cmath>
#include <memory>
#include <string>

#include "dbar/geometry.hpp"

namespace dbar {

inline Mat rotation_J(int dim) {
  // Je1 = e2, Je3 = e4 (block +90° rotations)
  Mat J(dim, dim);
  for (int b = 0; b + 1 < dim; b += 2) {
    J[b + 1][b] = 1.0;
    J[b][b + 1] = -1.0;
  }
  return J;
}

struct Model {
  std::string name;
  int dim = 0;

  double alpha = 0.0;   // deck scale of Hopf models
  double radius = 0.0;  // round sphere
  Mat lattice;          // flat torus period vectors as columns

  ChartGeometry geom;
  std::array<double, 2> periods{0.0, 0.0};  // source fundamental domain

  bool punctured = false;      // covering chart with the origin removed
  bool sphere_target = false;  // retraction through the round embedding
  bool constant_geometry = false;  // g, J constant on the chart
  bool kahler = false;             // dω ≡ 0 (surfaces and constant charts)
  bool has_deck = false;
  std::array<double, 2> deck_scale{1.0, 1.0};  // generator per source axis
  std::array<Vec, 2> deck_offset{};
  double rho_min = 1e-8;

  // One deck generator of `axis` applied `power` times (negative = inverse).
  Vec deck_point(int axis, int power, Vec y) const {
    if (power == 0) return y;
    const double s = std::pow(deck_scale[axis], power);
    for (int i = 0; i < dim; ++i)
      y[i] = s * y[i] + power * deck_offset[axis][i];
    return y;
  }

  Vec deck_tangent(int axis, int power, Vec w) const {
    if (power == 0) return w;
    const double s = std::pow(deck_scale[axis], power);
    for (int i = 0; i < dim; ++i) w[i] = s * w[i];
    return w;
  }

  double rho(const Vec& y) const { return y.norm(); }

  void check_valid(const Vec& y, int is = -1, int ith = -1) const {
    if (punctured && rho(y) <= rho_min)
      throw puncture_error("map value within rho_min of the covering puncture",
                           is, ith);
  }

  Vec retract(const Vec& y, const Vec& w, double eps) const;
};

using ModelPtr = std::shared_ptr<const Model>;

// ---------------------------------------------------------------------------
// round sphere chart helpers (stereographic, projection from the north pole)

inline Vec sphere_embed(double r, const Vec& x) {
  const double u = x.norm2();
  const double d = u + r * r;
  Vec P(3);
  P[0] = 2 * r * r * x[0] / d;
  P[1] = 2 * r * r * x[1] / d;
  P[2] = r * (u - r * r) / d;
  return P;
}

inline Vec sphere_chart_south(double r, const Vec& P) {
  const double denom = r - P[2];
  if (!(denom > 1e-12 * r))
    throw error("point at or beyond the south chart's domain (north pole)");
  Vec x(2);
  x[0] = r * P[0] / denom;
  x[1] = r * P[1] / denom;
  return x;
}

inline Vec sphere_chart_north(double r, const Vec& P) {
  const double denom = r + P[2];
  if (!(denom > 1e-12 * r))
    throw error("point at or beyond the north chart's domain (south pole)");
  Vec x(2);
  x[0] = r * P[0] / denom;
  x[1] = -r * P[1] / denom;  // flipped so the transition is orientation-true
  return x;
}

// d(embed)/dx applied to a chart tangent
inline Vec sphere_tangent_push(double r, const Vec& x, const Vec& w) {
  const double u = x.norm2();
  const double d = u + r * r;
  const double xw = x[0] * w[0] + x[1] * w[1];
  Vec V(3);
  V[0] = 2 * r * r * (w[0] * d - x[0] * 2 * xw) / (d * d);
  V[1] = 2 * r * r * (w[1] * d - x[1] * 2 * xw) / (d * d);
  V[2] = 4 * r * r * r * xw / (d * d);
  return V;
}

// transition between the two stereographic charts; the switch point
// |x| = 2r keeps both conformal factors healthy
inline Vec sphere_transition_south_to_north(double r, const Vec& xs) {
  return sphere_chart_north(r, sphere_embed(r, xs));
}

inline Vec Model::retract(const Vec& y, const Vec& w, double eps) const {
  if (!sphere_target) {
    Vec r(dim);
    for (int i = 0; i < dim; ++i) r[i] = y[i] + eps * w[i];
    return r;
  }
  const Vec P = sphere_embed(radius, y);
  const Vec V = sphere_tangent_push(radius, y, w);
  Vec Q(3);
  for (int i = 0; i < 3; ++i) Q[i] = P[i] + eps * V[i];
  const double qn = Q.norm();
  if (qn < 1e-10 * radius)
    throw error("sphere retraction through the center (antipodal step)");
  for (int i = 0; i < 3; ++i) Q[i] *= radius / qn;
  return sphere_chart_south(radius, Q);
}

// ---------------------------------------------------------------------------
// chart builders

inline ChartGeometry constant_chart(int dim, const Mat& g, const Mat& J) {
  ChartGeometry c;
  c.dim = dim;
  c.metric_at = [g](const Vec&) { return g; };
  c.metric_jet_at = [dim](const Vec&) {
    return MetricJet{Ten3(dim), Ten4(dim)};
  };
  c.J_at = [J](const Vec&) { return J; };
  c.J_jet_at = [dim](const Vec&) { return Ten3(dim); };
  return c;
}

// g = μ(x) δ with analytic jets of μ; J constant
template <class F0, class F1, class F2>
ChartGeometry conformal_chart(int dim, const Mat& J, F0 mu, F1 dmu, F2 ddmu) {
  ChartGeometry c;
  c.dim = dim;
  c.metric_at = [dim, mu](const Vec& p) {
    const double m = mu(p);
    Mat g(dim, dim);
    for (int i = 0; i < dim; ++i) g[i][i] = m;
    return g;
  };
  c.metric_jet_at = [dim, dmu, ddmu](const Vec& p) {
    MetricJet jet{Ten3(dim), Ten4(dim)};
    const Vec d1 = dmu(p);
    const Mat d2 = ddmu(p);
    for (int i = 0; i < dim; ++i)
      for (int k = 0; k < dim; ++k) {
        jet.d1(i, i, k) = d1[k];
        for (int l = 0; l < dim; ++l) jet.d2(i, i, k, l) = d2[k][l];
      }
    return jet;
  };
  c.metric_d1_at = [dim, dmu](const Vec& p) {
    Ten3 d(dim);
    const Vec d1 = dmu(p);
    for (int i = 0; i < dim; ++i)
      for (int k = 0; k < dim; ++k) d(i, i, k) = d1[k];
    return d;
  };
  c.J_at = [J](const Vec&) { return J; };
  c.J_jet_at = [dim](const Vec&) { return Ten3(dim); };
  return c;
}

// ---------------------------------------------------------------------------
// the zoo

inline ModelPtr hopf_torus_source(double alpha) {
  if (!(alpha > 1.0)) throw config_error("alpha", "deck scale must be > 1");
  auto m = std::make_shared<Model>();
  m->name = "hopf_torus";
  m->dim = 2;
  m->alpha = alpha;
  m->constant_geometry = true;
  m->kahler = true;
  m->geom = constant_chart(2, Mat::identity(2), rotation_J(2));
  m->periods = {std::log(alpha), 2.0 * 3.14159265358979323846};
  return m;
}

inline ModelPtr hopf_surface_target(double alpha) {
  if (!(alpha > 1.0)) throw config_error("alpha", "deck scale must be > 1");
  auto m = std::make_shared<Model>();
  m->name = "hopf_surface";
  m->dim = 4;
  m->alpha = alpha;
  m->punctured = true;
  m->has_deck = true;
  m->deck_scale = {alpha, alpha};
  m->deck_offset = {Vec(4), Vec(4)};
  const double rho_min = m->rho_min;
  auto mu = [rho_min](const Vec& y) {
    const double u = y.norm2();
    if (u <= rho_min * rho_min)
      throw puncture_error("metric evaluated at the covering puncture");
    return 1.0 / u;
  };
  auto dmu = [](const Vec& y) {
    const double u = y.norm2();
    Vec d(4);
    for (int k = 0; k < 4; ++k) d[k] = -2.0 * y[k] / (u * u);
    return d;
  };
  auto ddmu = [](const Vec& y) {
    const double u = y.norm2();
    Mat d(4, 4);
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) {
        d[k][l] = 8.0 * y[k] * y[l] / (u * u * u);
        if (k == l) d[k][l] -= 2.0 / (u * u);
      }
    return d;
  };
  m->geom = conformal_chart(4, rotation_J(4), mu, dmu, ddmu);
  return m;
}

inline Mat lattice_from_cols(const std::array<double, 4>& v) {
  Mat B(2, 2);
  B[0][0] = v[0];
  B[1][0] = v[1];
  B[0][1] = v[2];
  B[1][1] = v[3];
  return B;
}

// Flat torus as a source: lattice coordinates [0,1)^2 with the constant Gram
// metric, so all source Christoffels vanish identically.
inline ModelPtr flat_torus_source(const std::array<double, 4>& cols = {1, 0, 0, 1}) {
  const Mat B = lattice_from_cols(cols);
  if (std::fabs(det(B)) < 1e-12)
    throw config_error("lattice", "period vectors are linearly dependent");
  auto m = std::make_shared<Model>();
  m->name = "flat_torus";
  m->dim = 2;
  m->lattice = B;
  m->constant_geometry = true;
  m->kahler = true;
  const Mat G = matmul(transpose(B), B);
  const Mat J = matmul(inverse(B), matmul(rotation_J(2), B));
  m->geom = constant_chart(2, G, J);
  m->periods = {1.0, 1.0};
  return m;
}

// Flat torus as a target: standard coordinates on the covering plane, deck
// generators the lattice translations.
inline ModelPtr flat_torus_target(const std::array<double, 4>& cols = {1, 0, 0, 1}) {
  const Mat B = lattice_from_cols(cols);
  if (std::fabs(det(B)) < 1e-12)
    throw config_error("lattice", "period vectors are linearly dependent");
  auto m = std::make_shared<Model>();
  m->name = "flat_torus";
  m->dim = 2;
  m->lattice = B;
  m->constant_geometry = true;
  m->kahler = true;
  m->geom = constant_chart(2, Mat::identity(2), rotation_J(2));
  m->has_deck = true;
  m->deck_offset = {B.col(0), B.col(1)};
  return m;
}

inline ModelPtr euclidean_model(int dim) {
  if (dim != 2 && dim != 4) throw config_error("dim", "dimension must be 2 or 4");
  auto m = std::make_shared<Model>();
  m->name = "euclidean";
  m->dim = dim;
  m->constant_geometry = true;
  m->kahler = true;
  m->geom = constant_chart(dim, Mat::identity(dim), rotation_J(dim));
  return m;
}

inline ModelPtr round_sphere_model(double radius) {
  if (!(radius > 0.0)) throw config_error("radius", "radius must be > 0");
  auto m = std::make_shared<Model>();
  m->name = "round_sphere";
  m->dim = 2;
  m->radius = radius;
  m->kahler = true;
  m->sphere_target = true;
  const double r4 = radius * radius * radius * radius;
  const double r2 = radius * radius;
  auto mu = [r2, r4](const Vec& x) {
    const double d = r2 + x.norm2();
    return 4.0 * r4 / (d * d);
  };
  auto dmu = [r2, r4](const Vec& x) {
    const double d = r2 + x.norm2();
    Vec g(2);
    for (int k = 0; k < 2; ++k) g[k] = -16.0 * r4 * x[k] / (d * d * d);
    return g;
  };
  auto ddmu = [r2, r4](const Vec& x) {
    const double d = r2 + x.norm2();
    Mat h(2, 2);
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) {
        h[k][l] = 96.0 * r4 * x[k] * x[l] / (d * d * d * d);
        if (k == l) h[k][l] -= 16.0 * r4 / (d * d * d);
      }
    return h;
  };
  m->geom = conformal_chart(2, rotation_J(2), mu, dmu, ddmu);
  return m;
}

// Geodesic polar chart of the same sphere, (φ, θ) with φ ∈ (0, π). The λ₁
// grid lives here; a test ties it back to the stereographic charts through
// the analytic transition.
inline ChartGeometry sphere_polar_chart(double radius) {
  const double r2 = radius * radius;
  ChartGeometry c;
  c.dim = 2;
  c.metric_at = [r2](const Vec& p) {
    const double s = std::sin(p[0]);
    Mat g(2, 2);
    g[0][0] = r2;
    g[1][1] = r2 * s * s;
    return g;
  };
  c.metric_jet_at = [r2](const Vec& p) {
    MetricJet jet{Ten3(2), Ten4(2)};
    const double s = std::sin(p[0]), cphi = std::cos(p[0]);
    jet.d1(1, 1, 0) = 2.0 * r2 * s * cphi;
    jet.d2(1, 1, 0, 0) = 2.0 * r2 * (cphi * cphi - s * s);
    return jet;
  };
  c.J_at = [](const Vec& p) {
    const double s = std::sin(p[0]);
    Mat J(2, 2);
    J[1][0] = 1.0 / s;
    J[0][1] = -s;
    return J;
  };
  c.J_jet_at = [](const Vec& p) {
    const double s = std::sin(p[0]), cphi = std::cos(p[0]);
    Ten3 dJ(2);
    dJ(1, 0, 0) = -cphi / (s * s);
    dJ(0, 1, 0) = -cphi;
    return dJ;
  };
  return c;
}

// Polar position → south/north stereographic chart with the documented
// switch at |x| > 2r.
inline Vec sphere_polar_to_stereo(double radius, const Vec& polar, bool* north) {
  const double phi = polar[0], theta = polar[1];
  Vec P(3);
  P[0] = radius * std::sin(phi) * std::cos(theta);
  P[1] = radius * std::sin(phi) * std::sin(theta);
  P[2] = radius * std::cos(phi);
  Vec xs = sphere_chart_south(radius, P);
  if (xs.norm() > 2.0 * radius) {
    if (north) *north = true;
    return sphere_chart_north(radius, P);
  }
  if (north) *north = false;
  return xs;
}

// Negative-control fixture: J squares to -I but is not a g-isometry, so the
// orthogonal-decomposition residual is genuinely nonzero.
inline ModelPtr fixture_skew_j_target() {
  auto m = std::make_shared<Model>();
  m->name = "fixture_skew_j";
  m->dim = 2;
  m->constant_geometry = true;
  m->kahler = true;
  Mat J(2, 2);
  J[0][1] = -1.25;
  J[1][0] = 0.8;
  m->geom = constant_chart(2, Mat::identity(2), J);
  m->has_deck = true;
  m->deck_offset = {Vec{1.0, 0.0}, Vec{0.0, 1.0}};
  return m;
}

// Source wrapped in a smooth positive conformal factor
// λ = exp(amp · sin(2πs/P_s) cos(2πθ/P_θ)); used to exercise the conformal
// invariance of the surface energies.
inline ModelPtr conformal_rescale_source(const ModelPtr& base, double amp) {
  auto m = std::make_shared<Model>(*base);
  m->name = base->name + "_conformal";
  m->constant_geometry = false;
  const double ws = 2.0 * 3.14159265358979323846 / base->periods[0];
  const double wt = 2.0 * 3.14159265358979323846 / base->periods[1];
  const ChartGeometry g0 = base->geom;
  auto lam = [amp, ws, wt](const Vec& p, double* d1, double* d2) {
    const double u = std::sin(ws * p[0]) * std::cos(wt * p[1]);
    const double l = std::exp(amp * u);
    if (d1) {
      const double us = ws * std::cos(ws * p[0]) * std::cos(wt * p[1]);
      const double ut = -wt * std::sin(ws * p[0]) * std::sin(wt * p[1]);
      d1[0] = amp * us * l;
      d1[1] = amp * ut * l;
      if (d2) {
        const double uss = -ws * ws * u, utt = -wt * wt * u;
        const double ust = -ws * wt * std::cos(ws * p[0]) * std::sin(wt * p[1]);
        d2[0] = (amp * uss + amp * us * amp * us) * l;       // ∂ss
        d2[1] = (amp * ust + amp * us * amp * ut) * l;       // ∂sθ
        d2[2] = (amp * utt + amp * ut * amp * ut) * l;       // ∂θθ
      }
    }
    return l;
  };
  ChartGeometry c;
  c.dim = 2;
  c.metric_at = [g0, lam](const Vec& p) {
    const double l = lam(p, nullptr, nullptr);
    return l * g0.metric_at(p);
  };
  c.metric_jet_at = [g0, lam](const Vec& p) {
    double d1[2], d2[3];
    const double l = lam(p, d1, d2);
    const Mat g = g0.metric_at(p);
    const MetricJet base_jet = g0.metric_jet_at(p);
    MetricJet jet{Ten3(2), Ten4(2)};
    const double dd[2][2] = {{d2[0], d2[1]}, {d2[1], d2[2]}};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          jet.d1(i, j, k) = d1[k] * g[i][j] + l * base_jet.d1(i, j, k);
          for (int l2 = 0; l2 < 2; ++l2)
            jet.d2(i, j, k, l2) = dd[k][l2] * g[i][j] +
                                  d1[k] * base_jet.d1(i, j, l2) +
                                  d1[l2] * base_jet.d1(i, j, k) +
                                  l * base_jet.d2(i, j, k, l2);
        }
    return jet;
  };
  c.J_at = g0.J_at;
  c.J_jet_at = g0.J_jet_at;
  m->geom = c;
  return m;
}

// ---------------------------------------------------------------------------

struct ModelSpec {
  std::string name;
  double alpha = 2.0;
  double radius = 1.0;
  std::array<double, 4> lattice{1, 0, 0, 1};
  int dim = 4;
  bool as_source = false;  // flat torus: lattice chart vs covering chart
};

inline ModelPtr build_model(const ModelSpec& spec) {
  if (spec.name == "hopf_torus") return hopf_torus_source(spec.alpha);
  if (spec.name == "hopf_surface") return hopf_surface_target(spec.alpha);
  if (spec.name == "flat_torus")
    return spec.as_source ? flat_torus_source(spec.lattice)
                          : flat_torus_target(spec.lattice);
  if (spec.name == "round_sphere") return round_sphere_model(spec.radius);
  if (spec.name == "euclidean") return euclidean_model(spec.dim);
  if (spec.name == "fixture_skew_j") return fixture_skew_j_target();
  throw config_error("model", "unknown model '" + spec.name + "'");
}

}  // namespace dbar
