#pragma once

// The finite-dimensional family of equivariant torus-to-Hopf-surface maps
// f(x) = x¹u + x²v, parameterized by orthonormal pairs (u, v) in R⁴. The
// negative-gradient flow preserves the family and restricts to an ODE on the
// Stiefel manifold V₂(R⁴); the right-hand side is evaluated from the
// first-order Euler-Lagrange tensor A at the two probe points x = (1,0) and
// x = (0,1), which is enough because A is linear in x along the family.

#include <vector>

#include "dbar/functionals.hpp"
#include "dbar/rng.hpp"

namespace dbar {

struct FrameState {
  Vec u{0, 0, 0, 0}, v{0, 0, 0, 0};
  double alpha = 2.0;
};

inline FrameState make_frame(const Vec& u, const Vec& v, double alpha) {
  FrameState fr;
  fr.u = u;
  fr.v = v;
  fr.alpha = alpha;
  const double tol = 1e-9;
  if (std::fabs(fr.u.norm() - 1.0) > tol || std::fabs(fr.v.norm() - 1.0) > tol ||
      std::fabs(fr.u.dot(fr.v)) > tol)
    throw config_error("frame", "u, v must be orthonormal");
  return fr;
}

inline void gram_schmidt(FrameState& fr) {
  double nu = fr.u.norm();
  for (int i = 0; i < 4; ++i) fr.u[i] /= nu;
  const double p = fr.v.dot(fr.u);
  for (int i = 0; i < 4; ++i) fr.v[i] -= p * fr.u[i];
  const double nv = fr.v.norm();
  for (int i = 0; i < 4; ++i) fr.v[i] /= nv;
}

inline FrameState random_frame(SplitMix64& rng, double alpha) {
  FrameState fr;
  fr.alpha = alpha;
  fr.u = Vec(4);
  fr.v = Vec(4);
  for (int i = 0; i < 4; ++i) fr.u[i] = rng.gaussian();
  for (int i = 0; i < 4; ++i) fr.v[i] = rng.gaussian();
  gram_schmidt(fr);
  return fr;
}

// c = ⟨Ju, v⟩ = u¹v² - u²v¹ + u³v⁴ - u⁴v³; c = ±1 at (anti-)holomorphic frames
inline double holomorphy_parameter(const FrameState& fr) {
  return fr.u[0] * fr.v[1] - fr.u[1] * fr.v[0] + fr.u[2] * fr.v[3] -
         fr.u[3] * fr.v[2];
}

inline double family_volume(double alpha) {
  return 2.0 * 3.14159265358979323846 * std::log(alpha);
}

// closed-form energies on the family: E = V, K = -cV, E₊ = (1-c)V
inline double family_e_plus(const FrameState& fr) {
  return (1.0 - holomorphy_parameter(fr)) * family_volume(fr.alpha);
}

// Equivariant lift sampled in log coordinates, value e^s(cos θ u + sin θ v),
// twist (1, 0). Carries its exact tangent for quadratures.
inline MapField family_map(const FrameState& fr, ModelPtr source, ModelPtr target,
                           int ns, int nt) {
  const Vec u = fr.u, v = fr.v;
  MapField f = map_from(std::move(source), std::move(target), ns, nt,
                        TwistData{1, 0}, [u, v](const Vec& p) {
                          const double es = std::exp(p[0]);
                          const double cth = std::cos(p[1]), sth = std::sin(p[1]);
                          Vec y(4);
                          for (int i = 0; i < 4; ++i)
                            y[i] = es * (cth * u[i] + sth * v[i]);
                          return y;
                        });
  const double ds = f.grid.ds(), dt = f.grid.dtheta();
  f.analytic_tangent = [u, v, ds, dt](int is, int ith) {
    const double es = std::exp(is * ds);
    const double cth = std::cos(ith * dt), sth = std::sin(ith * dt);
    Mat Tf(4, 2);
    for (int i = 0; i < 4; ++i) {
      Tf[i][0] = es * (cth * u[i] + sth * v[i]);
      Tf[i][1] = es * (-sth * u[i] + cth * v[i]);
    }
    return Tf;
  };
  return f;
}

inline MapField family_map(const FrameState& fr, int ns, int nt) {
  return family_map(fr, hopf_torus_source(fr.alpha),
                    hopf_surface_target(fr.alpha), ns, nt);
}

// A(family map) at a probe point of the covering plane, evaluated from the
// analytic lift: Tf columns are (u, v) and the source data at |x| = 1 is
// euclidean with ω_M = dx¹∧dx².
inline Vec family_A_at_probe(const Model& target, const Vec& u, const Vec& v,
                             const Vec& y) {
  const Ten3 dw = d_omega(target.geom, y);
  const Mat hinv = inverse(target.geom.metric_at(y));
  Vec A(4);
  for (int i = 0; i < 4; ++i) {
    double s = 0;
    for (int l = 0; l < 4; ++l) {
      double low = 0;
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
          low += (u[j] * v[k] - v[j] * u[k]) * dw(l, j, k);
      s += hinv[l][i] * low;
    }
    A[i] = 0.5 * s;
  }
  return A;
}

struct FrameVelocity {
  Vec du, dv;
  double projection_residual = 0;  // |raw - tangent-projected|, should vanish
};

// ODE right-hand side: A at the two probes, projected onto the tangent space
// of V₂(R⁴). The projection is asserted to be a no-op (the field is tangent
// by construction).
inline FrameVelocity frame_vector_field(const FrameState& fr) {
  const ModelPtr target = hopf_surface_target(fr.alpha);
  FrameVelocity vel;
  const Vec a = family_A_at_probe(*target, fr.u, fr.v, fr.u);
  const Vec b = family_A_at_probe(*target, fr.u, fr.v, fr.v);
  const double mu = 0.5 * (a.dot(fr.v) + b.dot(fr.u));
  vel.du = Vec(4);
  vel.dv = Vec(4);
  double resid2 = 0;
  for (int i = 0; i < 4; ++i) {
    const double pu = a.dot(fr.u) * fr.u[i] + mu * fr.v[i];
    const double pv = b.dot(fr.v) * fr.v[i] + mu * fr.u[i];
    vel.du[i] = a[i] - pu;
    vel.dv[i] = b[i] - pv;
    resid2 += pu * pu + pv * pv;
  }
  vel.projection_residual = std::sqrt(resid2);
  if (vel.projection_residual >
      1e-6 * (1.0 + std::sqrt(a.norm2() + b.norm2())))
    throw error("frame vector field unexpectedly non-tangent to V2(R4)");
  return vel;
}

enum class FrameClass { holomorphic, anti_holomorphic, non_converged };

inline const char* to_string(FrameClass c) {
  switch (c) {
    case FrameClass::holomorphic: return "holomorphic";
    case FrameClass::anti_holomorphic: return "anti_holomorphic";
    default: return "non_converged";
  }
}

struct FrameTrajectoryRow {
  double t;
  FrameState frame;
  double c;
  double e_plus;
};

struct FrameFlowResult {
  std::vector<FrameTrajectoryRow> rows;
  FrameState final_frame;
  FrameClass classification = FrameClass::non_converged;
  double convergence_time = -1.0;  // first time |c ∓ 1| < tol, -1 if never
  bool e_plus_monotone = true;     // within per-step slack
};

// Classical RK4 with a Gram-Schmidt retraction after every step.
inline FrameFlowResult frame_flow(const FrameState& fr0, double dt, double t_max,
                                  int report_every = 1,
                                  double class_tol = 1e-6) {
  if (!(dt > 0)) throw config_error("dt", "frame flow step must be positive");
  FrameFlowResult out;
  FrameState fr = fr0;
  const double V = family_volume(fr.alpha);
  double t = 0;
  double prev_ep = family_e_plus(fr);
  out.rows.push_back({t, fr, holomorphy_parameter(fr), prev_ep});

  auto classify = [&](double c) -> FrameClass {
    if (std::fabs(c - 1.0) < class_tol) return FrameClass::holomorphic;
    if (std::fabs(c + 1.0) < class_tol) return FrameClass::anti_holomorphic;
    return FrameClass::non_converged;
  };

  const int steps = static_cast<int>(std::ceil(t_max / dt));
  for (int k = 0; k < steps; ++k) {
    const FrameVelocity k1 = frame_vector_field(fr);
    FrameState tmp = fr;
    auto advance = [](const FrameState& base, const FrameVelocity& vel,
                      double h) {
      FrameState r = base;
      for (int i = 0; i < 4; ++i) {
        r.u[i] += h * vel.du[i];
        r.v[i] += h * vel.dv[i];
      }
      return r;
    };
    tmp = advance(fr, k1, dt / 2);
    const FrameVelocity k2 = frame_vector_field(tmp);
    tmp = advance(fr, k2, dt / 2);
    const FrameVelocity k3 = frame_vector_field(tmp);
    tmp = advance(fr, k3, dt);
    const FrameVelocity k4 = frame_vector_field(tmp);
    for (int i = 0; i < 4; ++i) {
      fr.u[i] += dt / 6.0 *
                 (k1.du[i] + 2 * k2.du[i] + 2 * k3.du[i] + k4.du[i]);
      fr.v[i] += dt / 6.0 *
                 (k1.dv[i] + 2 * k2.dv[i] + 2 * k3.dv[i] + k4.dv[i]);
    }
    gram_schmidt(fr);
    t = (k + 1) * dt;

    const double c = holomorphy_parameter(fr);
    const double ep = (1.0 - c) * V;
    if (ep > prev_ep + 1e-9) out.e_plus_monotone = false;
    prev_ep = ep;
    if ((k + 1) % report_every == 0 || k + 1 == steps)
      out.rows.push_back({t, fr, c, ep});
    if (out.convergence_time < 0 && classify(c) != FrameClass::non_converged)
      out.convergence_time = t;
  }
  // seeds already at a minimum count as converged at t = 0
  if (classify(holomorphy_parameter(fr0)) != FrameClass::non_converged)
    out.convergence_time = 0.0;

  out.final_frame = fr;
  out.classification = classify(holomorphy_parameter(fr));
  return out;
}

// c of a grid state, read off through the quadrature K = -cV.
inline double family_c_estimate(const MapField& f) {
  const double V = family_volume(f.target->alpha);
  return -energy(f, 1.0).K / V;
}

}  // namespace dbar
