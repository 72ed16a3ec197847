#pragma once

// Smooth random periodic fields from truncated Fourier series with a decaying
// spectrum. All coefficients are drawn in a fixed order from the documented
// splitmix generator, so a seed pins the field exactly.

#include "dbar/grid.hpp"
#include "dbar/hopf_family.hpp"
#include "dbar/rng.hpp"

namespace dbar {

struct FourierSeries2D {
  int max_mode = 2;
  std::vector<double> a, b;  // per (k1, k2) pair, row-major over the mode box

  static FourierSeries2D draw(SplitMix64& rng, int max_mode, double amplitude) {
    FourierSeries2D f;
    f.max_mode = max_mode;
    const int rows = max_mode + 1, cols = 2 * max_mode + 1;
    f.a.resize(static_cast<std::size_t>(rows) * cols);
    f.b.resize(f.a.size());
    for (std::size_t i = 0; i < f.a.size(); ++i) {
      f.a[i] = amplitude * rng.gaussian();
      f.b[i] = amplitude * rng.gaussian();
    }
    return f;
  }

  // xs, xt are fractional coordinates in [0, 1)
  double eval(double xs, double xt) const {
    const double twopi = 2.0 * 3.14159265358979323846;
    double s = 0;
    std::size_t idx = 0;
    for (int k1 = 0; k1 <= max_mode; ++k1)
      for (int k2 = -max_mode; k2 <= max_mode; ++k2, ++idx) {
        const double decay = 1.0 / std::pow(1.0 + k1 * k1 + k2 * k2, 1.5);
        const double w = twopi * (k1 * xs + k2 * xt);
        s += decay * (a[idx] * std::cos(w) + b[idx] * std::sin(w));
      }
    return s;
  }
};

// Family map with an equivariant smooth perturbation: the periodic Fourier
// part rides on the e^s conformal factor so the twist rule stays exact.
inline MapField perturbed_family_map(const FrameState& fr, int ns, int nt,
                                     SplitMix64& rng, double amplitude,
                                     int max_mode = 2) {
  MapField f = family_map(fr, ns, nt);
  f.analytic_tangent = nullptr;
  std::vector<FourierSeries2D> comp;
  for (int c = 0; c < 4; ++c)
    comp.push_back(FourierSeries2D::draw(rng, max_mode, amplitude));
  const double Ps = f.grid.period_s, Pt = f.grid.period_theta;
  for (int is = 0; is < f.grid.n_s; ++is)
    for (int ith = 0; ith < f.grid.n_theta; ++ith) {
      const Vec p = f.position(is, ith);
      Vec y = f.node(is, ith);
      const double es = std::exp(p[0]);
      for (int c = 0; c < 4; ++c)
        y[c] += es * comp[c].eval(p[0] / Ps, p[1] / Pt);
      f.set_node(is, ith, y);
    }
  f.check_valid();
  return f;
}

// Linear winding map between flat tori plus a periodic perturbation.
inline MapField random_flat_torus_map(SplitMix64& rng, ModelPtr source,
                                      ModelPtr target, int ns, int nt,
                                      TwistData winding, double amplitude,
                                      int max_mode = 2) {
  const Mat B = target->lattice;
  std::vector<FourierSeries2D> comp;
  for (int c = 0; c < 2; ++c)
    comp.push_back(FourierSeries2D::draw(rng, max_mode, amplitude));
  MapField f = map_from(
      std::move(source), std::move(target), ns, nt, winding,
      [&](const Vec& p) {
        Vec y(2);
        for (int i = 0; i < 2; ++i)
          y[i] = winding.deck_power_s * B[i][0] * p[0] +
                 winding.deck_power_theta * B[i][1] * p[1] +
                 comp[i].eval(p[0], p[1]);
        return y;
      });
  return f;
}

// Near-constant map into the sphere's chart plus a periodic perturbation.
inline MapField random_sphere_map(SplitMix64& rng, ModelPtr source,
                                  ModelPtr target, int ns, int nt,
                                  const Vec& center, double amplitude,
                                  int max_mode = 2) {
  std::vector<FourierSeries2D> comp;
  for (int c = 0; c < 2; ++c)
    comp.push_back(FourierSeries2D::draw(rng, max_mode, amplitude));
  const double Ps = source->periods[0], Pt = source->periods[1];
  return map_from(std::move(source), std::move(target), ns, nt, TwistData{},
                  [&](const Vec& p) {
                    Vec y(2);
                    for (int i = 0; i < 2; ++i)
                      y[i] = center[i] + comp[i].eval(p[0] / Ps, p[1] / Pt);
                    return y;
                  });
}

// Periodic variation field; for multiplicative decks the periodic part rides
// on the same exponential factor the field's twist implies.
inline VariationField random_variation(SplitMix64& rng, const MapField& f,
                                       double amplitude, int max_mode = 2) {
  VariationField v = VariationField::zeros(f);
  std::vector<FourierSeries2D> comp;
  for (int c = 0; c < f.dim(); ++c)
    comp.push_back(FourierSeries2D::draw(rng, max_mode, amplitude));
  const double Ps = f.grid.period_s, Pt = f.grid.period_theta;
  const bool scaled = f.target->deck_scale[0] != 1.0 || f.target->deck_scale[1] != 1.0;
  double ks = 0, kt = 0;
  if (scaled) {
    ks = f.twist.deck_power_s * std::log(f.target->deck_scale[0]) / Ps;
    kt = f.twist.deck_power_theta * std::log(f.target->deck_scale[1]) / Pt;
  }
  for (int is = 0; is < f.grid.n_s; ++is)
    for (int ith = 0; ith < f.grid.n_theta; ++ith) {
      const Vec p = f.position(is, ith);
      const double factor = scaled ? std::exp(ks * p[0] + kt * p[1]) : 1.0;
      Vec w(f.dim());
      for (int c = 0; c < f.dim(); ++c)
        w[c] = factor * comp[c].eval(p[0] / Ps, p[1] / Pt);
      v.set_node(f, is, ith, w);
    }
  return v;
}

}  // namespace dbar
