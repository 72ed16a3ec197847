#pragma once

// Discrete Laplace-Beltrami operator on the round sphere and its first
// nonzero eigenvalue, for the λ₁ ≥ 2α experiment. The grid lives in the
// geodesic polar chart (φ shifted half a cell off the poles); the flux-form
// coefficients √g g^{αβ} are read off the chart's metric closures, and λ₁ is
// found by inverse power iteration with the constants deflated.

#include <algorithm>
#include <vector>

#include "dbar/models.hpp"

namespace dbar {

struct SphereSpectrumOptions {
  int resolution = 64;  // φ cells; θ gets twice as many
  int max_outer = 200;
  int max_cg = 20000;
  double tol = 1e-10;
};

class SphereLaplacian {
 public:
  explicit SphereLaplacian(double radius, int resolution) {
    if (resolution < 32)
      throw config_error("resolution", "spectrum grid must be at least 32");
    nphi_ = resolution;
    ntheta_ = 2 * resolution;
    h_ = 3.14159265358979323846 / nphi_;
    ht_ = 2.0 * 3.14159265358979323846 / ntheta_;
    const ChartGeometry polar = sphere_polar_chart(radius);
    auto sqrt_det = [&](double phi) {
      return std::sqrt(det(polar.metric_at(Vec{phi, 0.0})));
    };
    auto flux_phi = [&](double phi) {  // √g g^{φφ}
      const Vec p{phi, 0.0};
      return sqrt_det(phi) * inverse(polar.metric_at(p))[0][0];
    };
    auto flux_theta = [&](double phi) {  // √g g^{θθ}
      const Vec p{phi, 0.0};
      return sqrt_det(phi) * inverse(polar.metric_at(p))[1][1];
    };
    w_.resize(nphi_);
    a_half_.resize(nphi_ + 1);
    b_.resize(nphi_);
    for (int j = 0; j < nphi_; ++j) {
      const double phi = (j + 0.5) * h_;
      w_[j] = sqrt_det(phi);
      b_[j] = flux_theta(phi);
    }
    a_half_[0] = 0.0;      // no flux through the poles
    a_half_[nphi_] = 0.0;
    for (int j = 1; j < nphi_; ++j) a_half_[j] = flux_phi(j * h_);
  }

  int size() const { return nphi_ * ntheta_; }
  int nphi() const { return nphi_; }
  int ntheta() const { return ntheta_; }

  // y = -Δu
  void apply(const std::vector<double>& u, std::vector<double>& y) const {
    for (int j = 0; j < nphi_; ++j) {
      const double inv_w = 1.0 / w_[j];
      for (int k = 0; k < ntheta_; ++k) {
        const int kp = (k + 1) % ntheta_, km = (k + ntheta_ - 1) % ntheta_;
        const double uc = at(u, j, k);
        double flux = 0;
        if (j + 1 < nphi_) flux += a_half_[j + 1] * (at(u, j + 1, k) - uc);
        if (j > 0) flux -= a_half_[j] * (uc - at(u, j - 1, k));
        flux /= h_ * h_;
        flux += b_[j] * (at(u, j, kp) - 2 * uc + at(u, j, km)) / (ht_ * ht_);
        y[idx(j, k)] = -flux * inv_w;
      }
    }
  }

  double weighted_dot(const std::vector<double>& u,
                      const std::vector<double>& v) const {
    double s = 0;
    for (int j = 0; j < nphi_; ++j)
      for (int k = 0; k < ntheta_; ++k) s += w_[j] * at(u, j, k) * at(v, j, k);
    return s;
  }

  void deflate_constants(std::vector<double>& u) const {
    double s = 0, wsum = 0;
    for (int j = 0; j < nphi_; ++j)
      for (int k = 0; k < ntheta_; ++k) {
        s += w_[j] * at(u, j, k);
        wsum += w_[j];
      }
    const double mean = s / wsum;
    for (double& x : u) x -= mean;
  }

 private:
  int idx(int j, int k) const { return j * ntheta_ + k; }
  double at(const std::vector<double>& u, int j, int k) const {
    return u[idx(j, k)];
  }

  int nphi_ = 0, ntheta_ = 0;
  double h_ = 0, ht_ = 0;
  std::vector<double> w_, a_half_, b_;
};

// Smallest nonzero eigenvalue of -Δ on the sphere model.
inline double eigenvalue_experiment(const Model& sphere,
                                    const SphereSpectrumOptions& opt = {}) {
  if (sphere.name != "round_sphere")
    throw config_error("model", "spectrum command needs a round_sphere model");
  const SphereLaplacian L(sphere.radius, opt.resolution);
  const int n = L.size();

  std::vector<double> u(n), y(n), r(n), p(n), Ap(n);
  for (int j = 0; j < L.nphi(); ++j)
    for (int k = 0; k < L.ntheta(); ++k)
      u[j * L.ntheta() + k] = std::cos((j + 0.5) * 3.14159265358979323846 / L.nphi());
  L.deflate_constants(u);

  auto cg_solve = [&](const std::vector<double>& b, std::vector<double>& x) {
    // CG in the weighted inner product, restricted to functions ⊥ constants
    std::fill(x.begin(), x.end(), 0.0);
    r = b;
    L.deflate_constants(r);
    p = r;
    double rr = L.weighted_dot(r, r);
    const double b2 = rr;
    for (int it = 0; it < opt.max_cg; ++it) {
      if (rr <= opt.tol * opt.tol * b2) return;
      L.apply(p, Ap);
      const double pAp = L.weighted_dot(p, Ap);
      if (!(pAp > 0)) throw eigensolver_error("indefinite operator in CG");
      const double alpha = rr / pAp;
      for (int i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * Ap[i];
      }
      L.deflate_constants(r);
      const double rr_new = L.weighted_dot(r, r);
      const double beta = rr_new / rr;
      rr = rr_new;
      for (int i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    throw eigensolver_error("CG did not converge within the iteration cap");
  };

  double lambda = 0, lambda_prev = -1;
  std::vector<double> x(n);
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    cg_solve(u, x);
    L.deflate_constants(x);
    const double nx = std::sqrt(L.weighted_dot(x, x));
    if (!(nx > 0)) throw eigensolver_error("inverse iteration collapsed");
    for (int i = 0; i < n; ++i) u[i] = x[i] / nx;
    L.apply(u, y);
    lambda = L.weighted_dot(u, y) / L.weighted_dot(u, u);
    if (lambda_prev > 0 && std::fabs(lambda - lambda_prev) < 1e-11 * lambda)
      return lambda;
    lambda_prev = lambda;
  }
  throw eigensolver_error("inverse power iteration did not settle");
}

}  // namespace dbar
