#include <catch2/catch_amalgamated.hpp>

#include "dbar/rng.hpp"
#include "dbar/spectrum.hpp"

using namespace dbar;

TEST_CASE("discrete Laplace-Beltrami operator on the sphere") {
  const SphereLaplacian L(1.0, 32);

  SECTION("constants are in the kernel (after deflation)") {
    std::vector<double> u(L.size(), 2.5), y(L.size());
    L.apply(u, y);
    double worst = 0;
    for (double x : y) worst = std::max(worst, std::fabs(x));
    REQUIRE(worst < 1e-12);
    L.deflate_constants(u);
    for (double x : u) REQUIRE(std::fabs(x) < 1e-12);
  }

  SECTION("self-adjoint in the weighted inner product") {
    std::vector<double> u(L.size()), v(L.size()), Au(L.size()), Av(L.size());
    SplitMix64 rng(61);
    for (int i = 0; i < L.size(); ++i) {
      u[i] = rng.gaussian();
      v[i] = rng.gaussian();
    }
    L.apply(u, Au);
    L.apply(v, Av);
    const double a = L.weighted_dot(Au, v), b = L.weighted_dot(u, Av);
    REQUIRE(a == Catch::Approx(b).epsilon(1e-11));
    // and positive semidefinite
    REQUIRE(L.weighted_dot(Au, u) >= -1e-10);
  }

  SECTION("z = cos φ is an approximate eigenfunction with eigenvalue 2") {
    std::vector<double> u(L.size()), y(L.size());
    for (int j = 0; j < L.nphi(); ++j)
      for (int k = 0; k < L.ntheta(); ++k)
        u[j * L.ntheta() + k] = std::cos((j + 0.5) * 3.14159265358979323846 / L.nphi());
    L.apply(u, y);
    const double rayleigh = L.weighted_dot(u, y) / L.weighted_dot(u, u);
    REQUIRE(rayleigh == Catch::Approx(2.0).margin(5e-3));
  }
}

TEST_CASE("first nonzero eigenvalue") {
  SECTION("radius 1: λ₁ → 2 within discretization error") {
    SphereSpectrumOptions opt;
    opt.resolution = 32;
    const double l32 = eigenvalue_experiment(*round_sphere_model(1.0), opt);
    REQUIRE(std::fabs(l32 - 2.0) / 2.0 < 0.02);
    opt.resolution = 64;
    const double l64 = eigenvalue_experiment(*round_sphere_model(1.0), opt);
    REQUIRE(std::fabs(l64 - 2.0) / 2.0 < 0.02);
    // the bound λ₁ ≥ 2α is met within the stated discretization slack
    REQUIRE(l64 >= 2.0 * 0.98);
    // second-order convergence toward the analytic spectrum
    REQUIRE(std::fabs(l64 - 2.0) < std::fabs(l32 - 2.0));
  }

  SECTION("radius 2 scales the spectrum by 1/4 exactly in the discrete model") {
    SphereSpectrumOptions opt;
    opt.resolution = 32;
    const double l1 = eigenvalue_experiment(*round_sphere_model(1.0), opt);
    const double l2 = eigenvalue_experiment(*round_sphere_model(2.0), opt);
    REQUIRE(l2 == Catch::Approx(l1 / 4.0).epsilon(1e-6));
    REQUIRE(l2 >= 2.0 * 0.25 * 0.98);  // λ₁ ≥ 2α with α = 1/4
  }

  SECTION("resolution below the contract is rejected") {
    SphereSpectrumOptions opt;
    opt.resolution = 16;
    REQUIRE_THROWS_AS(eigenvalue_experiment(*round_sphere_model(1.0), opt),
                      config_error);
  }

  SECTION("iteration caps surface as eigensolver errors") {
    SphereSpectrumOptions opt;
    opt.resolution = 32;
    opt.max_cg = 3;
    REQUIRE_THROWS_AS(eigenvalue_experiment(*round_sphere_model(1.0), opt),
                      eigensolver_error);
  }

  SECTION("only sphere models are accepted") {
    SphereSpectrumOptions opt;
    REQUIRE_THROWS_AS(eigenvalue_experiment(*euclidean_model(2), opt), config_error);
  }
}
