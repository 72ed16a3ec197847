#include <catch2/catch_amalgamated.hpp>

#include "dbar/geometry.hpp"
#include "dbar/models.hpp"
#include "dbar/rng.hpp"

using namespace dbar;

namespace {

Vec random_hopf_point(SplitMix64& rng) {
  Vec y(4);
  do {
    for (int i = 0; i < 4; ++i) y[i] = rng.uniform(-2.0, 2.0);
  } while (y.norm() < 0.3);
  return y;
}

// conformal-metric oracle for h = e^φ δ: Γ^i_{jk} = ½(δ^i_j φ_k + δ^i_k φ_j - δ_{jk} φ_i)
Ten3 conformal_christoffel_oracle(const Vec& y) {
  const double r2 = y.norm2();
  Vec phi(4);
  for (int k = 0; k < 4; ++k) phi[k] = -2.0 * y[k] / r2;  // φ = -2 log ρ
  Ten3 g(4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        g(i, j, k) = 0.5 * ((i == j ? phi[k] : 0.0) + (i == k ? phi[j] : 0.0) -
                            (j == k ? phi[i] : 0.0));
  return g;
}

// wedge-form oracle: dω = dμ ∧ η with μ = ρ⁻², η = dy¹∧dy² + dy³∧dy⁴
Ten3 hopf_domega_oracle(const Vec& y) {
  const double r2 = y.norm2();
  Vec dmu(4);
  for (int k = 0; k < 4; ++k) dmu[k] = -2.0 * y[k] / (r2 * r2);
  Mat eta(4, 4);
  eta[0][1] = 1;
  eta[1][0] = -1;
  eta[2][3] = 1;
  eta[3][2] = -1;
  Ten3 r(4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        r(i, j, k) = dmu[i] * eta[j][k] + dmu[j] * eta[k][i] + dmu[k] * eta[i][j];
  return r;
}

}  // namespace

TEST_CASE("christoffel symbols") {
  SECTION("constant metrics have vanishing symbols") {
    for (const ModelPtr& m :
         {euclidean_model(4), flat_torus_source(), hopf_torus_source(2.0)}) {
      const Vec p(m->geom.dim);
      REQUIRE(max_abs(christoffel(m->geom, p)) == 0.0);
    }
  }

  SECTION("hopf covering metric at (1,0,0,0)") {
    const ModelPtr hopf = hopf_surface_target(2.0);
    const Ten3 g = christoffel(hopf->geom, Vec{1, 0, 0, 0});
    CHECK(g(0, 0, 0) == Catch::Approx(-1.0).margin(1e-13));
  }

  SECTION("matches the conformal-metric oracle at random points") {
    const ModelPtr hopf = hopf_surface_target(2.0);
    SplitMix64 rng(11);
    for (int t = 0; t < 20; ++t) {
      const Vec y = random_hopf_point(rng);
      const Ten3 got = christoffel(hopf->geom, y);
      const Ten3 want = conformal_christoffel_oracle(y);
      double worst = 0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          for (int k = 0; k < 4; ++k) {
            worst = std::max(worst, std::fabs(got(i, j, k) - want(i, j, k)));
            CHECK(got(i, j, k) == Catch::Approx(got(i, k, j)).margin(1e-14));
          }
      REQUIRE(worst < 1e-12);
    }
  }

  SECTION("singular metric raises a degenerate-metric error") {
    ChartGeometry bad = euclidean_model(2)->geom;
    bad.metric_at = [](const Vec&) { return Mat::zero(2, 2); };
    REQUIRE_THROWS_AS(christoffel(bad, Vec{0, 0}), degenerate_metric_error);
  }
}

TEST_CASE("fundamental form") {
  SECTION("euclidean R4") {
    const Mat w = fundamental_form(euclidean_model(4)->geom, Vec(4));
    CHECK(w[0][1] == 1.0);
    CHECK(w[2][3] == 1.0);
    CHECK(w[1][0] == -1.0);
    CHECK(w[3][2] == -1.0);
    CHECK(w[0][2] == 0.0);
    CHECK(w[0][3] == 0.0);
  }

  SECTION("hopf covering at rho = 2") {
    const Mat w = fundamental_form(hopf_surface_target(2.0)->geom, Vec{2, 0, 0, 0});
    CHECK(w[0][1] == Catch::Approx(0.25).margin(1e-15));
    CHECK(w[2][3] == Catch::Approx(0.25).margin(1e-15));
  }

  SECTION("skew symmetry at random points") {
    SplitMix64 rng(3);
    const ModelPtr hopf = hopf_surface_target(2.0);
    for (int t = 0; t < 50; ++t) {
      const Mat w = fundamental_form(hopf->geom, random_hopf_point(rng));
      REQUIRE(max_abs(w + transpose(w)) < 1e-14);
    }
  }
}

TEST_CASE("exterior derivative of the fundamental form") {
  SECTION("vanishes on Kahler models") {
    for (const ModelPtr& m :
         {euclidean_model(4), flat_torus_source(), round_sphere_model(1.0)}) {
      const Vec p = (m->geom.dim == 4) ? Vec{0.3, -0.2, 0.5, 0.1} : Vec{0.3, -0.2};
      REQUIRE(max_abs(d_omega(m->geom, p)) < 1e-14);
    }
  }

  SECTION("hopf value at (1,0,0,0)") {
    const Ten3 dw = d_omega(hopf_surface_target(2.0)->geom, Vec{1, 0, 0, 0});
    CHECK(dw(0, 2, 3) == Catch::Approx(-2.0).margin(1e-13));
  }

  SECTION("matches the wedge-form oracle and is fully antisymmetric") {
    SplitMix64 rng(17);
    const ModelPtr hopf = hopf_surface_target(2.0);
    for (int t = 0; t < 20; ++t) {
      const Vec y = random_hopf_point(rng);
      const Ten3 got = d_omega(hopf->geom, y);
      const Ten3 want = hopf_domega_oracle(y);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          for (int k = 0; k < 4; ++k) {
            REQUIRE(got(i, j, k) == Catch::Approx(want(i, j, k)).margin(1e-12));
            REQUIRE(got(i, j, k) == Catch::Approx(-got(j, i, k)).margin(1e-13));
            REQUIRE(got(i, j, k) == Catch::Approx(-got(i, k, j)).margin(1e-13));
          }
    }
  }

  SECTION("finite-difference mode converges at second order") {
    SplitMix64 rng(23);
    const ModelPtr hopf = hopf_surface_target(2.0);
    for (int t = 0; t < 5; ++t) {
      const Vec y = random_hopf_point(rng);
      const Ten3 exact = d_omega(hopf->geom, y);
      auto err = [&](double step) {
        const Ten3 fd = d_omega_fd(hopf->geom, y, step);
        double w = 0;
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
              w = std::max(w, std::fabs(fd(i, j, k) - exact(i, j, k)));
        return w;
      };
      const double ratio = err(2e-2) / err(1e-2);
      REQUIRE(ratio > 3.5);
      REQUIRE(ratio < 4.5);
    }
  }
}

TEST_CASE("codifferential of the fundamental form") {
  SECTION("vanishes identically on surfaces") {
    for (const ModelPtr& m :
         {flat_torus_source(), hopf_torus_source(2.0), round_sphere_model(1.5)}) {
      SplitMix64 rng(5);
      for (int t = 0; t < 30; ++t) {
        const Vec p{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const Vec ds = d_star_omega(m->geom, p);
        REQUIRE(std::fabs(ds[0]) < 1e-12);
        REQUIRE(std::fabs(ds[1]) < 1e-12);
      }
    }
  }

  SECTION("hopf covering: matches the divergence oracle and the closed form") {
    const ModelPtr hopf = hopf_surface_target(2.0);
    SplitMix64 rng(29);
    for (int t = 0; t < 20; ++t) {
      const Vec y = random_hopf_point(rng);
      const Vec got = d_star_omega(hopf->geom, y);
      const Vec fd = d_star_omega_fd(hopf->geom, y, 3e-5);
      const double r2 = y.norm2();
      const Vec Jy = matvec(rotation_J(4), y);
      double nonzero = 0;
      for (int i = 0; i < 4; ++i) {
        REQUIRE(std::fabs(got[i] - fd[i]) < 1e-8);
        REQUIRE(got[i] == Catch::Approx(2.0 * Jy[i] / r2).margin(1e-12));
        nonzero = std::max(nonzero, std::fabs(got[i]));
      }
      REQUIRE(nonzero > 0.1);
    }
  }
}

TEST_CASE("curvature") {
  SECTION("first Bianchi identity") {
    SplitMix64 rng(41);
    const ModelPtr hopf = hopf_surface_target(2.0);
    const ModelPtr sphere = round_sphere_model(1.0);
    for (int t = 0; t < 10; ++t) {
      for (const ChartGeometry* g : {&hopf->geom, &sphere->geom}) {
        const Vec p = (g->dim == 4) ? random_hopf_point(rng)
                                    : Vec{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
        const Ten4 R = riemann(*g, p);
        for (int i = 0; i < g->dim; ++i)
          for (int j = 0; j < g->dim; ++j)
            for (int k = 0; k < g->dim; ++k)
              for (int l = 0; l < g->dim; ++l)
                REQUIRE(std::fabs(R(i, j, k, l) + R(i, k, l, j) + R(i, l, j, k)) <
                        1e-10);
      }
    }
  }

  SECTION("ricci is the trace of riemann") {
    const ModelPtr sphere = round_sphere_model(1.0);
    const Vec p{0.4, -0.7};
    const Ten4 R = riemann(sphere->geom, p);
    const Mat rc = ricci(sphere->geom, p);
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l) {
        double tr = 0;
        for (int i = 0; i < 2; ++i) tr += R(i, j, i, l);
        REQUIRE(rc[j][l] == tr);
      }
  }

  SECTION("curvature from analytic jets agrees with finite-difference jets") {
    const ModelPtr sphere = round_sphere_model(1.0);
    const ChartGeometry fd = with_fd_jets(sphere->geom);
    SplitMix64 rng(5);
    for (int t = 0; t < 5; ++t) {
      const Vec p{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      REQUIRE(max_abs(ricci(sphere->geom, p) - ricci(fd, p)) < 1e-6);
    }
  }
}

TEST_CASE("almost Hermitian invariants across models") {
  SplitMix64 rng(59);
  struct Entry {
    ChartGeometry geom;
    std::function<Vec()> sample;
  };
  std::vector<Entry> entries;
  entries.push_back({euclidean_model(4)->geom, [&rng] {
                       Vec y(4);
                       for (int i = 0; i < 4; ++i) y[i] = rng.uniform(-2, 2);
                       return y;
                     }});
  entries.push_back({hopf_surface_target(2.0)->geom,
                     [&rng] { return random_hopf_point(rng); }});
  entries.push_back({round_sphere_model(2.0)->geom, [&rng] {
                       return Vec{rng.uniform(-3, 3), rng.uniform(-3, 3)};
                     }});
  entries.push_back({sphere_polar_chart(1.0), [&rng] {
                       return Vec{rng.uniform(0.3, 2.8), rng.uniform(0, 6.2)};
                     }});
  for (const Entry& e : entries) {
    for (int t = 0; t < 100; ++t) {
      const Vec p = e.sample();
      const Mat g = e.geom.metric_at(p), J = e.geom.J_at(p);
      REQUIRE(min_eigenvalue_sym(g) > 0.0);
      const Mat JJ = matmul(J, J);
      REQUIRE(max_abs(JJ + Mat::identity(e.geom.dim)) < 1e-12);
      REQUIRE(max_abs(matmul(transpose(J), matmul(g, J)) - g) < 1e-12);
      const Mat w = fundamental_form(e.geom, p);
      REQUIRE(max_abs(w + transpose(w)) < 1e-12);
    }
  }
}

TEST_CASE("two-form inner product normalization") {
  // |ω|² = 2m in real dimension 2m under the tensor normalization
  const ModelPtr e4 = euclidean_model(4);
  const Mat w4 = fundamental_form(e4->geom, Vec(4));
  CHECK(two_form_inner(w4, w4, Mat::identity(4)) == Catch::Approx(4.0));
  const ModelPtr t2 = flat_torus_source();
  const Mat w2 = fundamental_form(t2->geom, Vec(2));
  CHECK(two_form_inner(w2, w2, inverse(t2->geom.metric_at(Vec(2)))) ==
        Catch::Approx(2.0));
}

TEST_CASE("hopf metric rejects the puncture") {
  const ModelPtr hopf = hopf_surface_target(2.0);
  REQUIRE_THROWS_AS(hopf->geom.metric_at(Vec{0, 0, 0, 0}), puncture_error);
  REQUIRE_THROWS_AS(hopf->geom.metric_at(Vec{1e-9, 0, 0, 0}), puncture_error);
}
