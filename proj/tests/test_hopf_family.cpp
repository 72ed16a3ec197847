#include <catch2/catch_amalgamated.hpp>

#include "dbar/csv.hpp"
#include "dbar/random_fields.hpp"
#include "dbar/verify.hpp"

using namespace dbar;

namespace {
const double kAlpha = 2.0;

// Riemannian gradient of E₊(u,v) = (1 - ⟨Ju,v⟩)V on V₂(R⁴) by centered
// differences along retracted curves; the independent oracle for the ODE
// right-hand side (which must equal -(2/V) times it... up to the metric
// normalization worked out below, the match is asserted up to one scale).
std::pair<Vec, Vec> stiefel_fd_gradient(const FrameState& fr, double h) {
  Vec gu(4), gv(4);
  for (int i = 0; i < 4; ++i) {
    for (int comp = 0; comp < 2; ++comp) {
      FrameState p = fr, m = fr;
      Vec& pu = comp == 0 ? p.u : p.v;
      Vec& mu = comp == 0 ? m.u : m.v;
      pu[i] += h;
      mu[i] -= h;
      gram_schmidt(p);
      gram_schmidt(m);
      const double d = (family_e_plus(p) - family_e_plus(m)) / (2 * h);
      (comp == 0 ? gu : gv)[i] = d;
    }
  }
  return {gu, gv};
}

}  // namespace

TEST_CASE("frame state") {
  REQUIRE_THROWS_AS(make_frame(Vec{1, 0, 0, 0}, Vec{0.5, 0.5, 0.5, 0.5}, kAlpha),
                    config_error);
  FrameState fr;
  fr.alpha = kAlpha;
  fr.u = Vec{3, 0, 0, 0};
  fr.v = Vec{1, 1, 0, 0};
  gram_schmidt(fr);
  REQUIRE(std::fabs(fr.u.norm() - 1) < 1e-15);
  REQUIRE(std::fabs(fr.v.norm() - 1) < 1e-15);
  REQUIRE(std::fabs(fr.u.dot(fr.v)) < 1e-15);
}

TEST_CASE("holomorphy parameter") {
  CHECK(holomorphy_parameter(make_frame(Vec{1, 0, 0, 0}, Vec{0, 1, 0, 0}, 2)) == 1.0);
  CHECK(holomorphy_parameter(make_frame(Vec{1, 0, 0, 0}, Vec{0, 0, 1, 0}, 2)) == 0.0);
  CHECK(holomorphy_parameter(make_frame(Vec{1, 0, 0, 0}, Vec{0, -1, 0, 0}, 2)) == -1.0);
  // c = ⟨Ju, v⟩ stays in [-1, 1] on random frames
  SplitMix64 rng(31);
  for (int t = 0; t < 100; ++t) {
    const double c = holomorphy_parameter(random_frame(rng, 2.0));
    REQUIRE(c >= -1.0 - 1e-12);
    REQUIRE(c <= 1.0 + 1e-12);
  }
}

TEST_CASE("family map samples the equivariant lift") {
  const FrameState fr = make_frame(Vec{1, 0, 0, 0}, Vec{0, 1, 0, 0}, kAlpha);
  const MapField f = family_map(fr, 16, 16);
  REQUIRE(f.twist.deck_power_s == 1);
  REQUIRE(f.twist.deck_power_theta == 0);

  // node (s=0, θ=0) is u; node (s=0, θ=π/2) is v
  const Vec at0 = f.node(0, 0);
  REQUIRE(at0[0] == 1.0);
  REQUIRE(at0[1] == 0.0);
  const Vec at4 = f.node(0, 4);  // θ = 2π·4/16 = π/2
  REQUIRE(at4[0] == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(at4[1] == Catch::Approx(1.0).margin(1e-15));

  // isometric: |Tf|² = 2 pointwise through the analytic tangent
  SplitMix64 rng(32);
  for (int t = 0; t < 5; ++t) {
    const FrameState r = random_frame(rng, kAlpha);
    const MapField g = family_map(r, 32, 32);
    const EnergyReport rep = energy(g, 1.0);
    REQUIRE(std::fabs(rep.sup_dTf - std::sqrt(2.0)) < 1e-12);
    // and via stencils it converges there
    MapField gs = g;
    gs.analytic_tangent = nullptr;
    REQUIRE(std::fabs(energy(gs, 1.0).sup_dTf - std::sqrt(2.0)) < 1e-2);
  }
}

TEST_CASE("frame vector field") {
  SECTION("vanishes exactly at v = ±e2") {
    for (double sign : {1.0, -1.0}) {
      const FrameState fr =
          make_frame(Vec{1, 0, 0, 0}, Vec{0, sign, 0, 0}, kAlpha);
      const FrameVelocity vel = frame_vector_field(fr);
      REQUIRE(std::sqrt(vel.du.norm2() + vel.dv.norm2()) < 1e-8);
    }
  }

  SECTION("nonzero at (e1,e3), orthogonal to the frame plane") {
    const FrameState fr = make_frame(Vec{1, 0, 0, 0}, Vec{0, 0, 1, 0}, kAlpha);
    const FrameVelocity vel = frame_vector_field(fr);
    REQUIRE(std::sqrt(vel.du.norm2() + vel.dv.norm2()) > 1.0);
    REQUIRE(std::fabs(vel.du.dot(fr.u)) < 1e-12);
    REQUIRE(std::fabs(vel.du.dot(fr.v)) + std::fabs(vel.dv.dot(fr.u)) < 1e-12);
    REQUIRE(std::fabs(vel.dv.dot(fr.v)) < 1e-12);
  }

  SECTION("matches the closed form -2(cu + Jv), -2(cv - Ju)") {
    SplitMix64 rng(33);
    const Mat J = rotation_J(4);
    for (int t = 0; t < 20; ++t) {
      const FrameState fr = random_frame(rng, kAlpha);
      const double c = holomorphy_parameter(fr);
      const Vec Ju = matvec(J, fr.u), Jv = matvec(J, fr.v);
      const FrameVelocity vel = frame_vector_field(fr);
      for (int i = 0; i < 4; ++i) {
        REQUIRE(vel.du[i] ==
                Catch::Approx(-2 * (c * fr.u[i] + Jv[i])).margin(1e-12));
        REQUIRE(vel.dv[i] ==
                Catch::Approx(-2 * (c * fr.v[i] - Ju[i])).margin(1e-12));
      }
      REQUIRE(vel.projection_residual < 1e-12);
    }
  }

  SECTION("matches the Stiefel gradient of E₊ up to the -2/V factor") {
    SplitMix64 rng(34);
    const double V = family_volume(kAlpha);
    for (int t = 0; t < 5; ++t) {
      const FrameState fr = random_frame(rng, kAlpha);
      const FrameVelocity vel = frame_vector_field(fr);
      const auto [gu, gv] = stiefel_fd_gradient(fr, 1e-5);
      for (int i = 0; i < 4; ++i) {
        REQUIRE(vel.du[i] == Catch::Approx(-2.0 / V * gu[i]).margin(1e-6));
        REQUIRE(vel.dv[i] == Catch::Approx(-2.0 / V * gv[i]).margin(1e-6));
      }
    }
  }

  SECTION("unitary equivariance") {
    SplitMix64 rng(35);
    for (int t = 0; t < 10; ++t) {
      const FrameState fr = random_frame(rng, kAlpha);
      const Mat U = random_unitary4(rng);
      FrameState Ufr = fr;
      Ufr.u = matvec(U, fr.u);
      Ufr.v = matvec(U, fr.v);
      const FrameVelocity a = frame_vector_field(fr);
      const FrameVelocity b = frame_vector_field(Ufr);
      const Vec Udu = matvec(U, a.du), Udv = matvec(U, a.dv);
      for (int i = 0; i < 4; ++i) {
        REQUIRE(b.du[i] == Catch::Approx(Udu[i]).margin(1e-8));
        REQUIRE(b.dv[i] == Catch::Approx(Udv[i]).margin(1e-8));
      }
    }
  }
}

TEST_CASE("frame flow") {
  SECTION("holomorphic frames stay fixed") {
    const FrameState fr = make_frame(Vec{1, 0, 0, 0}, Vec{0, 1, 0, 0}, kAlpha);
    const FrameFlowResult res = frame_flow(fr, 0.01, 1.0);
    REQUIRE(res.classification == FrameClass::holomorphic);
    REQUIRE(res.convergence_time == 0.0);
    double moved = 0;
    for (int i = 0; i < 4; ++i) {
      moved = std::max(moved, std::fabs(res.final_frame.u[i] - fr.u[i]));
      moved = std::max(moved, std::fabs(res.final_frame.v[i] - fr.v[i]));
    }
    REQUIRE(moved < 1e-12);
  }

  SECTION("c = 0.5 seed converges holomorphic with monotone c") {
    const FrameState fr =
        make_frame(Vec{1, 0, 0, 0}, Vec{0, 0.5, std::sqrt(3.0) / 2, 0}, kAlpha);
    const FrameFlowResult res = frame_flow(fr, 0.005, 10.0, 1);
    REQUIRE(res.classification == FrameClass::holomorphic);
    REQUIRE(res.e_plus_monotone);
    for (std::size_t i = 1; i < res.rows.size(); ++i)
      REQUIRE(res.rows[i].c >= res.rows[i - 1].c - 1e-12);
    // the scalar reduction is logistic: ċ = 4(1 - c²)
    const double t_probe = res.rows[40].t;
    const double c_exact = std::tanh(4 * t_probe + std::atanh(0.5));
    REQUIRE(res.rows[40].c == Catch::Approx(c_exact).margin(1e-6));
  }

  SECTION("c = 0 knife edge still lands on the disjunction") {
    const FrameState fr = make_frame(Vec{1, 0, 0, 0}, Vec{0, 0, 1, 0}, kAlpha);
    const FrameFlowResult res = frame_flow(fr, 0.005, 20.0);
    const bool ok = res.classification == FrameClass::holomorphic ||
                    res.classification == FrameClass::anti_holomorphic;
    REQUIRE(ok);
    REQUIRE(res.e_plus_monotone);
  }

  SECTION("orthonormality is maintained by the retraction") {
    SplitMix64 rng(36);
    const FrameState fr = random_frame(rng, kAlpha);
    const FrameFlowResult res = frame_flow(fr, 0.01, 3.0, 10);
    for (const FrameTrajectoryRow& row : res.rows) {
      REQUIRE(std::fabs(row.frame.u.norm() - 1) < 1e-14);
      REQUIRE(std::fabs(row.frame.v.norm() - 1) < 1e-14);
      REQUIRE(std::fabs(row.frame.u.dot(row.frame.v)) < 1e-14);
    }
  }

  SECTION("non-convergence is reported, not silently classified") {
    const FrameState fr = make_frame(Vec{1, 0, 0, 0}, Vec{0, 0, 1, 0}, kAlpha);
    const FrameFlowResult res = frame_flow(fr, 1e-4, 0.01);  // far too short
    REQUIRE(res.classification == FrameClass::non_converged);
    REQUIRE(res.convergence_time < 0);
  }
}

TEST_CASE("quadrature K matches the closed form -cV on the family") {
  SplitMix64 rng(37);
  const double V = family_volume(kAlpha);
  for (int t = 0; t < 3; ++t) {
    const FrameState fr = random_frame(rng, kAlpha);
    const double c = holomorphy_parameter(fr);
    const MapField f = family_map(fr, 128, 128);
    REQUIRE(family_c_estimate(f) == Catch::Approx(c).margin(1e-8));
    REQUIRE(energy(f, 1.0).K == Catch::Approx(-c * V).margin(1e-8 * V));
  }
}

TEST_CASE("PDE flow stays near the family") {
  // short-horizon cross-validation on a coarse grid; the acceptance suite
  // runs the full study
  const double alpha = std::exp(2 * 3.14159265358979323846);
  SplitMix64 rng(38);
  FrameState fr = random_frame(rng, alpha);
  MapField f = family_map(fr, 32, 32);
  f.analytic_tangent = nullptr;
  FlowConfig cfg;
  cfg.t_max = 0.25;
  cfg.a = 1.0;
  cfg.scheme = FlowScheme::euler;
  cfg.report_every = 1 << 30;
  const FlowResult res = run(f, cfg);
  REQUIRE(res.trace.status == FlowStatus::t_max_reached);
  const FrameFlowResult ode = frame_flow(fr, 1e-3, 0.25, 1);
  const double c_pde = family_c_estimate(res.final_field);
  REQUIRE(c_pde == Catch::Approx(ode.rows.back().c).margin(2e-3));
}
