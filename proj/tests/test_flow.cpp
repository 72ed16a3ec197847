#include <catch2/catch_amalgamated.hpp>

#include "dbar/flow.hpp"
#include "dbar/random_fields.hpp"

using namespace dbar;

namespace {
const double kAlpha = 2.0;
}

TEST_CASE("single step") {
  SECTION("zeros of τ_a are exact fixed points") {
    const MapField id = identity_map(flat_torus_source(), flat_torus_target(), 16, 16);
    FlowConfig cfg;
    cfg.t_max = 1.0;
    cfg.a = 0.5;
    const MapField next = step(id, cfg);
    REQUIRE(next.values == id.values);
  }

  SECTION("holomorphic family map moves only by the stencil residual") {
    const FrameState fr = make_frame(Vec{1, 0, 0, 0}, Vec{0, 1, 0, 0}, kAlpha);
    MapField f = family_map(fr, 64, 64);
    f.analytic_tangent = nullptr;
    FlowConfig cfg;
    cfg.t_max = 1.0;
    cfg.dt = 1e-5;
    const MapField next = step(f, cfg);
    double worst = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
      worst = std::max(worst, std::fabs(next.values[i] - f.values[i]));
    REQUIRE(worst < 1e-5 * 5e-3 * 3.0);  // dt · ‖τ₊‖_∞ with chart slack
  }

  SECTION("euler update is linear in dt") {
    SplitMix64 rng(51);
    const FrameState fr = random_frame(rng, kAlpha);
    MapField f = perturbed_family_map(fr, 16, 16, rng, 0.1);
    FlowConfig cfg;
    cfg.t_max = 1.0;
    cfg.scheme = FlowScheme::euler;
    cfg.dt = 4e-6;
    const MapField a = step(f, cfg);
    cfg.dt = 2e-6;
    const MapField b = step(f, cfg);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      const double full = a.values[i] - f.values[i];
      const double half = b.values[i] - f.values[i];
      REQUIRE(std::fabs(full - 2 * half) <= 1e-12 * (1 + std::fabs(full)));
    }
  }

  SECTION("the dt cap 0.25Δ² binds") {
    const MapField id = identity_map(flat_torus_source(), flat_torus_target(), 16, 16);
    FlowConfig cfg;
    cfg.dt = 1e9;
    const double d = std::min(id.grid.ds(), id.grid.dtheta());
    REQUIRE(cfg.effective_dt(id.grid, 1.0) == 0.25 * d * d);
    cfg.dt = -1;
    cfg.c_cfl = 0.2;
    REQUIRE(cfg.effective_dt(id.grid, std::sqrt(2.0)) ==
            Catch::Approx(0.2 * d * d / 3.0));
  }
}

TEST_CASE("flow runs") {
  SECTION("a zero of τ_a keeps every report row constant") {
    const MapField id = identity_map(flat_torus_source(), flat_torus_target(), 16, 16);
    FlowConfig cfg;
    cfg.t_max = 0.01;
    cfg.a = 1.0;
    cfg.report_every = 5;
    const FlowResult res = run(id, cfg);
    REQUIRE(res.trace.status == FlowStatus::t_max_reached);
    const double e0 = res.trace.rows.front().report.E_a;
    for (const TraceRow& row : res.trace.rows)
      REQUIRE(std::fabs(row.report.E_a - e0) < 1e-10);
  }

  SECTION("converged status once ‖τ_a‖_∞ is under the stop tolerance") {
    const MapField id = identity_map(flat_torus_source(), flat_torus_target(), 16, 16);
    FlowConfig cfg;
    cfg.t_max = 1.0;
    cfg.stop_tau_tol = 1e-6;
    const FlowResult res = run(id, cfg);
    REQUIRE(res.trace.status == FlowStatus::converged);
    REQUIRE(res.trace.rows.size() == 1);
  }

  SECTION("E_a descends along the a = 0.9 flow (slack 1e-9 per row)") {
    SplitMix64 rng(52);
    const FrameState fr = random_frame(rng, kAlpha);
    MapField f = perturbed_family_map(fr, 32, 32, rng, 0.15);
    FlowConfig cfg;
    cfg.t_max = 5e-3;
    cfg.a = 0.9;
    cfg.report_every = 5;
    const FlowResult res = run(f, cfg);
    REQUIRE(res.trace.rows.size() >= 5);
    for (std::size_t i = 1; i < res.trace.rows.size(); ++i)
      REQUIRE(res.trace.rows[i].report.E_a <=
              res.trace.rows[i - 1].report.E_a + 1e-9);
    REQUIRE(res.trace.rows.back().report.E_a <
            res.trace.rows.front().report.E_a);
  }

  SECTION("energy identity: ΔE₊/Δt + ∫|τ₊|² within the calibrated budget") {
    SplitMix64 rng(53);
    const FrameState fr = random_frame(rng, kAlpha);
    MapField f = perturbed_family_map(fr, 32, 32, rng, 0.1);
    FlowConfig cfg;
    cfg.t_max = 5e-4;
    cfg.a = 1.0;
    cfg.report_every = 1;
    const FlowResult res = run(f, cfg);
    const auto& rows = res.trace.rows;
    const double dt = rows[1].t - rows[0].t;
    const double d = std::min(f.grid.ds(), f.grid.dtheta());
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double dE = (rows[i].report.E_plus - rows[i - 1].report.E_plus) /
                        (rows[i].t - rows[i - 1].t);
      const double diss = rows[i - 1].tau_plus_l2 * rows[i - 1].tau_plus_l2;
      REQUIRE(std::fabs(dE + diss) <= 150.0 * (dt + d * d) * (1 + diss));
    }
  }

  SECTION("euler and rk4 agree to O(dt)") {
    SplitMix64 rng(54);
    const FrameState fr = random_frame(rng, kAlpha);
    MapField f = perturbed_family_map(fr, 16, 16, rng, 0.1);
    auto final_at = [&](FlowScheme s, double dt) {
      FlowConfig cfg;
      cfg.t_max = 4e-4;
      cfg.scheme = s;
      cfg.dt = dt;
      cfg.report_every = 1 << 30;
      return run(f, cfg).final_field;
    };
    const MapField r4 = final_at(FlowScheme::rk4, 1e-5);
    const MapField e1 = final_at(FlowScheme::euler, 1e-5);
    const MapField e2 = final_at(FlowScheme::euler, 5e-6);
    double d1 = 0, d2 = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      d1 = std::max(d1, std::fabs(e1.values[i] - r4.values[i]));
      d2 = std::max(d2, std::fabs(e2.values[i] - r4.values[i]));
    }
    REQUIRE(d1 / d2 > 1.7);
    REQUIRE(d1 / d2 < 2.4);
  }

  SECTION("blow-up threshold crossing flags and stops") {
    const FrameState fr = make_frame(Vec{1, 0, 0, 0}, Vec{0, 1, 0, 0}, kAlpha);
    MapField f = family_map(fr, 16, 16);
    f.analytic_tangent = nullptr;
    FlowConfig cfg;
    cfg.t_max = 1.0;
    cfg.blowup_threshold = 1.0;  // the family sits at sup|Tf| = √2
    const FlowResult res = run(f, cfg);
    REQUIRE(res.trace.status == FlowStatus::blow_up);
    REQUIRE(res.trace.rows.back().blowup);
    REQUIRE(res.trace.blowup_t == 0.0);
    REQUIRE(!res.trace.snapshots.empty());
  }

  SECTION("abort leaves a partial trace and names the node") {
    MapField f = constant_map(hopf_torus_source(kAlpha),
                              hopf_surface_target(kAlpha), 16, 16,
                              Vec{1, 0, 0, 0});
    f.values[(3 * 16 + 7) * 4 + 0] = 5e-9;  // below the puncture guard
    FlowConfig cfg;
    cfg.t_max = 1.0;
    const FlowResult res = run(f, cfg);
    REQUIRE(res.trace.status == FlowStatus::aborted);
    REQUIRE(!res.trace.message.empty());
  }
}

TEST_CASE("parabolic rescaling diagnostic") {
  SECTION("no blow-up flag emits nothing") {
    const MapField id = identity_map(flat_torus_source(), flat_torus_target(), 16, 16);
    FlowConfig cfg;
    cfg.t_max = 1e-3;
    const FlowResult res = run(id, cfg);
    REQUIRE(rescale_diagnostic(res.trace).empty());
  }

  SECTION("synthetic concentrated bubble is recovered") {
    const int n = 128;
    const ModelPtr fsrc = flat_torus_source();
    const ModelPtr sp = round_sphere_model(1.0);
    const double lambda = 8.0 / n;  // concentration scale, resolved by the grid
    const MapField f = map_from(fsrc, sp, n, n, TwistData{}, [&](const Vec& p) {
      Vec y(2);
      y[0] = (p[0] - 0.5) / lambda;
      y[1] = (p[1] - 0.5) / lambda;
      return y;
    });
    const TensionField tf = tension(f);
    // |Tf| peaks at the center with value 2√2/λ for this profile
    REQUIRE(tf.sup_dTf ==
            Catch::Approx(2 * std::sqrt(2.0) / lambda).epsilon(1e-3));

    FlowTrace trace;
    trace.status = FlowStatus::blow_up;
    trace.snapshots.push_back({0.0, f, tf.sup_dTf, tf.argmax_is, tf.argmax_ith});
    const std::vector<RescaledMap> rs = rescale_diagnostic(trace);
    REQUIRE(rs.size() == 1);
    const RescaledMap& rm = rs[0];
    REQUIRE(rm.sup_T() > 0.5);
    REQUIRE(rm.sup_T() < 1.5);
    // the rescaled profile is x/(2√2) in chart coordinates, independent of λ
    double worst = 0, scale = 0;
    const double c = 1.0 / (2 * std::sqrt(2.0));
    for (int i = 0; i < rm.n; ++i)
      for (int j = 0; j < rm.n; ++j) {
        const double x1 = -rm.half_width + i * rm.dx;
        const double x2 = -rm.half_width + j * rm.dx;
        const Vec y = rm.node(i, j);
        worst = std::max({worst, std::fabs(y[0] - c * x1), std::fabs(y[1] - c * x2)});
        scale = std::max({scale, std::fabs(c * x1), std::fabs(c * x2)});
      }
    REQUIRE(worst / scale < 0.05);
  }

  SECTION("window is shrunk when it would leave the fundamental domain") {
    const MapField id = identity_map(flat_torus_source(), flat_torus_target(), 32, 32);
    const TensionField tf = tension(id);
    FlowTrace trace;
    trace.status = FlowStatus::blow_up;
    trace.snapshots.push_back({0.0, id, 1.0, 0, 0});  // r = 1 ≫ domain
    RescaleOptions opt;
    opt.half_width = 4.0;
    const std::vector<RescaledMap> rs = rescale_diagnostic(trace, opt);
    REQUIRE(rs.size() == 1);
    REQUIRE(rs[0].window_shrunk);
    REQUIRE(rs[0].half_width == Catch::Approx(0.5));
  }
}

TEST_CASE("finite-horizon energy bound monitor") {
  auto synthetic = [](const std::function<double(double)>& E) {
    FlowTrace trace;
    for (int k = 0; k <= 40; ++k) {
      TraceRow row;
      row.t = 0.1 * k;
      row.report.E = E(row.t);
      trace.rows.push_back(row);
    }
    return trace;
  };

  SECTION("constant energy fits rate zero") {
    const EnergyBoundVerdict v = energy_bound_monitor(synthetic([](double) { return 3.7; }));
    REQUIRE(std::fabs(v.C3) < 1e-12);
    REQUIRE(!v.anomaly);
  }

  SECTION("exponential growth recovers the rate") {
    const EnergyBoundVerdict v =
        energy_bound_monitor(synthetic([](double t) { return std::exp(0.3 * t); }));
    REQUIRE(v.C3 == Catch::Approx(0.3).margin(0.01));
    REQUIRE(!v.anomaly);
  }

  SECTION("monotone decay gives a non-positive rate and no flag") {
    const EnergyBoundVerdict v = energy_bound_monitor(
        synthetic([](double t) { return 2.0 * std::exp(-0.5 * t); }));
    REQUIRE(v.C3 <= 0.0);
    REQUIRE(!v.anomaly);
  }

  SECTION("super-exponential growth trips the band") {
    const EnergyBoundVerdict v = energy_bound_monitor(
        synthetic([](double t) { return std::exp(0.4 * t * t); }));
    REQUIRE(v.anomaly);
  }
}
