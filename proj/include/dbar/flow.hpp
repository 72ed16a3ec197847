#pragma once

// Explicit time integration of ∂ₜf = τ_a(f) with energy-decay and blow-up
// monitors. Stiffness is the usual Δ² Laplacian stiffness (the first-order
// A-term does not change the principal symbol), so an explicit CFL rule is
// enough: auto dt = c_cfl Δ² / (1 + sup|Tf|²), capped at 0.25 Δ².

#include <optional>
#include <string>
#include <vector>

#include "dbar/functionals.hpp"

namespace dbar {

enum class FlowScheme { euler, rk4 };

struct FlowConfig {
  double dt = -1.0;  // <= 0 means auto
  double t_max = 1.0;
  double a = 1.0;
  FlowScheme scheme = FlowScheme::euler;
  double stop_tau_tol = 0.0;      // stop when ‖τ_a‖_∞ < tol (0 disables)
  double blowup_threshold = 0.0;  // declare blow-up past this sup|Tf| (0 disables)
  int report_every = 10;
  double c_cfl = 0.2;

  void validate() const {
    if (!(t_max > 0)) throw config_error("t_max", "must be positive");
    if (a < -1.0 || a > 1.0) throw config_error("a", "must lie in [-1, 1]");
    if (report_every < 1) throw config_error("report_every", "must be >= 1");
    if (!(c_cfl > 0)) throw config_error("cfl", "must be positive");
  }

  double effective_dt(const GridSpec& grid, double sup_dTf) const {
    const double d = std::min(grid.ds(), grid.dtheta());
    const double cap = 0.25 * d * d;
    if (dt > 0) return std::min(dt, cap);
    return std::min(c_cfl * d * d / (1.0 + sup_dTf * sup_dTf), cap);
  }
};

enum class FlowStatus { converged, t_max_reached, blow_up, aborted };

inline const char* to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::converged: return "converged";
    case FlowStatus::t_max_reached: return "t_max_reached";
    case FlowStatus::blow_up: return "blow_up";
    default: return "aborted";
  }
}

struct TraceRow {
  double t = 0;
  EnergyReport report;
  double tau_l2 = 0, tau_plus_l2 = 0, tau_plus_sup = 0;
  bool blowup = false;
  int argmax_is = 0, argmax_ith = 0;  // of |Tf|
};

struct Snapshot {
  double t;
  MapField f;
  double sup_dTf;
  int argmax_is, argmax_ith;
};

struct FlowTrace {
  std::vector<TraceRow> rows;
  std::vector<Snapshot> snapshots;  // retained on sup|Tf| doubling
  FlowStatus status = FlowStatus::t_max_reached;
  std::string message;
  double blowup_t = -1;
  int blowup_is = -1, blowup_ith = -1;
};

namespace detail {

// τ_a as a flat array plus the |Tf| statistics needed by the monitors.
struct StepEval {
  std::vector<double> vel;
  double sup_dTf = 0;
  double tau_a_sup = 0;
  int argmax_is = 0, argmax_ith = 0;
};

inline StepEval eval_velocity(const MapField& f, double a) {
  const TensionField tf = tension(f, a);
  StepEval ev;
  ev.sup_dTf = tf.sup_dTf;
  ev.tau_a_sup = tf.tau_a_sup;
  ev.argmax_is = tf.argmax_is;
  ev.argmax_ith = tf.argmax_ith;
  ev.vel.resize(f.values.size());
  for (std::size_t i = 0; i < ev.vel.size(); ++i)
    ev.vel[i] = tf.tau[i] + a * tf.A[i];
  return ev;
}

inline MapField apply_velocity(const MapField& f, const std::vector<double>& vel,
                               double dt) {
  MapField g = f;
  g.analytic_tangent = nullptr;
  const int d = f.dim();
  int bad_is = -1, bad_ith = -1;
  std::string bad_msg;
#pragma omp parallel for schedule(static)
  for (int is = 0; is < f.grid.n_s; ++is)
    for (int ith = 0; ith < f.grid.n_theta; ++ith) {
      try {
        Vec w(d);
        const double* vp =
            vel.data() + (static_cast<std::size_t>(is) * f.grid.n_theta + ith) * d;
        for (int c = 0; c < d; ++c) w[c] = vp[c];
        const Vec y = f.target->retract(f.node(is, ith), w, dt);
        bool finite = true;
        for (int c = 0; c < d; ++c) finite = finite && std::isfinite(y[c]);
        if (!finite) throw error("non-finite value after time step");
        g.set_node(is, ith, y);
      } catch (const std::exception& e) {
#pragma omp critical
        {
          bad_is = is;
          bad_ith = ith;
          bad_msg = e.what();
        }
      }
    }
  if (bad_is >= 0) throw integrator_error(bad_msg, bad_is, bad_ith);
  if (g.target->punctured) g.check_valid();
  return g;
}

}  // namespace detail

// One explicit step; twist data unchanged. Fixed points stay fixed exactly
// when τ_a vanishes on the grid.
inline MapField step(const MapField& f, const FlowConfig& cfg) {
  cfg.validate();
  const detail::StepEval k1 = detail::eval_velocity(f, cfg.a);
  const double dt = cfg.effective_dt(f.grid, k1.sup_dTf);
  if (cfg.scheme == FlowScheme::euler)
    return detail::apply_velocity(f, k1.vel, dt);
  const detail::StepEval k2 =
      detail::eval_velocity(detail::apply_velocity(f, k1.vel, dt / 2), cfg.a);
  const detail::StepEval k3 =
      detail::eval_velocity(detail::apply_velocity(f, k2.vel, dt / 2), cfg.a);
  const detail::StepEval k4 =
      detail::eval_velocity(detail::apply_velocity(f, k3.vel, dt), cfg.a);
  std::vector<double> vel(f.values.size());
  for (std::size_t i = 0; i < vel.size(); ++i)
    vel[i] = (k1.vel[i] + 2 * k2.vel[i] + 2 * k3.vel[i] + k4.vel[i]) / 6.0;
  return detail::apply_velocity(f, vel, dt);
}

struct FlowResult {
  FlowTrace trace;
  MapField final_field;
};

inline FlowResult run(const MapField& f0, const FlowConfig& cfg) {
  cfg.validate();
  FlowResult res{FlowTrace{}, f0};
  FlowTrace& trace = res.trace;
  MapField f = f0;
  double t = 0;
  double snapshot_sup = -1;
  int step_count = 0;

  auto record = [&](const detail::StepEval& ev, bool blowup) {
    TraceRow row;
    row.t = t;
    row.report = energy(f, cfg.a);
    const TensionField tf = tension(f);
    row.tau_l2 = tf.tau_l2;
    row.tau_plus_l2 = tf.tau_plus_l2;
    row.tau_plus_sup = tf.tau_plus_sup;
    row.blowup = blowup;
    row.argmax_is = ev.argmax_is;
    row.argmax_ith = ev.argmax_ith;
    trace.rows.push_back(row);
  };

  try {
    while (true) {
      const detail::StepEval ev = detail::eval_velocity(f, cfg.a);

      if (snapshot_sup < 0 || ev.sup_dTf >= 2.0 * snapshot_sup) {
        snapshot_sup = std::max(snapshot_sup, ev.sup_dTf);
        trace.snapshots.push_back(
            {t, f, ev.sup_dTf, ev.argmax_is, ev.argmax_ith});
      }

      const bool blowup =
          cfg.blowup_threshold > 0 && ev.sup_dTf > cfg.blowup_threshold;
      if (blowup) {
        record(ev, true);
        trace.status = FlowStatus::blow_up;
        trace.blowup_t = t;
        trace.blowup_is = ev.argmax_is;
        trace.blowup_ith = ev.argmax_ith;
        break;
      }
      if (cfg.stop_tau_tol > 0 && ev.tau_a_sup < cfg.stop_tau_tol) {
        record(ev, false);
        trace.status = FlowStatus::converged;
        break;
      }
      if (t >= cfg.t_max) {
        record(ev, false);
        trace.status = FlowStatus::t_max_reached;
        break;
      }
      if (step_count % cfg.report_every == 0) record(ev, false);

      double dt = cfg.effective_dt(f.grid, ev.sup_dTf);
      if (t + dt > cfg.t_max) dt = cfg.t_max - t;
      if (cfg.scheme == FlowScheme::euler) {
        f = detail::apply_velocity(f, ev.vel, dt);
      } else {
        const detail::StepEval k2 = detail::eval_velocity(
            detail::apply_velocity(f, ev.vel, dt / 2), cfg.a);
        const detail::StepEval k3 = detail::eval_velocity(
            detail::apply_velocity(f, k2.vel, dt / 2), cfg.a);
        const detail::StepEval k4 =
            detail::eval_velocity(detail::apply_velocity(f, k3.vel, dt), cfg.a);
        std::vector<double> vel(f.values.size());
        for (std::size_t i = 0; i < vel.size(); ++i)
          vel[i] = (ev.vel[i] + 2 * k2.vel[i] + 2 * k3.vel[i] + k4.vel[i]) / 6.0;
        f = detail::apply_velocity(f, vel, dt);
      }
      t += dt;
      ++step_count;
    }
  } catch (const integrator_error& e) {
    trace.status = FlowStatus::aborted;
    trace.message = std::string(e.what()) + " at node (" +
                    std::to_string(e.is) + ", " + std::to_string(e.itheta) + ")";
  } catch (const puncture_error& e) {
    trace.status = FlowStatus::aborted;
    trace.message = e.what();
  }
  res.final_field = f;
  return res;
}

// ---------------------------------------------------------------------------
// parabolic rescaling at a concentration point: u_i(x) = f(p + r_i x, t_i)
// with r_i = 1 / sup|Tf|, resampled on a fixed window grid

struct RescaledMap {
  double t = 0;          // snapshot time
  double r = 0;          // rescale length
  int n = 0;             // window is n×n nodes
  double dx = 0;         // spacing in rescaled coordinates
  double half_width = 0; // actual (possibly shrunk) half width
  bool window_shrunk = false;
  ModelPtr target;
  std::vector<double> values;  // node-major target components

  Vec node(int i, int j) const {
    Vec y(target->dim);
    const double* p = values.data() + (static_cast<std::size_t>(i) * n + j) * target->dim;
    for (int c = 0; c < target->dim; ++c) y[c] = p[c];
    return y;
  }

  // sup over interior nodes of the rescaled derivative norm; the source
  // frame is orthonormal by construction, the target metric is evaluated
  double sup_T() const {
    double sup2 = 0;
    const int d = target->dim;
    for (int i = 1; i + 1 < n; ++i)
      for (int j = 1; j + 1 < n; ++j) {
        const Mat h = target->geom.metric_at(node(i, j));
        double s = 0;
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) {
            const double dsx = (node(i + 1, j)[a] - node(i - 1, j)[a]) / (2 * dx);
            const double dsy = (node(i, j + 1)[a] - node(i, j - 1)[a]) / (2 * dx);
            const double dtx = (node(i + 1, j)[b] - node(i - 1, j)[b]) / (2 * dx);
            const double dty = (node(i, j + 1)[b] - node(i, j - 1)[b]) / (2 * dx);
            s += h[a][b] * (dsx * dtx + dsy * dty);
          }
        sup2 = std::max(sup2, s);
      }
    return std::sqrt(sup2);
  }
};

struct RescaleOptions {
  double half_width = 4.0;  // in rescaled coordinates
  int n = 65;               // window nodes per side
};

inline std::vector<RescaledMap> rescale_diagnostic(
    const FlowTrace& trace, const RescaleOptions& opt = {}) {
  std::vector<RescaledMap> out;
  if (trace.status != FlowStatus::blow_up) return out;
  for (const Snapshot& snap : trace.snapshots) {
    if (!(snap.sup_dTf > 0)) continue;
    RescaledMap rm;
    rm.t = snap.t;
    rm.r = 1.0 / snap.sup_dTf;
    rm.n = opt.n;
    rm.target = snap.f.target;
    double half = opt.half_width;
    const double max_half =
        0.5 * std::min(snap.f.grid.period_s, snap.f.grid.period_theta) / rm.r;
    if (half > max_half) {
      half = max_half;
      rm.window_shrunk = true;
    }
    rm.half_width = half;
    rm.dx = 2.0 * half / (opt.n - 1);
    rm.values.assign(static_cast<std::size_t>(opt.n) * opt.n * rm.target->dim, 0.0);
    const double ps = snap.argmax_is * snap.f.grid.ds();
    const double pt = snap.argmax_ith * snap.f.grid.dtheta();
    for (int i = 0; i < opt.n; ++i)
      for (int j = 0; j < opt.n; ++j) {
        const double x1 = -half + i * rm.dx, x2 = -half + j * rm.dx;
        const Vec y = sample_map(snap.f, ps + rm.r * x1, pt + rm.r * x2);
        double* p = rm.values.data() + (static_cast<std::size_t>(i) * opt.n + j) * rm.target->dim;
        for (int c = 0; c < rm.target->dim; ++c) p[c] = y[c];
      }
    out.push_back(std::move(rm));
  }
  return out;
}

// ---------------------------------------------------------------------------
// finite-horizon energy-bound monitor: fits log E(t) to a line and flags
// residuals beyond the band as super-exponential growth

struct EnergyBoundVerdict {
  double C3 = 0;        // fitted exponential rate
  double residual = 0;  // max |log E - fit|
  bool anomaly = false;
};

inline EnergyBoundVerdict energy_bound_monitor(const FlowTrace& trace,
                                               double band = 0.1) {
  EnergyBoundVerdict v;
  std::vector<double> ts, ys;
  for (const TraceRow& row : trace.rows) {
    if (row.report.E > 0 && std::isfinite(row.report.E)) {
      ts.push_back(row.t);
      ys.push_back(std::log(row.report.E));
    }
  }
  const std::size_t n = ts.size();
  if (n < 2) return v;
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  const double denom = n * stt - st * st;
  if (std::fabs(denom) < 1e-300) return v;
  v.C3 = (n * sty - st * sy) / denom;
  const double icept = (sy - v.C3 * st) / n;
  for (std::size_t i = 0; i < n; ++i)
    v.residual = std::max(v.residual, std::fabs(ys[i] - (v.C3 * ts[i] + icept)));
  v.anomaly = v.residual > band;
  return v;
}

}  // namespace dbar
