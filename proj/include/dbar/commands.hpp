#pragma once

// Command implementations behind the CLI. Exit codes:
//   0 success / converged
//   2 configuration error
//   3 numerical abort
//   4 verification failure
//   5 blow-up detected (flow; the trace is still written)

#include <filesystem>
#include <iostream>

#include "dbar/config.hpp"
#include "dbar/verify.hpp"

namespace dbar {

struct CommandOptions {
  std::string output_dir = "out";
  bool quiet = false;
};

namespace cmd_detail {

inline std::ofstream open_output(const CommandOptions& opt,
                                 const std::string& name) {
  std::filesystem::create_directories(opt.output_dir);
  std::ofstream os(std::filesystem::path(opt.output_dir) / name);
  if (!os) throw error("cannot open output file '" + name + "'");
  return os;
}

inline std::vector<std::string> meta_lines(const RunConfig& cfg) {
  std::vector<std::string> meta;
  meta.push_back("seed = " + std::to_string(cfg.seed));
  for (const std::string& line : cfg.echo) meta.push_back("config: " + line);
  return meta;
}

inline MapField initial_field(const RunConfig& cfg) {
  const ModelPtr source = cfg.make_source();
  const ModelPtr target = cfg.make_target();
  MapField f;
  if (cfg.flow_init == "family") {
    if (source->name != "hopf_torus" || target->name != "hopf_surface")
      throw config_error("flow.init",
                         "family initial data needs the hopf model pair");
    Vec u(4), v(4);
    for (int i = 0; i < 4; ++i) {
      u[i] = cfg.frame_u[i];
      v[i] = cfg.frame_v[i];
    }
    FrameState fr;
    fr.u = u;
    fr.v = v;
    fr.alpha = cfg.target_alpha;
    gram_schmidt(fr);
    f = family_map(fr, source, target, cfg.n_s, cfg.n_theta);
  } else if (cfg.flow_init == "identity") {
    if (source->name != "flat_torus" || target->name != "flat_torus")
      throw config_error("flow.init", "identity initial data needs flat tori");
    f = identity_map(source, target, cfg.n_s, cfg.n_theta);
  } else if (cfg.flow_init == "constant") {
    Vec y(target->dim);
    for (int i = 0; i < target->dim; ++i) y[i] = cfg.flow_init_value[i];
    f = constant_map(source, target, cfg.n_s, cfg.n_theta, y);
  } else {
    std::ifstream in(cfg.flow_init_file);
    if (!in)
      throw config_error("flow.init_file",
                         "cannot open '" + cfg.flow_init_file + "'");
    f = read_field(in, source, target);
  }
  f.stencil_order = cfg.stencil_order;
  f.check_valid();
  return f;
}

}  // namespace cmd_detail

inline int cmd_flow(const RunConfig& cfg, const CommandOptions& opt) {
  const MapField f0 = cmd_detail::initial_field(cfg);
  const FlowResult res = run(f0, cfg.flow);
  const auto meta = cmd_detail::meta_lines(cfg);
  {
    auto os = cmd_detail::open_output(opt, "trace.csv");
    write_trace_csv(os, res.trace, meta);
  }
  {
    auto os = cmd_detail::open_output(opt, "final_field.csv");
    write_field(os, res.final_field, meta);
  }
  const TraceRow& last = res.trace.rows.back();
  if (!opt.quiet)
    std::cout << "flow: status=" << to_string(res.trace.status)
              << " t=" << fmt(last.t) << " E_plus=" << fmt(last.report.E_plus)
              << " tau_plus_sup=" << fmt(last.tau_plus_sup) << "\n";
  switch (res.trace.status) {
    case FlowStatus::converged:
    case FlowStatus::t_max_reached:
      return 0;
    case FlowStatus::blow_up:
      return 5;
    default:
      if (!opt.quiet) std::cerr << "flow aborted: " << res.trace.message << "\n";
      return 3;
  }
}

inline int cmd_frames(const RunConfig& cfg, const CommandOptions& opt) {
  FrameState fr;
  if (cfg.frames_random) {
    SplitMix64 rng(cfg.seed);
    fr = random_frame(rng, cfg.target_alpha);
  } else {
    Vec u(4), v(4);
    for (int i = 0; i < 4; ++i) {
      u[i] = cfg.frame_u[i];
      v[i] = cfg.frame_v[i];
    }
    fr.u = u;
    fr.v = v;
    fr.alpha = cfg.target_alpha;
    gram_schmidt(fr);
  }
  const FrameFlowResult res =
      frame_flow(fr, cfg.frames_dt, cfg.frames_t_max, cfg.frames_report_every);
  auto os = cmd_detail::open_output(opt, "frames.csv");
  write_frame_trajectory_csv(os, res, cmd_detail::meta_lines(cfg));
  if (!opt.quiet)
    std::cout << "frames: classification=" << to_string(res.classification)
              << " c_final=" << fmt(holomorphy_parameter(res.final_frame))
              << " convergence_time=" << fmt(res.convergence_time) << "\n";
  return 0;
}

inline int cmd_basin(const RunConfig& cfg, const CommandOptions& opt) {
  SplitMix64 rng(cfg.seed);
  std::vector<BasinRow> rows;
  for (int k = 0; k < cfg.basin_count; ++k) {
    const FrameState fr = random_frame(rng, cfg.target_alpha);
    const double c0 = holomorphy_parameter(fr);
    const FrameFlowResult res =
        frame_flow(fr, cfg.basin_dt, cfg.basin_t_max, 1 << 20);
    rows.push_back({c0, res.classification, res.convergence_time});
  }
  auto os = cmd_detail::open_output(opt, "basin.csv");
  write_basin_csv(os, rows, cmd_detail::meta_lines(cfg));
  if (!opt.quiet) {
    int holo = 0, anti = 0, open = 0;
    for (const BasinRow& r : rows) {
      if (r.classification == FrameClass::holomorphic) ++holo;
      else if (r.classification == FrameClass::anti_holomorphic) ++anti;
      else ++open;
    }
    std::cout << "basin: count=" << rows.size() << " holomorphic=" << holo
              << " anti_holomorphic=" << anti << " non_converged=" << open
              << "\n";
  }
  return 0;
}

inline int cmd_spectrum(const RunConfig& cfg, const CommandOptions& opt) {
  const ModelPtr sphere = round_sphere_model(cfg.spectrum_radius);
  SphereSpectrumOptions sopt;
  sopt.resolution = cfg.spectrum_resolution;
  const double lambda1 = eigenvalue_experiment(*sphere, sopt);
  const double ricci_bound = 1.0 / (cfg.spectrum_radius * cfg.spectrum_radius);
  auto os = cmd_detail::open_output(opt, "spectrum.csv");
  write_provenance(os, cmd_detail::meta_lines(cfg));
  os << "radius,resolution,lambda1,two_alpha\n";
  os << fmt(cfg.spectrum_radius) << ',' << cfg.spectrum_resolution << ','
     << fmt(lambda1) << ',' << fmt(2.0 * ricci_bound) << '\n';
  if (!opt.quiet)
    std::cout << "spectrum: lambda1=" << fmt(lambda1)
              << " two_alpha=" << fmt(2.0 * ricci_bound) << "\n";
  return 0;
}

inline int cmd_verify(const RunConfig& cfg, const CommandOptions& opt) {
  const CheckTable table =
      run_verification(cfg.seed, cfg.verify_points, cfg.verify_negative_control);
  auto os = cmd_detail::open_output(opt, "verify.csv");
  table.write_csv(os, cmd_detail::meta_lines(cfg));
  int failures = 0;
  for (const CheckRow& r : table.rows()) {
    if (!r.pass) ++failures;
    if (!opt.quiet && !r.pass)
      std::cerr << "FAIL " << r.suite << '.' << r.name << " value=" << fmt(r.value)
                << " threshold=" << fmt(r.threshold) << "\n";
  }
  if (!opt.quiet)
    std::cout << "verify: " << table.rows().size() - failures << "/"
              << table.rows().size() << " checks pass\n";
  return failures == 0 ? 0 : 4;
}

inline int dispatch(const RunConfig& cfg, const CommandOptions& opt) {
  try {
    validate_config(cfg);
    if (cfg.command == "flow") return cmd_flow(cfg, opt);
    if (cfg.command == "frames") return cmd_frames(cfg, opt);
    if (cfg.command == "basin") return cmd_basin(cfg, opt);
    if (cfg.command == "spectrum") return cmd_spectrum(cfg, opt);
    if (cfg.command == "verify") return cmd_verify(cfg, opt);
    throw config_error("run.command", "unknown command");
  } catch (const config_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const integrator_error& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const puncture_error& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const eigensolver_error& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace dbar
