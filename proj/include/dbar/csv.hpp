#pragma once

// CSV and field-dump serialization. All numbers are printed with %.17g so a
// text round trip preserves doubles; reductions feeding these files are
// fixed-order, so identical config + seed gives byte-identical output.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dbar/flow.hpp"
#include "dbar/hopf_family.hpp"

namespace dbar {

inline constexpr const char* kVersion = "dbarlab 0.1.0";

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_provenance(std::ostream& os,
                             const std::vector<std::string>& meta) {
  os << "# " << kVersion << "\n";
  for (const std::string& line : meta) os << "# " << line << "\n";
}

// fixed column order: t,E,K,E_plus,E_minus,E_a,sup_dTf,tau_norm,tau_plus_norm
inline void write_trace_csv(std::ostream& os, const FlowTrace& trace,
                            const std::vector<std::string>& meta) {
  write_provenance(os, meta);
  os << "t,E,K,E_plus,E_minus,E_a,sup_dTf,tau_norm,tau_plus_norm,"
        "tau_plus_sup,blowup,argmax_is,argmax_itheta\n";
  for (const TraceRow& r : trace.rows) {
    os << fmt(r.t) << ',' << fmt(r.report.E) << ',' << fmt(r.report.K) << ','
       << fmt(r.report.E_plus) << ',' << fmt(r.report.E_minus) << ','
       << fmt(r.report.E_a) << ',' << fmt(r.report.sup_dTf) << ','
       << fmt(r.tau_l2) << ',' << fmt(r.tau_plus_l2) << ','
       << fmt(r.tau_plus_sup) << ',' << (r.blowup ? 1 : 0) << ','
       << r.argmax_is << ',' << r.argmax_ith << '\n';
  }
  os << "# status = " << to_string(trace.status) << "\n";
}

inline void write_frame_trajectory_csv(std::ostream& os,
                                       const FrameFlowResult& res,
                                       const std::vector<std::string>& meta) {
  write_provenance(os, meta);
  os << "t,u1,u2,u3,u4,v1,v2,v3,v4,c,E_plus\n";
  for (const FrameTrajectoryRow& r : res.rows) {
    os << fmt(r.t);
    for (int i = 0; i < 4; ++i) os << ',' << fmt(r.frame.u[i]);
    for (int i = 0; i < 4; ++i) os << ',' << fmt(r.frame.v[i]);
    os << ',' << fmt(r.c) << ',' << fmt(r.e_plus) << '\n';
  }
  os << "# classification = " << to_string(res.classification) << "\n";
}

struct BasinRow {
  double c0;
  FrameClass classification;
  double convergence_time;
};

inline void write_basin_csv(std::ostream& os, const std::vector<BasinRow>& rows,
                            const std::vector<std::string>& meta) {
  write_provenance(os, meta);
  os << "c0,classification,convergence_time\n";
  for (const BasinRow& r : rows)
    os << fmt(r.c0) << ',' << to_string(r.classification) << ','
       << fmt(r.convergence_time) << '\n';
}

// ---------------------------------------------------------------------------
// field dumps: one row per node, plus a header naming models, deck scale,
// grid sizes and twist integers

inline void write_field(std::ostream& os, const MapField& f,
                        const std::vector<std::string>& meta = {}) {
  write_provenance(os, meta);
  os << "# source = " << f.source->name << "\n";
  os << "# target = " << f.target->name << "\n";
  os << "# alpha = " << fmt(f.target->alpha) << "\n";
  os << "# n_s = " << f.grid.n_s << "\n";
  os << "# n_theta = " << f.grid.n_theta << "\n";
  os << "# twist = " << f.twist.deck_power_s << ' ' << f.twist.deck_power_theta
     << "\n";
  os << "is,itheta,s,theta";
  for (int c = 0; c < f.dim(); ++c) os << ",y" << c + 1;
  os << "\n";
  for (int is = 0; is < f.grid.n_s; ++is)
    for (int ith = 0; ith < f.grid.n_theta; ++ith) {
      const Vec p = f.position(is, ith);
      os << is << ',' << ith << ',' << fmt(p[0]) << ',' << fmt(p[1]);
      const double* y = f.at(is, ith);
      for (int c = 0; c < f.dim(); ++c) os << ',' << fmt(y[c]);
      os << '\n';
    }
}

inline MapField read_field(std::istream& is, ModelPtr source, ModelPtr target) {
  std::string line;
  int ns = -1, nt = -1;
  TwistData twist;
  std::string src_name, tgt_name;
  std::streampos data_start = is.tellg();
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key, eq;
      ls >> key;
      if (key == "source") { ls >> eq >> src_name; }
      else if (key == "target") { ls >> eq >> tgt_name; }
      else if (key == "n_s") { ls >> eq >> ns; }
      else if (key == "n_theta") { ls >> eq >> nt; }
      else if (key == "twist") {
        ls >> eq >> twist.deck_power_s >> twist.deck_power_theta;
      }
      data_start = is.tellg();
      continue;
    }
    if (line.rfind("is,", 0) == 0) { data_start = is.tellg(); break; }
  }
  if (ns < 8 || nt < 8) throw config_error("field", "missing grid sizes in dump");
  if (!src_name.empty() && src_name != source->name)
    throw config_error("field", "dump source model '" + src_name +
                                    "' does not match '" + source->name + "'");
  if (!tgt_name.empty() && tgt_name != target->name)
    throw config_error("field", "dump target model '" + tgt_name +
                                    "' does not match '" + target->name + "'");
  is.seekg(data_start);
  MapField f = MapField::make(std::move(source), std::move(target), ns, nt, twist);
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<double> cols;
    while (std::getline(ls, tok, ',')) cols.push_back(std::stod(tok));
    if (cols.size() != 4 + static_cast<std::size_t>(f.dim()))
      throw config_error("field", "bad column count in field dump row");
    const int i = static_cast<int>(cols[0]), j = static_cast<int>(cols[1]);
    Vec y(f.dim());
    for (int c = 0; c < f.dim(); ++c) y[c] = cols[4 + c];
    f.set_node(i, j, y);
  }
  return f;
}

}  // namespace dbar
