#pragma once

#include <stdexcept>
#include <string>

namespace dbar {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Metric not invertible at a sampled point.
struct degenerate_metric_error : error {
  using error::error;
};

// An iterate reached the removed point of a covering-space chart.
struct puncture_error : error {
  puncture_error(const std::string& what, int node_s = -1, int node_theta = -1)
      : error(what), is(node_s), itheta(node_theta) {}
  int is, itheta;
};

// Bad or out-of-range configuration; `key` names the offending field.
struct config_error : error {
  config_error(const std::string& key_, const std::string& what)
      : error("config error [" + key_ + "]: " + what), key(key_) {}
  std::string key;
};

// Endpoints of a homotopy are not in the same class.
struct homotopy_error : error {
  using error::error;
};

// Non-finite value produced by a time step.
struct integrator_error : error {
  integrator_error(const std::string& what, int node_s, int node_theta)
      : error(what), is(node_s), itheta(node_theta) {}
  int is, itheta;
};

struct eigensolver_error : error {
  using error::error;
};

}  // namespace dbar
