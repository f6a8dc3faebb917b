#pragma once

// Per-frame runtime comparison of IK (warm and cold start) against a direct
// regressor forward pass, on one smooth synthetic sequence.

#include <string>
#include <vector>

#include "rotokin/ik.hpp"
#include "rotokin/testbed.hpp"

namespace rotokin {

struct BenchConfig {
  // Any of "ik-warm", "ik-cold", "regress".
  std::vector<std::string> modes = {"ik-warm", "ik-cold", "regress"};
  int samples = 1000;  // timed frames per mode
  int warmup = 10;     // frames run first and discarded
  std::string tree_preset = "body22";
  std::uint64_t seed = 0;
  IKConfig ik;
  RegressorConfig regressor;

  void validate() const;
};

struct BenchRow {
  std::string mode;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  double mean_iterations = 0.0;
  double std_iterations = 0.0;
  int samples = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;

  const BenchRow* find(std::string_view mode) const;
};

// The timed region is the solver or forward call only; data generation and
// output happen outside it.
BenchReport run_bench(const BenchConfig& cfg);

std::string format_bench(const BenchReport& report);
std::string to_json(const BenchReport& report, int indent = 2);

}  // namespace rotokin
