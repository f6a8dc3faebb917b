#include "rotokin/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "rotokin/error.hpp"

namespace rotokin {

void BenchConfig::validate() const {
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, "bench samples must be >= 1");
  if (warmup < 0) throw Error(ErrorKind::InvalidArgument, "bench warmup must be >= 0");
  if (modes.empty()) throw Error(ErrorKind::InvalidArgument, "no bench modes given");
  for (const std::string& m : modes) {
    if (m != "ik-warm" && m != "ik-cold" && m != "regress") {
      throw Error(ErrorKind::InvalidArgument, "unknown bench mode '" + m + "'");
    }
  }
  ik.validate();
  regressor.validate();
}

const BenchRow* BenchReport::find(std::string_view mode) const {
  for (const BenchRow& r : rows) {
    if (r.mode == mode) return &r;
  }
  return nullptr;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace

BenchReport run_bench(const BenchConfig& cfg) {
  cfg.validate();
  const int total = cfg.samples + cfg.warmup;
  SyntheticSpec spec;
  spec.tree_preset = cfg.tree_preset;
  spec.num_sequences = 1;
  spec.frames_per_sequence = total;
  // About 200 frames between keyframes: slow, smooth motion.
  spec.keyframe_count = 1 + std::max(1, total / 200);
  spec.seed = cfg.seed;
  const SyntheticDataset data = generate_synthetic(spec);
  const std::vector<Frame>& frames = data.sequences[0].frames;

  BenchReport report;
  for (const std::string& mode : cfg.modes) {
    std::vector<double> times, iters;
    times.reserve(cfg.samples);
    iters.reserve(cfg.samples);
    if (mode == "regress") {
      std::vector<Sample> samples;
      samples.reserve(frames.size());
      for (const Frame& f : frames) samples.push_back(make_sample(f));
      const Regressor model(data.tree, data.shape, cfg.regressor, samples[0].input.size());
      double sink = 0.0;
      for (int t = 0; t < total; ++t) {
        const auto t0 = Clock::now();
        const Regressor::Prediction p = model.predict(samples[t].input);
        const double ms = ms_since(t0);
        sink += p.pose3d.positions.back().x();
        if (t >= cfg.warmup) {
          times.push_back(ms);
          iters.push_back(0.0);
        }
      }
      if (!std::isfinite(sink)) throw Error(ErrorKind::InvalidArgument, "regressor output is not finite");
    } else {
      const bool warm = mode == "ik-warm";
      const Pose rest = rest_pose(data.tree);
      Pose previous = rest;
      for (int t = 0; t < total; ++t) {
        const Pose& init = warm && t > 0 ? previous : rest;
        const auto t0 = Clock::now();
        IKResult r = solve_frame(data.tree, data.shape, *frames[t].pose3d, init, cfg.ik);
        const double ms = ms_since(t0);
        if (t >= cfg.warmup) {
          times.push_back(ms);
          iters.push_back(r.iterations_used);
        }
        previous = std::move(r.pose);
      }
    }
    BenchRow row;
    row.mode = mode;
    row.samples = static_cast<int>(times.size());
    mean_std(times, row.mean_ms, row.std_ms);
    mean_std(iters, row.mean_iterations, row.std_iterations);
    report.rows.push_back(row);
  }
  return report;
}

std::string format_bench(const BenchReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s | %22s | %18s | %7s\n", "mode", "time [ms/frame]",
                "iterations", "samples");
  out += line;
  out += "---------+------------------------+--------------------+--------\n";
  for (const BenchRow& r : report.rows) {
    std::snprintf(line, sizeof line, "%-8s | %10.4f +- %8.4f | %7.2f +- %6.2f | %7d\n",
                  r.mode.c_str(), r.mean_ms, r.std_ms, r.mean_iterations, r.std_iterations,
                  r.samples);
    out += line;
  }
  return out;
}

std::string to_json(const BenchReport& report, int indent) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const BenchRow& r : report.rows) {
    j.push_back({{"mode", r.mode},
                 {"mean_ms", r.mean_ms},
                 {"std_ms", r.std_ms},
                 {"mean_iterations", r.mean_iterations},
                 {"std_iterations", r.std_iterations},
                 {"samples", r.samples}});
  }
  return j.dump(indent);
}

}  // namespace rotokin
