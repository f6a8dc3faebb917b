#include "rotokin/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <json.hpp>

#include "rotokin/error.hpp"
#include "rotokin/simd/kernels.hpp"

namespace rotokin {
namespace {

constexpr double kRadToDeg = 180.0 / kPi;

JointSubset preset(const KinematicTree& tree, std::size_t count, const char* name) {
  if (tree.size() < count) {
    throw Error(ErrorKind::InvalidArgument, std::string("subset preset ") + name + " needs " +
                                                std::to_string(count) + " joints, tree has " +
                                                std::to_string(tree.size()));
  }
  JointSubset s(count);
  for (std::size_t k = 0; k < count; ++k) s[k] = static_cast<int>(k);
  return s;
}

void check_subset(const JointSubset& subset, std::size_t joints) {
  if (subset.empty()) throw Error(ErrorKind::InvalidArgument, "joint subset is empty");
  for (int k : subset) {
    if (k < 0 || static_cast<std::size_t>(k) >= joints) {
      throw Error(ErrorKind::InvalidArgument,
                  "joint subset index " + std::to_string(k) + " out of range");
    }
  }
}

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": mismatched joint counts (" +
                                              std::to_string(a) + " vs " + std::to_string(b) +
                                              ")");
  }
}

}  // namespace

JointSubset subset_body22(const KinematicTree& tree) { return preset(tree, 22, "body22"); }
JointSubset subset_body26(const KinematicTree& tree) { return preset(tree, 26, "body26"); }
JointSubset all_joints(const KinematicTree& tree) { return preset(tree, tree.size(), "all"); }

JointSubset parse_subset(std::string_view text, const KinematicTree& tree) {
  if (text == "body22") return subset_body22(tree);
  if (text == "body26") return subset_body26(tree);
  if (text == "all") return all_joints(tree);
  JointSubset out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string_view item = text.substr(pos, comma - pos);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw Error(ErrorKind::InvalidArgument, "bad joint subset '" + std::string(text) + "'");
    }
    out.push_back(value);
    pos = comma + 1;
  }
  check_subset(out, tree.size());
  return out;
}

std::vector<double> per_joint_angle_deg(const JointRotations& pred, const JointRotations& gt,
                                        const JointSubset& subset) {
  check_lengths(pred.size(), gt.size(), "mpjae");
  check_subset(subset, pred.size());
  JointRotations a, b;
  a.reserve(subset.size());
  b.reserve(subset.size());
  for (int k : subset) {
    a.push_back(pred[k]);
    b.push_back(gt[k]);
  }
  std::vector<double> out(subset.size());
  geodesic_distances(a, b, out);
  for (double& v : out) v *= kRadToDeg;
  return out;
}

double mpjae(const JointRotations& pred, const JointRotations& gt, const JointSubset& subset) {
  check_lengths(pred.size(), gt.size(), "mpjae");
  check_subset(subset, pred.size());
  JointRotations a, b;
  for (int k : subset) {
    a.push_back(pred[k]);
    b.push_back(gt[k]);
  }
  // Same reduction as geodesic_loss so the two agree to rounding.
  return kRadToDeg * geodesic_loss(a, b);
}

std::vector<double> per_joint_position_error_mm(const Pose3D& pred, const Pose3D& gt,
                                                const JointSubset& subset) {
  check_lengths(pred.positions.size(), gt.positions.size(), "mpjpe");
  check_subset(subset, pred.positions.size());
  const Vec3 pred_root = pred.positions[0];
  const Vec3 gt_root = gt.positions[0];
  std::vector<double> a(3 * subset.size()), b(3 * subset.size());
  for (std::size_t i = 0; i < subset.size(); ++i) {
    const Vec3 pa = pred.positions[subset[i]] - pred_root;
    const Vec3 pb = gt.positions[subset[i]] - gt_root;
    for (int c = 0; c < 3; ++c) {
      a[3 * i + c] = pa(c);
      b[3 * i + c] = pb(c);
    }
  }
  std::vector<double> out(subset.size());
  simd::active().point_distances(a.data(), b.data(), out.data(), subset.size());
  for (double& v : out) v *= 1000.0;
  return out;
}

double mpjpe(const Pose3D& pred, const Pose3D& gt, const JointSubset& subset) {
  const std::vector<double> d = per_joint_position_error_mm(pred, gt, subset);
  double sum = 0.0;
  for (double v : d) sum += v;
  return sum / static_cast<double>(d.size());
}

JointRotations pad_with_identity(const JointRotations& pred, std::size_t joints) {
  if (pred.size() > joints) {
    throw Error(ErrorKind::ShapeMismatch, "prediction has more joints than the tree");
  }
  JointRotations out = pred;
  out.resize(joints, RotMatrix::identity());
  return out;
}

MetricAccumulator::MetricAccumulator(const KinematicTree& tree, JointSubset subset,
                                     RotationFrame frame)
    : tree_(tree),
      subset_(std::move(subset)),
      rotation_frame_(frame),
      position_sum_(subset_.size(), 0.0),
      angle_sum_(subset_.size(), 0.0) {
  check_subset(subset_, tree_.size());
}

void MetricAccumulator::add_positions(const Pose3D& pred, const Pose3D& gt) {
  const std::vector<double> d = per_joint_position_error_mm(pred, gt, subset_);
  for (std::size_t i = 0; i < d.size(); ++i) position_sum_[i] += d[i];
  ++position_frames_;
}

void MetricAccumulator::add_rotations(const JointRotations& pred, const JointRotations& gt) {
  std::vector<double> d;
  if (rotation_frame_ == RotationFrame::Global) {
    d = per_joint_angle_deg(compose_global_rotations(tree_, pred),
                            compose_global_rotations(tree_, gt), subset_);
  } else {
    d = per_joint_angle_deg(pred, gt, subset_);
  }
  for (std::size_t i = 0; i < d.size(); ++i) angle_sum_[i] += d[i];
  ++rotation_frames_;
}

MetricReport MetricAccumulator::report() const {
  MetricReport r;
  r.joint_subset = subset_;
  r.frames = std::max(position_frames_, rotation_frames_);
  r.has_positions = position_frames_ > 0;
  r.has_rotations = rotation_frames_ > 0;
  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  if (r.has_positions) {
    r.per_joint_mpjpe = position_sum_;
    for (double& v : r.per_joint_mpjpe) v /= static_cast<double>(position_frames_);
    r.mpjpe_mm = mean_of(r.per_joint_mpjpe);
  }
  if (r.has_rotations) {
    r.per_joint_mpjae = angle_sum_;
    for (double& v : r.per_joint_mpjae) v /= static_cast<double>(rotation_frames_);
    r.mpjae_deg = mean_of(r.per_joint_mpjae);
  }
  return r;
}

std::string to_json(const MetricReport& report, int indent) {
  nlohmann::ordered_json j;
  j["frames"] = report.frames;
  j["joint_subset"] = report.joint_subset;
  if (report.has_positions) {
    j["mpjpe_mm"] = report.mpjpe_mm;
    j["per_joint_mpjpe"] = report.per_joint_mpjpe;
  }
  if (report.has_rotations) {
    j["mpjae_deg"] = report.mpjae_deg;
    j["per_joint_mpjae"] = report.per_joint_mpjae;
  }
  return j.dump(indent);
}

std::string format_table(std::span<const TableRow> rows) {
  double best_pe = std::numeric_limits<double>::infinity();
  double best_ae = std::numeric_limits<double>::infinity();
  for (const TableRow& r : rows) {
    if (r.diverged) continue;
    if (std::isfinite(r.mpjpe_mm)) best_pe = std::min(best_pe, r.mpjpe_mm);
    if (std::isfinite(r.mpjae_deg)) best_ae = std::min(best_ae, r.mpjae_deg);
  }
  std::size_t model_w = 5;
  for (const TableRow& r : rows) model_w = std::max(model_w, r.model.size());

  auto cell = [](double v, bool best) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%10.2f%s", v, best ? "*" : " ");
    return std::string(buf);
  };
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s | %-8s | %-3s | %11s | %11s |\n",
                static_cast<int>(model_w), "Model", "L_angle", "WBA", "MPJPE [mm]", "MPJAE [deg]");
  out += line;
  out += std::string(model_w, '-') + "-+----------+-----+-------------+-------------+\n";
  for (const TableRow& r : rows) {
    std::snprintf(line, sizeof line, "%-*s | %-8s | %-3s | %s | %s |%s\n",
                  static_cast<int>(model_w), r.model.c_str(), r.loss.c_str(),
                  r.wba ? "yes" : "-",
                  cell(r.mpjpe_mm, !r.diverged && r.mpjpe_mm == best_pe).c_str(),
                  cell(r.mpjae_deg, !r.diverged && r.mpjae_deg == best_ae).c_str(),
                  r.diverged ? " diverged" : "");
    out += line;
  }
  return out;
}

}  // namespace rotokin
