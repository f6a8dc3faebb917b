#pragma once

// MPJAE over joint rotations and root-relative MPJPE over joint positions,
// with joint-subset selection and per-joint breakdowns.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rotokin/kinematics.hpp"

namespace rotokin {

using JointSubset = std::vector<int>;

// Index lists bound to the shipped presets. Throws if the tree has fewer
// joints than the preset needs.
JointSubset subset_body22(const KinematicTree& tree);
JointSubset subset_body26(const KinematicTree& tree);
JointSubset all_joints(const KinematicTree& tree);
// "body22", "body26", "all", or a comma-separated index list.
JointSubset parse_subset(std::string_view text, const KinematicTree& tree);

enum class RotationFrame {
  ParentRelative,
  Global,
};

// Mean geodesic angle over `subset`, in degrees.
double mpjae(const JointRotations& pred, const JointRotations& gt, const JointSubset& subset);
// Per-joint angles (degrees) for each index in `subset`.
std::vector<double> per_joint_angle_deg(const JointRotations& pred, const JointRotations& gt,
                                        const JointSubset& subset);

// Mean Euclidean distance over `subset` after subtracting each pose's root,
// reported in millimeters.
double mpjpe(const Pose3D& pred, const Pose3D& gt, const JointSubset& subset);
std::vector<double> per_joint_position_error_mm(const Pose3D& pred, const Pose3D& gt,
                                                const JointSubset& subset);

// Pads predictions that lack trailing joints (e.g. hands) with identity
// rotations up to the tree's size.
JointRotations pad_with_identity(const JointRotations& pred, std::size_t joints);

struct MetricReport {
  double mpjpe_mm = 0.0;
  double mpjae_deg = 0.0;
  std::vector<double> per_joint_mpjpe;  // mm, one per subset entry
  std::vector<double> per_joint_mpjae;  // deg, one per subset entry
  JointSubset joint_subset;
  std::size_t frames = 0;
  bool has_positions = false;
  bool has_rotations = false;
};

// Accumulates per-joint sums over frames; aggregates equal the mean of the
// per-joint vectors.
class MetricAccumulator {
 public:
  MetricAccumulator(const KinematicTree& tree, JointSubset subset,
                    RotationFrame frame = RotationFrame::ParentRelative);

  void add_positions(const Pose3D& pred, const Pose3D& gt);
  void add_rotations(const JointRotations& pred, const JointRotations& gt);
  MetricReport report() const;

 private:
  KinematicTree tree_;
  JointSubset subset_;
  RotationFrame rotation_frame_;
  std::vector<double> position_sum_;
  std::vector<double> angle_sum_;
  std::size_t position_frames_ = 0;
  std::size_t rotation_frames_ = 0;
};

std::string to_json(const MetricReport& report, int indent = 2);

// Aligned-column comparison table (model, loss, WBA, MPJPE, MPJAE).
struct TableRow {
  std::string model;
  std::string loss;
  bool wba = false;
  double mpjpe_mm = 0.0;
  double mpjae_deg = 0.0;
  bool diverged = false;
};
// Best (lowest) value in each metric column is marked with '*'.
std::string format_table(std::span<const TableRow> rows);

}  // namespace rotokin
