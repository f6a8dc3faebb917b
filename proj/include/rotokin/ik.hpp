#pragma once

// Optimization-based inverse kinematics: recovers parent-relative joint
// rotations (and optionally bone scales) that reproduce target joint
// positions.
//
// The solver is Levenberg-Marquardt over right-multiplied axis-angle
// increments, R_k <- R_k * exp(delta_k). Objective:
//
//   sum_j |FK(theta)_j - target_j|^2  +  prior_weight * sum_{k != root} phi_k^2
//
// with positions in millimeters and phi_k the rotation angle (radians) of
// joint k away from the rest pose. The
// root is left out of the prior so global orientation is unpenalized.
// Rotations about a bone whose child positions are collinear with it are not
// observable from positions; without a prior they stay where the
// initialization put them.

#include <Eigen/Core>
#include <vector>

#include "rotokin/kinematics.hpp"

namespace rotokin {

struct IKConfig {
  int max_iterations = 200;
  double position_tolerance = 1e-4;  // meters, max per-joint error
  double damping_lambda = 1e-3;      // initial LM damping
  double prior_weight = 1e-3;
  bool warm_start = true;
  bool optimize_scales = false;

  void validate() const;
};

enum class IKStop {
  Converged,       // max joint error <= tolerance
  MaxIterations,
  Stalled,         // relative decrease below 1e-12, or no decrease at any damping
};

struct IKResult {
  Pose pose;
  BodyShape shape;                   // equals the input unless optimize_scales
  double final_residual_mm = 0.0;    // max per-joint position error
  int iterations_used = 0;           // LM step attempts, accepted or not
  bool converged = false;
  double wall_time_ms = 0.0;
  IKStop stop = IKStop::MaxIterations;
  bool degenerate_target = false;    // all target joints coincide
  std::vector<double> objective_trace;  // objective after init and each accepted step
};

// Position Jacobian d p / d (delta, scales), 3K rows. Columns are 3 per joint
// for the rotation increments, followed by K scale columns when
// with_scales is set. Evaluated at the FK state of (shape, pose).
Eigen::MatrixXd position_jacobian(const KinematicTree& tree, const BodyShape& shape,
                                  const Pose& pose, bool with_scales);

double ik_objective(const KinematicTree& tree, const BodyShape& shape, const Pose& pose,
                    const Pose3D& targets, double prior_weight);

Pose rest_pose(const KinematicTree& tree);

IKResult solve_frame(const KinematicTree& tree, const BodyShape& shape, const Pose3D& targets,
                     const Pose& init, const IKConfig& cfg);

// Frame 0 starts from the rest pose; later frames start from the previous
// result when cfg.warm_start is set, otherwise from the rest pose.
std::vector<IKResult> solve_sequence(const KinematicTree& tree, const BodyShape& shape,
                                     const std::vector<Pose3D>& targets, const IKConfig& cfg);

struct PseudoLabelFrame {
  Pose pose;
  bool converged = false;
  double residual_mm = 0.0;
  int iterations = 0;
};

// Runs solve_sequence on each sequence (in parallel across sequences).
// Non-converged frames are kept and flagged, never dropped.
std::vector<std::vector<PseudoLabelFrame>> generate_pseudo_labels(
    const KinematicTree& tree, const BodyShape& shape,
    const std::vector<std::vector<Pose3D>>& dataset, const IKConfig& cfg);

}  // namespace rotokin
