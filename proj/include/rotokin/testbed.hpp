#pragma once

// Synthetic-data experiment runner: a per-frame one-hidden-layer regressor
// from root-centered 2D keypoints to joint positions and rotations, trained
// with hand-derived gradients under each (representation, loss, WBA) setting.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rotokin/kinematics.hpp"
#include "rotokin/metrics.hpp"

namespace rotokin {

struct SyntheticSpec {
  std::string tree_preset = "body22";
  int num_sequences = 8;
  int frames_per_sequence = 60;
  int keyframe_count = 4;
  double noise_std_2d = 0.0;
  double camera_scale = 1.0;
  Vec2 camera_offset = Vec2::Zero();
  double frame_rate = 50.0;
  double keyframe_angle_bound = 2.0 * kPi / 3.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticDataset {
  KinematicTree tree;
  BodyShape shape;
  WeakPerspectiveCamera camera;
  std::vector<PoseSequence> sequences;
};

// "body22" / "body26".
const KinematicTree& tree_preset(std::string_view name);

// Keyframe rotations per joint are drawn uniformly on SO(3) subject to the
// angle bound, slerped between keyframes, run through FK and projection, and
// perturbed with Gaussian 2D noise. Bit-identical for a fixed seed.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

enum class HeadMode {
  // Separate linear heads for joint positions and rotations.
  Naive,
  // Rotations only; positions come from forward kinematics of the decoded
  // rotations with the dataset's body shape.
  Fk,
};

struct RegressorConfig {
  Representation representation = Representation::Matrix;
  LossKind loss = LossKind::Geodesic;
  bool wba = false;
  WbaPairing wba_pairing = WbaPairing::FlipDistinct;
  HeadMode head = HeadMode::Naive;
  int hidden_width = 64;
  double learning_rate = 0.05;
  int epochs = 30;
  int batch_size = 16;
  double loss_weight_lambda = 1.0;  // weight of the rotation loss
  double validation_fraction = 0.25;
  std::uint64_t seed = 1;
  bool preflight = true;  // finite-difference gradient check before training

  void validate() const;
  // N-RM-2 style code: head prefix, representation, and 1..4 for
  // (mse, -), (geodesic, -), (mse, wba), (geodesic, wba).
  std::string model_code() const;
};

// One training example: flattened root-centered 2D input plus targets.
struct Sample {
  std::vector<double> input;
  Pose3D pose3d;
  JointRotations rotations;
};

Sample make_sample(const Frame& frame);

class Regressor {
 public:
  Regressor(const KinematicTree& tree, const BodyShape& shape, const RegressorConfig& cfg,
            std::size_t input_dim);

  struct Prediction {
    Pose3D pose3d;
    JointRotations rotations;
    std::vector<double> raw_rotations;
  };

  Prediction predict(std::span<const double> input) const;

  // Mean over the batch of L_joint + lambda * L_angle.
  double loss(std::span<const Sample> batch) const;
  // Same value; writes dL/dparameters into `gradient` (resized).
  double loss_and_gradient(std::span<const Sample> batch, std::vector<double>& gradient) const;

  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  // Index ranges of the rotation head (weights and bias) in parameters().
  std::pair<std::size_t, std::size_t> rotation_head_range() const;

  const RegressorConfig& config() const { return cfg_; }

 private:
  struct Cache {
    std::vector<double> hidden;
    std::vector<double> joints;
    std::vector<double> rot_raw;
  };
  void forward(std::span<const double> input, Cache& cache) const;
  double sample_loss(const Sample& s, Cache& cache, std::vector<double>* d_joints,
                     std::vector<double>* d_rot) const;

  KinematicTree tree_;
  BodyShape shape_;
  RegressorConfig cfg_;
  std::size_t input_dim_;
  std::size_t hidden_;
  std::size_t joint_out_;
  std::size_t rot_out_;
  // Offsets into params_.
  std::size_t w1_, b1_, wj_, bj_, wr_, br_;
  std::vector<double> params_;
};

// L_joint: mean over joints of squared Euclidean error (m^2).
double joint_loss(const Pose3D& pred, const Pose3D& gt);
// Positions from FK of `rotations`, scored with joint_loss.
double joint_loss_through_fk(const KinematicTree& tree, const BodyShape& shape,
                             const JointRotations& rotations, const Pose3D& gt);

// Largest |a-b| / max(|a|, |b|, 1e-5) between analytic and central-difference
// gradients over the given parameter indices.
double gradient_check(const Regressor& model, std::span<const Sample> batch,
                      std::span<const std::size_t> indices, double step = 1e-6);

struct TrainReport {
  RegressorConfig config;
  std::string model_code;
  MetricReport train;
  MetricReport validation;
  std::vector<double> loss_curve;  // mean batch loss per epoch
  double initial_loss = 0.0;       // full training-set loss before the first step
  double final_loss = 0.0;         // full training-set loss after training
  bool diverged = false;           // non-finite or > 10x initial loss
  double preflight_max_rel_error = 0.0;
  bool preflight_ok = true;
};

TrainReport train_regressor(const SyntheticDataset& data, const RegressorConfig& cfg);

// Same as train_regressor, also returning the trained model.
TrainReport train_regressor(const SyntheticDataset& data, const RegressorConfig& cfg,
                            Regressor* trained);

// Evaluates `model` on the given frames (all tree joints).
MetricReport evaluate(const Regressor& model, const KinematicTree& tree,
                      std::span<const Sample> samples);

struct GridReport {
  std::vector<TrainReport> cells;
  std::string table;
};

// Cells run in parallel; the report is ordered as `configs`.
GridReport run_grid(const SyntheticDataset& data, const std::vector<RegressorConfig>& configs);

// The 12-cell grid: representation (AA, Q, RM) x loss (MSE, geodesic) x WBA.
std::vector<RegressorConfig> full_grid(const RegressorConfig& base);

std::string to_json(const TrainReport& report, int indent = 2);
std::string to_json(const GridReport& report, int indent = 2);

}  // namespace rotokin
