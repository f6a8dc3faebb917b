#pragma once

// Kinematic tree, forward kinematics, weak-perspective projection, and
// horizontal-flip augmentation.
//
// Coordinates: meters, x lateral (subject's left is +x), y up, z forward.
// The mirror plane for flipping is x = 0.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rotokin/so3.hpp"

namespace rotokin {

using Vec2 = Eigen::Vector2d;

class KinematicTree {
 public:
  KinematicTree() = default;
  // Validates: single root at index 0, parent[k] < k, offset[root] = 0,
  // left_right_map an involution. Throws Error(Schema) otherwise.
  KinematicTree(std::vector<std::string> joint_names, std::vector<int> parents,
                std::vector<Vec3> template_offsets, std::vector<int> left_right_map);

  std::size_t size() const { return parents_.size(); }
  const std::vector<std::string>& joint_names() const { return joint_names_; }
  const std::vector<int>& parents() const { return parents_; }
  int parent(std::size_t k) const { return parents_[k]; }
  const std::vector<Vec3>& template_offsets() const { return offsets_; }
  const Vec3& offset(std::size_t k) const { return offsets_[k]; }
  const std::vector<int>& left_right_map() const { return left_right_map_; }
  const std::vector<std::vector<int>>& children() const { return children_; }

  // True when the tree maps onto itself under the x = 0 reflection:
  // parents and offsets commute with left_right_map.
  bool is_symmetric(double tolerance = 1e-12) const;

  // Index of a joint by name, or -1.
  int find(std::string_view name) const;

 private:
  std::vector<std::string> joint_names_;
  std::vector<int> parents_;
  std::vector<Vec3> offsets_;
  std::vector<int> left_right_map_;
  std::vector<std::vector<int>> children_;
};

// 22 body joints, pelvis root.
const KinematicTree& body22_tree();
// body22 plus thumb and pinky joints on each hand.
const KinematicTree& body26_tree();

struct BodyShape {
  std::vector<double> bone_scales;  // one positive factor per joint

  static BodyShape neutral(std::size_t joints) { return {std::vector<double>(joints, 1.0)}; }
  void validate(const KinematicTree& tree) const;
};

struct Pose {
  JointRotations joint_rotations;  // root entry is the global orientation
};

struct Pose3D {
  std::vector<Vec3> positions;  // root-relative, meters
};

struct Pose2D {
  std::vector<Vec2> positions;  // normalized image units
};

struct Frame {
  double ts = 0.0;
  Pose2D pose2d;
  std::optional<Pose3D> pose3d;
  std::optional<Pose> pose;
};

struct PoseSequence {
  std::vector<Frame> frames;
  double frame_rate = 0.0;  // Hz

  // Timestamps strictly increasing and all joint counts equal to `joints`.
  void validate(std::size_t joints) const;
};

struct FkResult {
  Pose3D pose3d;
  JointRotations global_rotations;
};

FkResult forward_kinematics(const KinematicTree& tree, const BodyShape& shape, const Pose& pose);
// Same computation visiting joints in `order`, which must list every joint
// after its parent.
FkResult forward_kinematics(const KinematicTree& tree, const BodyShape& shape, const Pose& pose,
                            std::span<const int> order);

// Reverse-mode pass through forward_kinematics: given dL/dp for every joint
// position, returns dL/dR_k for every parent-relative rotation matrix.
std::vector<Mat3> forward_kinematics_vjp(const KinematicTree& tree, const BodyShape& shape,
                                         const Pose& pose, const FkResult& fk,
                                         std::span<const Vec3> dl_dp);

// Composes parent-relative rotations into world rotations.
JointRotations compose_global_rotations(const KinematicTree& tree, const JointRotations& local);

struct WeakPerspectiveCamera {
  double scale = 1.0;
  Vec2 offset = Vec2::Zero();
};

// (x, y, z) -> scale * (x, y) + offset
Pose2D project(const Pose3D& pose3d, const WeakPerspectiveCamera& camera);
// Inverse of project() for the (x, y) part; z is set to `depth`.
Pose3D unproject(const Pose2D& pose2d, const WeakPerspectiveCamera& camera,
                 std::span<const double> depth);

// Mirror across x = 0 (x = center_x for 2D) then swap left/right joints.
// Rotations are conjugated by diag(-1, 1, 1).
Pose3D horizontal_flip(const KinematicTree& tree, const Pose3D& pose);
Pose2D horizontal_flip(const KinematicTree& tree, const Pose2D& pose, double center_x = 0.0);
Pose horizontal_flip(const KinematicTree& tree, const Pose& pose);
BodyShape horizontal_flip(const KinematicTree& tree, const BodyShape& shape);
Frame horizontal_flip(const KinematicTree& tree, const Frame& frame);
PoseSequence horizontal_flip(const KinematicTree& tree, const PoseSequence& seq);
RotMatrix mirror_rotation(const RotMatrix& r);

// How the flipped half of a within-batch-augmented batch is chosen.
enum class WbaPairing {
  // Second half = flips of the first half's windows (effective batch halves).
  Duplicate,
  // Second half = flips of the windows originally in the second half.
  FlipDistinct,
};

// First half of the output is the unmodified first half of `batch`; the
// second half holds flipped windows chosen per `pairing`. Batch size must be
// even.
template <class Window>
std::vector<Window> build_wba_batch(const KinematicTree& tree, const std::vector<Window>& batch,
                                    WbaPairing pairing = WbaPairing::FlipDistinct);

void require_even_batch(std::size_t size);

template <class Window>
std::vector<Window> build_wba_batch(const KinematicTree& tree, const std::vector<Window>& batch,
                                    WbaPairing pairing) {
  require_even_batch(batch.size());
  const std::size_t half = batch.size() / 2;
  std::vector<Window> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < half; ++i) out.push_back(batch[i]);
  for (std::size_t i = 0; i < half; ++i) {
    const std::size_t src = pairing == WbaPairing::Duplicate ? i : half + i;
    out.push_back(horizontal_flip(tree, batch[src]));
  }
  return out;
}

}  // namespace rotokin
