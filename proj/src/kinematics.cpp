#include "rotokin/kinematics.hpp"

#include <numeric>
#include <string>

#include "rotokin/error.hpp"

namespace rotokin {

KinematicTree::KinematicTree(std::vector<std::string> joint_names, std::vector<int> parents,
                             std::vector<Vec3> template_offsets, std::vector<int> left_right_map)
    : joint_names_(std::move(joint_names)),
      parents_(std::move(parents)),
      offsets_(std::move(template_offsets)),
      left_right_map_(std::move(left_right_map)) {
  const std::size_t n = parents_.size();
  if (n == 0) throw Error(ErrorKind::Schema, "tree has no joints", std::nullopt, "/parents");
  if (joint_names_.size() != n) {
    throw Error(ErrorKind::Schema, "joint_names length differs from parents", std::nullopt,
                "/joint_names");
  }
  if (offsets_.size() != n) {
    throw Error(ErrorKind::Schema, "template_offsets length differs from parents", std::nullopt,
                "/template_offsets");
  }
  if (left_right_map_.size() != n) {
    throw Error(ErrorKind::Schema, "left_right_map length differs from parents", std::nullopt,
                "/left_right_map");
  }
  if (parents_[0] != -1) {
    throw Error(ErrorKind::Schema, "joint 0 must be the root (parent -1)", std::nullopt,
                "/parents/0");
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (parents_[k] < 0 || static_cast<std::size_t>(parents_[k]) >= k) {
      throw Error(ErrorKind::Schema,
                  "parents must be topologically ordered with a single root (parent index < "
                  "child index)",
                  std::nullopt, "/parents/" + std::to_string(k));
    }
  }
  if (offsets_[0].norm() != 0.0) {
    throw Error(ErrorKind::Schema, "root template offset must be zero", std::nullopt,
                "/template_offsets/0");
  }
  for (std::size_t k = 0; k < n; ++k) {
    const int m = left_right_map_[k];
    if (m < 0 || static_cast<std::size_t>(m) >= n ||
        left_right_map_[m] != static_cast<int>(k)) {
      throw Error(ErrorKind::Schema, "left_right_map must be an involutive permutation",
                  std::nullopt, "/left_right_map/" + std::to_string(k));
    }
  }
  if (left_right_map_[0] != 0) {
    throw Error(ErrorKind::Schema, "left_right_map must fix the root", std::nullopt,
                "/left_right_map/0");
  }
  children_.assign(n, {});
  for (std::size_t k = 1; k < n; ++k) children_[parents_[k]].push_back(static_cast<int>(k));
}

bool KinematicTree::is_symmetric(double tolerance) const {
  const Vec3 mirror(-1.0, 1.0, 1.0);
  for (std::size_t k = 0; k < size(); ++k) {
    const int m = left_right_map_[k];
    if (k > 0 && parents_[m] != left_right_map_[parents_[k]]) return false;
    if ((offsets_[m] - offsets_[k].cwiseProduct(mirror)).norm() > tolerance) return false;
  }
  return true;
}

int KinematicTree::find(std::string_view name) const {
  for (std::size_t k = 0; k < joint_names_.size(); ++k) {
    if (joint_names_[k] == name) return static_cast<int>(k);
  }
  return -1;
}

namespace {

KinematicTree make_body_tree(bool with_hands) {
  std::vector<std::string> names = {
      "pelvis",        "left_hip",       "right_hip",  "spine1",      "left_knee",
      "right_knee",    "spine2",         "left_ankle", "right_ankle", "spine3",
      "left_foot",     "right_foot",     "neck",       "left_collar", "right_collar",
      "head",          "left_shoulder",  "right_shoulder", "left_elbow", "right_elbow",
      "left_wrist",    "right_wrist"};
  std::vector<int> parents = {-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7,
                              8,  9, 9, 9, 12, 13, 14, 16, 17, 18, 19};
  std::vector<Vec3> offsets = {
      {0.0, 0.0, 0.0},       {0.09, -0.08, 0.0},    {-0.09, -0.08, 0.0},
      {0.0, 0.11, -0.02},    {0.01, -0.38, 0.01},   {-0.01, -0.38, 0.01},
      {0.0, 0.13, 0.01},     {-0.01, -0.40, -0.04}, {0.01, -0.40, -0.04},
      {0.0, 0.06, 0.0},      {0.02, -0.06, 0.12},   {-0.02, -0.06, 0.12},
      {0.0, 0.21, -0.02},    {0.07, 0.12, -0.01},   {-0.07, 0.12, -0.01},
      {0.0, 0.09, 0.05},     {0.11, 0.03, -0.01},   {-0.11, 0.03, -0.01},
      {0.26, -0.01, -0.02},  {-0.26, -0.01, -0.02}, {0.25, 0.01, 0.0},
      {-0.25, 0.01, 0.0}};
  std::vector<int> lr = {0,  2,  1,  3,  5,  4,  6,  8,  7,  9,  11,
                         10, 12, 14, 13, 15, 17, 16, 19, 18, 21, 20};
  if (with_hands) {
    names.insert(names.end(), {"left_thumb", "left_pinky", "right_thumb", "right_pinky"});
    parents.insert(parents.end(), {20, 20, 21, 21});
    offsets.insert(offsets.end(), {Vec3(0.04, -0.01, 0.04), Vec3(0.09, -0.01, -0.02),
                                   Vec3(-0.04, -0.01, 0.04), Vec3(-0.09, -0.01, -0.02)});
    lr.insert(lr.end(), {24, 25, 22, 23});
  }
  return KinematicTree(std::move(names), std::move(parents), std::move(offsets), std::move(lr));
}

void require_joint_count(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": expected " +
                                              std::to_string(want) + " joints, got " +
                                              std::to_string(got));
  }
}

}  // namespace

const KinematicTree& body22_tree() {
  static const KinematicTree tree = make_body_tree(false);
  return tree;
}

const KinematicTree& body26_tree() {
  static const KinematicTree tree = make_body_tree(true);
  return tree;
}

void BodyShape::validate(const KinematicTree& tree) const {
  require_joint_count(bone_scales.size(), tree.size(), "body shape");
  for (std::size_t k = 0; k < bone_scales.size(); ++k) {
    if (!(bone_scales[k] > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "bone scales must be positive", std::nullopt,
                  "/bone_scales/" + std::to_string(k));
    }
  }
}

void PoseSequence::validate(std::size_t joints) const {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    if (i > 0 && !(f.ts > frames[i - 1].ts)) {
      throw Error(ErrorKind::Schema, "timestamps must be strictly increasing",
                  static_cast<long>(i + 1), "/ts");
    }
    require_joint_count(f.pose2d.positions.size(), joints, "pose2d");
    if (f.pose3d) require_joint_count(f.pose3d->positions.size(), joints, "pose3d");
    if (f.pose) require_joint_count(f.pose->joint_rotations.size(), joints, "rotations");
  }
}

FkResult forward_kinematics(const KinematicTree& tree, const BodyShape& shape, const Pose& pose,
                            std::span<const int> order) {
  const std::size_t n = tree.size();
  require_joint_count(pose.joint_rotations.size(), n, "forward_kinematics pose");
  require_joint_count(shape.bone_scales.size(), n, "forward_kinematics shape");
  require_joint_count(order.size(), n, "forward_kinematics order");

  FkResult out;
  out.pose3d.positions.assign(n, Vec3::Zero());
  out.global_rotations.assign(n, RotMatrix::identity());
  std::vector<char> done(n, 0);
  for (const int k : order) {
    const int p = tree.parent(k);
    if (p < 0) {
      out.global_rotations[k] = pose.joint_rotations[k];
      out.pose3d.positions[k] = Vec3::Zero();
    } else {
      if (!done[p]) {
        throw Error(ErrorKind::InvalidArgument, "evaluation order visits a joint before its parent");
      }
      const RotMatrix& gp = out.global_rotations[p];
      out.global_rotations[k] = gp * pose.joint_rotations[k];
      out.pose3d.positions[k] =
          out.pose3d.positions[p] + gp * (shape.bone_scales[k] * tree.offset(k));
    }
    done[k] = 1;
  }
  return out;
}

FkResult forward_kinematics(const KinematicTree& tree, const BodyShape& shape, const Pose& pose) {
  std::vector<int> order(tree.size());
  std::iota(order.begin(), order.end(), 0);
  return forward_kinematics(tree, shape, pose, order);
}

std::vector<Mat3> forward_kinematics_vjp(const KinematicTree& tree, const BodyShape& shape,
                                         const Pose& pose, const FkResult& fk,
                                         std::span<const Vec3> dl_dp) {
  const std::size_t n = tree.size();
  require_joint_count(dl_dp.size(), n, "forward_kinematics_vjp");
  std::vector<Vec3> grad_p(dl_dp.begin(), dl_dp.end());
  std::vector<Mat3> grad_g(n, Mat3::Zero());
  std::vector<Mat3> grad_r(n, Mat3::Zero());
  // Children have larger indices, so a reverse sweep sees complete gradients.
  for (std::size_t j = n; j-- > 1;) {
    const int a = tree.parent(j);
    const Mat3& ga = fk.global_rotations[a].matrix();
    const Vec3 bone = shape.bone_scales[j] * tree.offset(j);
    // p_j = p_a + G_a * bone_j,  G_j = G_a * R_j
    grad_p[a] += grad_p[j];
    grad_g[a] += grad_p[j] * bone.transpose();
    grad_g[a] += grad_g[j] * pose.joint_rotations[j].matrix().transpose();
    grad_r[j] = ga.transpose() * grad_g[j];
  }
  grad_r[0] = grad_g[0];
  return grad_r;
}

JointRotations compose_global_rotations(const KinematicTree& tree, const JointRotations& local) {
  require_joint_count(local.size(), tree.size(), "compose_global_rotations");
  JointRotations global(local.size());
  for (std::size_t k = 0; k < local.size(); ++k) {
    const int p = tree.parent(k);
    global[k] = p < 0 ? local[k] : global[p] * local[k];
  }
  return global;
}

Pose2D project(const Pose3D& pose3d, const WeakPerspectiveCamera& camera) {
  Pose2D out;
  out.positions.reserve(pose3d.positions.size());
  for (const Vec3& p : pose3d.positions) {
    out.positions.push_back(camera.scale * p.head<2>() + camera.offset);
  }
  return out;
}

Pose3D unproject(const Pose2D& pose2d, const WeakPerspectiveCamera& camera,
                 std::span<const double> depth) {
  require_joint_count(depth.size(), pose2d.positions.size(), "unproject depth");
  Pose3D out;
  out.positions.reserve(depth.size());
  for (std::size_t k = 0; k < depth.size(); ++k) {
    const Vec2 xy = (pose2d.positions[k] - camera.offset) / camera.scale;
    out.positions.emplace_back(xy.x(), xy.y(), depth[k]);
  }
  return out;
}

RotMatrix mirror_rotation(const RotMatrix& r) {
  // M R M with M = diag(-1, 1, 1): negate row 0 and column 0 (entry (0,0) twice).
  Mat3 m = r.matrix();
  m.row(0) *= -1.0;
  m.col(0) *= -1.0;
  return RotMatrix::unchecked(m);
}

Pose3D horizontal_flip(const KinematicTree& tree, const Pose3D& pose) {
  require_joint_count(pose.positions.size(), tree.size(), "horizontal_flip pose3d");
  Pose3D out;
  out.positions.resize(pose.positions.size());
  for (std::size_t k = 0; k < pose.positions.size(); ++k) {
    const Vec3& src = pose.positions[tree.left_right_map()[k]];
    out.positions[k] = Vec3(-src.x(), src.y(), src.z());
  }
  return out;
}

Pose2D horizontal_flip(const KinematicTree& tree, const Pose2D& pose, double center_x) {
  require_joint_count(pose.positions.size(), tree.size(), "horizontal_flip pose2d");
  Pose2D out;
  out.positions.resize(pose.positions.size());
  for (std::size_t k = 0; k < pose.positions.size(); ++k) {
    const Vec2& src = pose.positions[tree.left_right_map()[k]];
    out.positions[k] = Vec2(2.0 * center_x - src.x(), src.y());
  }
  return out;
}

Pose horizontal_flip(const KinematicTree& tree, const Pose& pose) {
  require_joint_count(pose.joint_rotations.size(), tree.size(), "horizontal_flip pose");
  Pose out;
  out.joint_rotations.resize(pose.joint_rotations.size());
  for (std::size_t k = 0; k < pose.joint_rotations.size(); ++k) {
    out.joint_rotations[k] = mirror_rotation(pose.joint_rotations[tree.left_right_map()[k]]);
  }
  return out;
}

BodyShape horizontal_flip(const KinematicTree& tree, const BodyShape& shape) {
  require_joint_count(shape.bone_scales.size(), tree.size(), "horizontal_flip shape");
  BodyShape out;
  out.bone_scales.resize(shape.bone_scales.size());
  for (std::size_t k = 0; k < shape.bone_scales.size(); ++k) {
    out.bone_scales[k] = shape.bone_scales[tree.left_right_map()[k]];
  }
  return out;
}

Frame horizontal_flip(const KinematicTree& tree, const Frame& frame) {
  Frame out;
  out.ts = frame.ts;
  out.pose2d = horizontal_flip(tree, frame.pose2d);
  if (frame.pose3d) out.pose3d = horizontal_flip(tree, *frame.pose3d);
  if (frame.pose) out.pose = horizontal_flip(tree, *frame.pose);
  return out;
}

PoseSequence horizontal_flip(const KinematicTree& tree, const PoseSequence& seq) {
  PoseSequence out;
  out.frame_rate = seq.frame_rate;
  out.frames.reserve(seq.frames.size());
  for (const Frame& f : seq.frames) out.frames.push_back(horizontal_flip(tree, f));
  return out;
}

void require_even_batch(std::size_t size) {
  if (size % 2 != 0) {
    throw Error(ErrorKind::InvalidArgument,
                "within-batch augmentation needs an even batch size, got " + std::to_string(size));
  }
}

}  // namespace rotokin
