#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's rotation algebra: angles and quaternions come from
// Eigen's Geometry module, forward kinematics from per-joint homogeneous
// transforms, and derivatives from central differences.

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "rotokin/kinematics.hpp"

namespace oracle {

using rotokin::Mat3;
using rotokin::Vec3;

inline double angle_between(const Mat3& a, const Mat3& b) {
  return Eigen::AngleAxisd(Mat3(a * b.transpose())).angle();
}

inline Mat3 rodrigues(const Vec3& v) {
  const double a = v.norm();
  if (a == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(a, v / a).toRotationMatrix();
}

inline Mat3 quat_matrix(double w, double x, double y, double z) {
  return Eigen::Quaterniond(w, x, y, z).normalized().toRotationMatrix();
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

inline Mat3 random_raw(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i) = n(rng);
  return m;
}

// Rotation of angle `angle` about a uniformly random axis.
inline Mat3 rotation_with_angle(std::mt19937_64& rng, double angle) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 axis(n(rng), n(rng), n(rng));
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

// |a - b| / max(|a|, |b|, floor)
inline double rel_error(double a, double b, double floor = 1e-5) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, rel_error(a[i], b[i]));
  return worst;
}

// Forward kinematics by walking each joint's ancestor chain with 4x4
// homogeneous transforms.
inline std::vector<Vec3> fk_positions(const rotokin::KinematicTree& tree,
                                      const std::vector<double>& scales,
                                      const std::vector<Mat3>& local) {
  std::vector<Vec3> out(tree.size());
  for (std::size_t j = 0; j < tree.size(); ++j) {
    std::vector<int> chain;
    for (int a = static_cast<int>(j); a >= 0; a = tree.parent(a)) chain.push_back(a);
    Eigen::Affine3d t = Eigen::Affine3d::Identity();
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      Eigen::Affine3d step = Eigen::Affine3d::Identity();
      step.translation() = scales[*it] * tree.offset(*it);
      step.linear() = local[*it];
      t = t * step;
    }
    out[j] = t.translation();
  }
  return out;
}

// Reflection through x = 0 as an explicit matrix, applied by similarity.
inline Mat3 mirror(const Mat3& r) {
  const Mat3 m = Eigen::Vector3d(-1.0, 1.0, 1.0).asDiagonal();
  return m * r * m;
}

}  // namespace oracle
