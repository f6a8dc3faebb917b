#include "rotokin/ik.hpp"

#include <Eigen/Cholesky>
#include <chrono>
#include <cmath>

#include "rotokin/error.hpp"
#include "rotokin/parallel.hpp"

namespace rotokin {

void IKConfig::validate() const {
  if (max_iterations < 1) throw Error(ErrorKind::InvalidArgument, "max_iterations must be >= 1");
  if (!(position_tolerance > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "position_tolerance must be positive");
  }
  if (!(damping_lambda >= 0.0)) throw Error(ErrorKind::InvalidArgument, "damping must be >= 0");
  if (!(prior_weight >= 0.0)) throw Error(ErrorKind::InvalidArgument, "prior_weight must be >= 0");
}

Pose rest_pose(const KinematicTree& tree) {
  return Pose{JointRotations(tree.size(), RotMatrix::identity())};
}

namespace {

// Position residuals enter the objective in millimeters.
constexpr double kMm = 1000.0;

double sum_squared_error(const Pose3D& p, const Pose3D& t) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.positions.size(); ++k) {
    s += (kMm * (p.positions[k] - t.positions[k])).squaredNorm();
  }
  return s;
}

double max_error(const Pose3D& p, const Pose3D& t) {
  double m = 0.0;
  for (std::size_t k = 0; k < p.positions.size(); ++k) {
    m = std::max(m, (p.positions[k] - t.positions[k]).norm());
  }
  return m;
}

double prior_term(const Pose& pose) {
  double s = 0.0;
  for (std::size_t k = 1; k < pose.joint_rotations.size(); ++k) {
    const double phi = geodesic_distance(pose.joint_rotations[k], RotMatrix::identity());
    s += phi * phi;
  }
  return s;
}

Eigen::MatrixXd jacobian_from_fk(const KinematicTree& tree, const FkResult& fk, bool with_scales) {
  const std::size_t n = tree.size();
  const auto& p = fk.pose3d.positions;
  const auto& g = fk.global_rotations;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3 * n, 3 * n + (with_scales ? n : 0));
  for (std::size_t j = 1; j < n; ++j) {
    // Rotating ancestor a by exp(delta) moves p_j by -[p_j - p_a]x G_a delta.
    for (int a = tree.parent(j); a >= 0; a = tree.parent(a)) {
      jac.block<3, 3>(3 * j, 3 * a) = -hat(p[j] - p[a]) * g[a].matrix();
    }
    if (with_scales) {
      // Scaling bone a (a on the path from j up to the root's child) moves
      // p_j by G_parent(a) * offset_a.
      for (int a = static_cast<int>(j); a > 0; a = tree.parent(a)) {
        jac.block<3, 1>(3 * j, 3 * n + a) = g[tree.parent(a)] * tree.offset(a);
      }
    }
  }
  return jac;
}

}  // namespace

Eigen::MatrixXd position_jacobian(const KinematicTree& tree, const BodyShape& shape,
                                  const Pose& pose, bool with_scales) {
  return jacobian_from_fk(tree, forward_kinematics(tree, shape, pose), with_scales);
}

double ik_objective(const KinematicTree& tree, const BodyShape& shape, const Pose& pose,
                    const Pose3D& targets, double prior_weight) {
  const FkResult fk = forward_kinematics(tree, shape, pose);
  double f = sum_squared_error(fk.pose3d, targets);
  if (prior_weight > 0.0) f += prior_weight * prior_term(pose);
  return f;
}

IKResult solve_frame(const KinematicTree& tree, const BodyShape& shape, const Pose3D& targets,
                     const Pose& init, const IKConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  shape.validate(tree);
  const std::size_t n = tree.size();
  if (targets.positions.size() != n || init.joint_rotations.size() != n) {
    throw Error(ErrorKind::ShapeMismatch, "solve_frame: targets/init do not match the tree");
  }

  IKResult res;
  res.pose = init;
  res.shape = shape;
  double spread = 0.0;
  for (const Vec3& t : targets.positions) spread = std::max(spread, (t - targets.positions[0]).norm());
  res.degenerate_target = spread < 1e-9;

  const bool with_prior = cfg.prior_weight > 0.0;
  const double sqrt_w = std::sqrt(cfg.prior_weight);
  const std::size_t cols = 3 * n + (cfg.optimize_scales ? n : 0);
  const std::size_t prior_rows = with_prior ? 3 * (n - 1) : 0;

  FkResult fk = forward_kinematics(tree, res.shape, res.pose);
  auto objective_of = [&](const FkResult& f, const Pose& pose) {
    double v = sum_squared_error(f.pose3d, targets);
    if (with_prior) v += cfg.prior_weight * prior_term(pose);
    return v;
  };
  double objective = objective_of(fk, res.pose);
  res.objective_trace.push_back(objective);

  double lambda = cfg.damping_lambda;
  bool need_system = true;
  Eigen::MatrixXd normal;
  Eigen::VectorXd gradient;
  res.stop = IKStop::MaxIterations;

  while (true) {
    if (max_error(fk.pose3d, targets) <= cfg.position_tolerance) {
      res.stop = IKStop::Converged;
      break;
    }
    if (res.iterations_used >= cfg.max_iterations) break;

    if (need_system) {
      Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3 * n + prior_rows, cols);
      Eigen::VectorXd resid(3 * n + prior_rows);
      jac.topRows(3 * n) = kMm * jacobian_from_fk(tree, fk, cfg.optimize_scales);
      for (std::size_t k = 0; k < n; ++k) {
        resid.segment<3>(3 * k) = kMm * (fk.pose3d.positions[k] - targets.positions[k]);
      }
      if (with_prior) {
        for (std::size_t k = 1; k < n; ++k) {
          const Vec3 log_r = matrix_to_aa(res.pose.joint_rotations[k]).v;
          const std::size_t row = 3 * n + 3 * (k - 1);
          resid.segment<3>(row) = sqrt_w * log_r;
          jac.block<3, 3>(row, 3 * k) = sqrt_w * right_jacobian_inverse(log_r);
        }
      }
      normal = jac.transpose() * jac;
      gradient = jac.transpose() * resid;
      need_system = false;
    }

    ++res.iterations_used;
    Eigen::MatrixXd damped = normal;
    damped.diagonal().array() += lambda;
    const Eigen::VectorXd step = damped.ldlt().solve(-gradient);

    Pose candidate = res.pose;
    BodyShape candidate_shape = res.shape;
    bool valid = step.allFinite();
    for (std::size_t k = 0; valid && k < n; ++k) {
      candidate.joint_rotations[k] =
          res.pose.joint_rotations[k] * aa_to_matrix({step.segment<3>(3 * k)});
    }
    if (valid && cfg.optimize_scales) {
      for (std::size_t k = 1; k < n; ++k) {
        candidate_shape.bone_scales[k] += step(3 * n + k);
        if (!(candidate_shape.bone_scales[k] > 0.0)) valid = false;
      }
    }

    double candidate_objective = 0.0;
    FkResult candidate_fk;
    if (valid) {
      candidate_fk = forward_kinematics(tree, candidate_shape, candidate);
      candidate_objective = objective_of(candidate_fk, candidate);
    }

    if (valid && candidate_objective < objective) {
      const double decrease = objective - candidate_objective;
      res.pose = std::move(candidate);
      res.shape = std::move(candidate_shape);
      fk = std::move(candidate_fk);
      objective = candidate_objective;
      res.objective_trace.push_back(objective);
      lambda = std::max(lambda / 10.0, 1e-15);
      need_system = true;
      if (decrease <= 1e-12 * objective) {
        res.stop = IKStop::Stalled;
        break;
      }
    } else {
      lambda = std::max(lambda * 10.0, 1e-12);
      if (lambda > 1e12) {
        res.stop = IKStop::Stalled;
        break;
      }
    }
  }

  res.final_residual_mm = 1000.0 * max_error(fk.pose3d, targets);
  res.converged = res.stop == IKStop::Converged;
  res.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::vector<IKResult> solve_sequence(const KinematicTree& tree, const BodyShape& shape,
                                     const std::vector<Pose3D>& targets, const IKConfig& cfg) {
  if (targets.empty()) throw Error(ErrorKind::InvalidArgument, "solve_sequence: empty sequence");
  std::vector<IKResult> out;
  out.reserve(targets.size());
  const Pose rest = rest_pose(tree);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const Pose& init = (cfg.warm_start && t > 0) ? out.back().pose : rest;
    const BodyShape& s = (cfg.warm_start && t > 0 && cfg.optimize_scales) ? out.back().shape : shape;
    out.push_back(solve_frame(tree, s, targets[t], init, cfg));
  }
  return out;
}

std::vector<std::vector<PseudoLabelFrame>> generate_pseudo_labels(
    const KinematicTree& tree, const BodyShape& shape,
    const std::vector<std::vector<Pose3D>>& dataset, const IKConfig& cfg) {
  std::vector<std::vector<PseudoLabelFrame>> out(dataset.size());
  parallel_for(dataset.size(), [&](std::size_t i) {
    if (dataset[i].empty()) return;
    const std::vector<IKResult> results = solve_sequence(tree, shape, dataset[i], cfg);
    out[i].reserve(results.size());
    for (const IKResult& r : results) {
      out[i].push_back({r.pose, r.converged, r.final_residual_mm, r.iterations_used});
    }
  });
  return out;
}

}  // namespace rotokin
