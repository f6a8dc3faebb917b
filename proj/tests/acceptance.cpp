// Acceptance suite: one [PASS]/[FAIL] line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>

#include "oracles.hpp"
#include "rotokin/bench.hpp"
#include "rotokin/ik.hpp"
#include "rotokin/metrics.hpp"
#include "rotokin/testbed.hpp"

using namespace rotokin;

namespace {

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
  std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Mat3 quat_as_matrix(const Quaternion& q) { return oracle::quat_matrix(q.w, q.x, q.y, q.z); }

void round_trips() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Mat3 m = oracle::random_rotation(rng);
    const RotMatrix r = RotMatrix::from_matrix(m);
    const Quaternion q = matrix_to_quat(r);
    const AxisAngle a = matrix_to_aa(r);
    const double errs[6] = {
        oracle::angle_between(quat_to_matrix(q).matrix(), m),
        oracle::angle_between(aa_to_matrix(a).matrix(), m),
        oracle::angle_between(quat_as_matrix(matrix_to_quat(quat_to_matrix(q))), quat_as_matrix(q)),
        oracle::angle_between(quat_as_matrix(aa_to_quat(quat_to_aa(q))), quat_as_matrix(q)),
        oracle::angle_between(oracle::rodrigues(matrix_to_aa(aa_to_matrix(a)).v), oracle::rodrigues(a.v)),
        oracle::angle_between(oracle::rodrigues(quat_to_aa(aa_to_quat(a)).v), oracle::rodrigues(a.v)),
    };
    for (double e : errs) worst = std::max(worst, e);
  }
  double worst_pi = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double eps = (i % 4 == 0) ? 0.0 : std::pow(10.0, -1.0 - 7.0 * (i % 97) / 96.0);
    const Mat3 m = oracle::rotation_with_angle(rng, kPi - eps);
    const RotMatrix r = RotMatrix::from_matrix(m);
    const Quaternion q = matrix_to_quat(r);
    const AxisAngle a = matrix_to_aa(r);
    const double errs[6] = {
        oracle::angle_between(quat_to_matrix(q).matrix(), m),
        oracle::angle_between(aa_to_matrix(a).matrix(), m),
        oracle::angle_between(quat_as_matrix(matrix_to_quat(quat_to_matrix(q))), m),
        oracle::angle_between(quat_as_matrix(aa_to_quat(quat_to_aa(q))), m),
        oracle::angle_between(oracle::rodrigues(matrix_to_aa(aa_to_matrix(a)).v), m),
        oracle::angle_between(oracle::rodrigues(quat_to_aa(aa_to_quat(a)).v), m),
    };
    for (double e : errs) worst_pi = std::max(worst_pi, e);
  }
  const double secs = seconds_since(t0);
  report(worst < 1e-9 && worst_pi < 1e-7 && secs < 10.0, "rotation round trips",
         fmt("6 paths x 1e4 rotations max %.3g rad (< 1e-9); near-pi max %.3g rad (< 1e-7); %.2f s (< 10 s)",
             worst, worst_pi, secs));
}

void procrustes() {
  std::mt19937_64 rng(1002);
  int violations = 0, negative = 0;
  double worst_idem = 0.0, worst_scale = 0.0;
  for (int i = 0; i < 100; ++i) {
    RawMatrix a{oracle::random_raw(rng)};
    if (i % 2 == 1 && a.m.determinant() > 0) a.m.row(0) *= -1.0;
    if (a.m.determinant() < 0) ++negative;
    const Projection p = svd_orthogonalize(a);
    const Mat3& r = p.rotation.matrix();
    if (std::abs(r.determinant() - 1.0) > 1e-9 || !is_rotation(r)) ++violations;
    const Projection again = svd_orthogonalize({r});
    worst_idem = std::max(worst_idem, (again.rotation.matrix() - r).norm());
    const Projection scaled = svd_orthogonalize({a.m * (0.01 + 10.0 * (i % 7))});
    worst_scale = std::max(worst_scale, (scaled.rotation.matrix() - r).norm());
    const double best = (a.m - r).norm();
    for (int c = 0; c < 1000; ++c) {
      if ((a.m - oracle::random_rotation(rng)).norm() < best - 1e-12) ++violations;
    }
  }
  if (worst_idem > 1e-12) ++violations;
  if (worst_scale > 1e-12) ++violations;
  report(violations == 0 && negative >= 50, "Procrustes projection",
         fmt("100 raw matrices (%d with det < 0) x 1e3 candidates: %d violations; idempotence %.2g, "
             "scale invariance %.2g",
             negative, violations, worst_idem, worst_scale));
}

void chordal_identity() {
  std::mt19937_64 rng(1003);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Mat3 a = oracle::random_rotation(rng), b = oracle::random_rotation(rng);
    const RotMatrix ra = RotMatrix::from_matrix(a), rb = RotMatrix::from_matrix(b);
    const double phi = geodesic_distance(ra, rb);
    const double lhs = (a - b).norm();
    worst = std::max(worst, std::abs(lhs - 2.0 * std::sqrt(2.0) * std::sin(phi / 2.0)));
    worst = std::max(worst, std::abs(chordal_distance(ra, rb) - lhs));
  }
  report(worst <= 1e-9, "chordal-geodesic identity", fmt("1e4 pairs, max deviation %.3g (<= 1e-9)", worst));
}

void metric_equivalence() {
  std::mt19937_64 rng(1004);
  const KinematicTree& tree = body22_tree();
  const JointSubset all = all_joints(tree);
  double worst = 0.0;
  auto random_set = [&] {
    JointRotations out;
    for (int k = 0; k < 22; ++k) out.push_back(RotMatrix::from_matrix(oracle::random_rotation(rng)));
    return out;
  };
  for (int i = 0; i < 1000; ++i) {
    const JointRotations a = random_set(), b = random_set();
    worst = std::max(worst, std::abs(mpjae(a, b, all) - (180.0 / kPi) * geodesic_loss(a, b)));
  }
  const JointRotations a = random_set();
  JointRotations b;
  for (const RotMatrix& r : a) {
    b.push_back(RotMatrix::from_matrix(r.matrix() * oracle::rotation_with_angle(rng, kPi / 8)));
  }
  const double zero = mpjae(a, a, all);
  const double deg = mpjae(a, b, all);
  report(worst <= 1e-12 && zero == 0.0 && std::abs(deg - 22.5) <= 1e-12, "metric equivalence",
         fmt("1e3 cases max |MPJAE - 180/pi * L_geo| %.3g (<= 1e-12); identical poses %g deg; "
             "pi/8 offsets %.15g deg",
             worst, zero, deg));
}

// Angles of every joint in `raw` decoded against `gt`, for excluding
// configurations whose finite-difference stencil reaches the guard band.
bool away_from_guard(Representation rep, const std::vector<double>& raw, const JointRotations& gt) {
  const int p = parameter_count(rep);
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const std::span<const double> v(raw.data() + k * p, p);
    Mat3 m;
    if (rep == Representation::AxisAngle) {
      m = oracle::rodrigues(Vec3(v[0], v[1], v[2]));
    } else if (rep == Representation::Quaternion) {
      m = oracle::quat_matrix(v[0], v[1], v[2], v[3]);
    } else {
      Eigen::JacobiSVD<Mat3> svd(Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(v.data()),
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
      Mat3 d = Mat3::Identity();
      d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant();
      m = svd.matrixU() * d * svd.matrixV().transpose();
    }
    const double phi = oracle::angle_between(m, gt[k].matrix());
    if (phi < 1e-3 || phi > kPi - 1e-3) return false;
  }
  return true;
}

void gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1005);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  int skipped = 0;
  for (LossKind kind : {LossKind::Mse, LossKind::Geodesic}) {
    for (Representation rep : {Representation::Matrix, Representation::Quaternion, Representation::AxisAngle}) {
      const int p = parameter_count(rep);
      for (int trial = 0; trial < 100;) {
        JointRotations gt;
        std::vector<double> raw;
        for (int k = 0; k < 8; ++k) {
          gt.push_back(RotMatrix::from_matrix(oracle::random_rotation(rng)));
          for (int i = 0; i < p; ++i) raw.push_back(n(rng));
        }
        if (kind == LossKind::Geodesic && !away_from_guard(rep, raw, gt)) {
          ++skipped;
          continue;
        }
        const LossEvaluation ev = loss_with_gradient(kind, rep, raw, gt);
        const auto fd = oracle::central_difference(
            [&](const std::vector<double>& x) { return loss_value(kind, rep, x, gt); }, raw);
        worst = std::max(worst, oracle::max_rel_error(ev.gradient, fd));
        ++trial;
      }
    }
  }
  const KinematicTree& tree = body22_tree();
  const std::size_t nj = tree.size();
  std::uniform_real_distribution<double> us(0.8, 1.25);
  double worst_fk = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Pose pose;
    std::vector<Mat3> base;
    BodyShape shape = BodyShape::neutral(nj);
    for (std::size_t k = 0; k < nj; ++k) {
      base.push_back(oracle::random_rotation(rng));
      pose.joint_rotations.push_back(RotMatrix::from_matrix(base.back()));
      shape.bone_scales[k] = us(rng);
    }
    const Eigen::MatrixXd jac = position_jacobian(tree, shape, pose, true);
    for (std::size_t col = 0; col < 4 * nj; ++col) {
      auto positions = [&](double h) {
        std::vector<Mat3> m = base;
        std::vector<double> s = shape.bone_scales;
        if (col < 3 * nj) {
          Vec3 d = Vec3::Zero();
          d(col % 3) = h;
          m[col / 3] = base[col / 3] * oracle::rodrigues(d);
        } else {
          s[col - 3 * nj] += h;
        }
        return oracle::fk_positions(tree, s, m);
      };
      const auto up = positions(1e-6), down = positions(-1e-6);
      for (std::size_t r = 0; r < 3 * nj; ++r) {
        worst_fk = std::max(worst_fk, oracle::rel_error(jac(r, col), (up[r / 3](r % 3) - down[r / 3](r % 3)) / 2e-6));
      }
    }
  }
  const double secs = seconds_since(t0);
  report(worst < 1e-4 && worst_fk < 1e-4 && secs < 60.0, "gradient suite",
         fmt("6 loss x representation pairs x 100 configs max rel err %.3g; FK Jacobian x 100 max rel err "
             "%.3g (< 1e-4); %.2f s (< 60 s); %d draws in the guard band redrawn",
             worst, worst_fk, secs, skipped));
}

Pose3D fk_of(const KinematicTree& tree, const Pose& p) {
  return forward_kinematics(tree, BodyShape::neutral(tree.size()), p).pose3d;
}

void ik_round_trip() {
  std::mt19937_64 rng(1006);
  const KinematicTree& tree = body22_tree();
  const BodyShape shape = BodyShape::neutral(22);
  IKConfig cfg;
  cfg.prior_weight = 0.0;
  double worst_mpjpe = 0.0, worst_equi = 0.0;
  int non_monotone = 0;
  const Pose rest = rest_pose(tree);
  for (int i = 0; i < 50; ++i) {
    Pose truth;
    for (std::size_t k = 0; k < 22; ++k) truth.joint_rotations.push_back(random_rotation_bounded(rng, 2.0 * kPi / 3.0));
    const Pose3D targets = fk_of(tree, truth);
    const IKResult r = solve_frame(tree, shape, targets, rest, cfg);
    worst_mpjpe = std::max(worst_mpjpe, mpjpe(fk_of(tree, r.pose), targets, all_joints(tree)));
    for (std::size_t s = 1; s < r.objective_trace.size(); ++s) {
      if (r.objective_trace[s] > r.objective_trace[s - 1]) ++non_monotone;
    }
    const Mat3 q = oracle::random_rotation(rng);
    Pose3D rotated = targets;
    for (Vec3& p : rotated.positions) p = q * p;
    Pose init = rest;
    init.joint_rotations[0] = RotMatrix::from_matrix(q);
    const IKResult rq = solve_frame(tree, shape, rotated, init, cfg);
    for (std::size_t s = 1; s < rq.objective_trace.size(); ++s) {
      if (rq.objective_trace[s] > rq.objective_trace[s - 1]) ++non_monotone;
    }
    worst_equi = std::max(worst_equi, std::abs(rq.final_residual_mm - r.final_residual_mm));
  }
  const double tol_mm = 1000.0 * cfg.position_tolerance;
  report(worst_mpjpe < 1.0 && non_monotone == 0 && worst_equi <= tol_mm, "IK round trip",
         fmt("50 frames, prior 0: worst MPJPE %.3g mm (< 1 mm); %d objective increases; "
             "rotated-target residual difference %.3g mm (<= %.3g mm)",
             worst_mpjpe, non_monotone, worst_equi, tol_mm));
}

void warm_start_ordering() {
  const KinematicTree& tree = body22_tree();
  SyntheticSpec spec;
  spec.num_sequences = 10;
  spec.frames_per_sequence = 100;
  spec.seed = 1007;
  const SyntheticDataset data = generate_synthetic(spec);
  IKConfig warm, cold;
  cold.warm_start = false;
  double w = 0.0, c = 0.0;
  for (const PoseSequence& s : data.sequences) {
    std::vector<Pose3D> targets;
    for (const Frame& f : s.frames) targets.push_back(*f.pose3d);
    for (const IKResult& r : solve_sequence(tree, data.shape, targets, warm)) w += r.iterations_used;
    for (const IKResult& r : solve_sequence(tree, data.shape, targets, cold)) c += r.iterations_used;
  }
  w /= 1000.0;
  c /= 1000.0;
  BenchConfig b;
  b.samples = 300;
  b.seed = 1008;
  const BenchReport br = run_bench(b);
  const double reg = br.find("regress")->mean_ms;
  const double iw = br.find("ik-warm")->mean_ms;
  const double ic = br.find("ik-cold")->mean_ms;
  report(w < c && reg < iw && iw < ic, "warm-start ordering",
         fmt("10 x 100 frames mean iterations warm %.2f < cold %.2f; bench ms regress %.4f < ik-warm "
             "%.4f < ik-cold %.4f",
             w, c, reg, iw, ic));
}

void testbed_grid() {
  const auto t0 = std::chrono::steady_clock::now();
  SyntheticSpec spec;
  spec.seed = 1009;
  const SyntheticDataset data = generate_synthetic(spec);
  const auto configs = full_grid(RegressorConfig{});
  const GridReport a = run_grid(data, configs);
  const GridReport b = run_grid(data, configs);
  int rows = 0;
  for (char ch : a.table) rows += ch == '\n';
  rows -= 2;
  const bool identical = a.table == b.table && to_json(a) == to_json(b);

  SyntheticSpec mem;
  mem.num_sequences = 1;
  mem.frames_per_sequence = 1;
  mem.keyframe_count = 1;
  mem.seed = 3;
  RegressorConfig base;
  base.epochs = 12000;
  base.batch_size = 1;
  base.learning_rate = 0.01;
  base.validation_fraction = 0.0;
  const GridReport m = run_grid(generate_synthetic(mem), full_grid(base));
  double worst_deg = 0.0, worst_ratio = 0.0;
  int diverged = 0, preflight = 0;
  for (const TrainReport& r : m.cells) {
    if (r.diverged) {
      ++diverged;
      continue;
    }
    worst_deg = std::max(worst_deg, r.train.mpjae_deg);
    worst_ratio = std::max(worst_ratio, r.final_loss / r.initial_loss);
  }
  for (const TrainReport& r : a.cells) preflight += r.preflight_ok ? 0 : 1;
  const double secs = seconds_since(t0);
  report(rows == 12 && a.cells.size() == 12 && identical && diverged == 0 && worst_deg < 1.0 &&
             worst_ratio < 0.2 && preflight == 0 && secs <= 300.0,
         "testbed grid",
         fmt("%d-row table, rerun identical: %s; memorization worst MPJAE %.3g deg (< 1), worst "
             "final/initial loss %.3g (< 0.2); %.1f s (<= 300 s)",
             rows, identical ? "yes" : "no", worst_deg, worst_ratio, secs));
  std::printf("%s", a.table.c_str());
}

void flip_suite() {
  std::mt19937_64 rng(1010);
  const KinematicTree& tree = body22_tree();
  const BodyShape shape = BodyShape::neutral(22);
  int violations = 0;
  std::vector<Pose> poses;
  for (int i = 0; i < 1000; ++i) {
    Pose p;
    for (std::size_t k = 0; k < 22; ++k) p.joint_rotations.push_back(RotMatrix::from_matrix(oracle::random_rotation(rng)));
    poses.push_back(p);
    const Pose f = horizontal_flip(tree, p);
    const Pose ff = horizontal_flip(tree, f);
    const Pose3D x = forward_kinematics(tree, shape, p).pose3d;
    const Pose3D fx = horizontal_flip(tree, x);
    const Pose3D xf = forward_kinematics(tree, shape, f).pose3d;
    const Pose3D ffx = horizontal_flip(tree, fx);
    for (std::size_t k = 0; k < 22; ++k) {
      if (ff.joint_rotations[k].matrix() != p.joint_rotations[k].matrix()) ++violations;
      if (ffx.positions[k] != x.positions[k]) ++violations;
      const Mat3 ref = oracle::mirror(p.joint_rotations[tree.left_right_map()[k]].matrix());
      if ((f.joint_rotations[k].matrix() - ref).norm() > 1e-15) ++violations;
      if ((xf.positions[k] - fx.positions[k]).norm() > 1e-12) ++violations;
      for (std::size_t j = 0; j < 22; ++j) {
        const double d = (x.positions[k] - x.positions[j]).norm();
        const int mk = tree.left_right_map()[k], mj = tree.left_right_map()[j];
        if (std::abs((fx.positions[mk] - fx.positions[mj]).norm() - d) > 1e-12) ++violations;
      }
    }
    if (i > 0) {
      // Geodesic distances between two poses are preserved joint by joint.
      const Pose g = horizontal_flip(tree, poses[i - 1]);
      for (std::size_t k = 0; k < 22; ++k) {
        const int mk = tree.left_right_map()[k];
        const double before = oracle::angle_between(p.joint_rotations[mk].matrix(), poses[i - 1].joint_rotations[mk].matrix());
        const double after = oracle::angle_between(f.joint_rotations[k].matrix(), g.joint_rotations[k].matrix());
        if (std::abs(before - after) > 1e-9) ++violations;
      }
    }
  }
  for (std::size_t start = 0; start + 8 <= poses.size(); start += 8) {
    const std::vector<Pose> batch(poses.begin() + start, poses.begin() + start + 8);
    const auto distinct = build_wba_batch(tree, batch, WbaPairing::FlipDistinct);
    const auto dup = build_wba_batch(tree, batch, WbaPairing::Duplicate);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t k = 0; k < 22; ++k) {
        const Mat3 second = oracle::mirror(batch[4 + i].joint_rotations[tree.left_right_map()[k]].matrix());
        const Mat3 first = oracle::mirror(batch[i].joint_rotations[tree.left_right_map()[k]].matrix());
        if (distinct[i].joint_rotations[k].matrix() != batch[i].joint_rotations[k].matrix()) ++violations;
        if ((distinct[4 + i].joint_rotations[k].matrix() - second).norm() > 1e-15) ++violations;
        if ((dup[4 + i].joint_rotations[k].matrix() - first).norm() > 1e-15) ++violations;
      }
    }
  }
  report(violations == 0, "flip and within-batch augmentation",
         fmt("1e3 poses: involution, isometry, FK commutation, batch halves: %d violations", violations));
}

}  // namespace

int main() {
  round_trips();
  procrustes();
  chordal_identity();
  metric_equivalence();
  gradient_suite();
  ik_round_trip();
  warm_start_ordering();
  testbed_grid();
  flip_suite();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
