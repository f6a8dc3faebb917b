#include "rotokin/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <random>

#include "rotokin/error.hpp"
#include "rotokin/parallel.hpp"
#include "rotokin/simd/kernels.hpp"

namespace rotokin {

void SyntheticSpec::validate() const {
  if (num_sequences < 1) throw Error(ErrorKind::InvalidArgument, "num_sequences must be >= 1");
  if (frames_per_sequence < 1) {
    throw Error(ErrorKind::InvalidArgument, "frames_per_sequence must be >= 1");
  }
  if (keyframe_count < 1) throw Error(ErrorKind::InvalidArgument, "keyframe_count must be >= 1");
  if (!(noise_std_2d >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise_std_2d must be >= 0");
  if (!(camera_scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "camera_scale must be > 0");
  if (!(frame_rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "frame_rate must be > 0");
  if (!(keyframe_angle_bound > 0.0 && keyframe_angle_bound <= kPi)) {
    throw Error(ErrorKind::InvalidArgument, "keyframe_angle_bound must lie in (0, pi]");
  }
  rotokin::tree_preset(tree_preset);
}

const KinematicTree& tree_preset(std::string_view name) {
  if (name == "body22") return body22_tree();
  if (name == "body26") return body26_tree();
  throw Error(ErrorKind::InvalidArgument, "unknown tree preset '" + std::string(name) + "'");
}

namespace {

PoseSequence synthesize_sequence(const SyntheticSpec& spec, const KinematicTree& tree,
                                 const BodyShape& shape, const WeakPerspectiveCamera& camera,
                                 std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  const std::size_t n = tree.size();
  const int kf = spec.keyframe_count;

  std::vector<std::vector<Quaternion>> keys(kf, std::vector<Quaternion>(n));
  for (int i = 0; i < kf; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      keys[i][k] = matrix_to_quat(random_rotation_bounded(rng, spec.keyframe_angle_bound));
    }
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  PoseSequence out;
  out.frame_rate = spec.frame_rate;
  out.frames.reserve(spec.frames_per_sequence);
  for (int t = 0; t < spec.frames_per_sequence; ++t) {
    double u = 0.0;
    if (spec.frames_per_sequence > 1 && kf > 1) {
      u = static_cast<double>(t) * (kf - 1) / (spec.frames_per_sequence - 1);
    }
    const int seg = std::min(static_cast<int>(u), std::max(kf - 2, 0));
    const double tau = kf > 1 ? u - seg : 0.0;
    Pose pose;
    pose.joint_rotations.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Quaternion q = kf > 1 ? slerp(keys[seg][k], keys[seg + 1][k], tau) : keys[0][k];
      pose.joint_rotations[k] = quat_to_matrix(q);
    }
    Frame f;
    f.ts = t / spec.frame_rate;
    f.pose3d = forward_kinematics(tree, shape, pose).pose3d;
    f.pose2d = project(*f.pose3d, camera);
    if (spec.noise_std_2d > 0.0) {
      for (Vec2& p : f.pose2d.positions) {
        p.x() += spec.noise_std_2d * noise(rng);
        p.y() += spec.noise_std_2d * noise(rng);
      }
    }
    f.pose = std::move(pose);
    out.frames.push_back(std::move(f));
  }
  return out;
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticDataset data;
  data.tree = tree_preset(spec.tree_preset);
  data.shape = BodyShape::neutral(data.tree.size());
  data.camera = {spec.camera_scale, spec.camera_offset};
  data.sequences.resize(spec.num_sequences);
  parallel_for(data.sequences.size(), [&](std::size_t i) {
    data.sequences[i] = synthesize_sequence(spec, data.tree, data.shape, data.camera, i);
  });
  return data;
}

void RegressorConfig::validate() const {
  if (hidden_width < 1) throw Error(ErrorKind::InvalidArgument, "hidden_width must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "learning_rate must be > 0");
  if (epochs < 1) throw Error(ErrorKind::InvalidArgument, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorKind::InvalidArgument, "batch_size must be >= 1");
  if (!(loss_weight_lambda >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "loss_weight_lambda must be >= 0");
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "validation_fraction must lie in [0, 1)");
  }
}

std::string RegressorConfig::model_code() const {
  std::string code = head == HeadMode::Naive ? "N-" : "S-";
  switch (representation) {
    case Representation::AxisAngle: code += "AA"; break;
    case Representation::Quaternion: code += "Q"; break;
    case Representation::Matrix: code += "RM"; break;
  }
  const int index = 1 + (loss == LossKind::Geodesic ? 1 : 0) + (wba ? 2 : 0);
  return code + "-" + std::to_string(index);
}

Sample make_sample(const Frame& frame) {
  if (!frame.pose3d || !frame.pose) {
    throw Error(ErrorKind::InvalidArgument, "training frame lacks 3D positions or rotations");
  }
  const auto& p2 = frame.pose2d.positions;
  if (p2.empty() || p2.size() != frame.pose3d->positions.size() ||
      p2.size() != frame.pose->joint_rotations.size()) {
    throw Error(ErrorKind::ShapeMismatch, "training frame joint counts disagree");
  }
  Sample s;
  s.input.resize(2 * p2.size());
  for (std::size_t k = 0; k < p2.size(); ++k) {
    const Vec2 d = p2[k] - p2[0];
    s.input[2 * k] = d.x();
    s.input[2 * k + 1] = d.y();
  }
  s.pose3d.positions.resize(p2.size());
  for (std::size_t k = 0; k < p2.size(); ++k) {
    s.pose3d.positions[k] = frame.pose3d->positions[k] - frame.pose3d->positions[0];
  }
  s.rotations = frame.pose->joint_rotations;
  return s;
}

double joint_loss(const Pose3D& pred, const Pose3D& gt) {
  if (pred.positions.size() != gt.positions.size() || gt.positions.empty()) {
    throw Error(ErrorKind::ShapeMismatch, "joint_loss: mismatched joint counts");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < gt.positions.size(); ++k) {
    s += (pred.positions[k] - gt.positions[k]).squaredNorm();
  }
  return s / static_cast<double>(gt.positions.size());
}

double joint_loss_through_fk(const KinematicTree& tree, const BodyShape& shape,
                             const JointRotations& rotations, const Pose3D& gt) {
  return joint_loss(forward_kinematics(tree, shape, Pose{rotations}).pose3d, gt);
}

Regressor::Regressor(const KinematicTree& tree, const BodyShape& shape, const RegressorConfig& cfg,
                     std::size_t input_dim)
    : tree_(tree), shape_(shape), cfg_(cfg), input_dim_(input_dim) {
  cfg_.validate();
  shape_.validate(tree_);
  if (input_dim_ == 0) throw Error(ErrorKind::InvalidArgument, "regressor input is empty");
  const std::size_t n = tree_.size();
  hidden_ = static_cast<std::size_t>(cfg_.hidden_width);
  joint_out_ = cfg_.head == HeadMode::Naive ? 3 * n : 0;
  rot_out_ = n * parameter_count(cfg_.representation);

  w1_ = 0;
  b1_ = w1_ + hidden_ * input_dim_;
  wj_ = b1_ + hidden_;
  bj_ = wj_ + joint_out_ * hidden_;
  wr_ = bj_ + joint_out_;
  br_ = wr_ + rot_out_ * hidden_;
  params_.assign(br_ + rot_out_, 0.0);

  std::mt19937_64 rng(cfg_.seed);
  const double a1 = std::sqrt(6.0 / static_cast<double>(input_dim_ + hidden_));
  std::uniform_real_distribution<double> u1(-a1, a1);
  for (std::size_t i = w1_; i < b1_; ++i) params_[i] = u1(rng);
  const double a2 = 0.1 * std::sqrt(6.0 / static_cast<double>(hidden_ + joint_out_ + 1));
  std::uniform_real_distribution<double> u2(-a2, a2);
  for (std::size_t i = wj_; i < bj_; ++i) params_[i] = u2(rng);
  const double a3 = 0.1 * std::sqrt(6.0 / static_cast<double>(hidden_ + rot_out_));
  std::uniform_real_distribution<double> u3(-a3, a3);
  for (std::size_t i = wr_; i < br_; ++i) params_[i] = u3(rng);
  // Rotation outputs start at the identity in every representation.
  const std::size_t p = parameter_count(cfg_.representation);
  for (std::size_t k = 0; k < n; ++k) {
    encode(cfg_.representation, RotMatrix::identity(),
           std::span<double>(params_).subspan(br_ + k * p, p));
  }
}

std::pair<std::size_t, std::size_t> Regressor::rotation_head_range() const {
  return {wr_, br_ + rot_out_};
}

void Regressor::forward(std::span<const double> input, Cache& cache) const {
  if (input.size() != input_dim_) {
    throw Error(ErrorKind::ShapeMismatch, "regressor input has " + std::to_string(input.size()) +
                                              " values, expected " + std::to_string(input_dim_));
  }
  const double* w = params_.data();
  cache.hidden.resize(hidden_);
  for (std::size_t i = 0; i < hidden_; ++i) {
    cache.hidden[i] = std::tanh(simd::dot({w + w1_ + i * input_dim_, input_dim_}, input) +
                                params_[b1_ + i]);
  }
  cache.joints.resize(joint_out_);
  for (std::size_t r = 0; r < joint_out_; ++r) {
    cache.joints[r] = simd::dot({w + wj_ + r * hidden_, hidden_}, cache.hidden) + params_[bj_ + r];
  }
  cache.rot_raw.resize(rot_out_);
  for (std::size_t r = 0; r < rot_out_; ++r) {
    cache.rot_raw[r] = simd::dot({w + wr_ + r * hidden_, hidden_}, cache.hidden) + params_[br_ + r];
  }
}

Regressor::Prediction Regressor::predict(std::span<const double> input) const {
  Cache cache;
  forward(input, cache);
  Prediction out;
  out.raw_rotations = cache.rot_raw;
  out.rotations = decode_all(cfg_.representation, cache.rot_raw);
  if (cfg_.head == HeadMode::Naive) {
    out.pose3d.positions.resize(tree_.size());
    for (std::size_t k = 0; k < tree_.size(); ++k) {
      out.pose3d.positions[k] = Vec3(cache.joints[3 * k], cache.joints[3 * k + 1],
                                     cache.joints[3 * k + 2]);
    }
  } else {
    out.pose3d = forward_kinematics(tree_, shape_, Pose{out.rotations}).pose3d;
  }
  return out;
}

double Regressor::sample_loss(const Sample& s, Cache& cache, std::vector<double>* d_joints,
                              std::vector<double>* d_rot) const {
  forward(s.input, cache);
  const std::size_t n = tree_.size();
  if (s.pose3d.positions.size() != n || s.rotations.size() != n) {
    throw Error(ErrorKind::ShapeMismatch, "sample does not match the regressor's tree");
  }
  const Representation rep = cfg_.representation;
  const std::size_t p = parameter_count(rep);
  const double lambda = cfg_.loss_weight_lambda;
  const bool grad = d_joints != nullptr;
  if (grad) {
    d_joints->assign(joint_out_, 0.0);
    d_rot->assign(rot_out_, 0.0);
  }

  double l_joint = 0.0;
  if (cfg_.head == HeadMode::Naive) {
    for (std::size_t k = 0; k < n; ++k) {
      for (int c = 0; c < 3; ++c) {
        const double e = cache.joints[3 * k + c] - s.pose3d.positions[k](c);
        l_joint += e * e;
        if (grad) (*d_joints)[3 * k + c] = 2.0 * e / static_cast<double>(n);
      }
    }
    l_joint /= static_cast<double>(n);
  } else {
    Pose pose{decode_all(rep, cache.rot_raw)};
    const FkResult fk = forward_kinematics(tree_, shape_, pose);
    std::vector<Vec3> dl_dp(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Vec3 e = fk.pose3d.positions[k] - s.pose3d.positions[k];
      l_joint += e.squaredNorm();
      dl_dp[k] = 2.0 * e / static_cast<double>(n);
    }
    l_joint /= static_cast<double>(n);
    if (grad) {
      const std::vector<Mat3> dl_dr = forward_kinematics_vjp(tree_, shape_, pose, fk, dl_dp);
      const std::span<const double> raw(cache.rot_raw);
      std::span<double> out(*d_rot);
      for (std::size_t k = 0; k < n; ++k) {
        decode_vjp(rep, raw.subspan(k * p, p), dl_dr[k], out.subspan(k * p, p));
      }
    }
  }

  double l_angle = 0.0;
  if (lambda != 0.0) {
    if (grad) {
      const LossEvaluation ev = loss_with_gradient(cfg_.loss, rep, cache.rot_raw, s.rotations);
      l_angle = ev.value;
      for (std::size_t i = 0; i < rot_out_; ++i) (*d_rot)[i] += lambda * ev.gradient[i];
    } else {
      l_angle = loss_value(cfg_.loss, rep, cache.rot_raw, s.rotations);
    }
  }
  return l_joint + lambda * l_angle;
}

double Regressor::loss(std::span<const Sample> batch) const {
  if (batch.empty()) throw Error(ErrorKind::InvalidArgument, "empty batch");
  Cache cache;
  double total = 0.0;
  for (const Sample& s : batch) total += sample_loss(s, cache, nullptr, nullptr);
  return total / static_cast<double>(batch.size());
}

double Regressor::loss_and_gradient(std::span<const Sample> batch,
                                    std::vector<double>& gradient) const {
  if (batch.empty()) throw Error(ErrorKind::InvalidArgument, "empty batch");
  gradient.assign(params_.size(), 0.0);
  Cache cache;
  std::vector<double> d_joints, d_rot, d_hidden(hidden_);
  const double* w = params_.data();
  double* g = gradient.data();
  double total = 0.0;
  for (const Sample& s : batch) {
    total += sample_loss(s, cache, &d_joints, &d_rot);
    std::fill(d_hidden.begin(), d_hidden.end(), 0.0);
    for (std::size_t r = 0; r < joint_out_; ++r) {
      if (d_joints[r] == 0.0) continue;
      simd::axpy(d_joints[r], cache.hidden, {g + wj_ + r * hidden_, hidden_});
      g[bj_ + r] += d_joints[r];
      simd::axpy(d_joints[r], {w + wj_ + r * hidden_, hidden_}, d_hidden);
    }
    for (std::size_t r = 0; r < rot_out_; ++r) {
      if (d_rot[r] == 0.0) continue;
      simd::axpy(d_rot[r], cache.hidden, {g + wr_ + r * hidden_, hidden_});
      g[br_ + r] += d_rot[r];
      simd::axpy(d_rot[r], {w + wr_ + r * hidden_, hidden_}, d_hidden);
    }
    for (std::size_t i = 0; i < hidden_; ++i) {
      const double d_pre = d_hidden[i] * (1.0 - cache.hidden[i] * cache.hidden[i]);
      if (d_pre == 0.0) continue;
      simd::axpy(d_pre, s.input, {g + w1_ + i * input_dim_, input_dim_});
      g[b1_ + i] += d_pre;
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& v : gradient) v *= inv;
  return total * inv;
}

double gradient_check(const Regressor& model, std::span<const Sample> batch,
                      std::span<const std::size_t> indices, double step) {
  std::vector<double> analytic;
  model.loss_and_gradient(batch, analytic);
  Regressor probe = model;
  double worst = 0.0;
  for (std::size_t i : indices) {
    if (i >= analytic.size()) throw Error(ErrorKind::InvalidArgument, "parameter index out of range");
    const double saved = probe.parameters()[i];
    probe.parameters()[i] = saved + step;
    const double up = probe.loss(batch);
    probe.parameters()[i] = saved - step;
    const double down = probe.loss(batch);
    probe.parameters()[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[i];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-5});
    worst = std::max(worst, rel);
  }
  return worst;
}

MetricReport evaluate(const Regressor& model, const KinematicTree& tree,
                      std::span<const Sample> samples) {
  MetricAccumulator acc(tree, all_joints(tree));
  for (const Sample& s : samples) {
    const Regressor::Prediction p = model.predict(s.input);
    acc.add_positions(p.pose3d, s.pose3d);
    acc.add_rotations(p.rotations, s.rotations);
  }
  return acc.report();
}

namespace {

// Four indices from each parameter block, evenly spaced.
std::vector<std::size_t> preflight_indices(const Regressor& model) {
  const auto [rot_begin, rot_end] = model.rotation_head_range();
  std::vector<std::size_t> out;
  auto take = [&](std::size_t begin, std::size_t end, std::size_t count) {
    if (end <= begin) return;
    const std::size_t len = end - begin;
    for (std::size_t i = 0; i < count; ++i) out.push_back(begin + (2 * i + 1) * len / (2 * count));
  };
  take(0, rot_begin, 12);
  take(rot_begin, rot_end, 12);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

TrainReport train_regressor(const SyntheticDataset& data, const RegressorConfig& cfg) {
  return train_regressor(data, cfg, nullptr);
}

TrainReport train_regressor(const SyntheticDataset& data, const RegressorConfig& cfg,
                            Regressor* trained) {
  cfg.validate();
  if (data.sequences.empty()) throw Error(ErrorKind::InvalidArgument, "dataset has no sequences");
  if (cfg.wba && !data.tree.is_symmetric()) {
    throw Error(ErrorKind::InvalidArgument, "WBA needs a left/right symmetric tree");
  }

  const std::size_t n_seq = data.sequences.size();
  std::size_t n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * n_seq));
  n_val = std::min(n_val, n_seq - 1);
  std::vector<Frame> train_frames;
  std::vector<Sample> train, val;
  for (std::size_t i = 0; i < n_seq; ++i) {
    for (const Frame& f : data.sequences[i].frames) {
      if (i < n_seq - n_val) {
        train_frames.push_back(f);
        train.push_back(make_sample(f));
      } else {
        val.push_back(make_sample(f));
      }
    }
  }
  if (train.empty()) throw Error(ErrorKind::InvalidArgument, "training split is empty");

  Regressor model(data.tree, data.shape, cfg, train.front().input.size());
  TrainReport report;
  report.config = cfg;
  report.model_code = cfg.model_code();

  const std::size_t batch = std::min<std::size_t>(cfg.batch_size, train.size());
  if (cfg.preflight) {
    const std::vector<std::size_t> idx = preflight_indices(model);
    report.preflight_max_rel_error =
        gradient_check(model, std::span<const Sample>(train).first(batch), idx);
    report.preflight_ok = report.preflight_max_rel_error < 1e-4;
  }

  report.initial_loss = model.loss(train);
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad;
  std::vector<Sample> batch_samples;
  std::vector<Frame> batch_frames;

  for (int epoch = 0; epoch < cfg.epochs && !report.diverged; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(start + batch, order.size());
      batch_samples.clear();
      if (cfg.wba) {
        batch_frames.clear();
        for (std::size_t i = start; i < end; ++i) batch_frames.push_back(train_frames[order[i]]);
        // Odd batches are padded by repeating their first window.
        if (batch_frames.size() % 2 != 0) batch_frames.push_back(batch_frames.front());
        for (const Frame& f : build_wba_batch(data.tree, batch_frames, cfg.wba_pairing)) {
          batch_samples.push_back(make_sample(f));
        }
      } else {
        for (std::size_t i = start; i < end; ++i) batch_samples.push_back(train[order[i]]);
      }
      const double l = model.loss_and_gradient(batch_samples, grad);
      if (!std::isfinite(l)) {
        report.diverged = true;
        break;
      }
      simd::axpy(-cfg.learning_rate, grad, model.parameters());
      epoch_loss += l;
      ++steps;
    }
    if (report.diverged) {
      report.loss_curve.push_back(std::numeric_limits<double>::quiet_NaN());
      break;
    }
    epoch_loss /= static_cast<double>(steps);
    report.loss_curve.push_back(epoch_loss);
    if (!std::isfinite(epoch_loss) || epoch_loss > 10.0 * report.initial_loss) report.diverged = true;
  }

  report.final_loss = model.loss(train);
  if (!std::isfinite(report.final_loss) || report.final_loss > 10.0 * report.initial_loss) {
    report.diverged = true;
  }
  report.train = evaluate(model, data.tree, train);
  if (!val.empty()) report.validation = evaluate(model, data.tree, val);
  if (trained) *trained = std::move(model);
  return report;
}

GridReport run_grid(const SyntheticDataset& data, const std::vector<RegressorConfig>& configs) {
  if (configs.empty()) throw Error(ErrorKind::InvalidArgument, "run_grid: no configurations");
  GridReport out;
  out.cells.resize(configs.size());
  parallel_for(configs.size(), [&](std::size_t i) { out.cells[i] = train_regressor(data, configs[i]); });
  std::vector<TableRow> rows;
  for (const TrainReport& r : out.cells) {
    const MetricReport& m = r.validation.frames > 0 ? r.validation : r.train;
    rows.push_back({r.model_code, std::string(to_string(r.config.loss)), r.config.wba, m.mpjpe_mm,
                    m.mpjae_deg, r.diverged});
  }
  out.table = format_table(rows);
  return out;
}

std::vector<RegressorConfig> full_grid(const RegressorConfig& base) {
  std::vector<RegressorConfig> out;
  for (Representation rep :
       {Representation::AxisAngle, Representation::Quaternion, Representation::Matrix}) {
    for (bool wba : {false, true}) {
      for (LossKind loss : {LossKind::Mse, LossKind::Geodesic}) {
        RegressorConfig c = base;
        c.representation = rep;
        c.loss = loss;
        c.wba = wba;
        out.push_back(c);
      }
    }
  }
  return out;
}

namespace {

nlohmann::ordered_json report_json(const TrainReport& r) {
  nlohmann::ordered_json j;
  j["model"] = r.model_code;
  j["representation"] = to_string(r.config.representation);
  j["loss"] = to_string(r.config.loss);
  j["wba"] = r.config.wba;
  j["head"] = r.config.head == HeadMode::Naive ? "naive" : "fk";
  j["hidden_width"] = r.config.hidden_width;
  j["learning_rate"] = r.config.learning_rate;
  j["epochs"] = r.config.epochs;
  j["batch_size"] = r.config.batch_size;
  j["loss_weight_lambda"] = r.config.loss_weight_lambda;
  j["seed"] = r.config.seed;
  j["diverged"] = r.diverged;
  j["initial_loss"] = r.initial_loss;
  j["final_loss"] = r.final_loss;
  j["preflight_ok"] = r.preflight_ok;
  j["preflight_max_rel_error"] = r.preflight_max_rel_error;
  j["loss_curve"] = r.loss_curve;
  j["train"] = nlohmann::ordered_json::parse(to_json(r.train, -1));
  if (r.validation.frames > 0) {
    j["validation"] = nlohmann::ordered_json::parse(to_json(r.validation, -1));
  }
  return j;
}

}  // namespace

std::string to_json(const TrainReport& report, int indent) { return report_json(report).dump(indent); }

std::string to_json(const GridReport& report, int indent) {
  nlohmann::ordered_json j;
  j["cells"] = nlohmann::ordered_json::array();
  for (const TrainReport& r : report.cells) j["cells"].push_back(report_json(r));
  j["table"] = report.table;
  return j.dump(indent);
}

}  // namespace rotokin
