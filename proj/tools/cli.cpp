#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "rotokin/bench.hpp"
#include "rotokin/error.hpp"
#include "rotokin/io.hpp"
#include "rotokin/metrics.hpp"

namespace rotokin {
namespace {

namespace fs = std::filesystem;

// Refuses to write over any of the command's inputs.
void check_output(const std::string& out, const std::vector<std::string>& inputs) {
  if (out.empty()) return;
  std::error_code ec;
  for (const std::string& in : inputs) {
    if (!in.empty() && fs::exists(out, ec) && fs::equivalent(in, out, ec)) {
      throw Error(ErrorKind::InvalidArgument, "output '" + out + "' would overwrite an input file");
    }
  }
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
  } else {
    write_text_file(path, text.back() == '\n' ? text : text + "\n");
  }
}

std::string sequence_text(const PoseSequenceFile& file) {
  std::string s = emit_header_line(file.header) + "\n";
  for (const FrameRecord& r : file.frames) s += emit_frame_line(r) + "\n";
  return s;
}

BodyShape load_shape(const std::string& path, const KinematicTree& tree) {
  BodyShape shape = path.empty() ? BodyShape::neutral(tree.size()) : read_shape_file(path);
  shape.validate(tree);
  return shape;
}

void require_joints(const PoseSequenceFile& file, const KinematicTree& tree, const std::string& what) {
  for (std::size_t i = 0; i < file.frames.size(); ++i) {
    if (file.frames[i].pose2d.positions.size() != tree.size()) {
      throw Error(ErrorKind::ShapeMismatch,
                  what + ": frame " + std::to_string(i) + " has " +
                      std::to_string(file.frames[i].pose2d.positions.size()) +
                      " joints, tree has " + std::to_string(tree.size()));
    }
  }
}

std::vector<Pose3D> targets_of(const PoseSequenceFile& file, const std::string& path) {
  std::vector<Pose3D> out;
  for (std::size_t i = 0; i < file.frames.size(); ++i) {
    if (!file.frames[i].pose3d) {
      throw Error(ErrorKind::Schema, path + ": frame " + std::to_string(i) + " has no pose3d");
    }
    out.push_back(*file.frames[i].pose3d);
  }
  return out;
}

bool parse_bool_flag(const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw Error(ErrorKind::InvalidArgument, "expected a boolean, got '" + v + "'");
}

Vec2 parse_vec2(const std::string& v) {
  const std::size_t comma = v.find(',');
  if (comma == std::string::npos) throw Error(ErrorKind::InvalidArgument, "expected x,y, got '" + v + "'");
  try {
    return Vec2(std::stod(v.substr(0, comma)), std::stod(v.substr(comma + 1)));
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidArgument, "expected x,y, got '" + v + "'");
  }
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t c = std::min(s.find(',', pos), s.size());
    if (c > pos) out.push_back(s.substr(pos, c - pos));
    pos = c + 1;
  }
  return out;
}

struct Options {
  std::string in, out, tree = "body22", shape, subset = "all", representation, loss, to;
  std::string config, gt, pred, frame = "parent", modes = "ik-warm,ik-cold,regress";
  std::string camera_offset = "0,0", warm_start, head;
  std::vector<std::string> inputs, data;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double prior_weight = -1.0, camera_scale = 1.0;
  bool wba = false;
  int samples = 1000, epochs = 0;
};

RunConfig load_config(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : read_run_config(o.config);
  if (o.seed_set) {
    cfg.synthetic.seed = o.seed;
    cfg.regressor.seed = o.seed;
  }
  if (!o.representation.empty()) cfg.regressor.representation = parse_representation(o.representation);
  if (!o.loss.empty()) cfg.regressor.loss = parse_loss(o.loss);
  if (o.wba) cfg.regressor.wba = true;
  if (!o.head.empty()) {
    if (o.head == "naive") cfg.regressor.head = HeadMode::Naive;
    else if (o.head == "fk") cfg.regressor.head = HeadMode::Fk;
    else throw Error(ErrorKind::InvalidArgument, "unknown head '" + o.head + "'");
  }
  if (o.epochs > 0) cfg.regressor.epochs = o.epochs;
  if (o.prior_weight >= 0.0) cfg.ik.prior_weight = o.prior_weight;
  if (!o.warm_start.empty()) cfg.ik.warm_start = parse_bool_flag(o.warm_start);
  cfg.regressor.validate();
  cfg.ik.validate();
  return cfg;
}

SyntheticDataset training_data(const Options& o, const RunConfig& cfg) {
  if (o.data.empty()) {
    SyntheticSpec spec = cfg.synthetic;
    if (o.tree != "body22") spec.tree_preset = o.tree;
    return generate_synthetic(spec);
  }
  SyntheticDataset d;
  d.tree = load_tree(o.tree);
  d.shape = load_shape(o.shape, d.tree);
  for (const std::string& path : o.data) {
    const PoseSequenceFile file = read_pose_sequence(path);
    require_joints(file, d.tree, path);
    PoseSequence seq;
    seq.frame_rate = file.header.frame_rate;
    for (const FrameRecord& r : file.frames) {
      // Frames flagged by IK as not converged are excluded from training.
      if (r.metadata && !r.metadata->converged) continue;
      seq.frames.push_back(to_frame(r));
    }
    if (!seq.frames.empty()) d.sequences.push_back(std::move(seq));
  }
  return d;
}

int cmd_convert(const Options& o, std::ostream& out) {
  check_output(o.out, {o.in});
  const Representation to = parse_representation(o.to);
  PoseSequenceFile file = read_pose_sequence(o.in);
  for (FrameRecord& r : file.frames) {
    if (!r.rotations) throw Error(ErrorKind::Schema, o.in + ": frame without rotations");
    r.rotations = convert(*r.rotations, to);
  }
  emit(sequence_text(file), o.out, out);
  return 0;
}

int cmd_fk(const Options& o, std::ostream& out) {
  check_output(o.out, {o.in, o.tree, o.shape});
  const KinematicTree tree = load_tree(o.tree);
  const BodyShape shape = load_shape(o.shape, tree);
  PoseSequenceFile file = read_pose_sequence(o.in);
  require_joints(file, tree, o.in);
  for (FrameRecord& r : file.frames) {
    if (!r.rotations) throw Error(ErrorKind::Schema, o.in + ": frame without rotations");
    r.pose3d = forward_kinematics(tree, shape, Pose{decode_rotation_values(*r.rotations)}).pose3d;
  }
  emit(sequence_text(file), o.out, out);
  return 0;
}

int cmd_project(const Options& o, std::ostream& out) {
  check_output(o.out, {o.in});
  const WeakPerspectiveCamera cam{o.camera_scale, parse_vec2(o.camera_offset)};
  if (!(cam.scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "camera scale must be > 0");
  PoseSequenceFile file = read_pose_sequence(o.in);
  for (FrameRecord& r : file.frames) {
    if (!r.pose3d) throw Error(ErrorKind::Schema, o.in + ": frame without pose3d");
    r.pose2d = project(*r.pose3d, cam);
  }
  emit(sequence_text(file), o.out, out);
  return 0;
}

int cmd_flip(const Options& o, std::ostream& out) {
  check_output(o.out, {o.in, o.tree});
  const KinematicTree tree = load_tree(o.tree);
  PoseSequenceFile file = read_pose_sequence(o.in);
  require_joints(file, tree, o.in);
  for (FrameRecord& r : file.frames) {
    r.pose2d = horizontal_flip(tree, r.pose2d);
    if (r.pose3d) r.pose3d = horizontal_flip(tree, *r.pose3d);
    if (r.rotations) {
      const Pose flipped = horizontal_flip(tree, Pose{decode_rotation_values(*r.rotations)});
      r.rotations = to_rotation_values(r.rotations->representation, flipped.joint_rotations);
    }
  }
  emit(sequence_text(file), o.out, out);
  return 0;
}

PoseSequenceFile label_file(PoseSequenceFile file, const std::vector<PseudoLabelFrame>& labels,
                            Representation rep, const char* provenance) {
  for (std::size_t t = 0; t < file.frames.size(); ++t) {
    file.frames[t].rotations = to_rotation_values(rep, labels[t].pose.joint_rotations);
    file.frames[t].metadata =
        LabelMetadata{provenance, labels[t].converged, labels[t].residual_mm, labels[t].iterations};
  }
  return file;
}

int cmd_ik(const Options& o, std::ostream& out, bool pseudo) {
  const KinematicTree tree = load_tree(o.tree);
  const BodyShape shape = load_shape(o.shape, tree);
  const RunConfig cfg = load_config(o);
  const Representation rep =
      o.representation.empty() ? Representation::Matrix : parse_representation(o.representation);

  std::vector<std::string> inputs = o.inputs;
  if (!o.in.empty()) inputs.insert(inputs.begin(), o.in);
  if (inputs.empty()) throw Error(ErrorKind::InvalidArgument, "no input files");
  std::vector<PoseSequenceFile> files;
  std::vector<std::vector<Pose3D>> targets;
  for (const std::string& path : inputs) {
    files.push_back(read_pose_sequence(path));
    require_joints(files.back(), tree, path);
    targets.push_back(targets_of(files.back(), path));
  }
  const auto labels = generate_pseudo_labels(tree, shape, targets, cfg.ik);
  const char* provenance = pseudo ? "ik-pseudo" : "ik";

  if (files.size() == 1 && !(pseudo && !o.out.empty() && fs::is_directory(o.out))) {
    std::vector<std::string> guard = inputs;
    guard.push_back(o.tree);
    check_output(o.out, guard);
    emit(sequence_text(label_file(files[0], labels[0], rep, provenance)), o.out, out);
    return 0;
  }
  if (o.out.empty() || !fs::is_directory(o.out)) {
    throw Error(ErrorKind::InvalidArgument, "several inputs need --out <existing directory>");
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    const std::string dest = (fs::path(o.out) / fs::path(inputs[i]).filename()).string();
    check_output(dest, inputs);
    write_text_file(dest, sequence_text(label_file(files[i], labels[i], rep, provenance)));
  }
  return 0;
}

int cmd_metrics(const Options& o, std::ostream& out) {
  check_output(o.out, {o.pred, o.gt});
  const KinematicTree tree = load_tree(o.tree);
  const JointSubset subset = parse_subset(o.subset, tree);
  RotationFrame frame;
  if (o.frame == "parent") frame = RotationFrame::ParentRelative;
  else if (o.frame == "global") frame = RotationFrame::Global;
  else throw Error(ErrorKind::InvalidArgument, "--frame must be parent or global");

  std::ifstream pin(o.pred, std::ios::binary), gin(o.gt, std::ios::binary);
  if (!pin) throw Error(ErrorKind::Io, "cannot open '" + o.pred + "'");
  if (!gin) throw Error(ErrorKind::Io, "cannot open '" + o.gt + "'");
  PoseSequenceReader pr(pin), gr(gin);
  MetricAccumulator acc(tree, subset, frame);
  FrameRecord p, g;
  while (true) {
    const bool hp = pr.next(p);
    const bool hg = gr.next(g);
    if (hp != hg) throw Error(ErrorKind::ShapeMismatch, "prediction and ground truth differ in length");
    if (!hp) break;
    if (p.pose3d && g.pose3d) {
      if (p.pose3d->positions.size() != tree.size() || g.pose3d->positions.size() != tree.size()) {
        throw Error(ErrorKind::ShapeMismatch, "pose3d joint count does not match the tree");
      }
      acc.add_positions(*p.pose3d, *g.pose3d);
    }
    if (p.rotations && g.rotations) {
      JointRotations pr_rot = pad_with_identity(decode_rotation_values(*p.rotations), tree.size());
      JointRotations gt_rot = decode_rotation_values(*g.rotations);
      if (gt_rot.size() != tree.size()) {
        throw Error(ErrorKind::ShapeMismatch, "ground-truth rotations do not match the tree");
      }
      acc.add_rotations(pr_rot, gt_rot);
    }
  }
  emit(to_json(acc.report()), o.out, out);
  return 0;
}

int cmd_synth(const Options& o, std::ostream& out) {
  RunConfig cfg = load_config(o);
  if (o.tree != "body22") cfg.synthetic.tree_preset = o.tree;
  const Representation rep =
      o.representation.empty() ? Representation::Matrix : parse_representation(o.representation);
  const SyntheticDataset data = generate_synthetic(cfg.synthetic);
  if (o.out.empty()) {
    if (data.sequences.size() != 1) {
      throw Error(ErrorKind::InvalidArgument, "several sequences need --out <directory>");
    }
    emit(sequence_text(from_sequence(data.sequences[0], rep)), "", out);
    return 0;
  }
  fs::create_directories(o.out);
  for (std::size_t i = 0; i < data.sequences.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "seq_%03zu.jsonl", i);
    write_text_file((fs::path(o.out) / name).string(),
                    sequence_text(from_sequence(data.sequences[i], rep)));
  }
  out << data.sequences.size() << " sequences written to " << o.out << '\n';
  return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
  check_output(o.out, o.data);
  const RunConfig cfg = load_config(o);
  const SyntheticDataset data = training_data(o, cfg);
  const TrainReport report = train_regressor(data, cfg.regressor);
  std::vector<TableRow> rows;
  const MetricReport& m = report.validation.frames > 0 ? report.validation : report.train;
  rows.push_back({report.model_code, std::string(to_string(report.config.loss)), report.config.wba,
                  m.mpjpe_mm, m.mpjae_deg, report.diverged});
  if (o.out.empty()) {
    out << to_json(report) << '\n';
  } else {
    write_text_file(o.out, to_json(report) + "\n");
    out << format_table(rows);
  }
  return 0;
}

int cmd_grid(const Options& o, std::ostream& out) {
  check_output(o.out, o.data);
  const RunConfig cfg = load_config(o);
  const SyntheticDataset data = training_data(o, cfg);
  const GridReport report = run_grid(data, full_grid(cfg.regressor));
  if (!o.out.empty()) write_text_file(o.out, to_json(report) + "\n");
  out << report.table;
  return 0;
}

int cmd_bench(const Options& o, std::ostream& out) {
  const RunConfig cfg = load_config(o);
  BenchConfig b;
  b.modes = split_commas(o.modes);
  b.samples = o.samples;
  b.tree_preset = o.tree;
  b.seed = o.seed;
  b.ik = cfg.ik;
  b.regressor = cfg.regressor;
  const BenchReport report = run_bench(b);
  if (!o.out.empty()) write_text_file(o.out, to_json(report) + "\n");
  out << format_bench(report);
  return 0;
}

void error_record(std::ostream& err, std::string_view kind, const std::string& message,
                  std::optional<long> line = std::nullopt, const std::string& field = {}) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  if (line) j["line"] = *line;
  if (!field.empty()) j["field"] = field;
  err << j.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rotation representations, kinematics, IK and metrics for 3D human pose", "rotokin"};
  app.require_subcommand(1);
  Options o;

  auto add_tree = [&](CLI::App* c) {
    c->add_option("--tree", o.tree, "Tree preset (body22, body26) or tree JSON path");
  };
  auto add_shape = [&](CLI::App* c) { c->add_option("--shape", o.shape, "Body shape JSON path"); };
  auto add_out = [&](CLI::App* c) { c->add_option("--out", o.out, "Output path (default stdout)"); };
  auto add_in = [&](CLI::App* c) { c->add_option("--in", o.in, "Input JSONL pose sequence")->required(); };
  auto add_seed = [&](CLI::App* c) {
    c->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) {
      o.seed = s;
      o.seed_set = true;
    }, "Random seed");
  };
  auto add_training = [&](CLI::App* c) {
    c->add_option("--config", o.config, "Run configuration JSON");
    c->add_option("--representation", o.representation, "matrix | quat | aa");
    c->add_option("--loss", o.loss, "mse | geodesic");
    c->add_flag("--wba", o.wba, "Within-batch flip augmentation");
    c->add_option("--head", o.head, "naive | fk");
    c->add_option("--epochs", o.epochs, "Override epoch count");
    c->add_option("--data", o.data, "Training JSONL files (default: synthetic data from config)");
    add_seed(c);
    add_tree(c);
    add_shape(c);
    add_out(c);
  };
  auto add_ik = [&](CLI::App* c) {
    c->add_option("--config", o.config, "Run configuration JSON");
    c->add_option("--prior-weight", o.prior_weight, "Rest-pose prior weight");
    c->add_option("--warm-start", o.warm_start, "true | false");
    c->add_option("--representation", o.representation, "Output rotation representation");
    add_tree(c);
    add_shape(c);
    add_out(c);
  };

  CLI::App* convert = app.add_subcommand("convert", "Change the rotation representation of a file");
  add_in(convert);
  convert->add_option("--to", o.to, "matrix | quat | aa")->required();
  add_out(convert);

  CLI::App* fk = app.add_subcommand("fk", "Fill pose3d from rotations by forward kinematics");
  add_in(fk);
  add_tree(fk);
  add_shape(fk);
  add_out(fk);

  CLI::App* proj = app.add_subcommand("project", "Fill pose2d from pose3d (weak perspective)");
  add_in(proj);
  proj->add_option("--camera-scale", o.camera_scale, "Camera scale");
  proj->add_option("--camera-offset", o.camera_offset, "Image offset x,y");
  add_out(proj);

  CLI::App* flip = app.add_subcommand("flip", "Mirror poses left/right");
  add_in(flip);
  add_tree(flip);
  add_out(flip);

  CLI::App* ik = app.add_subcommand("ik", "Recover rotations from pose3d targets");
  add_in(ik);
  add_ik(ik);

  CLI::App* pseudo = app.add_subcommand("pseudo-label", "Run IK over sequences and flag convergence");
  pseudo->add_option("inputs", o.inputs, "Input JSONL files")->required();
  add_ik(pseudo);

  CLI::App* metrics = app.add_subcommand("metrics", "MPJPE and MPJAE between two files");
  metrics->add_option("--pred", o.pred, "Predictions JSONL")->required();
  metrics->add_option("--gt", o.gt, "Ground truth JSONL")->required();
  metrics->add_option("--subset", o.subset, "body22 | body26 | all | comma list");
  metrics->add_option("--frame", o.frame, "parent | global rotations");
  add_tree(metrics);
  add_out(metrics);

  CLI::App* synth = app.add_subcommand("synth", "Generate synthetic sequences");
  synth->add_option("--config", o.config, "Run configuration JSON");
  synth->add_option("--representation", o.representation, "Rotation representation on disk");
  add_seed(synth);
  add_tree(synth);
  synth->add_option("--out", o.out, "Output directory (default: single sequence to stdout)");

  CLI::App* train = app.add_subcommand("train", "Train one regressor configuration");
  add_training(train);

  CLI::App* grid = app.add_subcommand("grid", "Train the representation x loss x WBA grid");
  add_training(grid);

  CLI::App* bench = app.add_subcommand("bench", "Per-frame runtime of IK vs regression");
  bench->add_option("--modes", o.modes, "Comma list of ik-warm, ik-cold, regress");
  bench->add_option("--samples", o.samples, "Timed frames per mode");
  bench->add_option("--config", o.config, "Run configuration JSON");
  bench->add_option("--prior-weight", o.prior_weight, "Rest-pose prior weight");
  add_seed(bench);
  add_tree(bench);
  add_out(bench);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    error_record(err, "usage", e.what());
    return 2;
  }

  try {
    if (convert->parsed()) return cmd_convert(o, out);
    if (fk->parsed()) return cmd_fk(o, out);
    if (proj->parsed()) return cmd_project(o, out);
    if (flip->parsed()) return cmd_flip(o, out);
    if (ik->parsed()) return cmd_ik(o, out, false);
    if (pseudo->parsed()) return cmd_ik(o, out, true);
    if (metrics->parsed()) return cmd_metrics(o, out);
    if (synth->parsed()) return cmd_synth(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (grid->parsed()) return cmd_grid(o, out);
    if (bench->parsed()) return cmd_bench(o, out);
  } catch (const Error& e) {
    error_record(err, to_string(e.kind()), e.what(), e.line(), e.field_path());
    return 1;
  } catch (const std::exception& e) {
    error_record(err, "internal", e.what());
    return 1;
  }
  return 0;
}

}  // namespace rotokin
