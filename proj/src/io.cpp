#include "rotokin/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "rotokin/error.hpp"

namespace rotokin {

using nlohmann::json;

std::string format_double(double v) {
  if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "cannot write a non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

namespace {

// Parsing context for error reporting.
struct Ctx {
  std::optional<long> line;

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    std::string msg;
    if (line) msg = "line " + std::to_string(*line) + ": ";
    msg += (path.empty() ? std::string("/") : path) + ": " + what;
    throw Error(ErrorKind::Schema, msg, line, path.empty() ? "/" : path);
  }
};

json parse_json(std::string_view text, std::optional<long> line) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::string msg;
    if (line) msg = "line " + std::to_string(*line) + ": ";
    throw Error(ErrorKind::Parse, msg + "malformed JSON (" + e.what() + ")", line);
  }
}

const json& require(const Ctx& c, const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) c.fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) c.fail(path + "/" + key, std::string("missing field '") + key + "'");
  return *it;
}

double as_number(const Ctx& c, const json& j, const std::string& path) {
  if (!j.is_number()) c.fail(path, "expected a number");
  return j.get<double>();
}

long long as_integer(const Ctx& c, const json& j, const std::string& path) {
  if (!j.is_number_integer()) c.fail(path, "expected an integer");
  return j.get<long long>();
}

bool as_bool(const Ctx& c, const json& j, const std::string& path) {
  if (!j.is_boolean()) c.fail(path, "expected true or false");
  return j.get<bool>();
}

std::string as_string(const Ctx& c, const json& j, const std::string& path) {
  if (!j.is_string()) c.fail(path, "expected a string");
  return j.get<std::string>();
}

const json& as_array(const Ctx& c, const json& j, const std::string& path) {
  if (!j.is_array()) c.fail(path, "expected an array");
  return j;
}

template <int N>
Eigen::Matrix<double, N, 1> as_vec(const Ctx& c, const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != N) {
    c.fail(path, "expected an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v(i) = as_number(c, j[i], path + "/" + std::to_string(i));
  return v;
}

template <int N, class V>
std::vector<V> as_vec_list(const Ctx& c, const json& j, const std::string& path) {
  as_array(c, j, path);
  std::vector<V> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_vec<N>(c, j[i], path + "/" + std::to_string(i)));
  }
  return out;
}

void append_vec(std::string& out, const double* v, int n) {
  out += '[';
  for (int i = 0; i < n; ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  out += ']';
}

std::string json_string(std::string_view s) { return json(std::string(s)).dump(); }

}  // namespace

// ---------------------------------------------------------------- trees

KinematicTree parse_tree_json(std::string_view text) {
  const Ctx c{std::nullopt};
  const json j = parse_json(text, std::nullopt);
  const json& names_j = as_array(c, require(c, j, "", "joint_names"), "/joint_names");
  const json& parents_j = as_array(c, require(c, j, "", "parents"), "/parents");
  const json& offsets_j = require(c, j, "", "template_offsets");

  std::vector<std::string> names;
  for (std::size_t i = 0; i < names_j.size(); ++i) {
    names.push_back(as_string(c, names_j[i], "/joint_names/" + std::to_string(i)));
  }
  std::vector<int> parents;
  for (std::size_t i = 0; i < parents_j.size(); ++i) {
    parents.push_back(static_cast<int>(as_integer(c, parents_j[i], "/parents/" + std::to_string(i))));
  }
  const std::vector<Vec3> offsets = as_vec_list<3, Vec3>(c, offsets_j, "/template_offsets");
  std::vector<int> lr;
  if (const auto it = j.find("left_right_map"); it != j.end()) {
    as_array(c, *it, "/left_right_map");
    for (std::size_t i = 0; i < it->size(); ++i) {
      lr.push_back(static_cast<int>(as_integer(c, (*it)[i], "/left_right_map/" + std::to_string(i))));
    }
  } else {
    for (std::size_t i = 0; i < parents.size(); ++i) lr.push_back(static_cast<int>(i));
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "joint_names" && key != "parents" && key != "template_offsets" &&
        key != "left_right_map") {
      c.fail("/" + key, "unknown field");
    }
  }
  return KinematicTree(std::move(names), std::move(parents), offsets, std::move(lr));
}

std::string tree_to_json(const KinematicTree& tree) {
  std::string out = "{\n  \"joint_names\": [";
  for (std::size_t k = 0; k < tree.size(); ++k) {
    if (k) out += ", ";
    out += json_string(tree.joint_names()[k]);
  }
  out += "],\n  \"parents\": [";
  for (std::size_t k = 0; k < tree.size(); ++k) {
    if (k) out += ", ";
    out += std::to_string(tree.parent(k));
  }
  out += "],\n  \"template_offsets\": [";
  for (std::size_t k = 0; k < tree.size(); ++k) {
    out += k ? ",\n    " : "\n    ";
    append_vec(out, tree.offset(k).data(), 3);
  }
  out += "\n  ],\n  \"left_right_map\": [";
  for (std::size_t k = 0; k < tree.size(); ++k) {
    if (k) out += ", ";
    out += std::to_string(tree.left_right_map()[k]);
  }
  out += "]\n}\n";
  return out;
}

KinematicTree read_tree_file(const std::string& path) {
  try {
    return parse_tree_json(read_text_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what(), e.line(), e.field_path());
  }
}

void write_tree_file(const std::string& path, const KinematicTree& tree) {
  write_text_file(path, tree_to_json(tree));
}

KinematicTree load_tree(std::string_view preset_or_path) {
  if (preset_or_path == "body22" || preset_or_path == "body26") return tree_preset(preset_or_path);
  return read_tree_file(std::string(preset_or_path));
}

BodyShape parse_shape_json(std::string_view text) {
  const Ctx c{std::nullopt};
  const json j = parse_json(text, std::nullopt);
  const json& s = as_array(c, require(c, j, "", "bone_scales"), "/bone_scales");
  BodyShape shape;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = as_number(c, s[i], "/bone_scales/" + std::to_string(i));
    if (!(v > 0.0)) c.fail("/bone_scales/" + std::to_string(i), "bone scales must be positive");
    shape.bone_scales.push_back(v);
  }
  return shape;
}

std::string shape_to_json(const BodyShape& shape) {
  std::string out = "{\"bone_scales\": ";
  append_vec(out, shape.bone_scales.data(), static_cast<int>(shape.bone_scales.size()));
  return out + "}\n";
}

BodyShape read_shape_file(const std::string& path) { return parse_shape_json(read_text_file(path)); }

// --------------------------------------------------------- pose sequences

RotationValues to_rotation_values(Representation rep, const JointRotations& rotations) {
  return {rep, encode_all(rep, rotations)};
}

JointRotations decode_rotation_values(const RotationValues& values) {
  const std::size_t p = parameter_count(values.representation);
  if (values.values.size() % p != 0) {
    throw Error(ErrorKind::ShapeMismatch, "rotation values are not a whole number of joints");
  }
  JointRotations out;
  out.reserve(values.values.size() / p);
  const std::span<const double> all(values.values);
  for (std::size_t k = 0; k < values.values.size() / p; ++k) {
    const std::span<const double> v = all.subspan(k * p, p);
    switch (values.representation) {
      case Representation::Matrix: {
        Mat3 m;
        for (int r = 0; r < 3; ++r)
          for (int col = 0; col < 3; ++col) m(r, col) = v[3 * r + col];
        out.push_back(RotMatrix::from_matrix(m));
        break;
      }
      case Representation::Quaternion: {
        const Quaternion q{v[0], v[1], v[2], v[3]};
        if (!(q.norm() > 0.0)) {
          throw Error(ErrorKind::InvalidArgument,
                      "joint " + std::to_string(k) + ": zero quaternion is not a rotation");
        }
        out.push_back(quat_to_matrix(q));
        break;
      }
      case Representation::AxisAngle:
        out.push_back(aa_to_matrix({Vec3(v[0], v[1], v[2])}));
        break;
    }
  }
  return out;
}

RotationValues convert(const RotationValues& values, Representation to) {
  if (values.representation == to) return values;
  return to_rotation_values(to, decode_rotation_values(values));
}

FrameRecord to_record(const Frame& frame, Representation rep) {
  FrameRecord r;
  r.ts = frame.ts;
  r.pose2d = frame.pose2d;
  r.pose3d = frame.pose3d;
  if (frame.pose) r.rotations = to_rotation_values(rep, frame.pose->joint_rotations);
  return r;
}

Frame to_frame(const FrameRecord& record) {
  Frame f;
  f.ts = record.ts;
  f.pose2d = record.pose2d;
  f.pose3d = record.pose3d;
  if (record.rotations) f.pose = Pose{decode_rotation_values(*record.rotations)};
  return f;
}

std::string emit_header_line(const SequenceHeader& header) {
  return "{\"frame_rate\":" + format_double(header.frame_rate) + "}";
}

std::string emit_frame_line(const FrameRecord& record) {
  std::string out = "{\"ts\":" + format_double(record.ts) + ",\"pose2d\":[";
  for (std::size_t k = 0; k < record.pose2d.positions.size(); ++k) {
    if (k) out += ',';
    append_vec(out, record.pose2d.positions[k].data(), 2);
  }
  out += ']';
  if (record.pose3d) {
    out += ",\"pose3d\":[";
    for (std::size_t k = 0; k < record.pose3d->positions.size(); ++k) {
      if (k) out += ',';
      append_vec(out, record.pose3d->positions[k].data(), 3);
    }
    out += ']';
  }
  if (record.rotations) {
    const RotationValues& rv = *record.rotations;
    const int p = parameter_count(rv.representation);
    if (rv.values.size() % p != 0) {
      throw Error(ErrorKind::ShapeMismatch, "rotation values are not a whole number of joints");
    }
    out += ",\"rotations\":{\"representation\":" + json_string(to_string(rv.representation)) +
           ",\"values\":[";
    for (std::size_t k = 0; k < rv.joints(); ++k) {
      if (k) out += ',';
      append_vec(out, rv.values.data() + k * p, p);
    }
    out += "]}";
  }
  if (record.metadata) {
    const LabelMetadata& m = *record.metadata;
    out += ",\"metadata\":{\"provenance\":" + json_string(m.provenance) +
           ",\"converged\":" + (m.converged ? "true" : "false") +
           ",\"residual_mm\":" + format_double(m.residual_mm) +
           ",\"iterations\":" + std::to_string(m.iterations) + "}";
  }
  return out + "}";
}

namespace {

FrameRecord frame_from_json(const json& j, const Ctx& c) {
  if (!j.is_object()) c.fail("", "expected a JSON object");
  FrameRecord r;
  r.ts = as_number(c, require(c, j, "", "ts"), "/ts");
  r.pose2d.positions = as_vec_list<2, Vec2>(c, require(c, j, "", "pose2d"), "/pose2d");
  if (const auto it = j.find("pose3d"); it != j.end()) {
    r.pose3d = Pose3D{as_vec_list<3, Vec3>(c, *it, "/pose3d")};
  }
  if (const auto it = j.find("rotations"); it != j.end()) {
    const std::string tag = as_string(c, require(c, *it, "/rotations", "representation"),
                                      "/rotations/representation");
    RotationValues rv;
    try {
      rv.representation = parse_representation(tag);
    } catch (const Error&) {
      c.fail("/rotations/representation", "unknown representation tag '" + tag + "'");
    }
    const json& vals = as_array(c, require(c, *it, "/rotations", "values"), "/rotations/values");
    const std::size_t p = parameter_count(rv.representation);
    for (std::size_t k = 0; k < vals.size(); ++k) {
      const std::string path = "/rotations/values/" + std::to_string(k);
      if (!vals[k].is_array() || vals[k].size() != p) {
        c.fail(path, "expected an array of " + std::to_string(p) + " numbers");
      }
      for (std::size_t i = 0; i < p; ++i) {
        rv.values.push_back(as_number(c, vals[k][i], path + "/" + std::to_string(i)));
      }
    }
    r.rotations = std::move(rv);
  }
  if (const auto it = j.find("metadata"); it != j.end()) {
    LabelMetadata m;
    m.provenance = as_string(c, require(c, *it, "/metadata", "provenance"), "/metadata/provenance");
    m.converged = as_bool(c, require(c, *it, "/metadata", "converged"), "/metadata/converged");
    m.residual_mm =
        as_number(c, require(c, *it, "/metadata", "residual_mm"), "/metadata/residual_mm");
    m.iterations = static_cast<int>(
        as_integer(c, require(c, *it, "/metadata", "iterations"), "/metadata/iterations"));
    r.metadata = std::move(m);
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "ts" && key != "pose2d" && key != "pose3d" && key != "rotations" &&
        key != "metadata") {
      c.fail("/" + key, "unknown field");
    }
  }
  const std::size_t n = r.pose2d.positions.size();
  if (n == 0) c.fail("/pose2d", "no joints");
  if (r.pose3d && r.pose3d->positions.size() != n) {
    c.fail("/pose3d", "joint count differs from pose2d");
  }
  if (r.rotations && r.rotations->joints() != n) {
    c.fail("/rotations/values", "joint count differs from pose2d");
  }
  return r;
}

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

}  // namespace

FrameRecord parse_frame_line(std::string_view line, long line_number) {
  const Ctx c{line_number};
  return frame_from_json(parse_json(line, line_number), c);
}

PoseSequenceReader::PoseSequenceReader(std::istream& in) : in_(in) {
  std::string line;
  if (!read_line(line)) return;
  const json j = parse_json(line, line_);
  if (j.is_object() && !j.contains("ts") && j.contains("frame_rate")) {
    const Ctx c{line_};
    header_.frame_rate = as_number(c, j["frame_rate"], "/frame_rate");
    if (!(header_.frame_rate > 0.0)) c.fail("/frame_rate", "frame rate must be positive");
    for (const auto& [key, value] : j.items()) {
      (void)value;
      if (key != "frame_rate") c.fail("/" + key, "unknown header field");
    }
  } else {
    pending_ = std::move(line);
    pending_line_ = line_;
  }
}

bool PoseSequenceReader::read_line(std::string& line) {
  while (std::getline(in_, line)) {
    ++line_;
    if (!blank(line)) return true;
  }
  if (in_.bad()) throw Error(ErrorKind::Io, "read error after line " + std::to_string(line_));
  return false;
}

bool PoseSequenceReader::next(FrameRecord& out) {
  std::string line;
  long number = 0;
  if (pending_) {
    line = std::move(*pending_);
    number = pending_line_;
    pending_.reset();
  } else {
    if (!read_line(line)) return false;
    number = line_;
  }
  out = parse_frame_line(line, number);
  const Ctx c{number};
  if (joints_ == 0) {
    joints_ = out.pose2d.positions.size();
  } else if (out.pose2d.positions.size() != joints_) {
    c.fail("/pose2d", "joint count " + std::to_string(out.pose2d.positions.size()) +
                          " differs from earlier frames (" + std::to_string(joints_) + ")");
  }
  if (last_ts_ && !(out.ts > *last_ts_)) c.fail("/ts", "timestamps must strictly increase");
  last_ts_ = out.ts;
  return true;
}

PoseSequenceWriter::PoseSequenceWriter(std::ostream& out, const SequenceHeader& header)
    : out_(out) {
  out_ << emit_header_line(header) << '\n';
}

void PoseSequenceWriter::write(const FrameRecord& record) {
  out_ << emit_frame_line(record) << '\n';
  if (!out_) throw Error(ErrorKind::Io, "write failed");
}

PoseSequenceFile read_pose_sequence(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
  PoseSequenceReader reader(in);
  PoseSequenceFile file;
  file.header = reader.header();
  FrameRecord r;
  while (reader.next(r)) file.frames.push_back(std::move(r));
  return file;
}

void write_pose_sequence(const std::string& path, const PoseSequenceFile& file) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  PoseSequenceWriter writer(out, file.header);
  for (const FrameRecord& r : file.frames) writer.write(r);
}

PoseSequence to_sequence(const PoseSequenceFile& file) {
  PoseSequence seq;
  seq.frame_rate = file.header.frame_rate;
  seq.frames.reserve(file.frames.size());
  for (const FrameRecord& r : file.frames) seq.frames.push_back(to_frame(r));
  return seq;
}

PoseSequenceFile from_sequence(const PoseSequence& seq, Representation rep) {
  PoseSequenceFile file;
  file.header.frame_rate = seq.frame_rate;
  for (const Frame& f : seq.frames) file.frames.push_back(to_record(f, rep));
  return file;
}

// ------------------------------------------------------------ configuration

namespace {

void check_keys(const Ctx& c, const json& obj, const std::string& path,
                std::initializer_list<std::string_view> known) {
  if (!obj.is_object()) c.fail(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      c.fail(path + "/" + key, "unknown field");
    }
  }
}

template <class F>
void with(const json& obj, const char* key, F&& f) {
  if (const auto it = obj.find(key); it != obj.end()) f(*it);
}

int as_int(const Ctx& c, const json& j, const std::string& path) {
  const long long v = as_integer(c, j, path);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    c.fail(path, "integer out of range");
  }
  return static_cast<int>(v);
}

std::uint64_t as_seed(const Ctx& c, const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    c.fail(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  const Ctx c{std::nullopt};
  const json j = parse_json(text, std::nullopt);
  check_keys(c, j, "", {"synthetic", "regressor", "ik"});
  RunConfig cfg;

  with(j, "synthetic", [&](const json& s) {
    const std::string p = "/synthetic";
    check_keys(c, s, p,
               {"tree", "num_sequences", "frames_per_sequence", "keyframe_count", "noise_std_2d",
                "camera_scale", "camera_offset", "frame_rate", "keyframe_angle_bound", "seed"});
    SyntheticSpec& o = cfg.synthetic;
    with(s, "tree", [&](const json& v) { o.tree_preset = as_string(c, v, p + "/tree"); });
    with(s, "num_sequences", [&](const json& v) { o.num_sequences = as_int(c, v, p + "/num_sequences"); });
    with(s, "frames_per_sequence",
         [&](const json& v) { o.frames_per_sequence = as_int(c, v, p + "/frames_per_sequence"); });
    with(s, "keyframe_count", [&](const json& v) { o.keyframe_count = as_int(c, v, p + "/keyframe_count"); });
    with(s, "noise_std_2d", [&](const json& v) { o.noise_std_2d = as_number(c, v, p + "/noise_std_2d"); });
    with(s, "camera_scale", [&](const json& v) { o.camera_scale = as_number(c, v, p + "/camera_scale"); });
    with(s, "camera_offset", [&](const json& v) { o.camera_offset = as_vec<2>(c, v, p + "/camera_offset"); });
    with(s, "frame_rate", [&](const json& v) { o.frame_rate = as_number(c, v, p + "/frame_rate"); });
    with(s, "keyframe_angle_bound",
         [&](const json& v) { o.keyframe_angle_bound = as_number(c, v, p + "/keyframe_angle_bound"); });
    with(s, "seed", [&](const json& v) { o.seed = as_seed(c, v, p + "/seed"); });
  });

  with(j, "regressor", [&](const json& s) {
    const std::string p = "/regressor";
    check_keys(c, s, p,
               {"representation", "loss", "wba", "wba_pairing", "head", "hidden_width",
                "learning_rate", "epochs", "batch_size", "loss_weight_lambda",
                "validation_fraction", "seed", "preflight"});
    RegressorConfig& o = cfg.regressor;
    with(s, "representation", [&](const json& v) {
      const std::string t = as_string(c, v, p + "/representation");
      try {
        o.representation = parse_representation(t);
      } catch (const Error&) {
        c.fail(p + "/representation", "unknown representation '" + t + "'");
      }
    });
    with(s, "loss", [&](const json& v) {
      const std::string t = as_string(c, v, p + "/loss");
      try {
        o.loss = parse_loss(t);
      } catch (const Error&) {
        c.fail(p + "/loss", "unknown loss '" + t + "'");
      }
    });
    with(s, "wba", [&](const json& v) { o.wba = as_bool(c, v, p + "/wba"); });
    with(s, "wba_pairing", [&](const json& v) {
      const std::string t = as_string(c, v, p + "/wba_pairing");
      if (t == "duplicate") o.wba_pairing = WbaPairing::Duplicate;
      else if (t == "flip-distinct") o.wba_pairing = WbaPairing::FlipDistinct;
      else c.fail(p + "/wba_pairing", "expected 'duplicate' or 'flip-distinct'");
    });
    with(s, "head", [&](const json& v) {
      const std::string t = as_string(c, v, p + "/head");
      if (t == "naive") o.head = HeadMode::Naive;
      else if (t == "fk") o.head = HeadMode::Fk;
      else c.fail(p + "/head", "expected 'naive' or 'fk'");
    });
    with(s, "hidden_width", [&](const json& v) { o.hidden_width = as_int(c, v, p + "/hidden_width"); });
    with(s, "learning_rate", [&](const json& v) { o.learning_rate = as_number(c, v, p + "/learning_rate"); });
    with(s, "epochs", [&](const json& v) { o.epochs = as_int(c, v, p + "/epochs"); });
    with(s, "batch_size", [&](const json& v) { o.batch_size = as_int(c, v, p + "/batch_size"); });
    with(s, "loss_weight_lambda",
         [&](const json& v) { o.loss_weight_lambda = as_number(c, v, p + "/loss_weight_lambda"); });
    with(s, "validation_fraction",
         [&](const json& v) { o.validation_fraction = as_number(c, v, p + "/validation_fraction"); });
    with(s, "seed", [&](const json& v) { o.seed = as_seed(c, v, p + "/seed"); });
    with(s, "preflight", [&](const json& v) { o.preflight = as_bool(c, v, p + "/preflight"); });
  });

  with(j, "ik", [&](const json& s) {
    const std::string p = "/ik";
    check_keys(c, s, p,
               {"max_iterations", "position_tolerance", "damping_lambda", "prior_weight",
                "warm_start", "optimize_scales"});
    IKConfig& o = cfg.ik;
    with(s, "max_iterations", [&](const json& v) { o.max_iterations = as_int(c, v, p + "/max_iterations"); });
    with(s, "position_tolerance",
         [&](const json& v) { o.position_tolerance = as_number(c, v, p + "/position_tolerance"); });
    with(s, "damping_lambda", [&](const json& v) { o.damping_lambda = as_number(c, v, p + "/damping_lambda"); });
    with(s, "prior_weight", [&](const json& v) { o.prior_weight = as_number(c, v, p + "/prior_weight"); });
    with(s, "warm_start", [&](const json& v) { o.warm_start = as_bool(c, v, p + "/warm_start"); });
    with(s, "optimize_scales", [&](const json& v) { o.optimize_scales = as_bool(c, v, p + "/optimize_scales"); });
  });

  cfg.synthetic.validate();
  cfg.regressor.validate();
  cfg.ik.validate();
  return cfg;
}

RunConfig read_run_config(const std::string& path) { return parse_run_config(read_text_file(path)); }

std::string run_config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  const SyntheticSpec& s = cfg.synthetic;
  j["synthetic"] = {{"tree", s.tree_preset},
                    {"num_sequences", s.num_sequences},
                    {"frames_per_sequence", s.frames_per_sequence},
                    {"keyframe_count", s.keyframe_count},
                    {"noise_std_2d", s.noise_std_2d},
                    {"camera_scale", s.camera_scale},
                    {"camera_offset", {s.camera_offset.x(), s.camera_offset.y()}},
                    {"frame_rate", s.frame_rate},
                    {"keyframe_angle_bound", s.keyframe_angle_bound},
                    {"seed", s.seed}};
  const RegressorConfig& r = cfg.regressor;
  j["regressor"] = {{"representation", to_string(r.representation)},
                    {"loss", to_string(r.loss)},
                    {"wba", r.wba},
                    {"wba_pairing", r.wba_pairing == WbaPairing::Duplicate ? "duplicate" : "flip-distinct"},
                    {"head", r.head == HeadMode::Naive ? "naive" : "fk"},
                    {"hidden_width", r.hidden_width},
                    {"learning_rate", r.learning_rate},
                    {"epochs", r.epochs},
                    {"batch_size", r.batch_size},
                    {"loss_weight_lambda", r.loss_weight_lambda},
                    {"validation_fraction", r.validation_fraction},
                    {"seed", r.seed},
                    {"preflight", r.preflight}};
  const IKConfig& k = cfg.ik;
  j["ik"] = {{"max_iterations", k.max_iterations},
             {"position_tolerance", k.position_tolerance},
             {"damping_lambda", k.damping_lambda},
             {"prior_weight", k.prior_weight},
             {"warm_start", k.warm_start},
             {"optimize_scales", k.optimize_scales}};
  return j.dump(2) + "\n";
}

}  // namespace rotokin
