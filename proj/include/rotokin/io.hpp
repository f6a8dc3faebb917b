#pragma once

// File formats: kinematic tree and body shape JSON, pose sequences as JSON
// Lines (one frame per line, after an optional header line), and the run
// configuration file.
//
// Floats are written with 17 significant digits so that parse(emit(x)) == x.
// Angles on disk are radians.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rotokin/ik.hpp"
#include "rotokin/testbed.hpp"

namespace rotokin {

// ---------------------------------------------------------------- trees

KinematicTree parse_tree_json(std::string_view text);
std::string tree_to_json(const KinematicTree& tree);
KinematicTree read_tree_file(const std::string& path);
void write_tree_file(const std::string& path, const KinematicTree& tree);

// A preset name ("body22", "body26") or a path to a tree JSON file.
KinematicTree load_tree(std::string_view preset_or_path);

BodyShape parse_shape_json(std::string_view text);
std::string shape_to_json(const BodyShape& shape);
BodyShape read_shape_file(const std::string& path);

// --------------------------------------------------------- pose sequences

// Rotations exactly as stored on disk: K blocks of parameter_count(rep)
// values. Kept raw so a read-write cycle is lossless.
struct RotationValues {
  Representation representation = Representation::Matrix;
  std::vector<double> values;

  std::size_t joints() const { return values.size() / parameter_count(representation); }
};

RotationValues to_rotation_values(Representation rep, const JointRotations& rotations);
// Throws Error(NotOrthonormal) for matrix values that are not rotations and
// Error(InvalidArgument) for zero quaternions.
JointRotations decode_rotation_values(const RotationValues& values);
RotationValues convert(const RotationValues& values, Representation to);

struct LabelMetadata {
  std::string provenance;  // "ik-pseudo" for IK-generated labels
  bool converged = false;
  double residual_mm = 0.0;
  int iterations = 0;
};

struct FrameRecord {
  double ts = 0.0;
  Pose2D pose2d;
  std::optional<Pose3D> pose3d;
  std::optional<RotationValues> rotations;
  std::optional<LabelMetadata> metadata;
};

FrameRecord to_record(const Frame& frame, Representation rep = Representation::Matrix);
Frame to_frame(const FrameRecord& record);

struct SequenceHeader {
  double frame_rate = 0.0;
};

// One JSON object per line, fields in the order ts, pose2d, pose3d,
// rotations, metadata.
std::string emit_frame_line(const FrameRecord& record);
std::string emit_header_line(const SequenceHeader& header);
// `line_number` is only used in error messages.
FrameRecord parse_frame_line(std::string_view line, long line_number = 1);

// Streams frames from a JSONL source one line at a time. Blank lines are
// skipped. Joint counts must agree across frames and timestamps must
// strictly increase; violations throw with the offending line number.
class PoseSequenceReader {
 public:
  explicit PoseSequenceReader(std::istream& in);

  const SequenceHeader& header() const { return header_; }
  bool next(FrameRecord& out);
  long line_number() const { return line_; }

 private:
  bool read_line(std::string& line);

  std::istream& in_;
  SequenceHeader header_;
  long line_ = 0;
  std::optional<std::string> pending_;
  long pending_line_ = 0;
  std::size_t joints_ = 0;
  std::optional<double> last_ts_;
};

class PoseSequenceWriter {
 public:
  PoseSequenceWriter(std::ostream& out, const SequenceHeader& header);
  void write(const FrameRecord& record);

 private:
  std::ostream& out_;
};

struct PoseSequenceFile {
  SequenceHeader header;
  std::vector<FrameRecord> frames;
};

PoseSequenceFile read_pose_sequence(const std::string& path);
void write_pose_sequence(const std::string& path, const PoseSequenceFile& file);
PoseSequence to_sequence(const PoseSequenceFile& file);
PoseSequenceFile from_sequence(const PoseSequence& seq, Representation rep = Representation::Matrix);

// ------------------------------------------------------------ configuration

// {"synthetic": {...}, "regressor": {...}, "ik": {...}}; every section and
// field is optional and defaults as in the corresponding struct. Unknown keys
// are schema errors.
struct RunConfig {
  SyntheticSpec synthetic;
  RegressorConfig regressor;
  IKConfig ik;
};

RunConfig parse_run_config(std::string_view text);
RunConfig read_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& cfg);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

// "%.17g"; throws for non-finite values, which JSON cannot carry.
std::string format_double(double v);

}  // namespace rotokin
