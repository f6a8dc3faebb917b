#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rotokin/error.hpp"
#include "rotokin/io.hpp"

using namespace rotokin;

namespace {

template <class F>
Error capture(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error");
  return Error(ErrorKind::Io, "unreachable");
}

FrameRecord random_record(std::mt19937_64& rng, std::size_t joints, Representation rep, double ts) {
  std::normal_distribution<double> nd(0.0, 1.0);
  FrameRecord r;
  r.ts = ts;
  Pose3D p3;
  JointRotations rots;
  for (std::size_t k = 0; k < joints; ++k) {
    r.pose2d.positions.emplace_back(nd(rng), nd(rng));
    p3.positions.emplace_back(nd(rng), nd(rng), nd(rng));
    rots.push_back(RotMatrix::from_matrix(oracle::random_rotation(rng)));
  }
  r.pose3d = p3;
  r.rotations = to_rotation_values(rep, rots);
  return r;
}

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "rotokin_test_io";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("doubles survive a text round trip") {
  std::mt19937_64 rng(81);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, (i % 40) - 20);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK_THROWS_AS(format_double(std::nan("")), Error);
}

TEST_CASE("tree JSON round trip") {
  for (const KinematicTree* t : {&body22_tree(), &body26_tree()}) {
    const KinematicTree back = parse_tree_json(tree_to_json(*t));
    CHECK(back.joint_names() == t->joint_names());
    CHECK(back.parents() == t->parents());
    CHECK(back.left_right_map() == t->left_right_map());
    for (std::size_t k = 0; k < t->size(); ++k) CHECK(back.offset(k) == t->offset(k));
  }
}

TEST_CASE("shipped tree files match the built-in presets") {
  const std::string dir = ROTOKIN_DATA_DIR;
  for (const char* name : {"body22", "body26"}) {
    const KinematicTree file = read_tree_file(dir + "/trees/" + name + ".json");
    const KinematicTree& preset = load_tree(name);
    CHECK(file.parents() == preset.parents());
    CHECK(file.joint_names() == preset.joint_names());
    for (std::size_t k = 0; k < file.size(); ++k) CHECK(file.offset(k) == preset.offset(k));
  }
  CHECK(load_tree(dir + "/trees/body22.json").size() == 22);
  CHECK(capture([] { load_tree("/nonexistent/tree.json"); }).kind() == ErrorKind::Io);
}

TEST_CASE("tree schema errors name the field") {
  const Error missing = capture([] {
    parse_tree_json(R"({"joint_names":["a"],"template_offsets":[[0,0,0]]})");
  });
  CHECK(missing.kind() == ErrorKind::Schema);
  CHECK(missing.field_path() == "/parents");
  const Error wrong = capture([] {
    parse_tree_json(R"({"joint_names":["a","b"],"parents":[-1,0],"template_offsets":[[0,0,0],[1,0]]})");
  });
  CHECK(wrong.field_path() == "/template_offsets/1");
  const Error extra = capture([] {
    parse_tree_json(R"({"joint_names":["a"],"parents":[-1],"template_offsets":[[0,0,0]],"colour":1})");
  });
  CHECK(extra.field_path() == "/colour");
  const KinematicTree tiny = parse_tree_json(R"({"joint_names":["a"],"parents":[-1],"template_offsets":[[0,0,0]]})");
  CHECK(tiny.left_right_map() == std::vector<int>{0});
}

TEST_CASE("shape JSON") {
  const BodyShape s{{1.0, 0.5, 1.25}};
  CHECK(parse_shape_json(shape_to_json(s)).bone_scales == s.bone_scales);
  CHECK(capture([] { parse_shape_json(R"({"bone_scales":[1,"x"]})"); }).field_path() == "/bone_scales/1");
}

TEST_CASE("frame lines round trip byte for byte") {
  std::mt19937_64 rng(82);
  for (Representation rep : {Representation::Matrix, Representation::Quaternion, Representation::AxisAngle}) {
    FrameRecord r = random_record(rng, 5, rep, 0.125);
    r.metadata = LabelMetadata{"ik-pseudo", true, 0.0123, 7};
    const std::string line = emit_frame_line(r);
    CHECK(line.rfind("{\"ts\":0.125,\"pose2d\":", 0) == 0);
    const FrameRecord back = parse_frame_line(line);
    CHECK(emit_frame_line(back) == line);
    CHECK(back.rotations->values == r.rotations->values);
    CHECK(back.metadata->provenance == "ik-pseudo");
    CHECK(back.metadata->iterations == 7);
  }
}

TEST_CASE("frame line errors carry line numbers and paths") {
  const Error parse = capture([] { parse_frame_line("{\"ts\": 1, ", 17); });
  CHECK(parse.kind() == ErrorKind::Parse);
  CHECK(parse.line() == 17);
  const Error no_2d = capture([] { parse_frame_line(R"({"ts":0})", 3); });
  CHECK(no_2d.kind() == ErrorKind::Schema);
  CHECK(no_2d.field_path() == "/pose2d");
  CHECK(std::string(no_2d.what()).find("line 3") != std::string::npos);
  const Error tag = capture([] {
    parse_frame_line(R"({"ts":0,"pose2d":[[0,0]],"rotations":{"representation":"euler","values":[[0,0,0]]}})", 4);
  });
  CHECK(tag.field_path() == "/rotations/representation");
  CHECK(std::string(tag.what()).find("euler") != std::string::npos);
  const Error count = capture([] {
    parse_frame_line(R"({"ts":0,"pose2d":[[0,0],[1,1]],"pose3d":[[0,0,0]]})", 5);
  });
  CHECK(count.field_path() == "/pose3d");
  const Error elem = capture([] { parse_frame_line(R"({"ts":0,"pose2d":[[0,0],[1,"a"]]})", 6); });
  CHECK(elem.field_path() == "/pose2d/1/1");
}

TEST_CASE("reader enforces ordering and joint counts") {
  std::mt19937_64 rng(83);
  std::stringstream ok;
  {
    PoseSequenceWriter w(ok, {30.0});
    for (int t = 0; t < 4; ++t) w.write(random_record(rng, 3, Representation::Quaternion, t / 30.0));
  }
  PoseSequenceReader r(ok);
  CHECK(r.header().frame_rate == 30.0);
  FrameRecord f;
  int n = 0;
  while (r.next(f)) ++n;
  CHECK(n == 4);

  std::stringstream bad_ts;
  bad_ts << emit_frame_line(random_record(rng, 3, Representation::Matrix, 1.0)) << "\n\n"
         << emit_frame_line(random_record(rng, 3, Representation::Matrix, 1.0)) << "\n";
  PoseSequenceReader r2(bad_ts);
  CHECK(r2.header().frame_rate == 0.0);
  CHECK(r2.next(f));
  const Error e = capture([&] { r2.next(f); });
  CHECK(e.line() == 3);
  CHECK(e.field_path() == "/ts");

  std::stringstream bad_n;
  bad_n << emit_header_line({10.0}) << "\n"
        << emit_frame_line(random_record(rng, 3, Representation::Matrix, 0.0)) << "\n"
        << emit_frame_line(random_record(rng, 4, Representation::Matrix, 0.1)) << "\n";
  PoseSequenceReader r3(bad_n);
  CHECK(r3.next(f));
  CHECK(capture([&] { r3.next(f); }).line() == 3);
}

TEST_CASE("rotation values conversions") {
  std::mt19937_64 rng(84);
  JointRotations rots;
  for (int k = 0; k < 6; ++k) rots.push_back(RotMatrix::from_matrix(oracle::random_rotation(rng)));
  const RotationValues m = to_rotation_values(Representation::Matrix, rots);
  for (Representation to : {Representation::Quaternion, Representation::AxisAngle, Representation::Matrix}) {
    const JointRotations back = decode_rotation_values(convert(convert(m, to), Representation::Matrix));
    for (std::size_t k = 0; k < 6; ++k) CHECK(oracle::angle_between(back[k].matrix(), rots[k].matrix()) < 1e-9);
  }
  RotationValues bad{Representation::Matrix, std::vector<double>(9, 1.0)};
  CHECK(capture([&] { decode_rotation_values(bad); }).kind() == ErrorKind::NotOrthonormal);
  RotationValues zero{Representation::Quaternion, {0, 0, 0, 0}};
  CHECK(capture([&] { decode_rotation_values(zero); }).kind() == ErrorKind::InvalidArgument);
}

TEST_CASE("sequence files and frame conversion") {
  SyntheticSpec spec;
  spec.num_sequences = 1;
  spec.frames_per_sequence = 5;
  const SyntheticDataset data = generate_synthetic(spec);
  const auto path = (temp_dir() / "seq.jsonl").string();
  write_pose_sequence(path, from_sequence(data.sequences[0], Representation::Quaternion));
  const PoseSequence back = to_sequence(read_pose_sequence(path));
  CHECK(back.frame_rate == 50.0);
  REQUIRE(back.frames.size() == 5);
  for (std::size_t t = 0; t < 5; ++t) {
    const Frame& a = data.sequences[0].frames[t];
    const Frame& b = back.frames[t];
    CHECK(a.ts == b.ts);
    for (std::size_t k = 0; k < 22; ++k) {
      CHECK(a.pose2d.positions[k] == b.pose2d.positions[k]);
      CHECK(a.pose3d->positions[k] == b.pose3d->positions[k]);
      CHECK(oracle::angle_between(a.pose->joint_rotations[k].matrix(), b.pose->joint_rotations[k].matrix()) < 1e-12);
    }
  }
}

TEST_CASE("run configuration is strict") {
  const RunConfig c = parse_run_config(
      R"({"synthetic":{"num_sequences":2,"camera_offset":[0.5,0.25]},
          "regressor":{"representation":"quat","loss":"mse","wba":true,"wba_pairing":"duplicate","head":"fk"},
          "ik":{"prior_weight":0.5,"warm_start":false}})");
  CHECK(c.synthetic.num_sequences == 2);
  CHECK(c.synthetic.camera_offset == Vec2(0.5, 0.25));
  CHECK(c.regressor.representation == Representation::Quaternion);
  CHECK(c.regressor.loss == LossKind::Mse);
  CHECK(c.regressor.wba);
  CHECK(c.regressor.wba_pairing == WbaPairing::Duplicate);
  CHECK(c.regressor.head == HeadMode::Fk);
  CHECK(c.ik.prior_weight == 0.5);
  CHECK_FALSE(c.ik.warm_start);
  const RunConfig again = parse_run_config(run_config_to_json(c));
  CHECK(run_config_to_json(again) == run_config_to_json(c));
  CHECK(parse_run_config("{}").regressor.epochs == RegressorConfig{}.epochs);

  CHECK(capture([] { parse_run_config(R"({"ik":{"prior":1}})"); }).field_path() == "/ik/prior");
  CHECK(capture([] { parse_run_config(R"({"training":{}})"); }).field_path() == "/training");
  CHECK(capture([] { parse_run_config(R"({"regressor":{"epochs":"x"}})"); }).field_path() == "/regressor/epochs");
  CHECK(capture([] { parse_run_config(R"({"regressor":{"head":"wide"}})"); }).field_path() == "/regressor/head");
  CHECK(capture([] { parse_run_config("{"); }).kind() == ErrorKind::Parse);
}

TEST_CASE("file helpers") {
  const auto path = (temp_dir() / "text.txt").string();
  write_text_file(path, "hello\n");
  CHECK(read_text_file(path) == "hello\n");
  CHECK(capture([] { read_text_file("/nonexistent/file"); }).kind() == ErrorKind::Io);
}

}  // TEST_SUITE
