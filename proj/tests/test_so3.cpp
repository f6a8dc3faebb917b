#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "rotokin/error.hpp"
#include "rotokin/so3.hpp"

using namespace rotokin;

namespace {

Quaternion to_quat(const Mat3& m) {
  const Eigen::Quaterniond q(m);
  return canonicalize(Quaternion{q.w(), q.x(), q.y(), q.z()});
}

Mat3 quat_mat(const Quaternion& q) { return oracle::quat_matrix(q.w, q.x, q.y, q.z); }

}  // namespace

TEST_SUITE("so3") {

TEST_CASE("conversions agree with an independent implementation") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const Mat3 r = oracle::random_rotation(rng);
    const RotMatrix rm = RotMatrix::from_matrix(r);
    const Quaternion q = matrix_to_quat(rm);
    const Quaternion ref = to_quat(r);
    CHECK(q.w >= 0.0);
    CHECK(std::abs(q.dot(ref)) == doctest::Approx(1.0).epsilon(1e-12));
    const AxisAngle a = matrix_to_aa(rm);
    CHECK(oracle::angle_between(oracle::rodrigues(a.v), r) < 1e-9);
    CHECK(a.angle() <= kPi);
    CHECK(oracle::angle_between(aa_to_matrix(a).matrix(), r) < 1e-9);
    CHECK(oracle::angle_between(quat_to_matrix(q).matrix(), r) < 1e-9);
  }
}

TEST_CASE("small and zero angles stay accurate") {
  for (double angle : {0.0, 1e-14, 1e-10, 1e-8, 1e-6, 1e-3}) {
    const Vec3 v = angle * Vec3(0.6, -0.8, 0.0);
    const RotMatrix r = aa_to_matrix({v});
    CHECK(is_rotation(r.matrix()));
    CHECK((r.matrix() - oracle::rodrigues(v)).norm() < 1e-15);
    CHECK((matrix_to_aa(r).v - v).norm() < 1e-15 + 1e-9 * angle);
    CHECK((quat_to_aa(aa_to_quat({v})).v - v).norm() < 1e-15 + 1e-12 * angle);
  }
}

TEST_CASE("near-pi rotations round-trip") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> delta(0.0, 1e-6);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 r = oracle::rotation_with_angle(rng, kPi - delta(rng));
    const RotMatrix rm = RotMatrix::from_matrix(r);
    CHECK(oracle::angle_between(quat_to_matrix(matrix_to_quat(rm)).matrix(), r) < 1e-7);
    CHECK(oracle::angle_between(aa_to_matrix(matrix_to_aa(rm)).matrix(), r) < 1e-7);
  }
  // Exactly pi about each axis.
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 v = Vec3::Zero();
    v(axis) = kPi;
    const RotMatrix r = aa_to_matrix({v});
    CHECK(oracle::angle_between(aa_to_matrix(matrix_to_aa(r)).matrix(), r.matrix()) < 1e-12);
    CHECK(matrix_to_aa(r).angle() == doctest::Approx(kPi).epsilon(1e-15));
  }
}

TEST_CASE("canonical forms") {
  const Quaternion q{-0.5, 0.5, -0.5, 0.5};
  CHECK(canonicalize(q).w == 0.5);
  CHECK(quat_to_matrix(q).matrix().isApprox(quat_to_matrix(-q).matrix(), 1e-15));
  const AxisAngle wrapped{Vec3(0.0, 0.0, 1.5 * kPi)};
  const AxisAngle c = canonicalize(wrapped);
  CHECK(c.angle() == doctest::Approx(0.5 * kPi));
  CHECK(c.v.z() < 0.0);
  CHECK(aa_to_matrix(c).matrix().isApprox(aa_to_matrix(wrapped).matrix(), 1e-12));
}

TEST_CASE("quaternion product matches matrix product") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const Mat3 a = oracle::random_rotation(rng), b = oracle::random_rotation(rng);
    const Quaternion ab = quat_multiply(to_quat(a), to_quat(b));
    CHECK(oracle::angle_between(quat_mat(ab), a * b) < 1e-12);
  }
}

TEST_CASE("slerp stays on the shortest geodesic") {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 200; ++i) {
    const Mat3 a = oracle::random_rotation(rng), b = oracle::random_rotation(rng);
    const Quaternion qa = to_quat(a);
    const Quaternion qb = -to_quat(b);  // wrong hemisphere on purpose
    const double total = oracle::angle_between(a, b);
    for (double t : {0.0, 0.1, 0.5, 0.77, 1.0}) {
      const Mat3 m = quat_mat(slerp(qa, qb, t));
      const double d1 = oracle::angle_between(a, m), d2 = oracle::angle_between(m, b);
      CHECK(d1 + d2 == doctest::Approx(total).epsilon(1e-9));
      CHECK(d1 == doctest::Approx(t * total).epsilon(1e-9));
    }
  }
  const Quaternion q{0.9, 0.1, 0.3, 0.2};
  CHECK(oracle::angle_between(quat_mat(slerp(q, q, 0.3)), quat_mat(q)) < 1e-12);
}

TEST_CASE("validated construction rejects non-rotations") {
  CHECK_THROWS_AS(RotMatrix::from_matrix(2.0 * Mat3::Identity()), Error);
  Mat3 reflection = Mat3::Identity();
  reflection(0, 0) = -1.0;
  CHECK_FALSE(is_rotation(reflection));
  try {
    (void)matrix_to_quat(reflection);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotOrthonormal);
  }
  Mat3 nan = Mat3::Identity();
  nan(1, 2) = std::nan("");
  CHECK_FALSE(is_rotation(nan));
}

TEST_CASE("representation tags") {
  CHECK(parse_representation("matrix") == Representation::Matrix);
  CHECK(parse_representation("rm") == Representation::Matrix);
  CHECK(parse_representation("quat") == Representation::Quaternion);
  CHECK(parse_representation("quaternion") == Representation::Quaternion);
  CHECK(parse_representation("aa") == Representation::AxisAngle);
  CHECK(parse_representation("axis-angle") == Representation::AxisAngle);
  CHECK_THROWS_AS(parse_representation("euler"), Error);
  CHECK(parse_loss("geodesic") == LossKind::Geodesic);
  CHECK(parse_loss("mse") == LossKind::Mse);
  CHECK_THROWS_AS(parse_loss("l1"), Error);
  for (auto rep : {Representation::Matrix, Representation::Quaternion, Representation::AxisAngle}) {
    CHECK(parse_representation(to_string(rep)) == rep);
  }
  CHECK(parameter_count(Representation::Matrix) == 9);
  CHECK(parameter_count(Representation::Quaternion) == 4);
  CHECK(parameter_count(Representation::AxisAngle) == 3);
}

TEST_CASE("nearest rotation by SVD") {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 200; ++i) {
    const Mat3 a = oracle::random_raw(rng);
    const Projection p = svd_orthogonalize({a});
    CHECK(is_rotation(p.rotation.matrix(), 1e-12));
    const Projection again = svd_orthogonalize({p.rotation.matrix()});
    CHECK((again.rotation.matrix() - p.rotation.matrix()).norm() < 1e-12);
    const Projection scaled = svd_orthogonalize({3.7 * a});
    CHECK((scaled.rotation.matrix() - p.rotation.matrix()).norm() < 1e-12);
    CHECK(p.singular_values(0) >= p.singular_values(1));
  }
  // Rotations are fixed points.
  const Mat3 r = oracle::random_rotation(rng);
  CHECK((svd_orthogonalize({r}).rotation.matrix() - r).norm() < 1e-14);
}

TEST_CASE("projection degeneracy is flagged") {
  CHECK(svd_orthogonalize({Mat3::Zero()}).degenerate);
  Mat3 rank2 = Mat3::Identity();
  rank2(2, 2) = 0.0;
  const Projection p = svd_orthogonalize({rank2});
  CHECK(p.degenerate);
  CHECK(is_rotation(p.rotation.matrix(), 1e-12));
  // -I: negative determinant with repeated singular values.
  const Projection q = svd_orthogonalize({-Mat3::Identity()});
  CHECK(q.degenerate);
  CHECK(q.rotation.matrix().determinant() == doctest::Approx(1.0));
  CHECK_FALSE(svd_orthogonalize({Mat3::Identity() * 2.0}).degenerate);
}

TEST_CASE("geodesic distance worked values") {
  const RotMatrix id = RotMatrix::identity();
  CHECK(geodesic_distance(id, id) == 0.0);
  const RotMatrix r = aa_to_matrix({Vec3(0.0, 0.0, kPi / 8.0)});
  CHECK(geodesic_distance(r, id) == doctest::Approx(kPi / 8.0).epsilon(1e-15));
  const RotMatrix half = aa_to_matrix({Vec3(kPi, 0.0, 0.0)});
  CHECK(geodesic_distance(half, id) == doctest::Approx(kPi).epsilon(1e-15));
  // Tiny angles are resolved rather than rounded to zero.
  const RotMatrix tiny = aa_to_matrix({Vec3(1e-10, 0.0, 0.0)});
  CHECK(geodesic_distance(tiny, id) == doctest::Approx(1e-10).epsilon(1e-6));
}

TEST_CASE("geodesic distance is a metric and matches an independent oracle") {
  std::mt19937_64 rng(16);
  for (int i = 0; i < 300; ++i) {
    const Mat3 a = oracle::random_rotation(rng), b = oracle::random_rotation(rng),
               c = oracle::random_rotation(rng);
    const auto A = RotMatrix::from_matrix(a), B = RotMatrix::from_matrix(b),
               C = RotMatrix::from_matrix(c);
    const double ab = geodesic_distance(A, B);
    CHECK(ab == doctest::Approx(oracle::angle_between(a, b)).epsilon(1e-12));
    CHECK(ab == doctest::Approx(geodesic_distance(B, A)).epsilon(1e-14));
    CHECK(ab <= geodesic_distance(A, C) + geodesic_distance(C, B) + 1e-12);
    CHECK(ab >= 0.0);
    CHECK(ab <= kPi);
  }
}

TEST_CASE("batched distances match the single-pair form") {
  std::mt19937_64 rng(17);
  JointRotations a, b;
  for (int i = 0; i < 37; ++i) {
    a.push_back(RotMatrix::from_matrix(oracle::random_rotation(rng)));
    b.push_back(RotMatrix::from_matrix(oracle::random_rotation(rng)));
  }
  std::vector<double> out(a.size());
  geodesic_distances(a, b, out);
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(out[i] == doctest::Approx(geodesic_distance(a[i], b[i])).epsilon(1e-13));
    mean += out[i] / a.size();
  }
  CHECK(geodesic_loss(a, b) == doctest::Approx(mean).epsilon(1e-14));
  JointRotations shorter(a.begin(), a.end() - 1);
  CHECK_THROWS_AS(geodesic_loss(shorter, b), Error);
}

TEST_CASE("chordal and geodesic distances are related") {
  std::mt19937_64 rng(18);
  for (int i = 0; i < 1000; ++i) {
    const auto a = RotMatrix::from_matrix(oracle::random_rotation(rng));
    const auto b = RotMatrix::from_matrix(oracle::random_rotation(rng));
    const double phi = geodesic_distance(a, b);
    CHECK(std::abs(chordal_distance(a, b) - 2.0 * std::sqrt(2.0) * std::sin(phi / 2.0)) < 1e-9);
  }
}

TEST_CASE("mse losses compare raw values without canonicalization") {
  const std::vector<Quaternion> p{{1, 0, 0, 0}};
  const std::vector<Quaternion> g{{-1, 0, 0, 0}};
  // Same rotation, maximal quaternion distance.
  CHECK(mse_loss(p, g) == doctest::Approx(1.0));
  const std::vector<AxisAngle> a{{Vec3(kPi, 0, 0)}}, b{{Vec3(-kPi, 0, 0)}};
  CHECK(mse_loss(a, b) == doctest::Approx(4.0 * kPi * kPi / 3.0));
  const JointRotations x{RotMatrix::identity()}, y{aa_to_matrix({Vec3(0, 0, kPi)})};
  CHECK(mse_loss(x, y) == doctest::Approx(8.0 / 9.0));
}

TEST_CASE("encode and decode are inverse on rotations") {
  std::mt19937_64 rng(19);
  for (auto rep : {Representation::Matrix, Representation::Quaternion, Representation::AxisAngle}) {
    for (int i = 0; i < 50; ++i) {
      const auto r = RotMatrix::from_matrix(oracle::random_rotation(rng));
      std::vector<double> raw(parameter_count(rep));
      encode(rep, r, raw);
      bool degenerate = true;
      const RotMatrix back = decode(rep, raw, &degenerate);
      CHECK_FALSE(degenerate);
      CHECK(oracle::angle_between(back.matrix(), r.matrix()) < 1e-12);
    }
  }
  // Quaternions decode after normalization.
  const std::vector<double> q{2.0, 0.0, 0.0, 0.0};
  CHECK(decode(Representation::Quaternion, q).matrix().isApprox(Mat3::Identity()));
}

TEST_CASE("guard band is continuous with matching slope") {
  const double e = kGeodesicGuard;
  for (double edge : {e, kPi - e}) {
    const GuardedAngle in = guarded_geodesic(edge - 1e-12);
    const GuardedAngle out = guarded_geodesic(edge + 1e-12);
    CHECK(in.value == doctest::Approx(out.value).epsilon(1e-10));
    CHECK(in.slope == doctest::Approx(out.slope).epsilon(1e-6));
  }
  CHECK(guarded_geodesic(0.0).value == doctest::Approx(e / 2));
  CHECK(guarded_geodesic(0.0).slope == 0.0);
  CHECK(guarded_geodesic(kPi).slope == 0.0);
  CHECK(guarded_geodesic(1.0).value == 1.0);
  CHECK_FALSE(guarded_geodesic(1.0).guarded);
}

TEST_CASE("loss gradients match finite differences") {
  std::mt19937_64 rng(20);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto kind : {LossKind::Mse, LossKind::Geodesic}) {
    for (auto rep : {Representation::Matrix, Representation::Quaternion, Representation::AxisAngle}) {
      CAPTURE(to_string(kind));
      CAPTURE(to_string(rep));
      const int p = parameter_count(rep);
      for (int trial = 0; trial < 20; ++trial) {
        JointRotations gt;
        std::vector<double> raw;
        for (int k = 0; k < 4; ++k) {
          gt.push_back(RotMatrix::from_matrix(oracle::random_rotation(rng)));
          for (int i = 0; i < p; ++i) raw.push_back(n(rng));
        }
        const LossEvaluation ev = loss_with_gradient(kind, rep, raw, gt);
        CHECK(ev.value == doctest::Approx(loss_value(kind, rep, raw, gt)).epsilon(1e-14));
        const auto fd = oracle::central_difference(
            [&](const std::vector<double>& x) { return loss_value(kind, rep, x, gt); }, raw);
        CHECK(oracle::max_rel_error(ev.gradient, fd) < 1e-4);
      }
    }
  }
}

TEST_CASE("geodesic gradient inside the guard band is finite") {
  const JointRotations gt{RotMatrix::identity()};
  for (double angle : {0.0, 1e-9, 5e-5, kPi - 5e-5, kPi}) {
    std::vector<double> raw(3);
    raw[0] = angle;
    const LossEvaluation ev = loss_with_gradient(LossKind::Geodesic, Representation::AxisAngle, raw, gt);
    for (double g : ev.gradient) CHECK(std::isfinite(g));
    CHECK(ev.guarded_joints == 1);
  }
}

TEST_CASE("sampling") {
  std::mt19937_64 rng(21);
  double mean_angle = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) mean_angle += matrix_to_aa(random_rotation(rng)).angle() / n;
  // Uniform on SO(3): E[angle] = pi/2 + 2/pi.
  CHECK(mean_angle == doctest::Approx(kPi / 2 + 2 / kPi).epsilon(0.01));
  for (int i = 0; i < 200; ++i) {
    CHECK(matrix_to_aa(random_rotation_bounded(rng, 0.5)).angle() <= 0.5 + 1e-12);
  }
  std::mt19937_64 a(5), b(5);
  CHECK(random_rotation(a).matrix() == random_rotation(b).matrix());
}

}  // TEST_SUITE
