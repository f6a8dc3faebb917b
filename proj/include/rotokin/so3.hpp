#pragma once

// Rotation representations, conversions, nearest-rotation projection,
// distances, losses and their analytic gradients.
//
// Three interchangeable forms of a rotation are supported: 3x3 matrices,
// unit quaternions (w, x, y, z) and axis-angle vectors v = axis * angle.
// All functions here are pure.

#include <Eigen/Core>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace rotokin {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

// Tolerance on ||M^T M - I||_F and |det(M) - 1| for a matrix to count as a
// rotation.
inline constexpr double kOrthoTolerance = 1e-9;

// Half-width of the band around phi = 0 and phi = pi where the geodesic loss
// is replaced by a quadratic for gradient purposes.
inline constexpr double kGeodesicGuard = 1e-4;

bool is_rotation(const Mat3& m, double tolerance = kOrthoTolerance);

// Element of SO(3). Construction through from_matrix() validates; the
// library's own compositions use unchecked().
class RotMatrix {
 public:
  RotMatrix() : m_(Mat3::Identity()) {}

  static RotMatrix from_matrix(const Mat3& m);
  static RotMatrix unchecked(const Mat3& m) { return RotMatrix(m); }
  static RotMatrix identity() { return RotMatrix(); }

  const Mat3& matrix() const { return m_; }
  const double* data() const { return m_.data(); }

  RotMatrix operator*(const RotMatrix& rhs) const { return RotMatrix(m_ * rhs.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  RotMatrix transpose() const { return RotMatrix(m_.transpose()); }

 private:
  explicit RotMatrix(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

static_assert(sizeof(RotMatrix) == 9 * sizeof(double),
              "RotMatrix must pack as 9 doubles for the batched kernels");

// Unconstrained 3x3 regression output.
struct RawMatrix {
  Mat3 m = Mat3::Zero();
};

struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
  Quaternion normalized() const;
  Quaternion operator-() const { return {-w, -x, -y, -z}; }
  double dot(const Quaternion& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
};

// Compact form v = axis * angle (radians).
struct AxisAngle {
  Vec3 v = Vec3::Zero();

  double angle() const { return v.norm(); }
};

// Per-joint parent-relative rotations, index-aligned with a KinematicTree.
using JointRotations = std::vector<RotMatrix>;

enum class Representation { Matrix, Quaternion, AxisAngle };
enum class LossKind { Mse, Geodesic };

// Number of raw regression values per joint: 9, 4 or 3.
int parameter_count(Representation rep);
std::string_view to_string(Representation rep);
std::string_view to_string(LossKind kind);
// Accepts matrix|rm, quat|quaternion|q, aa|axis-angle.
Representation parse_representation(std::string_view text);
LossKind parse_loss(std::string_view text);

// ---------------------------------------------------------------- conversions

// Normalizes its input, so it is total on any non-zero quaternion.
RotMatrix quat_to_matrix(const Quaternion& q);
// Output is canonicalized to w >= 0.
Quaternion matrix_to_quat(const RotMatrix& m);
// Validating overload; throws Error(NotOrthonormal).
Quaternion matrix_to_quat(const Mat3& m);

RotMatrix aa_to_matrix(const AxisAngle& a);
// Output angle lies in [0, pi].
AxisAngle matrix_to_aa(const RotMatrix& m);
Quaternion aa_to_quat(const AxisAngle& a);
AxisAngle quat_to_aa(const Quaternion& q);

Quaternion canonicalize(const Quaternion& q);
AxisAngle canonicalize(const AxisAngle& a);

Quaternion quat_multiply(const Quaternion& a, const Quaternion& b);
// Shortest-arc spherical interpolation; t in [0, 1].
Quaternion slerp(const Quaternion& a, const Quaternion& b, double t);

Mat3 hat(const Vec3& v);
// Inverse of the right Jacobian of SO(3), evaluated at log-coordinates v.
Mat3 right_jacobian_inverse(const Vec3& v);

// ------------------------------------------------------------ projection

struct Projection {
  RotMatrix rotation;
  // Set when the nearest rotation is not unique: smallest singular value
  // below 1e-12, or a negative determinant with the two smallest singular
  // values equal. `rotation` is still a minimizer.
  bool degenerate = false;
  Vec3 singular_values = Vec3::Zero();
};

// Nearest rotation in Frobenius norm: U * diag(1, 1, det(U V^T)) * V^T.
Projection svd_orthogonalize(const RawMatrix& a);

// ------------------------------------------------------------- distances

// Angle of R * G^T in [0, pi], computed as atan2 of the skew and trace parts.
double geodesic_distance(const RotMatrix& r, const RotMatrix& g);
// Batched form over aligned spans; uses the active SIMD kernel table.
void geodesic_distances(std::span<const RotMatrix> a, std::span<const RotMatrix> b,
                        std::span<double> out);
double chordal_distance(const RotMatrix& a, const RotMatrix& b);

// Mean per-joint geodesic distance. Throws on mismatched joint counts.
double geodesic_loss(const JointRotations& pred, const JointRotations& gt);

// Mean over joints of the mean squared element difference in each
// representation space. Quaternions and axis-angle vectors are compared as
// given, without sign canonicalization.
double mse_loss(const JointRotations& pred, const JointRotations& gt);
double mse_loss(std::span<const Quaternion> pred, std::span<const Quaternion> gt);
double mse_loss(std::span<const AxisAngle> pred, std::span<const AxisAngle> gt);

// ------------------------------------------------ raw parameter encodings

// Raw regression values for one rotation: matrix row-major (9), quaternion
// canonical w >= 0 (4), or canonical axis-angle (3).
void encode(Representation rep, const RotMatrix& r, std::span<double> out);
std::vector<double> encode_all(Representation rep, const JointRotations& rotations);

// Maps one joint's raw values to a rotation: SVD projection, normalization,
// or Rodrigues. `degenerate` is set for non-unique SVD projections.
RotMatrix decode(Representation rep, std::span<const double> raw, bool* degenerate = nullptr);
JointRotations decode_all(Representation rep, std::span<const double> raw);

// Vector-Jacobian product of decode(): writes dL/draw given dL/dR.
void decode_vjp(Representation rep, std::span<const double> raw, const Mat3& dl_dr,
                std::span<double> dl_draw);

// ------------------------------------------------------- training losses

// Guarded per-joint geodesic loss h(phi) and dh/dphi.
struct GuardedAngle {
  double value;
  double slope;
  bool guarded;
};
GuardedAngle guarded_geodesic(double phi);

struct LossEvaluation {
  double value = 0.0;
  std::vector<double> gradient;  // dL/draw, same layout as the raw input
  int guarded_joints = 0;
  int degenerate_joints = 0;
};

// Training objective on raw per-joint values (K * parameter_count(rep)),
// averaged over joints. The geodesic variant uses guarded_geodesic().
double loss_value(LossKind kind, Representation rep, std::span<const double> pred_raw,
                  const JointRotations& gt);
LossEvaluation loss_with_gradient(LossKind kind, Representation rep,
                                  std::span<const double> pred_raw, const JointRotations& gt);

// -------------------------------------------------------------- sampling

// Uniform on SO(3): normalized 4D Gaussian.
Quaternion random_quaternion(std::mt19937_64& rng);
RotMatrix random_rotation(std::mt19937_64& rng);
// Uniform on SO(3) conditioned on angle <= max_angle (rejection sampling).
RotMatrix random_rotation_bounded(std::mt19937_64& rng, double max_angle);

}  // namespace rotokin
