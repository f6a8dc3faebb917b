#include "rotokin/so3.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "rotokin/error.hpp"
#include "rotokin/simd/kernels.hpp"

namespace rotokin {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::ShapeMismatch: return "shape_mismatch";
    case ErrorKind::NotOrthonormal: return "not_orthonormal";
    case ErrorKind::Parse: return "parse_error";
    case ErrorKind::Schema: return "schema_error";
    case ErrorKind::Io: return "io_error";
  }
  return "unknown";
}

bool is_rotation(const Mat3& m, double tolerance) {
  if (!m.allFinite()) return false;
  const double ortho = (m.transpose() * m - Mat3::Identity()).norm();
  return ortho < tolerance && std::abs(m.determinant() - 1.0) < tolerance;
}

RotMatrix RotMatrix::from_matrix(const Mat3& m) {
  if (!is_rotation(m)) {
    throw Error(ErrorKind::NotOrthonormal, "matrix is not a rotation (orthonormal, det +1)");
  }
  return RotMatrix(m);
}

double Quaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Quaternion Quaternion::normalized() const {
  const double n = norm();
  return {w / n, x / n, y / n, z / n};
}

int parameter_count(Representation rep) {
  switch (rep) {
    case Representation::Matrix: return 9;
    case Representation::Quaternion: return 4;
    case Representation::AxisAngle: return 3;
  }
  return 0;
}

std::string_view to_string(Representation rep) {
  switch (rep) {
    case Representation::Matrix: return "matrix";
    case Representation::Quaternion: return "quat";
    case Representation::AxisAngle: return "aa";
  }
  return "?";
}

std::string_view to_string(LossKind kind) {
  return kind == LossKind::Mse ? "mse" : "geodesic";
}

Representation parse_representation(std::string_view text) {
  if (text == "matrix" || text == "rm") return Representation::Matrix;
  if (text == "quat" || text == "quaternion" || text == "q") return Representation::Quaternion;
  if (text == "aa" || text == "axis-angle" || text == "axis_angle") {
    return Representation::AxisAngle;
  }
  throw Error(ErrorKind::InvalidArgument,
              "unknown representation tag '" + std::string(text) + "'");
}

LossKind parse_loss(std::string_view text) {
  if (text == "mse") return LossKind::Mse;
  if (text == "geodesic" || text == "geo") return LossKind::Geodesic;
  throw Error(ErrorKind::InvalidArgument, "unknown loss '" + std::string(text) + "'");
}

// ---------------------------------------------------------------- conversions

RotMatrix quat_to_matrix(const Quaternion& in) {
  const Quaternion q = in.normalized();
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 m;
  m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return RotMatrix::unchecked(m);
}

Quaternion canonicalize(const Quaternion& q) { return q.w < 0.0 ? -q : q; }

Quaternion matrix_to_quat(const RotMatrix& rot) {
  // Shepperd: branch on the largest diagonal term to keep the divisor large.
  const Mat3& r = rot.matrix();
  const double tr = r.trace();
  Quaternion q;
  if (tr > 0.0) {
    const double s = 2.0 * std::sqrt(tr + 1.0);
    q = {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s};
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    q = {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s};
  } else if (r(1, 1) > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
    q = {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s};
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    q = {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s};
  }
  return canonicalize(q.normalized());
}

Quaternion matrix_to_quat(const Mat3& m) { return matrix_to_quat(RotMatrix::from_matrix(m)); }

Mat3 hat(const Vec3& v) {
  Mat3 k;
  k << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return k;
}

RotMatrix aa_to_matrix(const AxisAngle& a) {
  const double angle = a.v.norm();
  const Mat3 k = hat(a.v);
  double sinc, cosc;  // sin(t)/t and (1 - cos t)/t^2
  if (angle < 1e-8) {
    sinc = 1.0 - angle * angle / 6.0;
    cosc = 0.5 - angle * angle / 24.0;
  } else {
    const double half = std::sin(0.5 * angle);
    sinc = std::sin(angle) / angle;
    cosc = 2.0 * half * half / (angle * angle);
  }
  return RotMatrix::unchecked(Mat3::Identity() + sinc * k + cosc * k * k);
}

Quaternion aa_to_quat(const AxisAngle& a) {
  const double angle = a.v.norm();
  const double s = angle < 1e-8 ? 0.5 - angle * angle / 48.0 : std::sin(0.5 * angle) / angle;
  return Quaternion{std::cos(0.5 * angle), s * a.v.x(), s * a.v.y(), s * a.v.z()}.normalized();
}

AxisAngle quat_to_aa(const Quaternion& in) {
  const Quaternion q = canonicalize(in.normalized());
  const Vec3 xyz(q.x, q.y, q.z);
  const double n = xyz.norm();
  if (n < 1e-8) return {xyz * (2.0 / q.w)};
  return {xyz * (2.0 * std::atan2(n, q.w) / n)};
}

AxisAngle matrix_to_aa(const RotMatrix& m) { return quat_to_aa(matrix_to_quat(m)); }

AxisAngle canonicalize(const AxisAngle& a) {
  if (a.v.norm() <= kPi) return a;
  return quat_to_aa(aa_to_quat(a));
}

Quaternion quat_multiply(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Quaternion slerp(const Quaternion& qa, const Quaternion& qb_in, double t) {
  const Quaternion a = qa.normalized();
  Quaternion b = qb_in.normalized();
  double cos_half = a.dot(b);
  if (cos_half < 0.0) {
    b = -b;
    cos_half = -cos_half;
  }
  cos_half = std::min(cos_half, 1.0);
  // atan2 form keeps the half-angle accurate for nearly parallel inputs.
  const Quaternion perp{b.w - cos_half * a.w, b.x - cos_half * a.x, b.y - cos_half * a.y,
                        b.z - cos_half * a.z};
  const double sin_half = perp.norm();
  if (sin_half < 1e-15) return a;
  const double omega = std::atan2(sin_half, cos_half);
  const double ca = std::cos(t * omega);
  const double cb = std::sin(t * omega) / sin_half;
  return Quaternion{ca * a.w + cb * perp.w, ca * a.x + cb * perp.x, ca * a.y + cb * perp.y,
                    ca * a.z + cb * perp.z}
      .normalized();
}

Mat3 right_jacobian_inverse(const Vec3& v) {
  const double t = v.norm();
  const Mat3 k = hat(v);
  // 1/t^2 - cot(t/2) / (2 t), finite on [0, pi].
  double c;
  if (t < 1e-4) {
    c = 1.0 / 12.0 + t * t / 720.0;
  } else {
    c = 1.0 / (t * t) - std::cos(0.5 * t) / (2.0 * t * std::sin(0.5 * t));
  }
  return Mat3::Identity() + 0.5 * k + c * k * k;
}

// ------------------------------------------------------------ projection

namespace {

struct SignedSvd {
  Mat3 u;  // U * diag(1, 1, d)
  Mat3 v;
  Vec3 s;  // (s0, s1, d * s2)
  Vec3 singular_values;
  double d;
};

SignedSvd signed_svd(const Mat3& a) {
  Eigen::JacobiSVD<Mat3> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SignedSvd out;
  out.u = svd.matrixU();
  out.v = svd.matrixV();
  out.singular_values = svd.singularValues();
  out.d = (out.u * out.v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  out.u.col(2) *= out.d;
  out.s = out.singular_values;
  out.s(2) *= out.d;
  return out;
}

}  // namespace

Projection svd_orthogonalize(const RawMatrix& a) {
  const SignedSvd svd = signed_svd(a.m);
  Projection p;
  p.rotation = RotMatrix::unchecked(svd.u * svd.v.transpose());
  p.singular_values = svd.singular_values;
  const Vec3& sv = svd.singular_values;
  const bool rank_deficient = sv(2) < 1e-12;
  const bool flipped_tie = svd.d < 0.0 && (sv(1) - sv(2)) <= 1e-12 * std::max(1.0, sv(0));
  p.degenerate = rank_deficient || flipped_tie || !a.m.allFinite();
  return p;
}

// ------------------------------------------------------------- distances

double geodesic_distance(const RotMatrix& r, const RotMatrix& g) {
  double c, s;
  simd::scalar_kernels().rotation_cos_sin(r.data(), g.data(), &c, &s, 1);
  return std::atan2(s, c);
}

void geodesic_distances(std::span<const RotMatrix> a, std::span<const RotMatrix> b,
                        std::span<double> out) {
  if (a.size() != b.size() || out.size() != a.size()) {
    throw Error(ErrorKind::ShapeMismatch, "geodesic_distances: mismatched joint counts");
  }
  std::vector<double> sines(a.size());
  simd::active().rotation_cos_sin(a.data()->data(), b.data()->data(), out.data(),
                                  sines.data(), a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = std::atan2(sines[k], out[k]);
}

double chordal_distance(const RotMatrix& a, const RotMatrix& b) {
  return (a.matrix() - b.matrix()).norm();
}

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": mismatched joint counts (" +
                                              std::to_string(a) + " vs " + std::to_string(b) +
                                              ")");
  }
}

}  // namespace

double geodesic_loss(const JointRotations& pred, const JointRotations& gt) {
  require_same_size(pred.size(), gt.size(), "geodesic_loss");
  if (pred.empty()) return 0.0;
  std::vector<double> d(pred.size());
  geodesic_distances(pred, gt, d);
  double sum = 0.0;
  for (double v : d) sum += v;
  return sum / static_cast<double>(d.size());
}

double mse_loss(const JointRotations& pred, const JointRotations& gt) {
  require_same_size(pred.size(), gt.size(), "mse_loss");
  if (pred.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    sum += (pred[k].matrix() - gt[k].matrix()).squaredNorm() / 9.0;
  }
  return sum / static_cast<double>(pred.size());
}

double mse_loss(std::span<const Quaternion> pred, std::span<const Quaternion> gt) {
  require_same_size(pred.size(), gt.size(), "mse_loss");
  if (pred.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double dw = pred[k].w - gt[k].w, dx = pred[k].x - gt[k].x;
    const double dy = pred[k].y - gt[k].y, dz = pred[k].z - gt[k].z;
    sum += (dw * dw + dx * dx + dy * dy + dz * dz) / 4.0;
  }
  return sum / static_cast<double>(pred.size());
}

double mse_loss(std::span<const AxisAngle> pred, std::span<const AxisAngle> gt) {
  require_same_size(pred.size(), gt.size(), "mse_loss");
  if (pred.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) sum += (pred[k].v - gt[k].v).squaredNorm() / 3.0;
  return sum / static_cast<double>(pred.size());
}

// ------------------------------------------------ raw parameter encodings

void encode(Representation rep, const RotMatrix& r, std::span<double> out) {
  switch (rep) {
    case Representation::Matrix:
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[3 * i + j] = r.matrix()(i, j);
      return;
    case Representation::Quaternion: {
      const Quaternion q = matrix_to_quat(r);
      out[0] = q.w;
      out[1] = q.x;
      out[2] = q.y;
      out[3] = q.z;
      return;
    }
    case Representation::AxisAngle: {
      const AxisAngle a = matrix_to_aa(r);
      out[0] = a.v.x();
      out[1] = a.v.y();
      out[2] = a.v.z();
      return;
    }
  }
}

std::vector<double> encode_all(Representation rep, const JointRotations& rotations) {
  const int n = parameter_count(rep);
  std::vector<double> out(rotations.size() * n);
  for (std::size_t k = 0; k < rotations.size(); ++k) {
    encode(rep, rotations[k], std::span<double>(out).subspan(k * n, n));
  }
  return out;
}

namespace {

Mat3 raw_matrix(std::span<const double> raw) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = raw[3 * i + j];
  return m;
}

// dR/dq_i for the unit-quaternion rotation formula, i over (w, x, y, z).
std::array<Mat3, 4> quat_matrix_partials(const Quaternion& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  std::array<Mat3, 4> d;
  d[0] << 0, -2 * z, 2 * y, 2 * z, 0, -2 * x, -2 * y, 2 * x, 0;
  d[1] << 0, 2 * y, 2 * z, 2 * y, -4 * x, -2 * w, 2 * z, 2 * w, -4 * x;
  d[2] << -4 * y, 2 * x, 2 * w, 2 * x, 0, 2 * z, -2 * w, 2 * z, -4 * y;
  d[3] << -4 * z, -2 * w, 2 * x, 2 * w, -4 * z, 2 * y, 2 * x, 2 * y, 0;
  return d;
}

// dR/dv_i for Rodrigues' formula.
std::array<Mat3, 3> aa_matrix_partials(const Vec3& v) {
  std::array<Mat3, 3> d;
  const double angle = v.norm();
  if (angle < 1e-6) {
    const Mat3 k = hat(v);
    for (int i = 0; i < 3; ++i) {
      const Mat3 e = hat(Vec3::Unit(i));
      d[i] = e + 0.5 * (e * k + k * e);
    }
    return d;
  }
  const Mat3 r = aa_to_matrix({v}).matrix();
  const Mat3 k = hat(v);
  const Mat3 i_minus_r = Mat3::Identity() - r;
  for (int i = 0; i < 3; ++i) {
    const Vec3 w = v.cross(i_minus_r.col(i));
    d[i] = (v(i) * k + hat(w)) * r / (angle * angle);
  }
  return d;
}

}  // namespace

RotMatrix decode(Representation rep, std::span<const double> raw, bool* degenerate) {
  if (degenerate) *degenerate = false;
  switch (rep) {
    case Representation::Matrix: {
      const Projection p = svd_orthogonalize({raw_matrix(raw)});
      if (degenerate) *degenerate = p.degenerate;
      return p.rotation;
    }
    case Representation::Quaternion:
      return quat_to_matrix({raw[0], raw[1], raw[2], raw[3]});
    case Representation::AxisAngle:
      return aa_to_matrix({Vec3(raw[0], raw[1], raw[2])});
  }
  return {};
}

JointRotations decode_all(Representation rep, std::span<const double> raw) {
  const std::size_t n = parameter_count(rep);
  JointRotations out(raw.size() / n);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = decode(rep, raw.subspan(k * n, n));
  return out;
}

void decode_vjp(Representation rep, std::span<const double> raw, const Mat3& dl_dr,
                std::span<double> dl_draw) {
  switch (rep) {
    case Representation::Matrix: {
      const SignedSvd svd = signed_svd(raw_matrix(raw));
      const Mat3 m = svd.u.transpose() * dl_dr * svd.v;
      Mat3 k = Mat3::Zero();
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          if (i == j) continue;
          const double denom = svd.s(i) + svd.s(j);
          // Zero denominators only occur for non-unique projections.
          if (std::abs(denom) > 1e-12) k(i, j) = (m(i, j) - m(j, i)) / denom;
        }
      }
      const Mat3 g = svd.u * k * svd.v.transpose();
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) dl_draw[3 * i + j] = g(i, j);
      return;
    }
    case Representation::Quaternion: {
      const Quaternion p{raw[0], raw[1], raw[2], raw[3]};
      const double n = p.norm();
      const Quaternion q = p.normalized();
      const auto partials = quat_matrix_partials(q);
      std::array<double, 4> dq;
      for (int i = 0; i < 4; ++i) dq[i] = partials[i].cwiseProduct(dl_dr).sum();
      const std::array<double, 4> qv{q.w, q.x, q.y, q.z};
      double proj = 0.0;
      for (int i = 0; i < 4; ++i) proj += qv[i] * dq[i];
      for (int i = 0; i < 4; ++i) dl_draw[i] = (dq[i] - qv[i] * proj) / n;
      return;
    }
    case Representation::AxisAngle: {
      const auto partials = aa_matrix_partials(Vec3(raw[0], raw[1], raw[2]));
      for (int i = 0; i < 3; ++i) dl_draw[i] = partials[i].cwiseProduct(dl_dr).sum();
      return;
    }
  }
}

// ------------------------------------------------------- training losses

GuardedAngle guarded_geodesic(double phi) {
  constexpr double e = kGeodesicGuard;
  if (phi < e) return {phi * phi / (2.0 * e) + 0.5 * e, phi / e, true};
  if (phi > kPi - e) {
    const double psi = kPi - phi;
    return {kPi - (psi * psi / (2.0 * e) + 0.5 * e), psi / e, true};
  }
  return {phi, 1.0, false};
}

namespace {

// slope(phi) / sin(phi), finite everywhere.
double slope_over_sine(double phi, const GuardedAngle& h) {
  if (!h.guarded) return 1.0 / std::sin(phi);
  const double theta = phi < 0.5 * kPi ? phi : kPi - phi;
  const double ratio = theta < 1e-8 ? 1.0 : theta / std::sin(theta);
  return ratio / kGeodesicGuard;
}

LossEvaluation evaluate_loss(LossKind kind, Representation rep, std::span<const double> pred,
                             const JointRotations& gt, bool want_gradient) {
  const std::size_t n = parameter_count(rep);
  if (pred.size() != gt.size() * n) {
    throw Error(ErrorKind::ShapeMismatch,
                "loss: expected " + std::to_string(gt.size() * n) + " raw values, got " +
                    std::to_string(pred.size()));
  }
  LossEvaluation out;
  if (want_gradient) out.gradient.assign(pred.size(), 0.0);
  if (gt.empty()) return out;
  const double inv_k = 1.0 / static_cast<double>(gt.size());

  for (std::size_t k = 0; k < gt.size(); ++k) {
    const auto raw = pred.subspan(k * n, n);
    const auto grad = want_gradient ? std::span<double>(out.gradient).subspan(k * n, n)
                                    : std::span<double>();
    if (kind == LossKind::Geodesic) {
      bool degenerate = false;
      const RotMatrix r = decode(rep, raw, &degenerate);
      const double phi = geodesic_distance(r, gt[k]);
      const GuardedAngle h = guarded_geodesic(phi);
      out.value += h.value * inv_k;
      out.guarded_joints += h.guarded ? 1 : 0;
      out.degenerate_joints += degenerate ? 1 : 0;
      if (want_gradient) {
        // d phi / dR = -G / (2 sin phi) on SO(3).
        const Mat3 dl_dr = (-0.5 * inv_k * slope_over_sine(phi, h)) * gt[k].matrix();
        decode_vjp(rep, raw, dl_dr, grad);
      }
      continue;
    }
    switch (rep) {
      case Representation::Matrix: {
        bool degenerate = false;
        const RotMatrix r = decode(rep, raw, &degenerate);
        const Mat3 diff = r.matrix() - gt[k].matrix();
        out.value += diff.squaredNorm() / 9.0 * inv_k;
        out.degenerate_joints += degenerate ? 1 : 0;
        if (want_gradient) decode_vjp(rep, raw, (2.0 / 9.0 * inv_k) * diff, grad);
        break;
      }
      case Representation::Quaternion: {
        const Quaternion p{raw[0], raw[1], raw[2], raw[3]};
        const double norm = p.norm();
        const Quaternion q = p.normalized();
        const Quaternion g = matrix_to_quat(gt[k]);
        const std::array<double, 4> d{q.w - g.w, q.x - g.x, q.y - g.y, q.z - g.z};
        const std::array<double, 4> qv{q.w, q.x, q.y, q.z};
        double sq = 0.0, proj = 0.0;
        for (int i = 0; i < 4; ++i) {
          sq += d[i] * d[i];
          proj += qv[i] * d[i];
        }
        out.value += sq / 4.0 * inv_k;
        if (want_gradient) {
          const double c = 2.0 / 4.0 * inv_k;
          for (int i = 0; i < 4; ++i) grad[i] = c * (d[i] - qv[i] * proj) / norm;
        }
        break;
      }
      case Representation::AxisAngle: {
        const Vec3 g = matrix_to_aa(gt[k]).v;
        const Vec3 d = Vec3(raw[0], raw[1], raw[2]) - g;
        out.value += d.squaredNorm() / 3.0 * inv_k;
        if (want_gradient) {
          for (int i = 0; i < 3; ++i) grad[i] = 2.0 / 3.0 * inv_k * d(i);
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace

double loss_value(LossKind kind, Representation rep, std::span<const double> pred_raw,
                  const JointRotations& gt) {
  return evaluate_loss(kind, rep, pred_raw, gt, false).value;
}

LossEvaluation loss_with_gradient(LossKind kind, Representation rep,
                                  std::span<const double> pred_raw, const JointRotations& gt) {
  return evaluate_loss(kind, rep, pred_raw, gt, true);
}

// -------------------------------------------------------------- sampling

Quaternion random_quaternion(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const Quaternion q{n(rng), n(rng), n(rng), n(rng)};
    if (q.norm() > 1e-6) return q.normalized();
  }
}

RotMatrix random_rotation(std::mt19937_64& rng) { return quat_to_matrix(random_quaternion(rng)); }

RotMatrix random_rotation_bounded(std::mt19937_64& rng, double max_angle) {
  if (max_angle <= 0.0) return RotMatrix::identity();
  for (;;) {
    const Quaternion q = canonicalize(random_quaternion(rng));
    const double angle = 2.0 * std::atan2(std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z), q.w);
    if (angle <= max_angle) return quat_to_matrix(q);
  }
}

}  // namespace rotokin
