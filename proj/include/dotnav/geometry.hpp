#pragma once

// SE(3) pose algebra and rigid least-squares point-set alignment.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dotnav/error.hpp"

namespace dotnav {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Rigid motion stored as a unit quaternion plus translation (meters).
/// The quaternion is renormalized on construction and after every product.
class Pose {
 public:
  Pose() : rotation_(Eigen::Quaterniond::Identity()), translation_(Vec3::Zero()) {}

  Pose(const Eigen::Quaterniond& rotation, const Vec3& translation)
      : rotation_(normalize(rotation)), translation_(translation) {}

  static Pose identity() { return Pose{}; }

  static Pose from_translation(const Vec3& t) {
    return Pose(Eigen::Quaterniond::Identity(), t);
  }

  static Pose from_axis_angle(const Vec3& axis, double angle,
                              const Vec3& t = Vec3::Zero()) {
    return Pose(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())), t);
  }

  /// Builds a pose from the upper 3x4 block of a homogeneous matrix.
  static Pose from_matrix(const Mat4& m) {
    const Mat3 r = m.block<3, 3>(0, 0);
    return Pose(Eigen::Quaterniond(r), m.block<3, 1>(0, 3));
  }

  const Eigen::Quaterniond& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Mat3 rotation_matrix() const { return rotation_.toRotationMatrix(); }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.block<3, 3>(0, 0) = rotation_matrix();
    m.block<3, 1>(0, 3) = translation_;
    return m;
  }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }

 private:
  // Already-unit quaternions are kept bit-for-bit so text round-trips are stable.
  static Eigen::Quaterniond normalize(const Eigen::Quaterniond& q) {
    if (std::abs(q.squaredNorm() - 1.0) <= 4.0 * Eigen::NumTraits<double>::epsilon()) return q;
    return q.normalized();
  }

  Eigen::Quaterniond rotation_;
  Vec3 translation_;
};

/// Group product in the matrix sense: the result maps p to a·(b·p).
inline Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.rotation() * b.rotation(), a.translation() + a.rotation() * b.translation());
}

inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }

inline Pose inverse(const Pose& a) {
  const Eigen::Quaterniond q = a.rotation().conjugate();
  return Pose(q, -(q * a.translation()));
}

/// Geodesic rotation angle in [0, pi]; translation is ignored.
inline double rotation_angle(const Pose& a) {
  const auto& q = a.rotation();
  // atan2 form stays accurate near 0 and pi, unlike 2*acos(w).
  return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
}

struct AlignmentResult {
  Pose transform;  // maps source points onto reference points
  double residual_rmse = 0.0;
};

/// Least-squares rigid alignment (no scale) of `source` onto `reference`:
/// the returned transform T minimizes sum |reference_i - T(source_i)|^2 with
/// det(R) = +1. Throws DegenerateGeometry for fewer than three points or
/// when either point set is collinear or coincident.
inline AlignmentResult umeyama_align(std::span<const Vec3> reference,
                                     std::span<const Vec3> source) {
  if (reference.size() != source.size()) {
    throw DegenerateGeometry("point sets differ in size");
  }
  const std::size_t n = reference.size();
  if (n < 3) throw DegenerateGeometry("alignment needs at least 3 points");

  Vec3 mean_ref = Vec3::Zero();
  Vec3 mean_src = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mean_ref += reference[i];
    mean_src += source[i];
  }
  mean_ref /= static_cast<double>(n);
  mean_src /= static_cast<double>(n);

  Mat3 cov = Mat3::Zero();
  Mat3 scatter_ref = Mat3::Zero();
  Mat3 scatter_src = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 r = reference[i] - mean_ref;
    const Vec3 s = source[i] - mean_src;
    cov += r * s.transpose();
    scatter_ref += r * r.transpose();
    scatter_src += s * s.transpose();
  }

  // Each set must span at least a plane, otherwise rotation about the line
  // is unconstrained.
  auto spans_plane = [](const Mat3& scatter) {
    Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter, Eigen::EigenvaluesOnly);
    const Vec3 ev = eig.eigenvalues();  // ascending
    return ev(2) > 0.0 && ev(1) > 1e-12 * ev(2);
  };
  if (!spans_plane(scatter_ref) || !spans_plane(scatter_src)) {
    throw DegenerateGeometry("points are collinear or coincident");
  }

  // Identical sets: the answer is exactly the identity, which the SVD would
  // only reproduce up to rounding.
  if (std::equal(reference.begin(), reference.end(), source.begin())) return AlignmentResult{};

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) d(2, 2) = -1.0;
  const Mat3 r = svd.matrixU() * d * svd.matrixV().transpose();
  const Vec3 t = mean_ref - r * mean_src;

  AlignmentResult result;
  result.transform = Pose(Eigen::Quaterniond(r), t);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sq += (reference[i] - result.transform.apply(source[i])).squaredNorm();
  }
  result.residual_rmse = std::sqrt(sq / static_cast<double>(n));
  return result;
}

inline AlignmentResult umeyama_align(const std::vector<Vec3>& reference,
                                     const std::vector<Vec3>& source) {
  return umeyama_align(std::span<const Vec3>(reference), std::span<const Vec3>(source));
}

}  // namespace dotnav
