#include "hisd/manifold_ops.hpp"

#include <cmath>
#include <string>

#include "hisd/errors.hpp"

namespace hisd {

double Frame::orthonormality_defect() const {
  if (columns_.cols() == 0) return 0.0;
  const Matrix gram = columns_.transpose() * columns_;
  return (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

GramSchmidtStep gram_schmidt_step(const Eigen::Ref<const Matrix>& basis, const Vector& v_tilde,
                                  double tol) {
  const double vnorm = v_tilde.norm();
  if (!std::isfinite(vnorm)) throw DegenerateDirectionError("non-finite direction");

  // Classical form: every coefficient uses the unmodified v~.
  const Vector coeffs = basis.transpose() * v_tilde;
  const Vector residual = v_tilde - basis * coeffs;

  GramSchmidtStep out;
  const double y_sq = vnorm * vnorm - coeffs.squaredNorm();
  out.y_subtractive = y_sq > 0.0 ? std::sqrt(y_sq) : 0.0;
  out.y_direct = residual.norm();
  out.y = out.y_subtractive;
  if (std::abs(out.y - out.y_direct) > kNormalizerAgreement * out.y_direct) out.y = out.y_direct;

  if (!(out.y > tol * vnorm)) {
    throw DegenerateDirectionError("direction lies in the span of the preceding vectors");
  }
  out.v = residual / out.y;
  return out;
}

Vector gram_schmidt(const Eigen::Ref<const Matrix>& basis, const Vector& v_tilde, double tol) {
  return gram_schmidt_step(basis, v_tilde, tol).v;
}

Frame orthonormalize_frame(const Matrix& raw, double tol) {
  const auto k = raw.cols();
  Matrix out(raw.rows(), k);
  for (Eigen::Index i = 0; i < k; ++i) {
    try {
      out.col(i) = gram_schmidt(out.leftCols(i), raw.col(i), tol);
    } catch (const DegenerateDirectionError& e) {
      throw DegenerateDirectionError(
          "Gram-Schmidt failed at vector " + std::to_string(i + 1) + ": " + e.what(),
          static_cast<int>(i + 1));
    }
  }
  return Frame(std::move(out));
}

Vector sphere_retract(const Vector& x_tilde) {
  const double n = x_tilde.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw DegenerateDirectionError("cannot retract a zero or non-finite vector onto the sphere");
  }
  return x_tilde / n;
}

Vector tangent_project(const Vector& v_tilde, const Vector& x) {
  return v_tilde - v_tilde.dot(x) * x;
}

Frame svd_projection_retract(const Matrix& v_tilde, double tol) {
  Eigen::JacobiSVD<Matrix> svd(v_tilde, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || !(s(s.size() - 1) > tol * s(0))) {
    throw DegenerateDirectionError("predictor frame is rank deficient");
  }
  return Frame(svd.matrixU() * svd.matrixV().transpose());
}

}  // namespace hisd
