#pragma once

#include "hisd/types.hpp"

namespace hisd {

/// k directional vectors stored as the columns of a d x k matrix.
///
/// Frames produced by the kernels below are orthonormal to 1e-12. A Frame
/// built directly from user data is not checked; use orthonormality_defect()
/// to inspect it.
class Frame {
 public:
  Frame() = default;
  explicit Frame(Matrix columns) : columns_(std::move(columns)) {}

  int dim() const { return static_cast<int>(columns_.rows()); }
  int count() const { return static_cast<int>(columns_.cols()); }
  const Matrix& matrix() const { return columns_; }
  auto vector(int i) const { return columns_.col(i); }

  /// max |V^T V - I| entrywise.
  double orthonormality_defect() const;

 private:
  Matrix columns_;
};

/// Default relative degeneracy tolerance for Gram-Schmidt.
inline constexpr double kGramSchmidtTol = 1e-10;

/// One Gram-Schmidt step: orthogonalize v_tilde against the orthonormal
/// columns of `basis` (d x m, m may be 0) and normalize.
///
///   v = (v~ - sum_j (v~^T v_j) v_j) / Y,   Y^2 = |v~|^2 - sum_j (v~^T v_j)^2.
///
/// Y is evaluated both by the subtractive identity above and as the direct
/// norm of the residual; the direct norm is used whenever the two differ by
/// more than kNormalizerAgreement relative (the subtractive form cancels when
/// v~ is nearly in span). Throws DegenerateDirectionError when Y <= tol * |v~|.
Vector gram_schmidt(const Eigen::Ref<const Matrix>& basis, const Vector& v_tilde,
                    double tol = kGramSchmidtTol);

inline constexpr double kNormalizerAgreement = 1e-12;

struct GramSchmidtStep {
  Vector v;
  double y_subtractive = 0.0;
  double y_direct = 0.0;
  /// Normalizer actually used.
  double y = 0.0;
};

/// gram_schmidt with both normalizers reported.
GramSchmidtStep gram_schmidt_step(const Eigen::Ref<const Matrix>& basis, const Vector& v_tilde,
                                  double tol = kGramSchmidtTol);

/// Sequential Gram-Schmidt: column i is orthonormalized against output
/// columns 1..i-1. Throws DegenerateDirectionError carrying the 1-based
/// index of the first degenerate column.
Frame orthonormalize_frame(const Matrix& raw, double tol = kGramSchmidtTol);

/// x / |x|. Throws DegenerateDirectionError for x = 0.
Vector sphere_retract(const Vector& x_tilde);

/// v - (v^T x) x for unit x.
Vector tangent_project(const Vector& v_tilde, const Vector& x);

/// Nearest matrix with orthonormal columns in Frobenius norm (orthonormal
/// polar factor U W^T of the thin SVD V~ = U S W^T). Throws
/// DegenerateDirectionError if the smallest singular value is <= tol times
/// the largest.
Frame svd_projection_retract(const Matrix& v_tilde, double tol = kGramSchmidtTol);

}  // namespace hisd
