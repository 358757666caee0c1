#pragma once

#include <complex>
#include <cstddef>
#include <variant>

#include <Eigen/Dense>

namespace nirom {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using complex = std::complex<double>;

/// How many singular triplets a truncation keeps.
///
/// Either a fixed count r, or the smallest k whose cumulative energy
/// (sum of sigma_i^2 up to k over the total) reaches a threshold in (0, 1].
class RankSpec {
 public:
  static RankSpec fixed(std::size_t r) { return RankSpec(Fixed{r}); }
  static RankSpec energy(double threshold) { return RankSpec(Energy{threshold}); }

  bool is_fixed() const { return std::holds_alternative<Fixed>(spec_); }
  std::size_t count() const { return std::get<Fixed>(spec_).r; }
  double threshold() const { return std::get<Energy>(spec_).eps; }

  /// Number of retained triplets for a (non-increasing) singular spectrum.
  /// Throws DomainError when the spec is out of range for the spectrum.
  std::size_t resolve(const Vector& sigma) const;

 private:
  struct Fixed {
    std::size_t r;
  };
  struct Energy {
    double eps;
  };
  explicit RankSpec(std::variant<Fixed, Energy> s) : spec_(s) {}
  std::variant<Fixed, Energy> spec_;
};

struct SvdResult {
  Matrix u;           ///< rows x rank, orthonormal columns
  Vector sigma;       ///< retained singular values, non-increasing
  Matrix v;           ///< cols x rank, orthonormal columns
  std::size_t rank = 0;
  Vector all_sigma;   ///< full min(rows, cols) spectrum before truncation
};

struct SymEigResult {
  Vector eigenvalues;  ///< non-increasing
  Matrix eigenvectors; ///< column j pairs with eigenvalues[j]
};

struct GeneralEigResult {
  ComplexVector eigenvalues;
  ComplexMatrix eigenvectors;  ///< unit 2-norm columns
};

/// Thin SVD truncated per `spec`. Singular vectors follow a sign convention:
/// the largest-magnitude entry of each left vector is nonnegative (lowest
/// index wins ties), with the right vector flipped to match.
SvdResult truncated_svd(const Matrix& m, const RankSpec& spec);

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
/// The input is symmetrized as (C + C^T)/2 first; asymmetry beyond 1e-10
/// relative is rejected. Each eigenvector's largest-magnitude entry is
/// nonnegative.
SymEigResult sym_eig(const Matrix& c);

/// Moore-Penrose pseudo-inverse; singular values below cutoff * sigma_max are dropped.
Matrix pseudo_inverse(const Matrix& m, double cutoff = 1e-12);

/// Eigenpairs of a general real square matrix, sorted by non-increasing
/// magnitude, then non-increasing real part, then non-increasing imaginary
/// part (so a conjugate pair lists +i before -i). Eigenvectors are scaled to
/// unit norm with their first non-negligible component real and positive.
GeneralEigResult general_eig(const Matrix& a);

/// Throws DomainError if any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

}  // namespace nirom
