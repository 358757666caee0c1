#include "nirom/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nirom/errors.hpp"

namespace nirom {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw DomainError(std::string(what) + ": non-finite entry");
}

std::size_t RankSpec::resolve(const Vector& sigma) const {
  const auto n = static_cast<std::size_t>(sigma.size());
  if (n == 0) throw DomainError("rank spec: empty spectrum");
  if (is_fixed()) {
    const std::size_t r = count();
    if (r < 1 || r > n)
      throw DomainError("rank spec: fixed rank " + std::to_string(r) + " outside [1, " +
                        std::to_string(n) + "]");
    return r;
  }
  const double eps = threshold();
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("rank spec: energy threshold must lie in (0, 1]");
  const double total = sigma.squaredNorm();
  if (total == 0.0) return 1;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cumulative += sigma[static_cast<Eigen::Index>(k)] * sigma[static_cast<Eigen::Index>(k)];
    // relative slack so eps = 1 is reachable despite round-off in the partial sums
    if (cumulative >= (eps - 1e-14) * total) return k + 1;
  }
  return n;
}

namespace {

// Index of the largest-magnitude entry; lowest index on ties.
template <typename Col>
Eigen::Index dominant_index(const Col& col) {
  Eigen::Index best = 0;
  double best_mag = -1.0;
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    const double mag = std::abs(col[i]);
    if (mag > best_mag) {
      best_mag = mag;
      best = i;
    }
  }
  return best;
}

}  // namespace

SvdResult truncated_svd(const Matrix& m, const RankSpec& spec) {
  if (m.rows() == 0 || m.cols() == 0) throw DomainError("truncated_svd: empty matrix");
  require_finite(m, "truncated_svd");

  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& all = svd.singularValues();
  const std::size_t k = spec.resolve(all);
  const auto kk = static_cast<Eigen::Index>(k);

  SvdResult out;
  out.all_sigma = all;
  out.sigma = all.head(kk);
  out.u = svd.matrixU().leftCols(kk);
  out.v = svd.matrixV().leftCols(kk);
  out.rank = k;
  for (Eigen::Index j = 0; j < kk; ++j) {
    const Eigen::Index i = dominant_index(out.u.col(j));
    if (out.u(i, j) < 0.0) {
      out.u.col(j) *= -1.0;
      out.v.col(j) *= -1.0;
    }
  }
  return out;
}

SymEigResult sym_eig(const Matrix& c) {
  if (c.rows() != c.cols()) throw DomainError("sym_eig: matrix is not square");
  if (c.rows() == 0) throw DomainError("sym_eig: empty matrix");
  require_finite(c, "sym_eig");
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw DomainError("sym_eig: matrix is not symmetric");

  const Matrix sym = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericError("sym_eig: eigensolver did not converge");

  const Eigen::Index n = c.rows();
  SymEigResult out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index i = dominant_index(out.eigenvectors.col(j));
    if (out.eigenvectors(i, j) < 0.0) out.eigenvectors.col(j) *= -1.0;
  }
  return out;
}

Matrix pseudo_inverse(const Matrix& m, double cutoff) {
  if (m.rows() == 0 || m.cols() == 0) throw DomainError("pseudo_inverse: empty matrix");
  require_finite(m, "pseudo_inverse");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double tol = cutoff * (s.size() > 0 ? s[0] : 0.0);
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > tol && s[i] > 0.0) inv[i] = 1.0 / s[i];
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

namespace {

// Ordering with a relative tolerance so round-off does not reorder ties.
bool precedes(const complex& a, const complex& b) {
  const double ma = std::abs(a), mb = std::abs(b);
  const double scale = std::max({ma, mb, 1e-300});
  constexpr double tol = 1e-12;
  if (std::abs(ma - mb) > tol * scale) return ma > mb;
  if (std::abs(a.real() - b.real()) > tol * scale) return a.real() > b.real();
  if (std::abs(a.imag() - b.imag()) > tol * scale) return a.imag() > b.imag();
  return false;
}

}  // namespace

GeneralEigResult general_eig(const Matrix& a) {
  if (a.rows() != a.cols()) throw DomainError("general_eig: matrix is not square");
  if (a.rows() == 0) throw DomainError("general_eig: empty matrix");
  require_finite(a, "general_eig");

  Eigen::EigenSolver<Matrix> solver(a, true);
  if (solver.info() != Eigen::Success) throw NumericError("general_eig: QR iteration did not converge");

  const ComplexVector values = solver.eigenvalues();
  const ComplexMatrix vectors = solver.eigenvectors();
  const Eigen::Index n = a.rows();

  // Insertion sort: n is small and the tolerant comparator is not a strict weak order.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  for (std::size_t i = 1; i < order.size(); ++i) {
    const Eigen::Index key = order[i];
    std::size_t j = i;
    while (j > 0 && precedes(values[key], values[order[j - 1]])) {
      order[j] = order[j - 1];
      --j;
    }
    order[j] = key;
  }

  GeneralEigResult out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.eigenvalues[j] = values[src];
    ComplexVector v = vectors.col(src);
    const double norm = v.norm();
    if (norm > 0.0) v /= norm;
    const double vmax = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(v[i]) > 1e-10 * vmax) {
        v *= std::conj(v[i]) / std::abs(v[i]);
        break;
      }
    }
    out.eigenvectors.col(j) = v;
  }
  return out;
}

}  // namespace nirom
