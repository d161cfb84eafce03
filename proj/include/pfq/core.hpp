#pragma once

// Shared numeric types, tolerances and small matrix helpers used by every
// other header in pfq.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfq {

using Complex = std::complex<double>;

/// Operator on the full chain Hilbert space (dimension 3^L).
using DenseOperator = Eigen::MatrixXcd;
using SparseOperator = Eigen::SparseMatrix<Complex>;
using StateVector = Eigen::VectorXcd;

/// Single-qutrit operator.
using Qutrit = Eigen::Matrix3cd;
using QutritVector = Eigen::Vector3cd;

/// Local dimension of a clock site.
inline constexpr int kClockDim = 3;

/// Largest chain the dense solvers accept (dimension 3^8 = 6561).
inline constexpr int kMaxChainLength = 8;

/// Every tolerance used by the library lives here.
struct Tolerances {
  double comparison = 1e-9;       // projective gate comparisons, Pauli tests
  double algebraic = 1e-12;       // exact operator identities
  double hermitian = 1e-12;       // Hermiticity of constructed operators
  double unitary = 1e-10;         // U U^dag = I
  double degeneracy = 1e-8;       // ground-space grouping, relative to spectral width
  double density_psd = 1e-9;      // admissible negative eigenvalue of a density matrix
  double state_distinct = 1e-6;   // distinctness of gauge-fixed sampled states
  double perturbative_ratio = 0.5;  // f/J guard for perturbation theory
};

inline constexpr Tolerances kTol{};

/// Thrown when an operation is called outside its domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline Complex omega_power(long k, int d = kClockDim) {
  const double angle = kTwoPi * static_cast<double>(k % d) / d;
  return std::polar(1.0, angle);
}

/// omega = e^{2 pi i / 3}
inline Complex omega() { return omega_power(1); }

/// Integer power of three, 3^n.
inline constexpr long pow3(int n) {
  long r = 1;
  for (int i = 0; i < n; ++i) r *= 3;
  return r;
}

/// Returns L if dim == 3^L, otherwise -1.
inline int log3_exact(long dim) {
  int L = 0;
  long v = 1;
  while (v < dim) {
    v *= 3;
    ++L;
  }
  return v == dim ? L : -1;
}

/// Non-negative residue.
inline int mod(long a, int m) {
  const long r = a % m;
  return static_cast<int>(r < 0 ? r + m : r);
}

/// Wraps an angle into [0, 2 pi).
inline double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

/// Wraps an angle into (-pi, pi].
inline double wrap_signed(double a) {
  double r = wrap_angle(a);
  if (r > kPi) r -= kTwoPi;
  return r;
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& a, double tol = kTol.hermitian) {
  if (a.rows() != a.cols()) return false;
  return max_abs(a - a.adjoint()) <= tol * std::max(1.0, max_abs(a));
}

template <typename Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& u, double tol = kTol.unitary) {
  if (u.rows() != u.cols()) return false;
  const auto n = u.rows();
  return max_abs(u * u.adjoint() - Eigen::MatrixXcd::Identity(n, n)) <= tol;
}

template <typename A, typename B>
Eigen::MatrixXcd commutator(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return a * b - b * a;
}

/// Projective equality of unitaries: U^dag V must be a unit-modulus multiple
/// of the identity.
template <typename A, typename B>
bool equal_up_to_phase(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v,
                       double tol = kTol.comparison) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) return false;
  const Eigen::MatrixXcd m = u.adjoint() * v;
  const auto n = m.rows();
  const Complex c = m.trace() / static_cast<double>(n);
  if (std::abs(std::abs(c) - 1.0) > std::sqrt(tol)) return false;
  return max_abs(m - c * Eigen::MatrixXcd::Identity(n, n)) <= tol;
}

/// Kronecker product of two dense matrices.
inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

/// exp(-i H t) for Hermitian H via its spectral decomposition; exactly unitary
/// up to rounding.
inline Eigen::MatrixXcd unitary_propagator(const Eigen::MatrixXcd& h, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXcd phases =
      (es.eigenvalues().cast<Complex>() * Complex(0.0, -t)).array().exp().matrix();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace pfq
