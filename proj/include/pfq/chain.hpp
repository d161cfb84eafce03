#pragma once

// Z3 parafermion chain Hamiltonian, exact diagonalization by parity sector
// and the first-order left edge mode.

#include "pfq/clock_algebra.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

namespace pfq {

/// Couplings of an L-site chain.  `flip` holds f_1..f_L, `bond` J_1..J_{L-1}.
struct ChainSpec {
  int length = 2;
  std::vector<double> flip;
  std::vector<double> bond;
  double phi = kPi / 6.0;
  double phi_hat = kPi / 6.0;

  static ChainSpec uniform(int length, double f, double j, double phi = kPi / 6.0,
                           double phi_hat = kPi / 6.0) {
    ChainSpec s;
    s.length = length;
    s.flip.assign(static_cast<std::size_t>(std::max(length, 0)), f);
    s.bond.assign(static_cast<std::size_t>(std::max(length - 1, 0)), j);
    s.phi = phi;
    s.phi_hat = phi_hat;
    return s;
  }

  void validate() const {
    if (length < 1 || length > kMaxChainLength)
      throw DomainError("ChainSpec: L=" + std::to_string(length) + " outside [1, " +
                        std::to_string(kMaxChainLength) + "]");
    if (static_cast<int>(flip.size()) != length)
      throw DomainError("ChainSpec: expected " + std::to_string(length) + " flip couplings, got " +
                        std::to_string(flip.size()));
    if (static_cast<int>(bond.size()) != length - 1)
      throw DomainError("ChainSpec: expected " + std::to_string(length - 1) + " bond couplings, got " +
                        std::to_string(bond.size()));
    for (double f : flip)
      if (!(f >= 0.0) || !std::isfinite(f)) throw DomainError("ChainSpec: flip couplings must be finite and >= 0");
    for (double j : bond)
      if (!(j >= 0.0) || !std::isfinite(j)) throw DomainError("ChainSpec: bond couplings must be finite and >= 0");
    if (!std::isfinite(phi) || !std::isfinite(phi_hat)) throw DomainError("ChainSpec: angles must be finite");
  }

  long dimension() const { return pow3(length); }
};

/// alpha_m = e^{i phi (2m - 3)} / sin(pi m / 3), m in {1, 2}.
inline Complex alpha_coefficient(double phi, int m) {
  if (m != 1 && m != 2) throw DomainError("alpha_coefficient: m must be 1 or 2, got " + std::to_string(m));
  return std::polar(1.0, phi * (2.0 * m - 3.0)) / std::sin(kPi * m / 3.0);
}

namespace detail {

// -(c T + h.c.) for each weighted term.
inline SparseOperator hermitian_sum(const std::vector<std::pair<Complex, SiteProduct>>& terms, long dim) {
  std::vector<std::pair<Complex, SiteProduct>> all;
  all.reserve(2 * terms.size());
  for (const auto& [c, t] : terms) {
    all.emplace_back(-c, t);
    all.emplace_back(-std::conj(c), t.adjoint());
  }
  return sum_operators(all, dim);
}

}  // namespace detail

/// Sparse chain Hamiltonian assembled from parafermion bilinears:
///   H = -sum_j J_j (alpha w-bar psi_j^dag chi_{j+1} + h.c.) - sum_j f_j (alpha-hat w-bar chi_j^dag psi_j + h.c.)
inline SparseOperator build_hamiltonian_sparse(const ChainSpec& spec) {
  spec.validate();
  const int L = spec.length;
  const Complex wbar = std::conj(omega());
  const Complex a = alpha_coefficient(spec.phi, 1);
  const Complex ah = alpha_coefficient(spec.phi_hat, 1);
  std::vector<std::pair<Complex, SiteProduct>> terms;
  for (int j = 1; j < L; ++j) {
    const double jj = spec.bond[static_cast<std::size_t>(j - 1)];
    if (jj != 0.0) terms.emplace_back(jj * a * wbar, psi(j, L).adjoint() * chi(j + 1, L));
  }
  for (int j = 1; j <= L; ++j) {
    const double f = spec.flip[static_cast<std::size_t>(j - 1)];
    if (f != 0.0) terms.emplace_back(f * ah * wbar, chi(j, L).adjoint() * psi(j, L));
  }
  return detail::hermitian_sum(terms, spec.dimension());
}

inline DenseOperator build_hamiltonian(const ChainSpec& spec) {
  return DenseOperator(build_hamiltonian_sparse(spec));
}

/// Same operator written directly in clock variables:
///   H = -sum_j J_j (alpha sigma_j^dag sigma_{j+1} + h.c.) - sum_j f_j (alpha-hat tau_j + h.c.)
inline DenseOperator build_hamiltonian_clock(const ChainSpec& spec) {
  spec.validate();
  const int L = spec.length;
  const auto [sigma, tau] = clock_generators();
  const Complex a = alpha_coefficient(spec.phi, 1);
  const Complex ah = alpha_coefficient(spec.phi_hat, 1);
  std::vector<std::pair<Complex, SiteProduct>> terms;
  for (int j = 1; j < L; ++j) {
    SiteProduct t(L);
    t.apply(j, sigma.adjoint()).apply(j + 1, sigma);
    terms.emplace_back(spec.bond[static_cast<std::size_t>(j - 1)] * a, t);
  }
  for (int j = 1; j <= L; ++j) {
    SiteProduct t(L);
    t.apply(j, tau);
    terms.emplace_back(spec.flip[static_cast<std::size_t>(j - 1)] * ah, t);
  }
  return DenseOperator(detail::hermitian_sum(terms, spec.dimension()));
}

/// Digit-wise shift of a basis index: each of the L base-3 digits moves by -k.
/// This is the action of (w^P)^k on computational basis states.
inline long shift_digits(long index, int length, int k) {
  long out = 0;
  long stride = 1;
  for (int s = 0; s < length; ++s) {
    const long digit = (index / stride) % kClockDim;
    out += mod(digit - k, kClockDim) * stride;
    stride *= kClockDim;
  }
  return out;
}

struct SpectrumResult {
  std::vector<double> eigenvalues;   // ascending
  std::vector<int> parity_labels;    // q with w^P v = w^q v; -1 when unavailable
  Eigen::MatrixXcd ground_vectors;   // orthonormal columns spanning the ground space
  std::optional<Eigen::MatrixXcd> vectors;  // all eigenvectors, columns aligned with eigenvalues

  int ground_degeneracy() const { return static_cast<int>(ground_vectors.cols()); }

  /// Dense projector onto the ground space.
  DenseOperator ground_projector() const { return ground_vectors * ground_vectors.adjoint(); }
};

struct DiagonalizeOptions {
  bool keep_vectors = false;
};

namespace detail {

inline double sparse_max_abs(const SparseOperator& m) {
  double worst = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseOperator::InnerIterator it(m, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

inline double ground_threshold(const std::vector<double>& ev) {
  const double width = ev.empty() ? 0.0 : ev.back() - ev.front();
  return kTol.degeneracy * std::max(1.0, width);
}

// Columns of the parity-q sector basis: (1/sqrt3) sum_m w^{-qm} |s - m>, one per
// representative s whose leading digit is 0.
inline SparseOperator sector_basis(int length, int q) {
  const long dim = pow3(length);
  const long reps = dim / kClockDim;
  const long lead_stride = dim / kClockDim;
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(static_cast<std::size_t>(dim));
  const double norm = 1.0 / std::sqrt(3.0);
  long col = 0;
  for (long s = 0; s < dim; ++s) {
    if (s / lead_stride != 0) continue;
    for (int m = 0; m < kClockDim; ++m) t.emplace_back(shift_digits(s, length, m), col, norm * omega_power(-q * m));
    ++col;
  }
  SparseOperator b(dim, reps);
  b.setFromTriplets(t.begin(), t.end());
  return b;
}

struct SectorSolve {
  int label;
  std::optional<SparseOperator> basis;  // absent when the block is the whole space
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;

  Eigen::VectorXcd lifted(Eigen::Index i) const {
    if (basis) return *basis * vectors.col(i);
    return vectors.col(i);
  }
};

inline SpectrumResult assemble(const std::vector<SectorSolve>& blocks, bool keep_vectors, long dim) {
  struct Level {
    double value;
    int label;
    std::size_t block;
    Eigen::Index column;
  };
  std::vector<Level> levels;
  levels.reserve(static_cast<std::size_t>(dim));
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (Eigen::Index i = 0; i < blocks[b].values.size(); ++i)
      levels.push_back({blocks[b].values(i), blocks[b].label, b, i});
  std::stable_sort(levels.begin(), levels.end(), [](const Level& a, const Level& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.label < b.label;
  });
  SpectrumResult r;
  for (const auto& lv : levels) {
    r.eigenvalues.push_back(lv.value);
    r.parity_labels.push_back(lv.label);
  }
  const double thr = ground_threshold(r.eigenvalues);
  Eigen::Index g = 0;
  while (g < static_cast<Eigen::Index>(levels.size()) && r.eigenvalues[static_cast<std::size_t>(g)] - r.eigenvalues[0] <= thr)
    ++g;
  auto lift = [&](const Level& lv) { return blocks[lv.block].lifted(lv.column); };
  r.ground_vectors.resize(dim, g);
  for (Eigen::Index i = 0; i < g; ++i) r.ground_vectors.col(i) = lift(levels[static_cast<std::size_t>(i)]);
  if (keep_vectors) {
    Eigen::MatrixXcd all(dim, static_cast<Eigen::Index>(levels.size()));
    for (std::size_t i = 0; i < levels.size(); ++i) all.col(static_cast<Eigen::Index>(i)) = lift(levels[i]);
    r.vectors = std::move(all);
  }
  return r;
}

}  // namespace detail

/// Full spectrum of a Hermitian operator.  When the dimension is 3^L and the
/// operator commutes with w^P, each parity sector is diagonalized separately and
/// labelled; otherwise a single dense solve is done and labels are -1.
inline SpectrumResult diagonalize(const SparseOperator& h, DiagonalizeOptions opt = {}) {
  if (h.rows() != h.cols()) throw DomainError("diagonalize: matrix is not square");
  const long dim = h.rows();
  double scale = 0.0;
  for (int k = 0; k < h.outerSize(); ++k)
    for (SparseOperator::InnerIterator it(h, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  if (detail::sparse_max_abs(h - SparseOperator(h.adjoint())) > kTol.hermitian * std::max(1.0, scale))
    throw DomainError("diagonalize: matrix is not Hermitian");

  const int L = log3_exact(dim);
  bool sectored = false;
  if (L >= 1) {
    const SparseOperator p = parity_string(L).sparse();
    const SparseOperator c = h * p - p * h;
    sectored = detail::sparse_max_abs(c) <= 1e-10 * std::max(1.0, scale);
  }
  std::vector<detail::SectorSolve> blocks;
  auto solve = [](const DenseOperator& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    if (es.info() != Eigen::Success) throw std::runtime_error("diagonalize: eigensolver failed");
    return es;
  };
  if (sectored) {
    for (int q = 0; q < kClockDim; ++q) {
      SparseOperator b = detail::sector_basis(L, q);
      const auto es = solve(DenseOperator(SparseOperator(b.adjoint()) * (h * b)));
      blocks.push_back({q, std::move(b), es.eigenvalues(), es.eigenvectors()});
    }
  } else {
    const auto es = solve(DenseOperator(h));
    blocks.push_back({-1, std::nullopt, es.eigenvalues(), es.eigenvectors()});
  }
  return detail::assemble(blocks, opt.keep_vectors, dim);
}

inline SpectrumResult diagonalize(const DenseOperator& h, DiagonalizeOptions opt = {}) {
  return diagonalize(SparseOperator(h.sparseView(Complex(1.0), 1e-300)), opt);
}

inline SpectrumResult diagonalize(const ChainSpec& spec, DiagonalizeOptions opt = {}) {
  return diagonalize(build_hamiltonian_sparse(spec), opt);
}

/// Which reading of the first-order edge-mode formula to build.
enum class EdgeModeForm {
  consistent,  // chi_1^dag Y term carries an extra factor w; cancels [H, chi_1] at O(f)
  as_printed,  // the formula exactly as usually quoted
};

/// First-order left edge mode
///   Psi = chi_1 - 2 i f e^{-i phi_hat} X + 2 i f e^{i phi_hat} c chi_1^dag Y,   Y = -X^dag,
///   X = (psi_1 + e^{2 i phi} chi_2 + e^{-2 i phi} w psi_1^dag chi_2^dag) / (4 J sin 3phi),
/// with c = w for EdgeModeForm::consistent and c = 1 for as_printed.
/// Requires uniform flips f_i = f; J is the first bond.
inline SparseOperator edge_mode_first_order_sparse(const ChainSpec& spec,
                                                   EdgeModeForm form = EdgeModeForm::consistent) {
  spec.validate();
  const int L = spec.length;
  if (L < 2) throw DomainError("edge_mode_first_order: needs L >= 2");
  const double f = spec.flip[0];
  for (double fi : spec.flip)
    if (std::abs(fi - f) > kTol.algebraic * std::max(1.0, f))
      throw DomainError("edge_mode_first_order: flip couplings must be uniform");
  const double s3 = std::sin(3.0 * spec.phi);
  if (std::abs(s3) < 1e-12) throw DomainError("edge_mode_first_order: sin(3 phi) = 0, correction is singular");
  const double j = spec.bond[0];
  if (j == 0.0) throw DomainError("edge_mode_first_order: first bond coupling is zero");

  const Complex w = omega();
  const Complex i(0.0, 1.0);
  const Complex scale = 1.0 / (4.0 * j * s3);
  const SiteProduct c1 = chi(1, L);
  const SiteProduct p1 = psi(1, L);
  const SiteProduct c2 = chi(2, L);
  const std::vector<std::pair<Complex, SiteProduct>> x_terms = {
      {scale, p1},
      {scale * std::polar(1.0, 2.0 * spec.phi), c2},
      {scale * std::polar(1.0, -2.0 * spec.phi) * w, p1.adjoint() * c2.adjoint()},
  };
  const Complex cx = -2.0 * i * f * std::polar(1.0, -spec.phi_hat);
  const Complex cy = 2.0 * i * f * std::polar(1.0, spec.phi_hat) * (form == EdgeModeForm::consistent ? w : 1.0);

  std::vector<std::pair<Complex, SiteProduct>> terms;
  terms.emplace_back(1.0, c1);
  for (const auto& [a, t] : x_terms) {
    terms.emplace_back(cx * a, t);
    // chi_1^dag Y = -chi_1^dag X^dag
    terms.emplace_back(-cy * std::conj(a), c1.adjoint() * t.adjoint());
  }
  return sum_operators(terms, spec.dimension());
}

inline DenseOperator edge_mode_first_order(const ChainSpec& spec, EdgeModeForm form = EdgeModeForm::consistent) {
  return DenseOperator(edge_mode_first_order_sparse(spec, form));
}

}  // namespace pfq
