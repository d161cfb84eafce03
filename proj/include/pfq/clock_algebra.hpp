#pragma once

// Clock (sigma, tau) operators, Z3 parafermions on an L-site chain,
// Weyl-Heisenberg displacements and Pauli/Clifford membership tests.

#include "pfq/core.hpp"

#include <array>
#include <optional>
#include <utility>

namespace pfq {

/// sigma = diag(1, w, w^2) and the cyclic shift tau|k> = |k+1>.
struct ClockPair {
  Qutrit sigma;
  Qutrit tau;
};

inline ClockPair clock_generators() {
  ClockPair g;
  g.sigma = Qutrit::Zero();
  g.tau = Qutrit::Zero();
  for (int k = 0; k < kClockDim; ++k) {
    g.sigma(k, k) = omega_power(k);
    g.tau((k + 1) % kClockDim, k) = 1.0;
  }
  return g;
}

enum class ParafermionKind { chi, psi };

/// 1-based site j with the parafermion species living on it.
struct SiteIndex {
  int j;
  ParafermionKind kind;
};

/// Point (x, z) of the discrete qutrit phase space, components reduced mod 3.
struct PhasePoint {
  int x = 0;
  int z = 0;

  PhasePoint() = default;
  PhasePoint(long x_, long z_) : x(mod(x_, kClockDim)), z(mod(z_, kClockDim)) {}

  /// Flat index 3x + z in [0, 9).
  int index() const { return kClockDim * x + z; }
  static PhasePoint from_index(int i) { return {i / kClockDim, i % kClockDim}; }

  friend PhasePoint operator+(PhasePoint a, PhasePoint b) { return {a.x + b.x, a.z + b.z}; }
  friend bool operator==(PhasePoint a, PhasePoint b) = default;
};

inline constexpr int kPhaseSpaceSize = kClockDim * kClockDim;

/// Operator of the form  coeff * (A_1 (x) A_2 (x) ... (x) A_L).  Products of
/// such operators stay in the same form, which is how parafermion strings are
/// multiplied without ever forming 3^L x 3^L matrix products.
class SiteProduct {
 public:
  explicit SiteProduct(int length, Complex coeff = 1.0)
      : coeff_(coeff), factors_(static_cast<std::size_t>(length), Qutrit::Identity()) {
    if (length < 1) throw DomainError("SiteProduct: length must be >= 1");
  }

  int length() const { return static_cast<int>(factors_.size()); }
  Complex coeff() const { return coeff_; }
  const Qutrit& factor(int site) const { return factors_.at(static_cast<std::size_t>(site - 1)); }

  /// Right-multiplies the factor on 1-based `site` by `op`.
  SiteProduct& apply(int site, const Qutrit& op) {
    auto& f = factors_.at(static_cast<std::size_t>(site - 1));
    f = f * op;
    return *this;
  }

  SiteProduct& scale(Complex c) {
    coeff_ *= c;
    return *this;
  }

  SiteProduct adjoint() const {
    SiteProduct r(*this);
    r.coeff_ = std::conj(coeff_);
    for (auto& f : r.factors_) f = f.adjoint().eval();
    return r;
  }

  friend SiteProduct operator*(const SiteProduct& a, const SiteProduct& b) {
    if (a.length() != b.length()) throw DomainError("SiteProduct: length mismatch");
    SiteProduct r(a.length(), a.coeff_ * b.coeff_);
    for (std::size_t i = 0; i < a.factors_.size(); ++i) r.factors_[i] = a.factors_[i] * b.factors_[i];
    return r;
  }

  friend SiteProduct operator*(Complex c, SiteProduct a) { return a.scale(c); }

  /// Dimension of the full space, 3^L.
  long dimension() const { return pow3(length()); }

  /// Appends the nonzero entries of (scale * this) to `out`.
  void append_triplets(std::vector<Eigen::Triplet<Complex>>& out, Complex scale = 1.0) const {
    const long dim = dimension();
    // Column-by-column: each basis state maps to a superposition built site by
    // site; for monomial factors this is a single entry per column.
    std::vector<std::pair<long, Complex>> cur, next;
    for (long col = 0; col < dim; ++col) {
      cur.assign(1, {0, scale * coeff_});
      long rest = col;
      long stride = dim;
      for (const auto& f : factors_) {
        stride /= kClockDim;
        const int digit = static_cast<int>(rest / stride);
        rest %= stride;
        next.clear();
        for (const auto& [row, amp] : cur)
          for (int r = 0; r < kClockDim; ++r) {
            const Complex v = f(r, digit);
            if (v != Complex(0.0)) next.emplace_back(row + r * stride, amp * v);
          }
        cur.swap(next);
      }
      for (const auto& [row, amp] : cur) out.emplace_back(row, col, amp);
    }
  }

  SparseOperator sparse() const {
    std::vector<Eigen::Triplet<Complex>> t;
    append_triplets(t);
    SparseOperator m(dimension(), dimension());
    m.setFromTriplets(t.begin(), t.end());
    return m;
  }

  DenseOperator dense() const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Constant(1, 1, coeff_);
    for (const auto& f : factors_) m = kron(m, f);
    return m;
  }

 private:
  Complex coeff_;
  std::vector<Qutrit> factors_;
};

/// Sums a list of site products with the given weights into a sparse operator.
inline SparseOperator sum_operators(const std::vector<std::pair<Complex, SiteProduct>>& terms, long dim) {
  std::vector<Eigen::Triplet<Complex>> t;
  for (const auto& [w, op] : terms) op.append_triplets(t, w);
  SparseOperator m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());  // duplicates are summed
  m.prune(Complex(0.0), 1e-15);
  return m;
}

/// Parafermion on site j of an L-site chain, in tensor-product form:
///   chi_j = (prod_{k<j} tau_k) sigma_j,   psi_j = w (prod_{k<j} tau_k) sigma_j tau_j.
inline SiteProduct parafermion_string(SiteIndex site, int length) {
  if (length < 1 || length > kMaxChainLength)
    throw DomainError("parafermion: chain length " + std::to_string(length) + " outside [1, " +
                      std::to_string(kMaxChainLength) + "]");
  if (site.j < 1 || site.j > length)
    throw DomainError("parafermion: site " + std::to_string(site.j) + " outside [1, " +
                      std::to_string(length) + "]");
  const auto [sigma, tau] = clock_generators();
  SiteProduct p(length);
  for (int k = 1; k < site.j; ++k) p.apply(k, tau);
  p.apply(site.j, sigma);
  if (site.kind == ParafermionKind::psi) {
    p.apply(site.j, tau);
    p.scale(omega());
  }
  return p;
}

inline DenseOperator parafermion(SiteIndex site, int length) {
  return parafermion_string(site, length).dense();
}

inline SiteProduct chi(int j, int length) { return parafermion_string({j, ParafermionKind::chi}, length); }
inline SiteProduct psi(int j, int length) { return parafermion_string({j, ParafermionKind::psi}, length); }

/// Global Z3 symmetry generator  w^P = prod_j tau_j^dag.
inline SiteProduct parity_string(int length) {
  if (length < 1 || length > kMaxChainLength) throw DomainError("parity_operator: bad chain length");
  const Qutrit tau_dag = clock_generators().tau.adjoint();
  SiteProduct p(length);
  for (int k = 1; k <= length; ++k) p.apply(k, tau_dag);
  return p;
}

inline DenseOperator parity_operator(int length) { return parity_string(length).dense(); }

/// Qutrit Pauli X (shift) and Z (clock).
inline Qutrit pauli_x() { return clock_generators().tau; }
inline Qutrit pauli_z() { return clock_generators().sigma; }

/// D^{x,z} = w^{2xz} X^x Z^z.
inline Qutrit displacement(PhasePoint p) {
  const Qutrit x = pauli_x();
  const Qutrit z = pauli_z();
  Qutrit d = Qutrit::Identity();
  for (int i = 0; i < p.x; ++i) d = d * x;
  for (int i = 0; i < p.z; ++i) d = d * z;
  return omega_power(2L * p.x * p.z) * d;
}

inline std::array<Qutrit, kPhaseSpaceSize> all_displacements() {
  std::array<Qutrit, kPhaseSpaceSize> out;
  for (int i = 0; i < kPhaseSpaceSize; ++i) out[static_cast<std::size_t>(i)] = displacement(PhasePoint::from_index(i));
  return out;
}

inline void require_qutrit_unitary(const Qutrit& u, const char* who) {
  if (!is_unitary(u, kTol.comparison)) throw DomainError(std::string(who) + ": input is not unitary");
}

/// Phase point p with U = c D^p for some unit-modulus c, if one exists.
inline std::optional<PhasePoint> pauli_label(const Qutrit& u, double tol = kTol.comparison) {
  // Tr[D^q^dag D^p] = 3 delta_pq, so the overlap identifies the candidate.
  for (int i = 0; i < kPhaseSpaceSize; ++i) {
    const PhasePoint p = PhasePoint::from_index(i);
    const Qutrit d = displacement(p);
    const Complex overlap = (d.adjoint() * u).trace() / 3.0;
    if (std::abs(overlap) < 0.5) continue;
    if (max_abs(u - overlap * d) <= tol) return p;
    return std::nullopt;
  }
  return std::nullopt;
}

inline bool is_pauli_up_to_phase(const Qutrit& u) {
  require_qutrit_unitary(u, "is_pauli_up_to_phase");
  return pauli_label(u).has_value();
}

/// U is Clifford iff it maps the generators X and Z into the Pauli group.
inline bool is_clifford(const Qutrit& u) {
  require_qutrit_unitary(u, "is_clifford");
  return pauli_label(u * pauli_x() * u.adjoint()).has_value() &&
         pauli_label(u * pauli_z() * u.adjoint()).has_value();
}

}  // namespace pfq
