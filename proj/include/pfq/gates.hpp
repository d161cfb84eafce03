#pragma once

// Single-qutrit gates: the dynamical gate generated by the edge interaction,
// Clifford-hierarchy classification (recursive and closed form for diagonal
// gates), T-gate construction.

#include "pfq/effective.hpp"

#include <map>
#include <mutex>
#include <numeric>
#include <unordered_map>

namespace pfq {

/// The edge interaction Hamiltonian the dynamical gate is generated by.
inline Qutrit interaction_matrix() { return edge_interaction_matrix(); }

struct CliffordGenerators {
  Qutrit x;
  Qutrit s;
  Qutrit h;
};

/// Normalized qutrit Fourier matrix, H_{jk} = w^{jk} / sqrt3.
inline Qutrit hadamard() {
  Qutrit h;
  for (int r = 0; r < kClockDim; ++r)
    for (int c = 0; c < kClockDim; ++c) h(r, c) = omega_power(static_cast<long>(r) * c) / std::sqrt(3.0);
  return h;
}

inline Qutrit phase_gate() {
  Qutrit s = Qutrit::Identity();
  s(1, 1) = omega();
  return s;
}

inline CliffordGenerators clifford_generators() { return {pauli_x(), phase_gate(), hadamard()}; }

/// diag(1, 1, e^{i theta})
inline Qutrit ud_gate(double theta) {
  Qutrit u = Qutrit::Identity();
  u(2, 2) = std::polar(1.0, theta);
  return u;
}

struct DynamicalGate {
  double beta_t = 0.0;
  Qutrit matrix;
  double theta = 0.0;          // in [0, 2 pi)
  Complex global_phase = 1.0;  // matrix = global_phase * H ud_gate(theta) H^dag
};

/// exp(-i beta_t H_int), together with its Fourier-basis form
/// global_phase * H diag(1, 1, e^{i theta}) H^dag.
inline DynamicalGate dynamical_gate(double beta_t) {
  if (!std::isfinite(beta_t)) throw DomainError("dynamical_gate: beta_t must be finite");
  DynamicalGate g;
  g.beta_t = beta_t;
  g.matrix = Qutrit(unitary_propagator(interaction_matrix(), beta_t));
  const Qutrit h = hadamard();
  const Qutrit d = h.adjoint() * g.matrix * h;
  if (max_abs(Qutrit(d - Qutrit(d.diagonal().asDiagonal()))) > 1e-10 || std::abs(d(0, 0) - d(1, 1)) > 1e-10)
    throw std::logic_error("dynamical_gate: Fourier form is not diag(c, c, c')");
  g.global_phase = d(0, 0);
  g.theta = wrap_angle(std::arg(d(2, 2) / d(0, 0)));
  return g;
}

/// Exact rational number p/q with q > 0 in lowest terms.
struct Rational {
  long num = 0;
  long den = 1;

  Rational() = default;
  Rational(long n, long d = 1) {
    if (d == 0) throw DomainError("Rational: zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    const long g = std::gcd(n, d);
    num = g == 0 ? 0 : n / g;
    den = g == 0 ? 1 : d / g;
  }

  friend Rational operator-(Rational a, Rational b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Verdict of a hierarchy search.  `level` is empty when the gate was not found
/// in any level up to k_max.
struct HierarchyVerdict {
  std::optional<int> level;
  int k_max = 8;

  bool exceeds() const { return !level.has_value(); }
};

/// One link of a witness chain: conjugating by the Pauli at `pauli` gives a
/// gate of exactly `level`.
struct WitnessStep {
  PhasePoint pauli;
  int level;
  Qutrit gate;
};

inline constexpr int kDefaultHierarchyBound = 8;

/// diag(e^{2 pi i r_0}, e^{2 pi i r_1}, e^{2 pi i r_2}); level from the 3-adic
/// structure of the phases.  With m the largest 3-exponent among the
/// denominators of r_j - r_0 and n_j their numerators over 3^m, the gate sits
/// at level 2(m-1) + a, where a = 1 when n is affine mod 3 (2 n_1 = n_2) and
/// a = 2 otherwise; m = 0 is the identity class, level 1.
inline HierarchyVerdict diagonal_level(const std::array<Rational, 3>& phases, int k_max = kDefaultHierarchyBound) {
  int m = 0;
  std::array<Rational, 3> rel;
  for (std::size_t j = 0; j < 3; ++j) {
    rel[j] = phases[j] - phases[0];
    long d = rel[j].den;
    int e = 0;
    while (d % 3 == 0) {
      d /= 3;
      ++e;
    }
    if (d != 1) throw DomainError("diagonal_level: denominator " + std::to_string(rel[j].den) + " is not a power of 3");
    m = std::max(m, e);
  }
  HierarchyVerdict v;
  v.k_max = k_max;
  int level = 1;
  if (m > 0) {
    const long big = pow3(m);
    std::array<long, 3> n{};
    for (std::size_t j = 0; j < 3; ++j) n[j] = mod(rel[j].num * (big / rel[j].den), static_cast<int>(big));
    const bool affine = mod(2 * n[1] - n[2], 3) == 0;
    level = 2 * (m - 1) + (affine ? 1 : 2);
  }
  if (level <= k_max) v.level = level;
  return v;
}

/// Recursive Clifford-hierarchy membership with a memo on phase-normalized
/// matrices.  Safe to share between threads.
class HierarchyClassifier {
 public:
  explicit HierarchyClassifier(std::size_t max_cache = 1u << 20) : max_cache_(max_cache) {}

  /// U in C^(k)?
  bool in_level(const Qutrit& u, int k) {
    if (k < 1) return false;
    if (k == 1) return pauli_label(u).has_value();
    const Key key = make_key(u, k);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    bool ok = true;
    const Qutrit ud = u.adjoint();
    if (k == 2) {
      ok = pauli_label(u * pauli_x() * ud).has_value() && pauli_label(u * pauli_z() * ud).has_value();
    } else {
      for (int i = 1; i < kPhaseSpaceSize && ok; ++i)
        ok = in_level(Qutrit(u * paulis_[static_cast<std::size_t>(i)] * ud), k - 1);
    }
    std::lock_guard<std::mutex> lock(mutex_);
    if (cache_.size() >= max_cache_) cache_.clear();
    cache_.emplace(key, ok);
    return ok;
  }

  HierarchyVerdict level(const Qutrit& u, int k_max = kDefaultHierarchyBound) {
    require_qutrit_unitary(u, "hierarchy_level");
    if (k_max < 1 || k_max > kDefaultHierarchyBound)
      throw DomainError("hierarchy_level: k_max must be in [1, " + std::to_string(kDefaultHierarchyBound) + "]");
    HierarchyVerdict v;
    v.k_max = k_max;
    for (int k = 1; k <= k_max; ++k)
      if (in_level(u, k)) {
        v.level = k;
        break;
      }
    return v;
  }

  /// Conjugation path from a gate of level k down to a Pauli: each step picks
  /// the first Pauli whose conjugate has level exactly one less.
  std::vector<WitnessStep> witness_chain(const Qutrit& u, int k_max = kDefaultHierarchyBound) {
    std::vector<WitnessStep> chain;
    auto v = level(u, k_max);
    if (!v.level) return chain;
    Qutrit cur = u;
    int k = *v.level;
    while (k > 1) {
      bool found = false;
      for (int i = 1; i < kPhaseSpaceSize && !found; ++i) {
        const Qutrit c = cur * paulis_[static_cast<std::size_t>(i)] * cur.adjoint();
        if (in_level(c, k - 1) && !in_level(c, k - 2)) {
          chain.push_back({PhasePoint::from_index(i), k - 1, c});
          cur = c;
          found = true;
        }
      }
      if (!found) throw std::logic_error("witness_chain: no conjugate drops exactly one level");
      --k;
    }
    return chain;
  }

  std::size_t cache_size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.size();
  }

 private:
  using Key = std::array<long long, 2 * kPhaseSpaceSize + 1>;

  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::size_t h = 1469598103934665603ull;
      for (long long v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
      return h;
    }
  };

  // Entries on a 1e-8 grid after dividing out the phase of the first entry of
  // modulus above 0.3 (every unitary column has one).
  static Key make_key(const Qutrit& u, int k) {
    Complex ref = 1.0;
    for (int i = 0; i < kPhaseSpaceSize; ++i)
      if (std::abs(u.data()[i]) > 0.3) {
        ref = std::conj(u.data()[i]) / std::abs(u.data()[i]);
        break;
      }
    Key key{};
    for (int i = 0; i < kPhaseSpaceSize; ++i) {
      const Complex v = u.data()[i] * ref;
      key[static_cast<std::size_t>(2 * i)] = std::llround(v.real() * 1e8);
      key[static_cast<std::size_t>(2 * i + 1)] = std::llround(v.imag() * 1e8);
    }
    key.back() = k;
    return key;
  }

  std::array<Qutrit, kPhaseSpaceSize> paulis_ = all_displacements();
  std::size_t max_cache_;
  mutable std::mutex mutex_;
  std::unordered_map<Key, bool, KeyHash> cache_;
};

inline HierarchyClassifier& shared_classifier() {
  static HierarchyClassifier c;
  return c;
}

/// Smallest k <= k_max with U in C^(k).
inline HierarchyVerdict hierarchy_level(const Qutrit& u, int k_max = kDefaultHierarchyBound) {
  return shared_classifier().level(u, k_max);
}

/// diag(zeta^0, zeta^{v_1}, zeta^{v_2}), zeta = e^{2 pi i / 9},
/// v_1 = 6z + 2g + 3e, v_2 = 6z + g + 6e (mod 9).
inline Qutrit uv_gate(int z, int g, int e) {
  const int v1 = mod(6L * z + 2L * g + 3L * e, 9);
  const int v2 = mod(6L * z + 1L * g + 6L * e, 9);
  Qutrit u = Qutrit::Identity();
  u(1, 1) = omega_power(v1, 9);
  u(2, 2) = omega_power(v2, 9);
  return u;
}

/// X^dag U X U^dag for U of the form c * diag(1, 1, e^{i theta}); with
/// theta = 2 pi / 9 this is the qutrit T gate diag(1, zeta, zeta^8).
inline Qutrit t_from_ud(const Qutrit& u) {
  require_qutrit_unitary(u, "t_from_ud");
  const Qutrit off = u - Qutrit(u.diagonal().asDiagonal());
  if (max_abs(off) > kTol.comparison || std::abs(u(0, 0) - u(1, 1)) > kTol.comparison)
    throw DomainError("t_from_ud: input is not of the form c * diag(1, 1, e^{i theta})");
  const Qutrit x = pauli_x();
  return x.adjoint() * u * x * u.adjoint();
}

inline Qutrit qutrit_t_gate() {
  Qutrit t = Qutrit::Identity();
  t(1, 1) = omega_power(1, 9);
  t(2, 2) = omega_power(8, 9);
  return t;
}

/// level(H V H^dag) == level(V), for V of level at most 6.
inline bool theorem1_check(const Qutrit& v) {
  const auto lv = hierarchy_level(v, kDefaultHierarchyBound);
  if (!lv.level || *lv.level > 6) throw DomainError("theorem1_check: V must have hierarchy level <= 6");
  const Qutrit h = hadamard();
  const auto lu = hierarchy_level(Qutrit(h * v * h.adjoint()), kDefaultHierarchyBound);
  return lu.level == lv.level;
}

/// Diagonal gate from phases given as multiples of 2 pi.
inline Qutrit diagonal_gate(const std::array<Rational, 3>& phases) {
  Qutrit u = Qutrit::Zero();
  for (int j = 0; j < 3; ++j) u(j, j) = std::polar(1.0, kTwoPi * phases[static_cast<std::size_t>(j)].value());
  return u;
}

}  // namespace pfq
