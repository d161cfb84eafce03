#pragma once

// Effective Hamiltonians on the three-fold ground space of the bond-only
// chain: numerical degenerate perturbation theory, closed forms, decimation
// and the exact-vs-perturbative comparison table.

#include "pfq/chain.hpp"

#include <thread>

namespace pfq {

/// shift * I + interaction on the encoded ground space {e_0, e_1, e_2}.
struct EffectiveHamiltonian {
  int order = 2;
  double shift = 0.0;
  Qutrit interaction = Qutrit::Zero();
  double coupling = 0.0;

  Qutrit total() const { return shift * Qutrit::Identity() + interaction; }
};

/// Interaction pattern of the second-order edge coupling: zero diagonal,
/// w on (0,1), (1,2), (2,0) and w-bar on the transposed entries.
inline Qutrit edge_interaction_matrix() {
  const Complex w = omega();
  Qutrit m;
  m << 0.0, w, std::conj(w),
       std::conj(w), 0.0, w,
       w, std::conj(w), 0.0;
  return m;
}

/// Interaction pattern with a free flip angle: e^{-2i phi_hat} on (0,1),
/// (1,2), (2,0) and e^{2i phi_hat} on the transposed entries.
inline Qutrit asymmetric_interaction_matrix(double phi_hat) {
  const Complex a = std::polar(1.0, -2.0 * phi_hat);
  const Complex b = std::conj(a);
  Qutrit m;
  m << 0.0, a, b,
       b, 0.0, a,
       a, b, 0.0;
  return m;
}

/// Closed-form eigenvalues of asymmetric_interaction_matrix(phi_hat):
/// (2 cos 2x, -cos 2x + sqrt3 sin 2x, -cos 2x - sqrt3 sin 2x).
inline std::array<double, 3> asymmetric_eigenvalues(double phi_hat) {
  const double c = std::cos(2.0 * phi_hat), s = std::sin(2.0 * phi_hat);
  return {2.0 * c, -c + std::sqrt(3.0) * s, -c - std::sqrt(3.0) * s};
}

/// Ground space of the bond-only chain in the fixed gauge:
/// e_0 is the ground state with chi_1 eigenvalue 1 and e_k = (w^P)^k e_0.
struct EncodedBasis {
  double energy = 0.0;           // ground energy of the bond-only chain
  Eigen::MatrixXcd vectors;      // 3^L x 3, columns e_0, e_1, e_2
  SparseOperator h0;             // bond-only Hamiltonian
  Eigen::VectorXd h0_diagonal;   // it is diagonal in the clock basis

  /// Projects a full-chain operator onto the encoded space.
  Qutrit project(const SparseOperator& op) const {
    return Qutrit(vectors.adjoint() * (op * vectors));
  }
};

inline ChainSpec bond_only(ChainSpec s) {
  std::fill(s.flip.begin(), s.flip.end(), 0.0);
  return s;
}

inline ChainSpec flip_only(ChainSpec s) {
  std::fill(s.bond.begin(), s.bond.end(), 0.0);
  return s;
}

inline EncodedBasis encoded_ground_basis(const ChainSpec& spec) {
  spec.validate();
  if (spec.length < 2) throw DomainError("encoded_ground_basis: needs L >= 2");
  for (double j : spec.bond)
    if (j <= 0.0) throw DomainError("encoded_ground_basis: every bond coupling must be positive");
  const int L = spec.length;
  EncodedBasis b;
  b.h0 = build_hamiltonian_sparse(bond_only(spec));
  const long dim = spec.dimension();
  b.h0_diagonal = b.h0.diagonal().real();
  const SparseOperator off = b.h0 - SparseOperator(DenseOperator(b.h0.diagonal().asDiagonal()).sparseView());
  if (detail::sparse_max_abs(off) > kTol.algebraic) throw std::logic_error("bond-only chain is not diagonal");

  const double e0 = b.h0_diagonal.minCoeff();
  const double width = b.h0_diagonal.maxCoeff() - e0;
  std::vector<long> ground;
  for (long i = 0; i < dim; ++i)
    if (b.h0_diagonal(i) - e0 <= kTol.degeneracy * std::max(1.0, width)) ground.push_back(i);
  if (ground.size() != 3)
    throw DomainError("encoded_ground_basis: bond-only ground space has dimension " + std::to_string(ground.size()) +
                      ", expected 3 (degenerate-basis ambiguity)");
  b.energy = e0;

  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(dim, 3);
  for (int k = 0; k < 3; ++k) g(ground[static_cast<std::size_t>(k)], k) = 1.0;
  const Qutrit c1 = Qutrit(g.adjoint() * (chi(1, L).sparse() * g));
  Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(c1);
  Eigen::Index pick = 0;
  for (Eigen::Index k = 1; k < 3; ++k)
    if (std::abs(es.eigenvalues()(k) - 1.0) < std::abs(es.eigenvalues()(pick) - 1.0)) pick = k;
  if (std::abs(es.eigenvalues()(pick) - 1.0) > 1e-8)
    throw std::logic_error("encoded_ground_basis: chi_1 has no eigenvalue 1 on the ground space");
  Eigen::VectorXcd e = g * es.eigenvectors().col(pick);
  e.normalize();
  Eigen::Index big = 0;
  e.cwiseAbs().maxCoeff(&big);
  e *= std::abs(e(big)) / e(big);

  const SparseOperator p = parity_string(L).sparse();
  b.vectors.resize(dim, 3);
  b.vectors.col(0) = e;
  b.vectors.col(1) = p * e;
  b.vectors.col(2) = p * b.vectors.col(1);
  return b;
}

inline EffectiveHamiltonian split_effective(int order, const Qutrit& m) {
  EffectiveHamiltonian eh;
  eh.order = order;
  const Qutrit herm = 0.5 * (m + m.adjoint());
  eh.shift = herm.trace().real() / 3.0;
  eh.interaction = herm - eh.shift * Qutrit::Identity();
  eh.coupling = max_abs(eh.interaction);
  return eh;
}

/// Blocks of the degenerate expansion with H0 = bonds, V = flips,
/// R = Q (E0 - H0)^{-1} Q.
struct PerturbativeBlocks {
  double e0 = 0.0;
  Qutrit first = Qutrit::Zero();   // P V P
  Qutrit second = Qutrit::Zero();  // P V R V P
  Qutrit third = Qutrit::Zero();   // P V R V R V P - (P V R^2 V P . P V P + h.c.)/2
};

inline void check_perturbative(const ChainSpec& spec) {
  double jmin = std::numeric_limits<double>::infinity();
  for (double j : spec.bond) jmin = std::min(jmin, j);
  for (double f : spec.flip)
    if (f / jmin >= kTol.perturbative_ratio)
      throw DomainError("perturbative_effective: f/J = " + std::to_string(f / jmin) + " is not below " +
                        std::to_string(kTol.perturbative_ratio));
}

inline PerturbativeBlocks perturbative_blocks(const ChainSpec& spec) {
  const EncodedBasis b = encoded_ground_basis(spec);
  const SparseOperator v = build_hamiltonian_sparse(flip_only(spec));
  const long dim = spec.dimension();
  const double width = b.h0_diagonal.maxCoeff() - b.energy;
  Eigen::VectorXd r(dim);
  for (long i = 0; i < dim; ++i) {
    const double gap = b.energy - b.h0_diagonal(i);
    r(i) = std::abs(gap) <= kTol.degeneracy * std::max(1.0, width) ? 0.0 : 1.0 / gap;
  }
  const Eigen::MatrixXcd ve = v * b.vectors;             // V P
  const Eigen::MatrixXcd rve = r.asDiagonal() * ve;      // R V P
  const Eigen::MatrixXcd vrve = v * rve;                 // V R V P
  const Eigen::MatrixXcd rvrve = r.asDiagonal() * vrve;  // R V R V P
  PerturbativeBlocks out;
  out.e0 = b.energy;
  out.first = Qutrit(b.vectors.adjoint() * ve);
  out.second = Qutrit(ve.adjoint() * rve);
  const Qutrit r2 = Qutrit(rve.adjoint() * rve);  // P V R^2 V P
  out.third = Qutrit(ve.adjoint() * rvrve) - 0.5 * (r2 * out.first + out.first * r2);
  return out;
}

/// Order-`order` correction on the encoded ground space, split into identity
/// shift plus traceless interaction.  `coupling` is the largest entry modulus of
/// the interaction.
inline EffectiveHamiltonian perturbative_effective(const ChainSpec& spec, int order) {
  if (order != 2 && order != 3) throw DomainError("perturbative_effective: order must be 2 or 3");
  spec.validate();
  if (spec.length < 2) throw DomainError("perturbative_effective: needs L >= 2");
  for (double j : spec.bond)
    if (j <= 0.0) throw DomainError("perturbative_effective: every bond coupling must be positive");
  check_perturbative(spec);
  const PerturbativeBlocks p = perturbative_blocks(spec);
  return split_effective(order, order == 2 ? p.second : p.third);
}

namespace detail {

inline void require_chain_for_closed_form(const ChainSpec& spec, const char* who) {
  spec.validate();
  if (spec.length < 2) throw DomainError(std::string(who) + ": needs L >= 2");
  for (double j : spec.bond)
    if (j <= 0.0) throw DomainError(std::string(who) + ": every bond coupling must be positive");
}

}  // namespace detail

/// Second-order closed form for an L-site chain with bonds decimated left to
/// right:  shift -(1/J_{L-1}) (prod_{i<L} f_i^2 / prod_{i<L-1} J_i^2 + f_L^2),
/// coupling prod f_i / prod J_i times edge_interaction_matrix().
inline EffectiveHamiltonian closed_form_second(const ChainSpec& spec) {
  detail::require_chain_for_closed_form(spec, "closed_form_second");
  const int L = spec.length;
  double pf2 = 1.0, pj2 = 1.0, pf = 1.0, pj = 1.0;
  for (int i = 0; i < L - 1; ++i) pf2 *= spec.flip[static_cast<std::size_t>(i)] * spec.flip[static_cast<std::size_t>(i)];
  for (int i = 0; i < L - 2; ++i) pj2 *= spec.bond[static_cast<std::size_t>(i)] * spec.bond[static_cast<std::size_t>(i)];
  for (double f : spec.flip) pf *= f;
  for (double j : spec.bond) pj *= j;
  const double fl = spec.flip.back();
  EffectiveHamiltonian eh;
  eh.order = 2;
  eh.shift = -(pf2 / pj2 + fl * fl) / spec.bond.back();
  eh.coupling = pf / pj;
  eh.interaction = eh.coupling * edge_interaction_matrix();
  return eh;
}

/// (i w chi_1 psi_L^dag + h.c.) on the encoded space; eigenvalues {0, sqrt3, -sqrt3}.
inline Qutrit third_order_pattern(const ChainSpec& spec) {
  const EncodedBasis b = encoded_ground_basis(spec);
  const int L = spec.length;
  const SiteProduct t = Complex(0.0, 1.0) * omega() * (chi(1, L) * psi(L, L).adjoint());
  const SparseOperator op = sum_operators({{1.0, t}, {1.0, t.adjoint()}}, spec.dimension());
  return b.project(op);
}

/// Third-order closed form: coupling
///   -(1/sqrt3) (f_L prod_{i<L} f_i^2/J_i^2 + (f_L^2/J_{L-1}) prod_{i<L} f_i/J_i)
/// times third_order_pattern().
inline EffectiveHamiltonian closed_form_third(const ChainSpec& spec) {
  detail::require_chain_for_closed_form(spec, "closed_form_third");
  const int L = spec.length;
  double sq = 1.0, lin = 1.0;
  for (int i = 0; i < L - 1; ++i) {
    const double ratio = spec.flip[static_cast<std::size_t>(i)] / spec.bond[static_cast<std::size_t>(i)];
    sq *= ratio * ratio;
    lin *= ratio;
  }
  const double fl = spec.flip.back();
  EffectiveHamiltonian eh;
  eh.order = 3;
  eh.coupling = -(fl * sq + fl * fl / spec.bond.back() * lin) / std::sqrt(3.0);
  eh.interaction = eh.coupling * third_order_pattern(spec);
  return eh;
}

/// Two-site chain at phi = pi/6 with free phi_hat: shift -(f1^2+f2^2)/J1 and
/// coupling -f1 f2 / J1 times asymmetric_interaction_matrix(phi_hat).
inline EffectiveHamiltonian asymmetric_second(const ChainSpec& spec) {
  detail::require_chain_for_closed_form(spec, "asymmetric_second");
  if (spec.length != 2) throw DomainError("asymmetric_second: needs L = 2");
  if (std::abs(spec.phi - kPi / 6.0) > 1e-12) throw DomainError("asymmetric_second: needs phi = pi/6");
  const double f1 = spec.flip[0], f2 = spec.flip[1], j = spec.bond[0];
  EffectiveHamiltonian eh;
  eh.order = 2;
  eh.shift = -(f1 * f1 + f2 * f2) / j;
  eh.coupling = -f1 * f2 / j;
  eh.interaction = eh.coupling * asymmetric_interaction_matrix(spec.phi_hat);
  return eh;
}

struct DecimationStep {
  int bond_index = 0;  // 1-based index of the removed bond
  double f_effective = 0.0;
  ChainSpec remaining;
};

/// Removes the strongest bond (leftmost on ties) and replaces its two sites by
/// one with field f_i f_{i+1} / (2 J_i).
inline DecimationStep decimate(const ChainSpec& spec) {
  spec.validate();
  if (spec.length < 2) throw DomainError("decimate: needs L >= 2");
  std::size_t best = 0;
  for (std::size_t i = 1; i < spec.bond.size(); ++i)
    if (spec.bond[i] > spec.bond[best]) best = i;
  const double j = spec.bond[best];
  const double fa = spec.flip[best], fb = spec.flip[best + 1];
  if (!(j > fa && j > fb))
    throw DomainError("decimate: strongest bond J_" + std::to_string(best + 1) + " = " + std::to_string(j) +
                      " does not dominate its neighbouring fields");
  DecimationStep step;
  step.bond_index = static_cast<int>(best) + 1;
  step.f_effective = fa * fb / (2.0 * j);
  ChainSpec r = spec;
  r.length = spec.length - 1;
  r.flip.erase(r.flip.begin() + static_cast<long>(best) + 1);
  r.flip[best] = step.f_effective;
  r.bond.erase(r.bond.begin() + static_cast<long>(best));
  step.remaining = std::move(r);
  return step;
}

/// One row of the exact-vs-perturbative comparison for the two-site chain.
/// Energies are measured from E0(bonds) + second-order shift.
struct ComparisonRow {
  double f = 0.0;
  std::array<double, 3> exact{};
  std::array<double, 3> perturbative{};
  bool nonperturbative = false;
};

inline ComparisonRow comparison_row(const ChainSpec& tmpl, double f) {
  ChainSpec s = tmpl;
  std::fill(s.flip.begin(), s.flip.end(), f);
  s.validate();
  double jmin = *std::min_element(s.bond.begin(), s.bond.end());
  ComparisonRow row;
  row.f = f;
  row.nonperturbative = f / jmin >= kTol.perturbative_ratio;

  const double e0 = encoded_ground_basis(s).energy;
  const EffectiveHamiltonian h2 = closed_form_second(s);
  const EffectiveHamiltonian h3 = closed_form_third(s);
  const double reference = e0 + h2.shift;

  const auto spec_exact = diagonalize(s);
  Eigen::SelfAdjointEigenSolver<Qutrit> es(Qutrit(h2.total() + h3.total()), Eigen::EigenvaluesOnly);
  for (int k = 0; k < 3; ++k) {
    row.exact[static_cast<std::size_t>(k)] = spec_exact.eigenvalues[static_cast<std::size_t>(k)] - reference;
    row.perturbative[static_cast<std::size_t>(k)] = e0 + es.eigenvalues()(k) - reference;
  }
  return row;
}

/// Exact three lowest levels against the second+third order closed forms over a
/// grid of uniform flips.  Rows come back in grid order for any worker count.
inline std::vector<ComparisonRow> spectrum_comparison(const ChainSpec& tmpl, const std::vector<double>& grid,
                                                      unsigned workers = 1) {
  tmpl.validate();
  if (tmpl.length != 2) throw DomainError("spectrum_comparison: needs L = 2");
  std::vector<ComparisonRow> rows(grid.size());
  for (double f : grid)
    if (!(f >= 0.0) || !std::isfinite(f)) throw DomainError("spectrum_comparison: grid values must be finite and >= 0");
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(grid.size(), 1))));
  auto task = [&](unsigned w) {
    for (std::size_t i = w; i < grid.size(); i += workers) rows[i] = comparison_row(tmpl, grid[i]);
  };
  if (workers == 1) {
    task(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(task, w);
    for (auto& t : pool) t.join();
  }
  return rows;
}

/// Edge coupling of the two-site chain by three routes.
struct CouplingReport {
  double decimation = 0.0;    // f1 f2 / (2 J)
  double second_order = 0.0;  // f1 f2 / J
  double measured = 0.0;      // exact splitting (E2 - (E0 + E1)/2) / 3
};

inline CouplingReport coupling_report(const ChainSpec& spec) {
  detail::require_chain_for_closed_form(spec, "coupling_report");
  if (spec.length != 2) throw DomainError("coupling_report: needs L = 2");
  CouplingReport r;
  r.decimation = decimate(spec).f_effective;
  r.second_order = closed_form_second(spec).coupling;
  const auto ex = diagonalize(spec);
  r.measured = (ex.eigenvalues[2] - 0.5 * (ex.eigenvalues[0] + ex.eigenvalues[1])) / 3.0;
  return r;
}

}  // namespace pfq
