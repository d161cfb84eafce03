#include "pfq/gates.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pfq;

namespace {

// Unmemoized reference recursion straight from the definition, checking all
// nine Paulis at every level.
bool reference_in_level(const Qutrit& u, int k) {
  if (k == 1) {
    for (int i = 0; i < 9; ++i)
      if (equal_up_to_phase(u, displacement(PhasePoint::from_index(i)))) return true;
    return false;
  }
  for (int i = 0; i < 9; ++i) {
    const Qutrit p = displacement(PhasePoint::from_index(i));
    if (!reference_in_level(Qutrit(u * p * u.adjoint()), k - 1)) return false;
  }
  return true;
}

int reference_level(const Qutrit& u, int k_max) {
  for (int k = 1; k <= k_max; ++k)
    if (reference_in_level(u, k)) return k;
  return -1;
}

Qutrit diag3(double a, double b, double c) {
  Qutrit u = Qutrit::Zero();
  u(0, 0) = std::polar(1.0, a);
  u(1, 1) = std::polar(1.0, b);
  u(2, 2) = std::polar(1.0, c);
  return u;
}

}  // namespace

TEST(Generators, CliffordAndIdentities) {
  const auto g = clifford_generators();
  EXPECT_TRUE(is_clifford(g.x));
  EXPECT_TRUE(is_clifford(g.s));
  EXPECT_TRUE(is_clifford(g.h));
  EXPECT_TRUE(is_unitary(g.h, 1e-12));
  EXPECT_TRUE(equal_up_to_phase(Qutrit(g.h * g.h * g.h * g.h), Qutrit(Qutrit::Identity())));
  EXPECT_TRUE(is_pauli_up_to_phase(Qutrit(g.s * g.x * g.s.adjoint())));
  EXPECT_TRUE(equal_up_to_phase(Qutrit(g.h * pauli_z() * g.h.adjoint()), pauli_x()) ||
              equal_up_to_phase(Qutrit(g.h * pauli_z() * g.h.adjoint()), Qutrit(pauli_x().adjoint())));
  EXPECT_TRUE(equal_up_to_phase(Qutrit(g.h.adjoint() * pauli_x() * g.h), Qutrit(pauli_z().adjoint())));
}

TEST(DynamicalGateTest, IdentityAtZero) {
  const auto g = dynamical_gate(0.0);
  EXPECT_LT(max_abs(g.matrix - Qutrit::Identity()), 1e-14);
  EXPECT_NEAR(g.theta, 0.0, 1e-12);
}

TEST(DynamicalGateTest, EigenphasesAndTheta) {
  for (double bt : {0.1, 0.7, 1.9, -0.4}) {
    const auto g = dynamical_gate(bt);
    EXPECT_TRUE(is_unitary(g.matrix, 1e-12));
    // eigenvalues e^{-2 i bt} once and e^{i bt} twice
    Eigen::ComplexEigenSolver<Qutrit> es(g.matrix);
    int twice = 0, once = 0;
    for (int k = 0; k < 3; ++k) {
      if (std::abs(es.eigenvalues()(k) - std::polar(1.0, bt)) < 1e-10) ++twice;
      if (std::abs(es.eigenvalues()(k) - std::polar(1.0, -2 * bt)) < 1e-10) ++once;
    }
    EXPECT_EQ(twice, 2);
    EXPECT_EQ(once, 1);
    EXPECT_NEAR(std::abs(std::polar(1.0, g.theta) - std::polar(1.0, -3 * bt)), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(g.global_phase - std::polar(1.0, bt)), 0.0, 1e-10);
    const Qutrit h = hadamard();
    EXPECT_LT(max_abs(Qutrit(g.global_phase * h * ud_gate(g.theta) * h.adjoint()) - g.matrix), 1e-10);
    EXPECT_LT(max_abs(Qutrit(g.matrix * dynamical_gate(-bt).matrix) - Qutrit::Identity()), 1e-12);
    EXPECT_LT(max_abs(commutator(g.matrix, pauli_x())), 1e-12);
  }
}

TEST(Hierarchy, NamedGateLevels) {
  EXPECT_EQ(hierarchy_level(pauli_z()).level, 1);
  EXPECT_EQ(hierarchy_level(ud_gate(kTwoPi / 3)).level, 2);
  EXPECT_EQ(hierarchy_level(qutrit_t_gate()).level, 3);
  EXPECT_EQ(hierarchy_level(ud_gate(kTwoPi / 9)).level, 4);
  EXPECT_EQ(hierarchy_level(ud_gate(kTwoPi / 27)).level, 6);
  EXPECT_TRUE(is_pauli_up_to_phase(Qutrit(ud_gate(kTwoPi / 3) * pauli_x() * ud_gate(kTwoPi / 3).adjoint() *
                                          pauli_x().adjoint())));
}

TEST(Hierarchy, BoundedVerdict) {
  const auto v = hierarchy_level(ud_gate(kTwoPi / 27), 4);
  EXPECT_TRUE(v.exceeds());
  EXPECT_EQ(v.k_max, 4);
  EXPECT_TRUE(hierarchy_level(ud_gate(1.0), 6).exceeds());
  EXPECT_THROW(hierarchy_level(Qutrit(2.0 * Qutrit::Identity())), DomainError);
  EXPECT_THROW(hierarchy_level(pauli_x(), 9), DomainError);
}

TEST(Hierarchy, AgreesWithUnmemoizedReference) {
  const Qutrit h = hadamard();
  std::vector<Qutrit> gates = {pauli_x(), phase_gate(), h, qutrit_t_gate(), ud_gate(kTwoPi / 9),
                               Qutrit(h * qutrit_t_gate() * h.adjoint()), Qutrit(h * ud_gate(kTwoPi / 9) * h.adjoint()),
                               ud_gate(0.3)};
  for (const auto& g : gates) {
    const int ref = reference_level(g, 4);
    const auto v = hierarchy_level(g, 4);
    EXPECT_EQ(v.level.value_or(-1), ref);
  }
}

TEST(Hierarchy, PauliMultiplicationPreservesLevel) {
  for (const Qutrit& g : {qutrit_t_gate(), ud_gate(kTwoPi / 9), phase_gate()}) {
    const int k = *hierarchy_level(g).level;
    for (int i = 0; i < 9; ++i) EXPECT_EQ(hierarchy_level(Qutrit(g * displacement(PhasePoint::from_index(i)))).level, k);
  }
}

TEST(Hierarchy, WitnessChain) {
  HierarchyClassifier c;
  const auto chain = c.witness_chain(ud_gate(kTwoPi / 9));
  ASSERT_EQ(chain.size(), 3u);
  EXPECT_EQ(chain[0].level, 3);
  EXPECT_EQ(chain[1].level, 2);
  EXPECT_EQ(chain[2].level, 1);
  EXPECT_TRUE(is_pauli_up_to_phase(chain.back().gate));
  EXPECT_TRUE(c.witness_chain(pauli_x()).empty());
}

TEST(DiagonalLevel, Examples) {
  EXPECT_EQ(diagonal_level({Rational(0), Rational(1, 3), Rational(2, 3)}).level, 1);
  EXPECT_EQ(diagonal_level({Rational(0), Rational(1, 9), Rational(8, 9)}).level, 3);
  EXPECT_EQ(diagonal_level({Rational(0), Rational(0), Rational(1, 9)}).level, 4);
  EXPECT_EQ(diagonal_level({Rational(0), Rational(0), Rational(1, 3)}).level, 2);
  EXPECT_EQ(diagonal_level({Rational(0), Rational(0), Rational(1, 27)}).level, 6);
  EXPECT_EQ(diagonal_level({Rational(5), Rational(5), Rational(5)}).level, 1);
  EXPECT_EQ(diagonal_level({Rational(1, 7), Rational(1, 7), Rational(1, 7)}).level, 1);
  EXPECT_THROW(diagonal_level({Rational(0), Rational(1, 2), Rational(0)}), DomainError);
  EXPECT_TRUE(diagonal_level({Rational(0), Rational(0), Rational(1, 27)}, 5).exceeds());
}

TEST(DiagonalLevel, AgreesWithClassifierOnNinths) {
  for (int a = 0; a < 9; ++a)
    for (int b = 0; b < 9; ++b) {
      const std::array<Rational, 3> ph = {Rational(0), Rational(a, 9), Rational(b, 9)};
      EXPECT_EQ(diagonal_level(ph).level, hierarchy_level(diagonal_gate(ph)).level) << a << " " << b;
    }
}

TEST(UvGate, Examples) {
  EXPECT_LT(max_abs(uv_gate(0, 0, 0) - Qutrit::Identity()), 1e-15);
  EXPECT_LT(max_abs(uv_gate(0, 0, 1) - pauli_z()), 1e-14);
  EXPECT_EQ(hierarchy_level(uv_gate(0, 0, 1)).level, 1);
  EXPECT_LT(max_abs(uv_gate(0, 1, 0) - diag3(0, 2 * kTwoPi / 9, kTwoPi / 9)), 1e-14);
  EXPECT_EQ(hierarchy_level(uv_gate(0, 1, 0)).level, 3);
  for (int z = 0; z < 3; ++z)
    for (int g = 0; g < 3; ++g)
      for (int e = 0; e < 3; ++e) EXPECT_LE(*hierarchy_level(uv_gate(z, g, e)).level, 3);
}

TEST(TFromUd, Examples) {
  EXPECT_TRUE(equal_up_to_phase(t_from_ud(ud_gate(kTwoPi / 9)), qutrit_t_gate()));
  EXPECT_EQ(hierarchy_level(t_from_ud(ud_gate(kTwoPi / 9))).level, 3);
  EXPECT_TRUE(is_pauli_up_to_phase(t_from_ud(ud_gate(kTwoPi / 3))));
  EXPECT_LT(max_abs(t_from_ud(ud_gate(0.0)) - Qutrit::Identity()), 1e-15);
  EXPECT_TRUE(equal_up_to_phase(t_from_ud(Qutrit(std::polar(1.0, 0.4) * ud_gate(kTwoPi / 9))), qutrit_t_gate()));
  EXPECT_THROW(t_from_ud(pauli_x()), DomainError);
}

TEST(Theorem1, Examples) {
  EXPECT_TRUE(theorem1_check(pauli_z()));
  EXPECT_TRUE(theorem1_check(ud_gate(kTwoPi / 9)));
  EXPECT_TRUE(theorem1_check(qutrit_t_gate()));
  EXPECT_THROW(theorem1_check(ud_gate(1.0)), DomainError);
}
