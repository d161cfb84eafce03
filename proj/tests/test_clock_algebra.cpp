#include "oracle.hpp"
#include "pfq/clock_algebra.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pfq;

namespace {

DenseOperator eye(long n) { return DenseOperator::Identity(n, n); }

}  // namespace

TEST(ClockGenerators, SigmaActsByPhase) {
  const auto [sigma, tau] = clock_generators();
  QutritVector one = QutritVector::Zero();
  one(1) = 1.0;
  EXPECT_LT(max_abs(sigma * one - omega() * one), 1e-15);
}

TEST(ClockGenerators, TauCubedIsIdentity) {
  const auto [sigma, tau] = clock_generators();
  EXPECT_LT(max_abs(tau * tau * tau - Qutrit::Identity()), 1e-15);
  EXPECT_EQ(tau(1, 0), Complex(1.0));
  EXPECT_EQ(tau(2, 1), Complex(1.0));
  EXPECT_EQ(tau(0, 2), Complex(1.0));
}

TEST(ClockGenerators, WeylCommutator) {
  const auto [sigma, tau] = clock_generators();
  const Qutrit g = sigma * tau * sigma.adjoint() * tau.adjoint();
  EXPECT_LT(max_abs(g - omega() * Qutrit::Identity()), 1e-15);
}

TEST(Parafermion, SingleSiteChiIsSigma) {
  EXPECT_LT(max_abs(parafermion({1, ParafermionKind::chi}, 1) - DenseOperator(clock_generators().sigma)), 1e-15);
}

TEST(Parafermion, MatchesIndexArithmeticOracle) {
  for (int L = 1; L <= 4; ++L)
    for (int j = 1; j <= L; ++j) {
      EXPECT_LT(max_abs(parafermion({j, ParafermionKind::chi}, L) - oracle::chi(j, L)), 1e-14) << L << " " << j;
      EXPECT_LT(max_abs(parafermion({j, ParafermionKind::psi}, L) - oracle::psi(j, L)), 1e-14) << L << " " << j;
    }
}

TEST(Parafermion, CubesToIdentityAndSquaresToAdjoint) {
  for (int L = 1; L <= 4; ++L)
    for (int j = 1; j <= L; ++j)
      for (auto kind : {ParafermionKind::chi, ParafermionKind::psi}) {
        const DenseOperator p = parafermion({j, kind}, L);
        EXPECT_TRUE(is_unitary(p));
        EXPECT_LT(max_abs(p * p * p - eye(p.rows())), 1e-12);
        EXPECT_LT(max_abs(p * p - p.adjoint()), 1e-12);
      }
}

TEST(Parafermion, GradedCommutation) {
  for (int L = 2; L <= 4; ++L)
    for (int j = 1; j <= L; ++j)
      for (int k = j + 1; k <= L; ++k) {
        const DenseOperator cj = parafermion({j, ParafermionKind::chi}, L);
        const DenseOperator ck = parafermion({k, ParafermionKind::chi}, L);
        const DenseOperator pj = parafermion({j, ParafermionKind::psi}, L);
        const DenseOperator pk = parafermion({k, ParafermionKind::psi}, L);
        EXPECT_LT(max_abs(cj * ck - omega() * ck * cj), 1e-12);
        EXPECT_LT(max_abs(pj * pk - omega() * pk * pj), 1e-12);
        EXPECT_LT(max_abs(cj * pk - omega() * pk * cj), 1e-12);
      }
}

TEST(Parafermion, RejectsOutOfRangeSite) {
  EXPECT_THROW(parafermion({0, ParafermionKind::chi}, 2), DomainError);
  EXPECT_THROW(parafermion({3, ParafermionKind::psi}, 2), DomainError);
  EXPECT_THROW(parafermion({1, ParafermionKind::chi}, kMaxChainLength + 1), DomainError);
}

TEST(Parity, SingleSiteIsTauDagger) {
  EXPECT_LT(max_abs(parity_operator(1) - DenseOperator(clock_generators().tau.adjoint())), 1e-15);
}

TEST(Parity, EigenvalueMultiplicities) {
  const DenseOperator p = parity_operator(2);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(p);
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 9; ++i)
    for (int q = 0; q < 3; ++q)
      if (std::abs(es.eigenvalues()(i) - omega_power(q)) < 1e-10) ++counts[q];
  EXPECT_EQ(counts[0], 3);
  EXPECT_EQ(counts[1], 3);
  EXPECT_EQ(counts[2], 3);
}

TEST(Parity, OrderThreeAndGradesParafermions) {
  for (int L = 1; L <= 3; ++L) {
    const DenseOperator p = parity_operator(L);
    EXPECT_LT(max_abs(p * p * p - eye(p.rows())), 1e-12);
    for (int j = 1; j <= L; ++j)
      for (auto kind : {ParafermionKind::chi, ParafermionKind::psi}) {
        const DenseOperator x = parafermion({j, kind}, L);
        EXPECT_LT(max_abs(p * x - omega() * x * p), 1e-12);
      }
  }
}

TEST(Displacement, Basics) {
  EXPECT_LT(max_abs(displacement({0, 0}) - Qutrit::Identity()), 1e-15);
  EXPECT_LT(max_abs(displacement({1, 0}) - pauli_x()), 1e-15);
  EXPECT_LT(max_abs(displacement({1, 1}) - omega_power(2) * pauli_x() * pauli_z()), 1e-15);
  EXPECT_EQ(PhasePoint(-1, 4), PhasePoint(2, 1));
}

TEST(Displacement, TraceOrthogonalityAndComposition) {
  const auto d = all_displacements();
  for (int p = 0; p < kPhaseSpaceSize; ++p)
    for (int q = 0; q < kPhaseSpaceSize; ++q) {
      const Complex t = (d[static_cast<std::size_t>(p)].adjoint() * d[static_cast<std::size_t>(q)]).trace();
      EXPECT_LT(std::abs(t - (p == q ? 3.0 : 0.0)), 1e-12);
      const PhasePoint s = PhasePoint::from_index(p) + PhasePoint::from_index(q);
      EXPECT_TRUE(equal_up_to_phase(d[static_cast<std::size_t>(p)] * d[static_cast<std::size_t>(q)], displacement(s)));
    }
}

TEST(PauliTest, Examples) {
  EXPECT_TRUE(is_pauli_up_to_phase(pauli_z()));
  EXPECT_TRUE(is_pauli_up_to_phase(Qutrit(std::polar(1.0, kPi / 7) * pauli_x())));
  Qutrit h;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) h(r, c) = omega_power(r * c) / std::sqrt(3.0);
  EXPECT_FALSE(is_pauli_up_to_phase(h));
  EXPECT_THROW(is_pauli_up_to_phase(Qutrit(2.0 * Qutrit::Identity())), DomainError);
}

TEST(CliffordTest, Examples) {
  Qutrit s = Qutrit::Identity();
  s(1, 1) = omega();
  EXPECT_TRUE(is_clifford(s));
  Qutrit t9 = Qutrit::Identity();
  t9(2, 2) = std::polar(1.0, kTwoPi / 9);
  EXPECT_FALSE(is_clifford(t9));
  EXPECT_TRUE(is_clifford(pauli_x()));
}

TEST(SiteProduct, SparseDenseAgree) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int L = 1; L <= 3; ++L) {
    SiteProduct p(L, Complex(0.3, -0.2));
    for (int s = 1; s <= L; ++s) p.apply(s, Qutrit::Random());
    EXPECT_LT(max_abs(DenseOperator(p.sparse()) - p.dense()), 1e-13);
    const SiteProduct q = chi(1, L) * psi(L, L).adjoint();
    EXPECT_LT(max_abs(q.dense() - oracle::chi(1, L) * oracle::psi(L, L).adjoint()), 1e-13);
  }
}
