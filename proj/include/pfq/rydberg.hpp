#pragma once

// Four-level Rydberg ladder in the rotating frame: Hamiltonian assembly,
// elimination of the far-detuned Rydberg level, time stepping, the mapping
// onto the edge interaction and two-level Berry loops.

#include "pfq/gates.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <functional>
#include <sstream>

namespace pfq {

using Matrix4 = Eigen::Matrix4cd;

/// Laser parameters of the ladder |0> - |1> - |2> - |3> with the closing
/// |0> - |3> field.  Index i holds the field driving transition i+1.
struct RydbergParams {
  std::array<double, 4> omega{};  // Rabi frequencies
  std::array<double, 4> delta{};  // detunings
  std::array<double, 4> phase{};  // field phases

  /// Half the summed detunings; the energy offset of the Rydberg level.
  double boost() const { return 0.5 * (delta[0] + delta[1] + delta[2] + delta[3]); }

  /// Two-photon coupling between |0> and |2> through the Rydberg level.
  Complex effective_rabi() const {
    return -omega[3] * omega[2] / (2.0 * boost()) * std::polar(1.0, phase[3] - phase[2]);
  }

  double resonance_residual() const { return delta[3] - (delta[0] + delta[1] + delta[2]); }

  void require_resonance(const char* who) const {
    for (const auto* a : {&omega, &delta, &phase})
      for (double v : *a)
        if (!std::isfinite(v)) throw DomainError(std::string(who) + ": parameters must be finite");
    const double scale = std::max({1.0, std::abs(delta[0]), std::abs(delta[1]), std::abs(delta[2]), std::abs(delta[3])});
    const double r = resonance_residual();
    if (std::abs(r) > 1e-12 * scale) {
      std::ostringstream os;
      os << who << ": four-photon resonance violated, delta4 - (delta1 + delta2 + delta3) = " << r;
      throw DomainError(os.str());
    }
  }
};

/// Rotating-frame Hamiltonian with the Rydberg level at zero energy.
inline Matrix4 rotating_hamiltonian(const RydbergParams& p) {
  p.require_resonance("rotating_hamiltonian");
  const auto& d = p.delta;
  Matrix4 h = Matrix4::Zero();
  h(0, 0) = -(d[0] + d[1] + d[2]);
  h(1, 1) = -(d[1] + d[2]);
  h(2, 2) = -d[2];
  const std::array<std::pair<int, int>, 4> links = {{{0, 1}, {1, 2}, {2, 3}, {0, 3}}};
  for (std::size_t i = 0; i < 4; ++i) {
    const Complex c = 0.5 * p.omega[i] * std::polar(1.0, p.phase[i]);
    h(links[i].first, links[i].second) = c;
    h(links[i].second, links[i].first) = std::conj(c);
  }
  return h;
}

/// |boost| / max(Omega3, Omega4); the elimination is trusted above 5.
inline double elimination_ratio(const RydbergParams& p) {
  const double m = std::max(std::abs(p.omega[2]), std::abs(p.omega[3]));
  return m == 0.0 ? std::numeric_limits<double>::infinity() : std::abs(p.boost()) / m;
}

inline std::optional<std::string> elimination_warning(const RydbergParams& p) {
  const double r = elimination_ratio(p);
  if (r >= 5.0) return std::nullopt;
  std::ostringstream os;
  os << "adiabatic elimination outside its validity regime: |boost|/max(omega3, omega4) = " << r << " < 5";
  return os.str();
}

/// Three-level Hamiltonian after eliminating the Rydberg amplitude,
/// c3 = -(omega4 e^{-i phi4} c0 + omega3 e^{-i phi3} c2) / (2 boost).
inline Qutrit adiabatic_eliminate(const RydbergParams& p, double boost_sign = 1.0) {
  p.require_resonance("adiabatic_eliminate");
  const double b = boost_sign * p.boost();
  if (b == 0.0) throw DomainError("adiabatic_eliminate: boost (delta1 + ... + delta4)/2 is zero");
  const auto& d = p.delta;
  const auto& o = p.omega;
  Qutrit h = Qutrit::Zero();
  h(0, 0) = -(d[0] + d[1] + d[2] + o[3] * o[3] / (4.0 * b));
  h(1, 1) = -(d[1] + d[2]);
  h(2, 2) = -(d[2] + o[2] * o[2] / (4.0 * b));
  h(0, 1) = 0.5 * o[0] * std::polar(1.0, p.phase[0]);
  h(1, 2) = 0.5 * o[1] * std::polar(1.0, p.phase[1]);
  h(0, 2) = -(o[3] * o[2] / (4.0 * b)) * std::polar(1.0, p.phase[3] - p.phase[2]);
  h(1, 0) = std::conj(h(0, 1));
  h(2, 1) = std::conj(h(1, 2));
  h(2, 0) = std::conj(h(0, 2));
  return h;
}

// ---------------------------------------------------------------------------
// time stepping

using TimeDependentHamiltonian = std::function<Eigen::MatrixXcd(double)>;

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> states;  // every `stride` steps, first and last always kept
  Eigen::VectorXcd final_state;
  std::size_t steps = 0;
};

struct EvolveOptions {
  std::size_t stride = 1;
  bool record = true;
};

namespace detail {

inline double spectral_radius(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>& es) {
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline Eigen::MatrixXcd step_propagator(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>& es, double h) {
  const Eigen::VectorXcd ph = (es.eigenvalues().cast<Complex>() * Complex(0.0, -h)).array().exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

inline void check_evolve_args(const Eigen::VectorXcd& psi0, Eigen::Index dim, double T, double dt) {
  if (psi0.size() != dim) throw DomainError("evolve: state and Hamiltonian dimensions differ");
  if (std::abs(psi0.norm() - 1.0) > 1e-9) throw DomainError("evolve: initial state is not normalized");
  if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("evolve: duration must be finite and non-negative");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("evolve: dt must be positive");
}

inline void guard_step(double dt, double norm) {
  if (dt * norm >= 0.1) {
    std::ostringstream os;
    os << "evolve: stability guard violated, dt*||H|| = " << dt * norm << " >= 0.1";
    throw DomainError(os.str());
  }
}

}  // namespace detail

/// Fixed-step exponential integrator.  The interval is cut into
/// ceil(T/dt) equal steps, each propagated exactly under the Hamiltonian at
/// its midpoint.
inline Trajectory evolve(const TimeDependentHamiltonian& h, const Eigen::VectorXcd& psi0, double T, double dt,
                         EvolveOptions opt = {}) {
  const Eigen::MatrixXcd h0 = h(0.0);
  detail::check_evolve_args(psi0, h0.rows(), T, dt);
  const auto n = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
  const double step = n == 0 ? 0.0 : T / static_cast<double>(n);
  const std::size_t stride = std::max<std::size_t>(1, opt.stride);
  Trajectory tr;
  tr.steps = n;
  Eigen::VectorXcd psi = psi0;
  if (opt.record) {
    tr.times.push_back(0.0);
    tr.states.push_back(psi);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::MatrixXcd hm = h((static_cast<double>(k) + 0.5) * step);
    if (!is_hermitian(hm, 1e-10)) throw DomainError("evolve: Hamiltonian is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hm);
    detail::guard_step(dt, detail::spectral_radius(es));
    psi = detail::step_propagator(es, step) * psi;
    if (opt.record && ((k + 1) % stride == 0 || k + 1 == n)) {
      tr.times.push_back(static_cast<double>(k + 1) * step);
      tr.states.push_back(psi);
    }
  }
  if (std::abs(psi.norm() - 1.0) > 1e-9) throw std::logic_error("evolve: norm drifted beyond 1e-9");
  tr.final_state = psi;
  return tr;
}

/// Constant Hamiltonian: one step propagator reused throughout.
inline Trajectory evolve(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& psi0, double T, double dt,
                         EvolveOptions opt = {}) {
  detail::check_evolve_args(psi0, h.rows(), T, dt);
  if (!is_hermitian(h, 1e-10)) throw DomainError("evolve: Hamiltonian is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  detail::guard_step(dt, detail::spectral_radius(es));
  const auto n = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
  const double step = n == 0 ? 0.0 : T / static_cast<double>(n);
  const Eigen::MatrixXcd u = detail::step_propagator(es, step);
  const std::size_t stride = std::max<std::size_t>(1, opt.stride);
  Trajectory tr;
  tr.steps = n;
  Eigen::VectorXcd psi = psi0;
  if (opt.record) {
    tr.times.push_back(0.0);
    tr.states.push_back(psi);
  }
  for (std::size_t k = 0; k < n; ++k) {
    psi = u * psi;
    if (opt.record && ((k + 1) % stride == 0 || k + 1 == n)) {
      tr.times.push_back(static_cast<double>(k + 1) * step);
      tr.states.push_back(psi);
    }
  }
  if (std::abs(psi.norm() - 1.0) > 1e-9) throw std::logic_error("evolve: norm drifted beyond 1e-9");
  tr.final_state = psi;
  return tr;
}

struct EliminationCheck {
  double duration = 0.0;
  double fidelity = 0.0;      // |<psi_eff(T)| P psi_full(T)>|^2, P psi renormalized
  double max_leakage = 0.0;   // max_t |c3(t)|^2
  double leakage_bound = 0.0; // 4 (max(Omega3, Omega4) / 2 boost)^2
};

/// Runs the full and the eliminated model from |start> for `duration`
/// (default 10/|Omega_R|) and compares them.
inline EliminationCheck elimination_check(const RydbergParams& p, int start = 0, double duration = -1.0,
                                          double dt = -1.0) {
  if (start < 0 || start > 2) throw DomainError("elimination_check: start level must be 0, 1 or 2");
  const Matrix4 full = rotating_hamiltonian(p);
  const Qutrit eff = adiabatic_eliminate(p);
  EliminationCheck c;
  c.duration = duration > 0.0 ? duration : 10.0 / std::abs(p.effective_rabi());
  if (!std::isfinite(c.duration)) throw DomainError("elimination_check: effective Rabi coupling vanishes");
  if (dt <= 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix4> es(full, Eigen::EigenvaluesOnly);
    dt = 0.02 / std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(4);
  a(start) = 1.0;
  const auto tf = evolve(Eigen::MatrixXcd(full), a, c.duration, dt);
  const auto te = evolve(Eigen::MatrixXcd(eff), Eigen::VectorXcd(a.head(3)), c.duration, dt, {1, false});
  for (const auto& s : tf.states) c.max_leakage = std::max(c.max_leakage, std::norm(s(3)));
  const Eigen::VectorXcd proj = tf.final_state.head(3).normalized();
  c.fidelity = std::norm(te.final_state.dot(proj));
  const double ratio = std::max(std::abs(p.omega[2]), std::abs(p.omega[3])) / (2.0 * p.boost());
  c.leakage_bound = 4.0 * ratio * ratio;
  return c;
}

// ---------------------------------------------------------------------------
// mapping onto the edge interaction

/// Field parameters quoted for simulating g * H_int: all Rabi frequencies 2g,
/// detunings (g, -g, g, g), phi1 = phi2 = 2pi/3 and phi4 - phi3 = -2pi/3.
inline RydbergParams printed_mapping_params(double g) {
  RydbergParams p;
  p.omega = {2 * g, 2 * g, 2 * g, 2 * g};
  p.delta = {g, -g, g, g};
  p.phase = {kTwoPi / 3, kTwoPi / 3, 0.0, -kTwoPi / 3};
  return p;
}

struct MappingVariant {
  bool negate_phases = false;    // phi_i -> -phi_i
  bool transpose = false;        // compare the transpose of the eliminated matrix
  bool relative_plus = false;    // read the phase difference as phi4 - phi3 = +2pi/3
  bool flip_boost = false;       // boost -> -boost in the elimination
  bool negate_target = false;    // compare against -g H_int
  double residual = 0.0;         // min_c || M - (+-g H_int + c I) ||_F
  double shift = 0.0;            // optimal c

  std::string name() const {
    std::string s;
    auto add = [&](bool on, const char* tag) {
      if (!on) return;
      if (!s.empty()) s += "+";
      s += tag;
    };
    add(negate_phases, "negate_phases");
    add(transpose, "transpose");
    add(relative_plus, "relative_plus");
    add(flip_boost, "flip_boost");
    add(negate_target, "negate_target");
    return s.empty() ? "literal" : s;
  }
};

struct MappingReport {
  double g = 0.0;
  Qutrit literal;  // eliminated matrix for the quoted parameters, no convention changes
  std::vector<MappingVariant> variants;
  std::size_t best = 0;

  const MappingVariant& best_variant() const { return variants[best]; }
  bool exact() const { return best_variant().residual < 1e-9; }
};

inline std::pair<double, double> residual_up_to_identity(const Qutrit& m, const Qutrit& target) {
  const Qutrit d = m - target;
  const double c = d.trace().real() / 3.0;
  return {Qutrit(d - c * Qutrit::Identity()).norm(), c};
}

/// Checks the quoted parameter set against g * H_int under 32 sign and
/// ordering conventions; reports every residual and the best one.
inline MappingReport verify_mapping(double g) {
  if (!(g > 0.0) || !std::isfinite(g)) throw DomainError("verify_mapping: g must be positive");
  MappingReport rep;
  rep.g = g;
  rep.literal = adiabatic_eliminate(printed_mapping_params(g));
  const Qutrit target = g * interaction_matrix();
  for (int mask = 0; mask < 32; ++mask) {
    MappingVariant v;
    v.negate_phases = mask & 1;
    v.transpose = mask & 2;
    v.relative_plus = mask & 4;
    v.flip_boost = mask & 8;
    v.negate_target = mask & 16;
    RydbergParams p = printed_mapping_params(g);
    if (v.relative_plus) p.phase[3] = kTwoPi / 3;
    if (v.negate_phases)
      for (double& ph : p.phase) ph = -ph;
    Qutrit m = adiabatic_eliminate(p, v.flip_boost ? -1.0 : 1.0);
    if (v.transpose) m.transposeInPlace();
    std::tie(v.residual, v.shift) = residual_up_to_identity(m, v.negate_target ? Qutrit(-target) : target);
    rep.variants.push_back(v);
    if (v.residual < rep.variants[rep.best].residual - 1e-15) rep.best = rep.variants.size() - 1;
  }
  return rep;
}

struct DesignResult {
  RydbergParams params;
  double shift = 0.0;     // eliminated matrix = target + shift * I
  double residual = 0.0;  // Frobenius norm of what remains
  bool reachable() const { return residual < 1e-6; }
};

namespace detail {

// 11 unknowns: four Omegas, delta1..3, four phases; delta4 follows from
// resonance.  Residual padded to 11 entries because the
// solver wants at least as many residuals as unknowns.
struct DesignFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  Qutrit target;
  int inputs() const { return 11; }
  int values() const { return 11; }

  static RydbergParams unpack(const Eigen::VectorXd& x) {
    RydbergParams p;
    for (int i = 0; i < 4; ++i) p.omega[static_cast<std::size_t>(i)] = x(i);
    for (int i = 0; i < 3; ++i) p.delta[static_cast<std::size_t>(i)] = x(4 + i);
    p.delta[3] = x(4) + x(5) + x(6);
    for (int i = 0; i < 4; ++i) p.phase[static_cast<std::size_t>(i)] = x(7 + i);
    return p;
  }

  static Eigen::VectorXd pack(const RydbergParams& p) {
    Eigen::VectorXd x(11);
    for (int i = 0; i < 4; ++i) x(i) = p.omega[static_cast<std::size_t>(i)];
    for (int i = 0; i < 3; ++i) x(4 + i) = p.delta[static_cast<std::size_t>(i)];
    for (int i = 0; i < 4; ++i) x(7 + i) = p.phase[static_cast<std::size_t>(i)];
    return x;
  }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    f.setZero(11);
    const RydbergParams p = unpack(x);
    if (p.boost() == 0.0) {
      f.setConstant(1e6);
      return 0;
    }
    const Qutrit d = adiabatic_eliminate(p) - target;
    const double c = d.trace().real() / 3.0;
    f(0) = d(0, 0).real() - c;
    f(1) = d(1, 1).real() - c;
    f(2) = d(2, 2).real() - c;
    f(3) = d(0, 1).real();
    f(4) = d(0, 1).imag();
    f(5) = d(1, 2).real();
    f(6) = d(1, 2).imag();
    f(7) = d(0, 2).real();
    f(8) = d(0, 2).imag();
    return 0;
  }
};

}  // namespace detail

/// Field parameters whose eliminated Hamiltonian equals target + c I.
/// The elimination formula inverts in closed form once the detuning scale
/// delta4 = K is chosen.  The default K = 1600 max|target_ij| keeps
/// |boost| / Omega_{3,4} >= 20.  A Levenberg-Marquardt pass polishes the
/// closed-form point when it is not already exact.
inline DesignResult inverse_design(const Qutrit& target, double detuning_scale = 0.0) {
  if (!is_hermitian(target))
    throw DomainError("inverse_design: target is not Hermitian");
  double k = detuning_scale;
  if (k <= 0.0) k = 1600.0 * std::max(max_abs(target), 1e-3);
  if (!std::isfinite(k)) throw DomainError("inverse_design: detuning scale must be finite");

  RydbergParams p;
  const Complex t01 = target(0, 1), t12 = target(1, 2), t02 = target(0, 2);
  p.omega[0] = 2.0 * std::abs(t01);
  p.phase[0] = std::arg(t01);
  p.omega[1] = 2.0 * std::abs(t12);
  p.phase[1] = std::arg(t12);
  const double stark = std::abs(t02);
  p.omega[2] = p.omega[3] = std::sqrt(4.0 * stark * k);
  p.phase[2] = 0.0;
  p.phase[3] = stark > 0.0 ? std::arg(-t02) : 0.0;
  const double d00 = target(0, 0).real(), d11 = target(1, 1).real(), d22 = target(2, 2).real();
  p.delta[0] = -stark - (d00 - d11);
  p.delta[1] = stark - (d11 - d22);
  p.delta[2] = k - p.delta[0] - p.delta[1];
  p.delta[3] = k;

  detail::DesignFunctor fn;
  fn.target = target;
  Eigen::VectorXd x = detail::DesignFunctor::pack(p);
  Eigen::VectorXd f;
  fn(x, f);
  if (f.norm() > 1e-13 * std::max(1.0, max_abs(target))) {
    Eigen::NumericalDiff<detail::DesignFunctor> nd(fn);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<detail::DesignFunctor>> lm(nd);
    lm.parameters.xtol = 1e-15;
    lm.parameters.ftol = 1e-15;
    lm.minimize(x);
    p = detail::DesignFunctor::unpack(x);
  }

  DesignResult r;
  r.params = p;
  std::tie(r.residual, r.shift) = residual_up_to_identity(adiabatic_eliminate(p), target);
  return r;
}

// ---------------------------------------------------------------------------
// Berry loops on the (|2>, |3>) pair

/// Closed loop over normalized time s in [0, 1]: coupling magnitude |D(s)|,
/// phase phi3(s) and its derivative, splitting between the two levels, and the
/// branch l = +-1 of the closed form.
struct BerryLoop {
  std::function<double(double)> envelope;
  std::function<double(double)> phase;
  std::function<double(double)> phase_rate;  // d phi3 / ds
  double splitting = 0.0;
  int branch = 1;

  /// Constant |D| with phi3 winding `winding` times.
  static BerryLoop constant(double magnitude, double splitting, int branch = 1, int winding = 1) {
    BerryLoop l;
    l.envelope = [magnitude](double) { return magnitude; };
    l.phase = [winding](double s) { return kTwoPi * winding * s; };
    l.phase_rate = [winding](double) { return kTwoPi * winding; };
    l.splitting = splitting;
    l.branch = branch;
    return l;
  }

  void validate() const {
    if (!envelope || !phase || !phase_rate) throw DomainError("BerryLoop: envelope and phase path are required");
    if (branch != 1 && branch != -1) throw DomainError("BerryLoop: branch must be +1 or -1");
    if (!std::isfinite(splitting)) throw DomainError("BerryLoop: splitting must be finite");
    const double w = (phase(1.0) - phase(0.0)) / kTwoPi;
    if (std::abs(w - std::round(w)) > 1e-9) throw DomainError("BerryLoop: phase path is not closed (mod 2 pi)");
    if (std::abs(envelope(1.0) - envelope(0.0)) > 1e-9) throw DomainError("BerryLoop: envelope is not closed");
  }

  /// Two-level Hamiltonian at normalized time s.
  Eigen::Matrix2cd hamiltonian(double s) const {
    Eigen::Matrix2cd h;
    const Complex d = envelope(s) * std::polar(1.0, phase(s));
    h << -0.5 * splitting, d, std::conj(d), 0.5 * splitting;
    return h;
  }

  /// Half the instantaneous gap, sqrt((w/2)^2 + |D|^2).
  double half_gap(double s) const { return std::hypot(0.5 * splitting, envelope(s)); }
};

/// gamma_l = (l/2) int ds |D|^2 / F_l * dphi3/ds, evaluated through
/// |D|^2 / F_l = 1 + l a / sqrt(a^2 + |D|^2) (a = splitting/2), which is the
/// same function without the removable 0/0 at |D| = 0.
inline double berry_phase_closed(const BerryLoop& loop) {
  loop.validate();
  const double a = 0.5 * loop.splitting;
  const double l = loop.branch;
  auto integrand = [&](double s) {
    const double e = loop.half_gap(s);
    if (e < 1e-300) throw DomainError("berry_phase_closed: F_l vanishes (levels degenerate) on the path");
    return 0.5 * l * (1.0 + l * a / e) * loop.phase_rate(s);
  };
  double err = 0.0;
  const double g = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15, 1e-9, &err);
  return g;
}

struct BerryNumeric {
  double duration = 0.0;
  double gamma = 0.0;          // geometric phase in (-pi, pi]
  double dynamical = 0.0;      // int E(t) dt of the transported level
  double min_gap = 0.0;        // 2 min_s half_gap
  bool adiabatic_warning = false;  // duration * min_gap < 20
  std::size_t steps = 0;
};

/// Transports the upper instantaneous eigenstate around the loop over
/// `duration` and strips the dynamical phase.  The branch l only selects the
/// closed-form representative; both are the same phase mod 2 pi.
inline BerryNumeric berry_phase_numeric(const BerryLoop& loop, double duration, double dt = 0.0) {
  loop.validate();
  if (!(duration > 0.0) || !std::isfinite(duration)) throw DomainError("berry_phase_numeric: duration must be positive");
  BerryNumeric r;
  r.duration = duration;
  r.min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 1000; ++i) r.min_gap = std::min(r.min_gap, 2.0 * loop.half_gap(i / 1000.0));
  if (r.min_gap <= 0.0) throw DomainError("berry_phase_numeric: levels degenerate on the path");
  r.adiabatic_warning = duration * r.min_gap < 20.0;

  double hmax = 0.0;
  for (int i = 0; i <= 1000; ++i) hmax = std::max(hmax, loop.half_gap(i / 1000.0));
  if (dt <= 0.0) dt = std::min(0.01 / hmax, duration / 2000.0);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es0(loop.hamiltonian(0.0));
  const Eigen::VectorXcd psi0 = es0.eigenvectors().col(1);
  TimeDependentHamiltonian h = [&](double t) { return Eigen::MatrixXcd(loop.hamiltonian(t / duration)); };
  const auto tr = evolve(h, psi0, duration, dt, {1, false});
  r.steps = tr.steps;

  double err = 0.0;
  r.dynamical = duration * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                               [&](double s) { return loop.half_gap(s); }, 0.0, 1.0, 15, 1e-12, &err);
  r.gamma = wrap_signed(std::arg(psi0.dot(tr.final_state)) + r.dynamical);
  return r;
}

struct BerryComparison {
  double duration = 0.0;
  double gamma_closed = 0.0;
  double gamma_numeric = 0.0;  // the representative closest to gamma_closed
  double residual = 0.0;       // |gamma_numeric - gamma_closed|
  double relative = 0.0;       // residual / |gamma_closed|
  bool adiabatic_warning = false;
};

inline BerryComparison compare_berry(const BerryLoop& loop, double duration, double dt = 0.0) {
  BerryComparison c;
  c.duration = duration;
  c.gamma_closed = berry_phase_closed(loop);
  const auto n = berry_phase_numeric(loop, duration, dt);
  c.gamma_numeric = c.gamma_closed + wrap_signed(n.gamma - c.gamma_closed);
  c.residual = std::abs(c.gamma_numeric - c.gamma_closed);
  c.relative = c.gamma_closed == 0.0 ? c.residual : c.residual / std::abs(c.gamma_closed);
  c.adiabatic_warning = n.adiabatic_warning;
  return c;
}

/// Constant energy shift that, applied to the pair for the whole loop,
/// cancels the dynamical phase of the transported level.
inline double compensating_shift(const BerryLoop& loop, double duration) {
  return -berry_phase_numeric(loop, duration).dynamical / duration;
}

}  // namespace pfq
