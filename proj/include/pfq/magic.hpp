#pragma once

// Discrete Wigner function, contextuality score, strange states and the
// seeded random-word sampler over {X, S, H, U(theta)}.

#include "pfq/gates.hpp"

#include <random>
#include <string>
#include <thread>

namespace pfq {

/// Gauge-fixed pure qutrit state a|0> + e^{i d1} b|1> + e^{i d2} c|2>.
class QutritState {
 public:
  QutritState() : amps_(QutritVector::UnitX()) {}

  /// Normalizes and gauge-fixes; the first amplitude of modulus above 1e-9
  /// becomes real positive.
  explicit QutritState(const QutritVector& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("QutritState: zero or non-finite vector");
    amps_ = v / n;
    for (int k = 0; k < kClockDim; ++k)
      if (std::abs(amps_(k)) > kGaugeFloor) {
        amps_ *= std::abs(amps_(k)) / amps_(k);
        amps_(k) = std::abs(amps_(k));
        break;
      }
  }

  const QutritVector& amplitudes() const { return amps_; }
  double alpha() const { return std::abs(amps_(0)); }
  double beta() const { return std::abs(amps_(1)); }
  double gamma() const { return std::abs(amps_(2)); }
  double delta1() const { return phase_of(1); }
  double delta2() const { return phase_of(2); }

  Qutrit density() const { return amps_ * amps_.adjoint(); }

  static constexpr double kGaugeFloor = 1e-9;

 private:
  double phase_of(int k) const {
    return std::abs(amps_(k)) > kGaugeFloor ? wrap_angle(std::arg(amps_(k))) : 0.0;
  }

  QutritVector amps_;
};

struct WignerTable {
  std::array<double, kPhaseSpaceSize> values{};

  double at(PhasePoint p) const { return values[static_cast<std::size_t>(p.index())]; }
  double min() const { return *std::min_element(values.begin(), values.end()); }
  double sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }
};

/// A^{x,z} = D^{x,z} A^{0,0} D^{x,z dag},  A^{0,0} = (1/3) sum_{x,z} D^{x,z}.
inline Qutrit phase_point_operator(PhasePoint p) {
  static const Qutrit a00 = [] {
    Qutrit s = Qutrit::Zero();
    for (const auto& d : all_displacements()) s += d;
    return Qutrit(s / 3.0);
  }();
  const Qutrit d = displacement(p);
  return d * a00 * d.adjoint();
}

inline const std::array<Qutrit, kPhaseSpaceSize>& phase_point_operators() {
  static const std::array<Qutrit, kPhaseSpaceSize> ops = [] {
    std::array<Qutrit, kPhaseSpaceSize> a;
    for (int i = 0; i < kPhaseSpaceSize; ++i) a[static_cast<std::size_t>(i)] = phase_point_operator(PhasePoint::from_index(i));
    return a;
  }();
  return ops;
}

inline void require_density(const Qutrit& rho, const char* who) {
  if (!is_hermitian(rho, 1e-10)) throw DomainError(std::string(who) + ": density matrix is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-10) throw DomainError(std::string(who) + ": density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<Qutrit> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kTol.density_psd)
    throw DomainError(std::string(who) + ": density matrix is not positive semidefinite");
}

namespace detail {

inline std::array<double, kPhaseSpaceSize> phase_point_traces(const Qutrit& rho) {
  std::array<double, kPhaseSpaceSize> t{};
  const auto& a = phase_point_operators();
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = (a[i] * rho).trace().real();
  return t;
}

}  // namespace detail

/// W(p) = (1/3) Tr[A^p rho]; entries sum to 1.
inline WignerTable wigner(const Qutrit& rho) {
  require_density(rho, "wigner");
  WignerTable w;
  const auto t = detail::phase_point_traces(rho);
  for (std::size_t i = 0; i < t.size(); ++i) w.values[i] = t[i] / 3.0;
  return w;
}

struct ContextualityScore {
  double score_m = 0.0;     // max_p Tr[A^p rho]
  double wigner_min = 0.0;  // min_p Tr[A^p rho] = 3 min W
};

inline ContextualityScore contextuality_score(const Qutrit& rho) {
  require_density(rho, "contextuality_score");
  const auto t = detail::phase_point_traces(rho);
  return {*std::max_element(t.begin(), t.end()), *std::min_element(t.begin(), t.end())};
}

/// Same quantities for a pure state without the density validation.
inline ContextualityScore contextuality_score(const QutritState& s) {
  std::array<double, kPhaseSpaceSize> t{};
  const auto& a = phase_point_operators();
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = s.amplitudes().dot(a[i] * s.amplitudes()).real();
  return {*std::max_element(t.begin(), t.end()), *std::min_element(t.begin(), t.end())};
}

/// S_a = (|1> - |2>)/sqrt2 and its shifts S_b = X S_a, S_c = X^2 S_a.
inline std::array<QutritState, 3> strange_states() {
  QutritVector a(0.0, 1.0, -1.0);
  const Qutrit x = pauli_x();
  return {QutritState(a), QutritState(x * a), QutritState(x * x * a)};
}

/// All nine displaced copies D^p S_a, indexed by phase point.
inline std::array<QutritState, kPhaseSpaceSize> all_strange_states() {
  const QutritVector a(0.0, 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0));
  std::array<QutritState, kPhaseSpaceSize> out;
  for (int i = 0; i < kPhaseSpaceSize; ++i)
    out[static_cast<std::size_t>(i)] = QutritState(displacement(PhasePoint::from_index(i)) * a);
  return out;
}

/// (1/2) ||rho - sigma||_1 as half the sum of singular values.
template <typename A, typename B>
double trace_distance(const Eigen::MatrixBase<A>& rho, const Eigen::MatrixBase<B>& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw DomainError("trace_distance: dimension mismatch");
  const Eigen::MatrixXcd d = rho - sigma;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(d);
  return 0.5 * svd.singularValues().sum();
}

/// Pure-state shortcut sqrt(1 - |<a|b>|^2).
inline double trace_distance(const QutritState& a, const QutritState& b) {
  const double o = std::norm(a.amplitudes().dot(b.amplitudes()));
  return std::sqrt(std::max(0.0, 1.0 - o));
}

struct SamplerConfig {
  std::uint64_t seed = 7;
  std::size_t n = 5000;
  std::size_t length = 50;
  double theta = 1.0;
  bool clifford_only = false;
  unsigned workers = 1;
};

struct SampleRecord {
  std::size_t word_index = 0;
  std::string word;  // letters in application order
  QutritState state;
  double score_m = 0.0;
  double wigner_min = 0.0;
  std::array<double, 3> strange_distance{};  // to S_a, S_b, S_c
};

/// Letters of word `index`.  Each word owns a generator seeded from
/// (seed, index), so words can be produced in any order or in parallel.
inline std::string sample_word(const SamplerConfig& cfg, std::size_t index) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(cfg.seed), hi(cfg.seed), lo(index), hi(index)};
  std::mt19937_64 rng(seq);
  static constexpr char kLetters[4] = {'X', 'S', 'H', 'U'};
  const std::uint64_t k = cfg.clifford_only ? 3 : 4;
  std::string w(cfg.length, 'X');
  for (auto& c : w) c = kLetters[rng() % k];
  return w;
}

inline SampleRecord evaluate_word(const SamplerConfig& cfg, std::size_t index, const std::array<Qutrit, 4>& gates,
                                  const std::array<QutritState, 3>& strange) {
  SampleRecord r;
  r.word_index = index;
  r.word = sample_word(cfg, index);
  QutritVector v = QutritVector::UnitX();
  for (char c : r.word) {
    switch (c) {
      case 'X': v = gates[0] * v; break;
      case 'S': v = gates[1] * v; break;
      case 'H': v = gates[2] * v; break;
      default: v = gates[3] * v; break;
    }
  }
  r.state = QutritState(v);
  const auto score = contextuality_score(r.state);
  r.score_m = score.score_m;
  r.wigner_min = score.wigner_min;
  for (std::size_t k = 0; k < 3; ++k) r.strange_distance[k] = trace_distance(r.state, strange[k]);
  return r;
}

/// n records in word-index order; the output does not depend on cfg.workers.
inline std::vector<SampleRecord> sample_words(const SamplerConfig& cfg) {
  if (cfg.n == 0) throw DomainError("sample_words: n must be positive");
  if (!std::isfinite(cfg.theta)) throw DomainError("sample_words: theta must be finite");
  const Qutrit h = hadamard();
  const std::array<Qutrit, 4> gates = {pauli_x(), phase_gate(), h, Qutrit(h * ud_gate(cfg.theta) * h.adjoint())};
  const auto strange = strange_states();
  std::vector<SampleRecord> out(cfg.n);
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(std::min<std::size_t>(cfg.n, 256))));
  auto task = [&](unsigned w) {
    for (std::size_t i = w; i < cfg.n; i += workers) out[i] = evaluate_word(cfg, i, gates, strange);
  };
  if (workers == 1) {
    task(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(task, w);
    for (auto& t : pool) t.join();
  }
  return out;
}

/// Number of states distinct beyond `tol` in every gauge-fixed amplitude.
inline std::size_t count_distinct(std::vector<QutritState> states, double tol = kTol.state_distinct) {
  auto key = [](const QutritState& s) { return s.amplitudes()(0).real(); };
  std::sort(states.begin(), states.end(), [&](const QutritState& a, const QutritState& b) { return key(a) < key(b); });
  std::vector<const QutritState*> reps;
  for (const auto& s : states) {
    bool dup = false;
    for (auto it = reps.rbegin(); it != reps.rend() && key(s) - key(**it) <= tol; ++it)
      if (max_abs(QutritVector(s.amplitudes() - (*it)->amplitudes())) <= tol) {
        dup = true;
        break;
      }
    if (!dup) reps.push_back(&s);
  }
  return reps.size();
}

inline std::vector<QutritState> states_of(const std::vector<SampleRecord>& records) {
  std::vector<QutritState> s;
  s.reserve(records.size());
  for (const auto& r : records) s.push_back(r.state);
  return s;
}

/// Orbit of |0> under the group generated by X, S and H.
inline std::vector<QutritState> stabilizer_states() {
  const auto g = clifford_generators();
  std::vector<QutritState> orbit = {QutritState(QutritVector::UnitX())};
  for (std::size_t i = 0; i < orbit.size(); ++i)
    for (const Qutrit& m : {g.x, g.s, g.h}) {
      const QutritState next(m * orbit[i].amplitudes());
      bool seen = false;
      for (const auto& o : orbit)
        if (trace_distance(o, next) < 1e-9) seen = true;
      if (!seen) orbit.push_back(next);
    }
  return orbit;
}

struct CoverageReport {
  int bins = 12;
  std::size_t records = 0;
  std::size_t phase_cells_occupied = 0;
  std::size_t phase_cells_total = 0;
  std::size_t magnitude_cells_occupied = 0;
  std::size_t magnitude_cells_total = 0;
  std::size_t negative_wigner = 0;

  double phase_occupancy() const { return static_cast<double>(phase_cells_occupied) / static_cast<double>(phase_cells_total); }
  double magnitude_occupancy() const {
    return static_cast<double>(magnitude_cells_occupied) / static_cast<double>(magnitude_cells_total);
  }
};

/// Occupancy of a bins x bins grid over (delta1, delta2) in [0, 2pi)^2 and of
/// the triangular grid over (alpha^2, beta^2) with cells i + j <= bins - 1.
inline CoverageReport coverage_stats(const std::vector<SampleRecord>& records, int bins) {
  if (records.empty()) throw DomainError("coverage_stats: no records");
  if (bins < 1) throw DomainError("coverage_stats: bins must be positive");
  CoverageReport r;
  r.bins = bins;
  r.records = records.size();
  const auto b = static_cast<std::size_t>(bins);
  std::vector<char> phase(b * b, 0), mag(b * b, 0);
  auto cell = [&](double x) { return std::min<std::size_t>(b - 1, static_cast<std::size_t>(std::max(0.0, x) * bins)); };
  for (const auto& rec : records) {
    phase[cell(rec.state.delta1() / kTwoPi) * b + cell(rec.state.delta2() / kTwoPi)] = 1;
    const std::size_t i = cell(rec.state.alpha() * rec.state.alpha());
    std::size_t j = cell(rec.state.beta() * rec.state.beta());
    if (i + j > b - 1) j = b - 1 - i;
    mag[i * b + j] = 1;
    if (rec.wigner_min < -kTol.density_psd) ++r.negative_wigner;  // stabilizer states round to -1e-16
  }
  r.phase_cells_total = b * b;
  r.magnitude_cells_total = b * (b + 1) / 2;
  r.phase_cells_occupied = static_cast<std::size_t>(std::count(phase.begin(), phase.end(), 1));
  r.magnitude_cells_occupied = static_cast<std::size_t>(std::count(mag.begin(), mag.end(), 1));
  return r;
}

struct NearestStrange {
  std::string label;  // "S_a", "S_b", "S_c"
  std::size_t word_index = 0;
  double distance = 1.0;
  double score_m = 0.0;
  double wigner_min = 0.0;
};

/// For each of S_a, S_b, S_c the record closest in trace distance (lowest word
/// index on ties).
inline std::array<NearestStrange, 3> nearest_strange_report(const std::vector<SampleRecord>& records) {
  if (records.empty()) throw DomainError("nearest_strange_report: no records");
  std::array<NearestStrange, 3> out;
  const char* labels[3] = {"S_a", "S_b", "S_c"};
  for (std::size_t k = 0; k < 3; ++k) {
    out[k].label = labels[k];
    out[k].distance = std::numeric_limits<double>::infinity();
    for (const auto& r : records)
      if (r.strange_distance[k] < out[k].distance) {
        out[k].distance = r.strange_distance[k];
        out[k].word_index = r.word_index;
        out[k].score_m = r.score_m;
        out[k].wigner_min = r.wigner_min;
      }
  }
  return out;
}

}  // namespace pfq
