#pragma once

// Continuous version of the protocol: all three drives on simultaneously,
// convergence set by the Liouvillian gap.

#include <array>
#include <vector>

#include "sp/liouville.hpp"
#include "sp/protocol.hpp"

namespace sp {

struct ContinuousParams {
  double j = 1.0;       // collective excitation frequency (rad/s); gaps reported in units of j
  double omega_c = 0;   // drive-C Rabi frequency
  double beta = -1;     // spin-qubit detuning; negative means "use j"
  double gamma = 0;     // branching angle
  double kappa = 0;     // repump rate

  double beta_or_default() const { return beta < 0 ? j : beta; }
  // The adiabatic-elimination regime needs omega_c + kappa > j.
  bool effective_regime_valid() const { return omega_c + kappa > j; }
  void validate() const;
};

// H = J S^2 + (Omega_C/2)(sx (x) 1 + 1 (x) sx) + beta (n_up (x) 1 + 1 (x) n_up)
// jumps: sqrt(p_dn kappa)|d><e| and sqrt(p_up kappa)|u><e| per ion.
LindbladModel build_continuous_model(const ContinuousParams& p);

struct ContinuousGap {
  double gap_over_j = 0;
  double steady_fidelity = 0;
  bool degenerate = false;
  SpectralResult spectrum;
};
ContinuousGap continuous_gap(const ContinuousParams& p);

// --- dressed frame and effective dynamics ----------------------------------------

// chi_0 = (|dd> - |uu>)/sqrt2, chi_pm = (|dd> + |uu> +- sqrt2 |Psi+>)/2
struct DressedStates {
  std::vector<cx> chi_plus, chi_zero, chi_minus;
};
DressedStates dressed_states();

// Unitary basis change on the two-ion space: the four ground columns map the
// product ground basis onto {chi_+, chi_0, chi_-, singlet}; identity elsewhere.
Operator dressed_transform();

struct EffectiveModel {
  LindbladModel model;       // H_eff (+ single-excitation block) and all jumps
  std::array<cx, 3> c;       // C_+, C_0, C_-
  bool regime_valid = true;  // omega_c + kappa > j
};

// Closed-form effective couplings and jump operators after eliminating |ee>,
// combined with the untouched single-excitation dynamics and repump jumps.
EffectiveModel effective_model(const ContinuousParams& p);

double effective_gap(const ContinuousParams& p);

// Empirical convergence-rate formula (dimensionful, same units as kappa):
// 2.4 [ (cos^4 g + sin^4 g) kappa (Omega_C/2 * J/(kappa^2+Omega_C^2))^2
//       + sin^2 g cos^2 g kappa J^2/(kappa^2+Omega_C^2) ]
double empirical_rate(double j, double omega_c, double kappa, double gamma);

struct ContinuousOptimum {
  double omega_c, kappa, gamma;
  double gap_over_j;
  // the Hz conversions for a given J are reported by rate_hz below
};

struct ContinuousBounds {
  double omega_c_min = 0.3, omega_c_max = 8.0;  // units of J
  double kappa_min = 0.3, kappa_max = 12.0;
  double gamma_min = 0.05 * 3.14159265358979323846;
  double gamma_max = 0.45 * 3.14159265358979323846;
};

// Nelder-Mead direct search maximizing the numeric Liouvillian gap,
// multi-started from a 5x5x5 coarse grid (plus seeded jitter).
ContinuousOptimum optimize_continuous(const ContinuousBounds& bounds = {}, unsigned seed = 0);

// The paper-style frequency conversion is ambiguous about a factor of two
// (amplitude vs population rate); report both readings.
struct RateHz {
  double direct;   // gap_over_j * j_hz
  double doubled;  // 2 * gap_over_j * j_hz
};
RateHz rate_hz(double gap_over_j, double j_hz);

}  // namespace sp
