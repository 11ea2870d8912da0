#pragma once

// The discrete three-drive pumping cycle on two {|down>,|up>,|e>} ions:
// collective excitation (A), repump (B), symmetric ground-qubit drive (C).
//
// Basis per ion: 0 = |down>, 1 = |up>, 2 = |e>; two-ion index 3*i1 + i2.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sp/liouville.hpp"

namespace sp {

struct ConstantSchedule {
  double theta;
};
struct AlternatingSchedule {
  double theta_odd;   // applied in cycles 1, 3, 5, ...
  double theta_even;  // applied in cycles 2, 4, 6, ...
};
using Schedule = std::variant<ConstantSchedule, AlternatingSchedule>;

struct ProtocolParams {
  double phi = 0;    // collective-excitation angle
  double gamma = 0;  // branching angle, in (0, pi/2)
  Schedule schedule = ConstantSchedule{0};

  void validate() const;  // throws on non-finite angles or gamma out of range
};

struct Trajectory {
  std::vector<DensityMatrix> states;  // length N+1, includes the initial state
  std::vector<double> fidelities;     // singlet fidelity per entry
};

// --- fixed states and spaces ----------------------------------------------------

const HilbertSpace& two_ion_space();          // {3,3}
const HilbertSpace& ground_space();           // {2,2} reduced manifold
std::vector<cx> singlet_ket();                // (|up down> - |down up>)/sqrt(2), 9-dim
std::vector<cx> triplet_plus_ket();           // (|up down> + |down up>)/sqrt(2)
DensityMatrix singlet_state();
DensityMatrix down_down_state();
DensityMatrix ground_mixed_state();           // I/4 on the ground manifold

// --- drives ------------------------------------------------------------------------

// U_A(phi) = exp(-i phi S^2), S = sigma_{x,de} (x) 1 + 1 (x) sigma_{x,de)
Operator drive_A_unitary(double phi);

// Nine two-ion Kraus elements E_i (x) E_j from the single-ion set
// {E0 = |d><d| + |u><u|, E1 = sqrt(sin^2 gamma)|d><e|, E2 = sqrt(cos^2 gamma)|u><e|}
KrausChannel drive_B_kraus(double gamma);

// U_C(theta) = exp(i theta/2 sigma_x) (x) exp(i theta/2 sigma_x), ground qubit only
Operator drive_C_unitary(double theta);

// --- cycle maps ----------------------------------------------------------------------

struct CycleMaps {
  SuperOperator odd;       // for Constant schedules odd == even
  SuperOperator even;
  SuperOperator composed;  // even * odd (the per-cycle map itself when constant)
  bool alternating = false;
};

// Full 81x81 path, optionally with an error superoperator inserted into each
// cycle (after drive A by default; see errors.hpp).
CycleMaps cycle_superop(const ProtocolParams& p);

// Reduced 16x16 map on the 4-state ground manifold. Exact at phi = pi/4, where
// drives A+B close over the manifold; throws otherwise.
SuperOperator reduce_to_ground_manifold(const SuperOperator& full);
CycleMaps cycle_superop_reduced(const ProtocolParams& p);

// --- protocol dynamics ---------------------------------------------------------------

Trajectory run_protocol(const DensityMatrix& rho0, const ProtocolParams& p, int cycles);

// N0 in units of cycles: 1/(-ln lambda_max) for constant schedules,
// 2/(-ln lambda_+) for alternating (two cycles per composed map).
double convergence_rate_cycles(const ProtocolParams& p);

// lambda_pm = 1/4 (1 +- 3 sqrt(1 - 2/9 [2 + cos^4 gamma] sin^2(2 gamma)))
struct LambdaPair {
  double plus;
  double minus;
};
LambdaPair lambda_plus_closed_form(double gamma);

// --- optimization ----------------------------------------------------------------------

struct OptimizeResult {
  double theta;   // fixed pi for the alternating variant's odd drive
  double gamma;
  double n0;      // cycles
  double lambda_max;
};

struct GridSpec {
  int points_per_axis = 64;
  double theta_min = 0.02 * 3.14159265358979323846;
  double theta_max = 0.98 * 3.14159265358979323846;
  double gamma_min = 0.02 * 3.14159265358979323846;
  double gamma_max = 0.48 * 3.14159265358979323846;
};

// Grid minimum of lambda_max over (theta, gamma) at phi = pi/4 on the reduced
// map, refined by per-axis golden-section search.
OptimizeResult optimize_params_constant(const GridSpec& grid = {});

// Alternating {pi, pi/2}: 1-D optimization over gamma only.
OptimizeResult optimize_params_alternating(const GridSpec& grid = {});

// --- fidelity estimators ------------------------------------------------------------------

double singlet_fidelity(const DensityMatrix& rho);

struct ParityFidelity {
  double value;
  bool physical;  // false when the parity combination is outside the physical set
};
// F = 1/4 (1 - <xx> - <yy> - <zz>); inputs must each lie in [-1, 1]
ParityFidelity fidelity_from_parities(double xx, double yy, double zz);

// The three parities of a two-ion state (ground-manifold restriction).
struct Parities {
  double xx, yy, zz;
};
Parities parities_of(const DensityMatrix& rho);

// --- readout ---------------------------------------------------------------------------------

// Crosstalk correction, both expressions implemented exactly as printed:
//   P_uu    = [(1-p) P2 - p P1] / (1-p-q)
//   P_mixed = [(1-q) P2 - q P1] / (1-p-q)
// p: 1 bright recorded as 2; q: 2 bright recorded as 1. Requires p + q < 1.
struct ReadoutCorrected {
  double p_uu;
  double p_mixed;
};
ReadoutCorrected readout_correction(double p1_obs, double p2_obs, double p, double q);

// Average photons scattered over the full protocol: 4 csc^2(2 gamma).
// Returns +inf below 1e-6 rad (divergent limit).
double expected_scatter_count(double gamma);

// Trajectory CSV: header `cycle,fidelity,p_dd,p_uu,p_mixed,purity`.
std::string trajectory_to_csv(const Trajectory& t);

}  // namespace sp
