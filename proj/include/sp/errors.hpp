#pragma once

// Discrete error channels acting on the {|down>,|e>} subspaces of both ions,
// their injection into the pumping cycle, and steady-state error-slope fits.

#include <string>
#include <variant>
#include <vector>

#include "sp/protocol.hpp"

namespace sp {

enum class PauliIndex { I0, X, Y, Z };
PauliIndex pauli_index_from_char(char c);  // '0', 'x', 'y', 'z'

enum class InsertionPoint { AfterA, AfterB, AfterC };

struct PauliPairChannel {     // rho -> (1-p) rho + p M rho M^dag
  PauliIndex i, j;
};
struct CorrelatedRotation {   // U_i(sqrt(2p)) per cycle
  PauliIndex axis;            // X or Z
};
struct SpinMotionKraus {};    // Kraus pair built from I_e X_e + X_e I_e
struct StarkPhaseError {};    // relative |up down> / |down up> phase per cycle

using ErrorKind =
    std::variant<PauliPairChannel, CorrelatedRotation, SpinMotionKraus, StarkPhaseError>;

struct ErrorChannelSpec {
  ErrorKind kind;
  InsertionPoint where = InsertionPoint::AfterA;

  static ErrorChannelSpec parse(const std::string& name);  // "x0", "0z", "corr_x", ...
  std::string name() const;
};

// --- elementary operators ---------------------------------------------------------

// sigma_{i,de} on the full qutrit: sigma_0 is the 3x3 identity, the x/y/z
// Paulis act on {|down>,|e>} and leave |up> untouched.
Operator pauli_de(PauliIndex i);

// M_{i,j} = exp(-i (pi/2) sigma_{i,de} (x) sigma_{j,de}), unitary, 9-dim
Operator error_operator(PauliIndex i, PauliIndex j);

// {sqrt(1-p) I, sqrt(p) M}
KrausChannel depolarizing_injection(const Operator& m, double p);

// U_i(eps) = exp(i eps/2 sigma_{i,de}) (x) exp(i eps/2 sigma_{i,de}), axis x or z
Operator correlated_rotation(PauliIndex axis, double eps);

// Two-element channel {E0, E1 = sqrt(p/2)(I_e X_e + X_e I_e)}; E0 completed by
// Cholesky of I - E1^dag E1. Flip probability from |dd> equals p. p in [0, 1/2].
KrausChannel spin_motion_kraus(double p);

// Unitary imprinting the relative phase phi = 2 eps Delta t between |up down>
// and |down up>.
Operator stark_phase_unitary(double phi);
Operator stark_phase_error(double eps, double delta, double t);  // phi = 2 eps Delta t
double flip_probability(double phi);                             // sin^2(phi/2)

// exp(i theta/2 sigma_x) (x) exp(i theta(1+eps)/2 sigma_x); |eps| <= 0.2
Operator drive_C_imbalance(double theta, double eps);

// Singlet repump probability of one imbalanced drive C: 1 - |<S|U|S>|^2.
double imbalance_repump_probability(double theta, double eps);

// Least-squares fit of p(eps) = c eps^2 over an epsilon grid.
double imbalance_coefficient(double theta, const std::vector<double>& eps_grid);

// --- error injection and steady-state analysis -----------------------------------------

// Superoperator of one error channel at strength p (probability for the
// PauliPair/SpinMotion kinds; for CorrelatedRotation eps = sqrt(2p) and for
// StarkPhase phi = p is taken as the phase in radians).
SuperOperator error_superop(const ErrorKind& kind, double p);

// Cycle maps with the error inserted at the configured point of every cycle.
CycleMaps perturbed_cycle(const ProtocolParams& params, const ErrorChannelSpec& spec, double p);

// 1 - <S| rho_ss |S> of the perturbed cycle (even-cycle steady state when
// the schedule alternates).
double steady_state_error(const ProtocolParams& params, const ErrorChannelSpec& spec, double p);

struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 1;
  bool nonlinear = false;  // set when R^2 < 0.99
  std::vector<double> errors;  // per grid point
};

// Default grid per the linear-regime fit: {1e-4, 3e-4, 1e-3, 3e-3, 1e-2}.
extern const std::vector<double> kDefaultSlopeGrid;

SlopeFit steady_state_error_slope(const ProtocolParams& params, const ErrorChannelSpec& spec,
                                  const std::vector<double>& p_grid = kDefaultSlopeGrid);

// Reference parameters the error-slope figures are produced at:
// constant schedule, phi = pi/4, theta = 0.72 pi, gamma = 0.22 pi.
ProtocolParams error_analysis_params();

}  // namespace sp
