#pragma once

// Time-resolved simulation of the bichromatic collective drive on the full
// spin (x) spin (x) oscillator space, with frequency/Rabi/phase errors,
// optical-qubit dephasing, entangling-gate baselines, and the error sweeps
// comparing them against the pumping protocol.

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sp/liouville.hpp"
#include "sp/protocol.hpp"

namespace sp {

struct PulseSpec {
  double eta = 0.028;                        // Lamb-Dicke parameter
  double delta = 2 * 3.14159265358979323846 * 15e3;  // gate detuning (rad/s)
  double omega = 0;                          // carrier Rabi frequency; 0 -> delta/(2 eta)
  double eps_q = 0;                          // qubit frequency error (rad/s)
  double eps_m = 0;                          // motional frequency error (rad/s)
  double phi_s = 0, phi_m = 0;               // spin and motional phases
  double duration = 0;                       // 0 -> one loop, 2 pi/delta
  int fock_dim = 12;

  double omega_or_default() const { return omega > 0 ? omega : delta / (2 * eta); }
  double duration_or_default() const {
    return duration > 0 ? duration : 2 * 3.14159265358979323846 / delta;
  }
  void validate() const;
};

struct RkOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double truncation_guard = 1e-6;  // abort when the top two Fock levels exceed this
};

// Raised when oscillator population reaches the truncation edge.
struct TruncationError : std::runtime_error {
  explicit TruncationError(const std::string& what) : std::runtime_error(what) {}
};

HilbertSpace motion_space(int fock_dim);  // {3, 3, fock_dim}

// H(t) = (eta hbar Omega / 2) S_{e,phi}(t) (x) [a e^{i((delta+eps_m)t + phi_m)} + h.c.]
// with S_{e,phi}(t) = sum_ions |e><down| e^{i(phi_s + eps_q t)} + h.c.
// (hbar = 1; Hermitian at every t by construction).
Operator ms_hamiltonian(const PulseSpec& spec, double t);

struct EvolutionResult {
  DensityMatrix state;                    // on the full spin (x) oscillator space
  DensityMatrix spin_state;               // oscillator traced out
  double alpha_mag = 0;                   // r.m.s. residual displacement, see below
  std::optional<double> geometric_phase;  // filled by drive_A_pulse_sequence
  double trace_drift = 0;
  int steps = 0;
};

// Master-equation evolution d rho/dt = -i[H(t), rho] + sum_j D[L_j] rho by an
// adaptive Dormand-Prince embedded 4(5) pair on the density matrix itself.
// Jumps may be empty (closed evolution).
EvolutionResult evolve(const std::function<Operator(double)>& hamiltonian,
                       const DensityMatrix& rho0, const std::vector<Operator>& jumps,
                       double t0, double t1, const RkOptions& opt = {});

// Pure-state variant for closed dynamics (used internally and by tomography).
std::vector<cx> evolve_state(const std::function<Operator(double)>& hamiltonian,
                             std::vector<cx> psi, double t0, double t1,
                             const RkOptions& opt = {});

// Propagator dU/dt = -i H(t) U over [t0, t1].
Operator integrate_propagator(const std::function<Operator(double)>& hamiltonian,
                              const HilbertSpace& space, double t0, double t1,
                              const RkOptions& opt = {});

struct AlphaPhi {
  cx alpha;
  double phi;
};
// alpha(t) = -i (eta Omega / delta) e^{-i delta t / 2} sin(delta t / 2),
// Phi(t) = (eta^2 Omega^2 / 4 delta^2)(delta t - sin(delta t)).
AlphaPhi alpha_phi_closed_form(double t, double eta, double omega, double delta);

// Interaction-picture tomography on the S_{x,e} = +2 eigenstate |++> (x) |0>:
// evolve through the given pulses, read alpha = <a>/2 and the collective phase
// from the overlap with |++> (x) |coherent(2 alpha)> under the e^{-i Phi S^2}
// convention.
struct Tomography {
  cx alpha;
  double phi;
};
Tomography displacement_tomography(const std::vector<PulseSpec>& pulses, double t_stop = -1,
                                   const RkOptions& opt = {});

// The two-pulse collective-excitation sequence: pulse 1 with phi_s1 = phi_m1 = 0,
// pulse 2 with phi_s2 = 0 and phi_m2 = pi - delta t (global time continues).
std::vector<PulseSpec> drive_A_pulses(const PulseSpec& base);

struct PulseSequenceResult {
  EvolutionResult evolution;
  SuperOperator spin_channel;  // 81x81 reduced channel from the |0> oscillator start
  Operator spin_propagator;    // overlap block <spin, 0| U |spin', 0>
};

// evolution.alpha_mag is the r.m.s. phase-space displacement experienced by
// |dd> (sqrt(2) |alpha| for sector displacement alpha); its square equals the
// correlated bit-flip probability of the sequence.
PulseSequenceResult drive_A_pulse_sequence(const PulseSpec& base, const DensityMatrix& rho0,
                                           const RkOptions& opt = {});

// Max-abs distance between propagators after global-phase alignment.
double propagator_distance(const Operator& u, const Operator& v);

// --- gates and sweeps --------------------------------------------------------------------

struct GateErrorSpec {
  double eps_q = 0;
  double eps_m = 0;
  double eps_rabi = 0;      // fractional: Omega = (1 + eps_rabi) delta / (2 eta)
  double dephasing_rate = 0;  // Gamma for L = sqrt(Gamma)(sigma_z,de^(1) + sigma_z,de^(2))
  int fock_dim = 12;
};

// Bell error of a 1- or 2-loop entangling gate from |dd> (x) |0| against
// (|dd> - i |ee>)/sqrt(2). The two-loop gate runs at detuning sqrt(2) delta
// with a pi motional-phase flip at the midpoint (total length t sqrt(2)).
double ms_gate_fidelity_error(int loops, const GateErrorSpec& err, const RkOptions& opt = {});

// Singlet error of the pumping protocol run for `cycles` cycles from
// |dd> (x) |0>, alternating drive C {pi, pi/2}, branching gamma = 0.23 pi,
// fidelity read at the final (even) cycle.
double protocol_motion_error(const GateErrorSpec& err, int cycles = 80,
                             double gamma = 0.23 * 3.14159265358979323846,
                             const RkOptions& opt = {});

enum class SweepKind { QubitFreq, MotionalFreq, Rabi, Dephasing };
SweepKind sweep_kind_from_string(const std::string& s);
std::string to_string(SweepKind k);

struct SweepRow {
  double error_value;
  double gate1_error;
  double gate2_error;
  double protocol_error;
};

// Grid defaults follow the physical regime: coherent errors up to delta/10
// (fractional 0.1 for Rabi), dephasing up to delta/100.
std::vector<double> default_sweep_grid(SweepKind kind, int points = 9,
                                       double delta = 2 * 3.14159265358979323846 * 15e3);

SweepRow error_sweep_point(SweepKind kind, double value, int cycles = 80,
                           const RkOptions& opt = {});

std::string sweep_rows_to_csv(SweepKind kind, const std::vector<SweepRow>& rows);

}  // namespace sp
