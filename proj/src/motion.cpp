#include "sp/motion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace sp {

namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

Operator annihilation(int nmax) {
  Operator a((HilbertSpace({nmax})));
  for (int n = 1; n < nmax; ++n) a.at(n - 1, n) = std::sqrt(double(n));
  return a;
}

Operator spin_raise_sum() {  // sum over ions of |e><down|
  Operator up((HilbertSpace({3})));
  up.at(2, 0) = 1;
  const Operator I3 = Operator::identity(HilbertSpace({3}));
  return kron(up, I3) + kron(I3, up);
}

Operator sigma_z_de_sum() {  // sum over ions of |d><d| - |e><e|
  Operator z((HilbertSpace({3})));
  z.at(0, 0) = 1;
  z.at(2, 2) = -1;
  const Operator I3 = Operator::identity(HilbertSpace({3}));
  return kron(z, I3) + kron(I3, z);
}

}  // namespace

void PulseSpec::validate() const {
  if (fock_dim < 4) fail("PulseSpec: fock_dim must be >= 4");
  if (!(delta != 0) || !std::isfinite(delta)) fail("PulseSpec: invalid delta");
  if (!std::isfinite(eta * omega_or_default() / delta)) fail("PulseSpec: eta*omega/delta not finite");
  if (!(duration_or_default() > 0)) fail("PulseSpec: duration must be positive");
}

HilbertSpace motion_space(int fock_dim) { return HilbertSpace({3, 3, fock_dim}); }

Operator ms_hamiltonian(const PulseSpec& spec, double t) {
  spec.validate();
  const int nmax = spec.fock_dim;
  const Operator a = annihilation(nmax);

  const double theta_m = (spec.delta + spec.eps_m) * t + spec.phi_m;
  Operator osc = std::exp(cx(0, theta_m)) * a;
  osc += osc.adjoint();

  Operator spin = std::exp(cx(0, spec.phi_s + spec.eps_q * t)) * spin_raise_sum();
  spin += spin.adjoint();

  Operator h = kron(spin, osc);
  h *= cx(spec.eta * spec.omega_or_default() / 2, 0);
  return h;
}

// --- adaptive Dormand-Prince 4(5) on flat complex arrays -----------------------------

namespace {

// Dormand-Prince coefficients
const double kC[7] = {0, 1. / 5, 3. / 10, 4. / 5, 8. / 9, 1., 1.};
const double kA[7][6] = {
    {},
    {1. / 5},
    {3. / 40, 9. / 40},
    {44. / 45, -56. / 15, 32. / 9},
    {19372. / 6561, -25360. / 2187, 64448. / 6561, -212. / 729},
    {9017. / 3168, -355. / 33, 46732. / 5247, 49. / 176, -5103. / 18656},
    {35. / 384, 0., 500. / 1113, 125. / 192, -2187. / 6784, 11. / 84}};
const double kB5[7] = {35. / 384, 0., 500. / 1113, 125. / 192, -2187. / 6784, 11. / 84, 0.};
const double kB4[7] = {5179. / 57600,    0.,           7571. / 16695, 393. / 640,
                       -92097. / 339200, 187. / 2100., 1. / 40};

using Rhs = std::function<void(double, const std::vector<cx>&, std::vector<cx>&)>;
using StepCheck = std::function<void(const std::vector<cx>&)>;

struct RkOutcome {
  std::vector<cx> y;
  int steps = 0;
};

RkOutcome rk45(const Rhs& rhs, std::vector<cx> y, double t0, double t1, const RkOptions& opt,
               const StepCheck& check) {
  const size_t n = y.size();
  std::vector<std::vector<cx>> k(7, std::vector<cx>(n));
  std::vector<cx> ytmp(n), y5(n), y4(n);

  double t = t0;
  double h = (t1 - t0) / 100.0;
  const double hmin = (t1 - t0) * 1e-14;
  int steps = 0;
  bool have_k0 = false;

  while (t < t1) {
    if (t + h > t1) h = t1 - t;
    if (!have_k0) rhs(t, y, k[0]);

    for (int s = 1; s < 7; ++s) {
      for (size_t i = 0; i < n; ++i) {
        cx acc = y[i];
        for (int j = 0; j < s; ++j)
          if (kA[s][j] != 0.0) acc += h * kA[s][j] * k[j][i];
        ytmp[i] = acc;
      }
      rhs(t + kC[s] * h, ytmp, k[s]);
    }

    double err2 = 0;
    double ymax = 0;
    for (size_t i = 0; i < n; ++i) {
      cx acc5 = y[i], acc4 = y[i];
      for (int s = 0; s < 7; ++s) {
        if (kB5[s] != 0.0) acc5 += h * kB5[s] * k[s][i];
        if (kB4[s] != 0.0) acc4 += h * kB4[s] * k[s][i];
      }
      y5[i] = acc5;
      y4[i] = acc4;
      ymax = std::max(ymax, std::abs(acc5));
    }
    for (size_t i = 0; i < n; ++i) {
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      const double e = std::abs(y5[i] - y4[i]) / sc;
      err2 += e * e;
    }
    const double err = std::sqrt(err2 / n);

    if (err <= 1.0) {
      t += h;
      y.swap(y5);
      k[0] = k[6];  // FSAL
      have_k0 = true;
      ++steps;
      if (check) check(y);
    } else {
      have_k0 = false;
    }
    const double factor = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    h *= std::clamp(factor, 0.2, 5.0);
    if (h < hmin) throw std::runtime_error("rk45: step size underflow");
  }
  return {std::move(y), steps};
}

double top_fock_population(const std::vector<cx>& flat_rho, int spin_dim, int nmax) {
  // diagonal entries with oscillator index nmax-1 or nmax-2
  const int dim = spin_dim * nmax;
  double pop = 0;
  for (int s = 0; s < spin_dim; ++s)
    for (int n = nmax - 2; n < nmax; ++n) {
      const int idx = s * nmax + n;
      pop += flat_rho[static_cast<size_t>(idx) * dim + idx].real();
    }
  return pop;
}

}  // namespace

EvolutionResult evolve(const std::function<Operator(double)>& hamiltonian,
                       const DensityMatrix& rho0, const std::vector<Operator>& jumps,
                       double t0, double t1, const RkOptions& opt) {
  if (!(t1 > t0)) fail("evolve: need t1 > t0");
  const HilbertSpace space = rho0.space();
  const int dim = space.total();
  const bool is_motion = space.subsystems() == 3;
  const int nmax = is_motion ? space.dims()[2] : 0;
  const int spin_dim = is_motion ? dim / nmax : 0;

  if (is_motion) {
    // headroom: initial population above nmax - 3 must be negligible
    double pop = 0;
    for (int s = 0; s < spin_dim; ++s)
      for (int n = nmax - 3; n < nmax; ++n) pop += rho0.at(s * nmax + n, s * nmax + n).real();
    if (pop > 1e-10) fail("evolve: initial oscillator population too close to the truncation edge");
  }

  // classify jumps: diagonal dissipators apply elementwise
  std::vector<double> diag_coef;
  std::vector<Operator> general_jumps;
  for (const Operator& l : jumps) {
    bool diag = true;
    for (int i = 0; i < dim && diag; ++i)
      for (int j = 0; j < dim; ++j)
        if (i != j && l.at(i, j) != cx(0, 0)) { diag = false; break; }
    if (diag) {
      if (diag_coef.empty()) diag_coef.assign(static_cast<size_t>(dim) * dim, 0.0);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
          const double li = l.at(i, i).real(), lj = l.at(j, j).real();
          diag_coef[static_cast<size_t>(i) * dim + j] += li * lj - 0.5 * (li * li + lj * lj);
        }
    } else {
      general_jumps.push_back(l);
    }
  }

  Rhs rhs = [&](double t, const std::vector<cx>& y, std::vector<cx>& dy) {
    const Operator h = hamiltonian(t);
    Operator rho(space);
    rho.data() = y;
    const Operator hr = h * rho;
    // -i[H, rho] = -i(H rho - (H rho)^dagger) for Hermitian rho
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        const cx v = hr.at(i, j) - std::conj(hr.at(j, i));
        dy[static_cast<size_t>(i) * dim + j] = cx(0, -1) * v;
      }
    if (!diag_coef.empty())
      for (size_t k = 0; k < dy.size(); ++k) dy[k] += diag_coef[k] * y[k];
    for (const Operator& l : general_jumps) {
      const Operator ldl = l.adjoint() * l;
      const Operator sand = l * rho * l.adjoint();
      const Operator anti = ldl * rho + rho * ldl;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          dy[static_cast<size_t>(i) * dim + j] += sand.at(i, j) - 0.5 * anti.at(i, j);
    }
  };

  StepCheck check;
  if (is_motion)
    check = [&](const std::vector<cx>& y) {
      if (top_fock_population(y, spin_dim, nmax) > opt.truncation_guard)
        throw TruncationError("evolve: oscillator population reached the Fock truncation edge");
    };

  RkOutcome rk = rk45(rhs, rho0.op().data(), t0, t1, opt, check);

  Operator out(space);
  out.data() = std::move(rk.y);
  // Hermitize accumulated integrator drift
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      const cx v = 0.5 * (out.at(i, j) + std::conj(out.at(j, i)));
      out.at(i, j) = v;
      out.at(j, i) = std::conj(v);
    }
  EvolutionResult res;
  res.trace_drift = std::abs(out.trace() - cx(1, 0));
  if (res.trace_drift > 1e-6)
    throw std::runtime_error("evolve: trace drift exceeded 1e-6");
  res.state = DensityMatrix::trusted(out, 1e-8, 1e-6);
  res.spin_state = is_motion
                       ? DensityMatrix::trusted(partial_trace(out, {0, 1}), 1e-8, 1e-6)
                       : res.state;
  res.steps = rk.steps;

  if (is_motion) {
    // phonon-number gain relative to the initial state
    const Operator adag_a = kron(Operator::identity(HilbertSpace({3, 3})),
                                 annihilation(nmax).adjoint() * annihilation(nmax));
    auto nbar = [&](const Operator& r) {
      cx s = 0;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) s += r.at(i, j) * adag_a.at(j, i);
      return s.real();
    };
    res.alpha_mag = std::sqrt(std::max(0.0, nbar(out) - nbar(rho0.op())));
  }
  return res;
}

std::vector<cx> evolve_state(const std::function<Operator(double)>& hamiltonian,
                             std::vector<cx> psi, double t0, double t1, const RkOptions& opt) {
  Rhs rhs = [&](double t, const std::vector<cx>& y, std::vector<cx>& dy) {
    const Operator h = hamiltonian(t);
    auto hy = h.apply(y);
    for (size_t i = 0; i < hy.size(); ++i) dy[i] = cx(0, -1) * hy[i];
  };
  return rk45(rhs, std::move(psi), t0, t1, opt, nullptr).y;
}

Operator integrate_propagator(const std::function<Operator(double)>& hamiltonian,
                              const HilbertSpace& space, double t0, double t1,
                              const RkOptions& opt) {
  const int dim = space.total();
  Rhs rhs = [&](double t, const std::vector<cx>& y, std::vector<cx>& dy) {
    const Operator h = hamiltonian(t);
    Operator u(space);
    u.data() = y;
    const Operator hu = h * u;
    for (size_t k = 0; k < dy.size(); ++k) dy[k] = cx(0, -1) * hu.data()[k];
  };
  RkOutcome rk = rk45(rhs, Operator::identity(space).data(), t0, t1, opt, nullptr);
  Operator u(space);
  u.data() = std::move(rk.y);
  (void)dim;
  return u;
}

AlphaPhi alpha_phi_closed_form(double t, double eta, double omega, double delta) {
  if (delta == 0) fail("alpha_phi_closed_form: delta must be nonzero");
  const cx alpha = cx(0, -1) * (eta * omega / delta) * std::exp(cx(0, -delta * t / 2)) *
                   std::sin(delta * t / 2);
  const double phi =
      eta * eta * omega * omega / (4 * delta * delta) * (delta * t - std::sin(delta * t));
  return {alpha, phi};
}

std::vector<PulseSpec> drive_A_pulses(const PulseSpec& base) {
  PulseSpec p1 = base;
  p1.phi_s = 0;
  p1.phi_m = 0;
  PulseSpec p2 = base;
  p2.phi_s = 0;
  p2.phi_m = kPi - base.delta * base.duration_or_default();
  return {p1, p2};
}

namespace {

std::function<Operator(double)> hamiltonian_of(const PulseSpec& spec) {
  return [spec](double t) { return ms_hamiltonian(spec, t); };
}

std::vector<cx> plus_plus_vacuum(int nmax) {
  // |+> = (|down> + |e>)/sqrt2 on each ion, oscillator in |0>
  std::vector<cx> psi(static_cast<size_t>(9) * nmax, cx(0, 0));
  const double half = 0.5;
  for (int s1 : {0, 2})
    for (int s2 : {0, 2}) psi[static_cast<size_t>((s1 * 3 + s2)) * nmax] = half;
  return psi;
}

}  // namespace

Tomography displacement_tomography(const std::vector<PulseSpec>& pulses, double t_stop,
                                   const RkOptions& opt) {
  if (pulses.empty()) fail("displacement_tomography: no pulses");
  const int nmax = pulses.front().fock_dim;
  std::vector<cx> psi = plus_plus_vacuum(nmax);

  double t = 0;
  for (const PulseSpec& p : pulses) {
    const double tend = t + p.duration_or_default();
    const double stop = (t_stop >= 0) ? std::min(tend, t_stop) : tend;
    if (stop > t) psi = evolve_state(hamiltonian_of(p), std::move(psi), t, stop, opt);
    t = tend;
    if (t_stop >= 0 && t >= t_stop) break;
  }

  // alpha = <a>/2 on the S = +2 eigenstate
  const Operator a = annihilation(nmax);
  cx a_exp = 0;
  for (int s = 0; s < 9; ++s)
    for (int n = 1; n < nmax; ++n)
      a_exp += std::conj(psi[static_cast<size_t>(s) * nmax + n - 1]) * a.at(n - 1, n) *
               psi[static_cast<size_t>(s) * nmax + n];
  const cx alpha = a_exp / 2.0;

  // overlap with |++> (x) |coh(2 alpha)> carries the phase e^{-4 i Phi}
  std::vector<cx> coh(nmax);
  coh[0] = std::exp(-0.5 * std::norm(2.0 * alpha));
  for (int n = 1; n < nmax; ++n) coh[n] = coh[n - 1] * (2.0 * alpha) / std::sqrt(double(n));
  cx overlap = 0;
  for (int s1 : {0, 2})
    for (int s2 : {0, 2})
      for (int n = 0; n < nmax; ++n)
        overlap += 0.5 * std::conj(coh[n]) * psi[static_cast<size_t>((s1 * 3 + s2)) * nmax + n];
  return {alpha, -std::arg(overlap) / 4.0};
}

PulseSequenceResult drive_A_pulse_sequence(const PulseSpec& base, const DensityMatrix& rho0,
                                           const RkOptions& opt) {
  base.validate();
  const int nmax = base.fock_dim;
  const HilbertSpace space = motion_space(nmax);
  if (!(rho0.space() == space)) fail("drive_A_pulse_sequence: state space mismatch");

  const auto pulses = drive_A_pulses(base);
  const double t1 = base.duration_or_default();

  // full propagator of the pair (closed dynamics)
  Operator u = integrate_propagator(hamiltonian_of(pulses[0]), space, 0, t1, opt);
  const Operator u2 = integrate_propagator(hamiltonian_of(pulses[1]), space, t1, 2 * t1, opt);
  u = u2 * u;

  PulseSequenceResult out;

  // evolve the given state through the pair
  Operator rho = u * rho0.op() * u.adjoint();
  EvolutionResult& ev = out.evolution;
  ev.state = DensityMatrix::trusted(rho, 1e-8, 1e-8);
  ev.spin_state = DensityMatrix::trusted(partial_trace(rho, {0, 1}), 1e-8, 1e-8);

  const Tomography tom = displacement_tomography(pulses, -1, opt);
  ev.alpha_mag = std::sqrt(2.0) * std::abs(tom.alpha);
  ev.geometric_phase = tom.phi;

  // reduced spin channel from the |0> oscillator start:
  // E[(k,l),(i,j)] = sum_n W[(k,n),i] conj(W[(l,n),j]), W = U (I_spin (x) |0>)
  std::vector<cx> w(static_cast<size_t>(9 * nmax) * 9);
  for (int row = 0; row < 9 * nmax; ++row)
    for (int i = 0; i < 9; ++i)
      w[static_cast<size_t>(row) * 9 + i] = u.at(row, i * nmax + 0);
  std::vector<cx> chan(81 * 81, cx(0, 0));
  auto vec9 = [](int r, int c) { return c * 9 + r; };
  for (int k = 0; k < 9; ++k)
    for (int l = 0; l < 9; ++l)
      for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) {
          cx acc = 0;
          for (int n = 0; n < nmax; ++n)
            acc += w[static_cast<size_t>(k * nmax + n) * 9 + i] *
                   std::conj(w[static_cast<size_t>(l * nmax + n) * 9 + j]);
          chan[static_cast<size_t>(vec9(k, l)) * 81 + vec9(i, j)] = acc;
        }
  out.spin_channel = SuperOperator(two_ion_space(), std::move(chan));

  Operator uspin(two_ion_space());
  for (int k = 0; k < 9; ++k)
    for (int i = 0; i < 9; ++i) uspin.at(k, i) = u.at(k * nmax + 0, i * nmax + 0);
  out.spin_propagator = std::move(uspin);
  return out;
}

double propagator_distance(const Operator& u, const Operator& v) {
  // align the global phase by tr(V^dagger U)
  cx t = 0;
  for (int i = 0; i < u.dim(); ++i)
    for (int j = 0; j < u.dim(); ++j) t += std::conj(v.at(i, j)) * u.at(i, j);
  const cx phase = std::abs(t) > 0 ? t / std::abs(t) : cx(1, 0);
  Operator diff = u;
  diff -= phase * v;
  return diff.max_abs();
}

// --- gates and the protocol with motion ------------------------------------------------

namespace {

std::vector<cx> dd_vacuum(int nmax) {
  std::vector<cx> psi(static_cast<size_t>(9) * nmax, cx(0, 0));
  psi[0] = 1;
  return psi;
}

Operator dephasing_jump(double gamma_rate, int nmax) {
  Operator l = kron(sigma_z_de_sum(), Operator::identity(HilbertSpace({nmax})));
  l *= cx(std::sqrt(gamma_rate), 0);
  return l;
}

PulseSpec spec_from_gate_error(const GateErrorSpec& err, double delta) {
  PulseSpec s;
  s.delta = delta;
  s.eps_q = err.eps_q;
  s.eps_m = err.eps_m;
  s.omega = (1 + err.eps_rabi) * (2 * kPi * 15e3) / (2 * s.eta);
  s.fock_dim = err.fock_dim;
  return s;
}

double bell_error_of_spin_state(const Operator& spin_rho) {
  // target (|dd> - i|ee>)/sqrt2
  std::vector<cx> bell(9, cx(0, 0));
  bell[0] = 1 / std::sqrt(2.0);
  bell[8] = cx(0, -1) / std::sqrt(2.0);
  cx f = 0;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) f += std::conj(bell[i]) * spin_rho.at(i, j) * bell[j];
  return 1.0 - f.real();
}

// evolve rho through one pulse, unitary or dephasing
Operator run_pulse(const PulseSpec& p, const Operator& rho, double t0, double t1,
                   double dephasing_rate, const RkOptions& opt) {
  std::vector<Operator> jumps;
  if (dephasing_rate > 0) jumps.push_back(dephasing_jump(dephasing_rate, p.fock_dim));
  const EvolutionResult ev = evolve(hamiltonian_of(p), DensityMatrix::trusted(rho, 1e-7, 1e-6),
                                    jumps, t0, t1, opt);
  return ev.state.op();
}

}  // namespace

double ms_gate_fidelity_error(int loops, const GateErrorSpec& err, const RkOptions& opt) {
  if (loops != 1 && loops != 2) fail("ms_gate_fidelity_error: loops must be 1 or 2");
  const double base_delta = 2 * kPi * 15e3;
  PulseSpec s = spec_from_gate_error(err, loops == 1 ? base_delta : std::sqrt(2.0) * base_delta);
  // the Rabi-error convention references the base detuning
  s.omega = (1 + err.eps_rabi) * base_delta / (2 * s.eta);
  const double t_loop = 2 * kPi / s.delta;

  const int nmax = s.fock_dim;
  Operator rho(motion_space(nmax));
  {
    const auto psi = dd_vacuum(nmax);
    for (size_t i = 0; i < psi.size(); ++i)
      for (size_t j = 0; j < psi.size(); ++j)
        rho.at(static_cast<int>(i), static_cast<int>(j)) = psi[i] * std::conj(psi[j]);
  }

  if (loops == 1) {
    PulseSpec p = s;
    p.phi_m = 0;
    rho = run_pulse(p, rho, 0, t_loop, err.dephasing_rate, opt);
  } else {
    PulseSpec p1 = s;
    p1.phi_m = 0;
    PulseSpec p2 = s;
    p2.phi_m = kPi - s.delta * t_loop;  // pi motional-phase flip at the midpoint
    rho = run_pulse(p1, rho, 0, t_loop, err.dephasing_rate, opt);
    rho = run_pulse(p2, rho, t_loop, 2 * t_loop, err.dephasing_rate, opt);
  }
  return bell_error_of_spin_state(partial_trace(rho, {0, 1}));
}

double protocol_motion_error(const GateErrorSpec& err, int cycles, double gamma,
                             const RkOptions& opt) {
  if (cycles < 2 || cycles % 2 != 0) fail("protocol_motion_error: need an even cycle count");
  PulseSpec s = spec_from_gate_error(err, 2 * kPi * 15e3);
  const auto pulses = drive_A_pulses(s);
  const double t1 = s.duration_or_default();
  const int nmax = s.fock_dim;
  const HilbertSpace space = motion_space(nmax);
  const Operator i_osc = Operator::identity(HilbertSpace({nmax}));

  // spin-sector drives, lifted to the motion space
  std::vector<Operator> b_kraus;
  for (const Operator& e : drive_B_kraus(gamma).elements) b_kraus.push_back(kron(e, i_osc));
  const Operator c_odd = kron(drive_C_unitary(kPi), i_osc);
  const Operator c_even = kron(drive_C_unitary(kPi / 2), i_osc);

  const bool unitary = err.dephasing_rate <= 0;
  Operator u_pair(space);
  if (unitary) {
    Operator u1 = integrate_propagator(hamiltonian_of(pulses[0]), space, 0, t1, opt);
    const Operator u2 = integrate_propagator(hamiltonian_of(pulses[1]), space, t1, 2 * t1, opt);
    u_pair = u2 * u1;
  }

  Operator rho(space);
  rho.at(0, 0) = 1;  // |dd> (x) |0>

  double cumulative_drift = 0;
  for (int n = 1; n <= cycles; ++n) {
    if (unitary) {
      rho = u_pair * rho * u_pair.adjoint();
    } else {
      rho = run_pulse(pulses[0], rho, 0, t1, err.dephasing_rate, opt);
      rho = run_pulse(pulses[1], rho, t1, 2 * t1, err.dephasing_rate, opt);
    }
    Operator after_b(space);
    for (const Operator& e : b_kraus) after_b += e * rho * e.adjoint();
    const Operator& c = (n % 2 == 1) ? c_odd : c_even;
    rho = c * after_b * c.adjoint();
    const double tr = rho.trace().real();
    cumulative_drift += std::abs(tr - 1);
    if (cumulative_drift > 1e-6)
      throw std::runtime_error("protocol_motion_error: cumulative trace drift exceeded 1e-6");
    if (std::abs(tr - 1) > 1e-9) rho *= cx(1.0 / tr, 0);
  }
  const Operator spin = partial_trace(rho, {0, 1});
  const DensityMatrix spin_dm = DensityMatrix::trusted(spin, 1e-7, 1e-6);
  return 1.0 - singlet_fidelity(spin_dm);
}

SweepKind sweep_kind_from_string(const std::string& s) {
  if (s == "qubit_freq") return SweepKind::QubitFreq;
  if (s == "motional_freq") return SweepKind::MotionalFreq;
  if (s == "rabi") return SweepKind::Rabi;
  if (s == "dephasing") return SweepKind::Dephasing;
  fail("sweep kind must be qubit_freq|motional_freq|rabi|dephasing");
}

std::string to_string(SweepKind k) {
  switch (k) {
    case SweepKind::QubitFreq: return "qubit_freq";
    case SweepKind::MotionalFreq: return "motional_freq";
    case SweepKind::Rabi: return "rabi";
    case SweepKind::Dephasing: return "dephasing";
  }
  return "?";
}

std::vector<double> default_sweep_grid(SweepKind kind, int points, double delta) {
  std::vector<double> g(points);
  const double top = kind == SweepKind::Rabi ? 0.1
                   : kind == SweepKind::Dephasing ? delta / 100
                                                  : delta / 10;
  for (int k = 0; k < points; ++k) g[k] = top * k / (points - 1);
  return g;
}

SweepRow error_sweep_point(SweepKind kind, double value, int cycles, const RkOptions& opt) {
  GateErrorSpec err;
  switch (kind) {
    case SweepKind::QubitFreq: err.eps_q = value; break;
    case SweepKind::MotionalFreq: err.eps_m = value; break;
    case SweepKind::Rabi: err.eps_rabi = value; break;
    case SweepKind::Dephasing: err.dephasing_rate = value; break;
  }
  auto with_retry = [&](auto fn) {
    try {
      return fn(err);
    } catch (const TruncationError&) {
      GateErrorSpec bigger = err;
      bigger.fock_dim += 5;  // automatic re-run with more headroom
      return fn(bigger);
    }
  };
  SweepRow row;
  row.error_value = value;
  row.gate1_error = with_retry([&](const GateErrorSpec& e) { return ms_gate_fidelity_error(1, e, opt); });
  row.gate2_error = with_retry([&](const GateErrorSpec& e) { return ms_gate_fidelity_error(2, e, opt); });
  row.protocol_error =
      with_retry([&](const GateErrorSpec& e) { return protocol_motion_error(e, cycles, 0.23 * kPi, opt); });
  return row;
}

std::string sweep_rows_to_csv(SweepKind kind, const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "error_kind,error_value,gate1_error,gate2_error,protocol_error\n";
  char buf[256];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g,%.12g,%.12g\n", to_string(kind).c_str(),
                  r.error_value, r.gate1_error, r.gate2_error, r.protocol_error);
    out << buf;
  }
  return out.str();
}

}  // namespace sp
