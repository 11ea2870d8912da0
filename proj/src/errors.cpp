#include "sp/errors.hpp"

#include <cmath>

namespace sp {

namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

const std::vector<double> kDefaultSlopeGrid = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2};

PauliIndex pauli_index_from_char(char c) {
  switch (c) {
    case '0': case 'i': case 'I': return PauliIndex::I0;
    case 'x': case 'X': return PauliIndex::X;
    case 'y': case 'Y': return PauliIndex::Y;
    case 'z': case 'Z': return PauliIndex::Z;
  }
  fail(std::string("pauli_index_from_char: invalid index '") + c + "'");
}

Operator pauli_de(PauliIndex i) {
  Operator m((HilbertSpace({3})));
  switch (i) {
    case PauliIndex::I0:
      return Operator::identity(HilbertSpace({3}));
    case PauliIndex::X:
      m.at(0, 2) = 1;
      m.at(2, 0) = 1;
      break;
    case PauliIndex::Y:
      m.at(0, 2) = cx(0, -1);
      m.at(2, 0) = cx(0, 1);
      break;
    case PauliIndex::Z:
      m.at(0, 0) = 1;
      m.at(2, 2) = -1;
      break;
  }
  return m;
}

Operator error_operator(PauliIndex i, PauliIndex j) {
  return expm(cx(0, -kPi / 2) * kron(pauli_de(i), pauli_de(j)));
}

KrausChannel depolarizing_injection(const Operator& m, double p) {
  if (!(p >= 0 && p <= 1)) fail("depolarizing_injection: p out of [0, 1]");
  KrausChannel out;
  Operator e0 = Operator::identity(m.space());
  e0 *= cx(std::sqrt(1 - p), 0);
  Operator e1 = m;
  e1 *= cx(std::sqrt(p), 0);
  out.elements = {std::move(e0), std::move(e1)};
  return out;
}

Operator correlated_rotation(PauliIndex axis, double eps) {
  if (axis != PauliIndex::X && axis != PauliIndex::Z)
    fail("correlated_rotation: axis must be x or z");
  const Operator u1 = expm(cx(0, eps / 2) * pauli_de(axis));
  return kron(u1, u1);
}

KrausChannel spin_motion_kraus(double p) {
  if (!(p >= 0 && p <= 0.5)) fail("spin_motion_kraus: p out of [0, 1/2]");
  const Operator I3 = Operator::identity(HilbertSpace({3}));
  const Operator x = pauli_de(PauliIndex::X);
  Operator flip = kron(I3, x) + kron(x, I3);
  flip *= cx(std::sqrt(p / 2), 0);  // flip probability from |dd> is then p

  Operator rest = Operator::identity(flip.space()) - flip.adjoint() * flip;
  const Operator l = cholesky_psd(rest);
  KrausChannel out;
  out.elements = {l.adjoint(), std::move(flip)};
  return out;
}

Operator stark_phase_unitary(double phi) {
  if (!std::isfinite(phi)) fail("stark_phase_unitary: non-finite phase");
  Operator u = Operator::identity(two_ion_space());
  u.at(3, 3) = std::exp(cx(0, -phi / 2));  // |up down>
  u.at(1, 1) = std::exp(cx(0, +phi / 2));  // |down up>
  return u;
}

Operator stark_phase_error(double eps, double delta, double t) {
  if (!std::isfinite(eps) || !std::isfinite(delta) || !std::isfinite(t))
    fail("stark_phase_error: non-finite parameter");
  return stark_phase_unitary(2 * eps * delta * t);
}

double flip_probability(double phi) {
  const double s = std::sin(phi / 2);
  return s * s;
}

Operator drive_C_imbalance(double theta, double eps) {
  if (std::abs(eps) > 0.2) fail("drive_C_imbalance: |eps| must be <= 0.2");
  Operator sx((HilbertSpace({3})));
  sx.at(0, 1) = 1;
  sx.at(1, 0) = 1;
  return kron(expm(cx(0, theta / 2) * sx), expm(cx(0, theta * (1 + eps) / 2) * sx));
}

double imbalance_repump_probability(double theta, double eps) {
  const Operator u = drive_C_imbalance(theta, eps);
  const auto psi = singlet_ket();
  const auto upsi = u.apply(psi);
  cx overlap = 0;
  for (int k = 0; k < 9; ++k) overlap += std::conj(psi[k]) * upsi[k];
  return 1.0 - std::norm(overlap);
}

double imbalance_coefficient(double theta, const std::vector<double>& eps_grid) {
  if (eps_grid.empty()) fail("imbalance_coefficient: empty grid");
  // least squares through the origin of p vs eps^2
  double sxy = 0, sxx = 0;
  for (double e : eps_grid) {
    const double x = e * e;
    sxy += x * imbalance_repump_probability(theta, e);
    sxx += x * x;
  }
  return sxy / sxx;
}

ErrorChannelSpec ErrorChannelSpec::parse(const std::string& name) {
  ErrorChannelSpec out;
  if (name == "corr_x")
    out.kind = CorrelatedRotation{PauliIndex::X};
  else if (name == "corr_z")
    out.kind = CorrelatedRotation{PauliIndex::Z};
  else if (name == "spin_motion")
    out.kind = SpinMotionKraus{};
  else if (name == "stark")
    out.kind = StarkPhaseError{};
  else if (name.size() == 2)
    out.kind = PauliPairChannel{pauli_index_from_char(name[0]), pauli_index_from_char(name[1])};
  else
    fail("ErrorChannelSpec: unknown channel '" + name + "'");
  return out;
}

std::string ErrorChannelSpec::name() const {
  auto c = [](PauliIndex i) {
    switch (i) {
      case PauliIndex::I0: return '0';
      case PauliIndex::X: return 'x';
      case PauliIndex::Y: return 'y';
      case PauliIndex::Z: return 'z';
    }
    return '?';
  };
  if (const auto* pp = std::get_if<PauliPairChannel>(&kind))
    return std::string{c(pp->i), c(pp->j)};
  if (const auto* cr = std::get_if<CorrelatedRotation>(&kind))
    return cr->axis == PauliIndex::X ? "corr_x" : "corr_z";
  if (std::holds_alternative<SpinMotionKraus>(kind)) return "spin_motion";
  return "stark";
}

SuperOperator error_superop(const ErrorKind& kind, double p) {
  if (const auto* pp = std::get_if<PauliPairChannel>(&kind))
    return superop_from_kraus(depolarizing_injection(error_operator(pp->i, pp->j), p));
  if (const auto* cr = std::get_if<CorrelatedRotation>(&kind))
    return superop_from_unitary(correlated_rotation(cr->axis, std::sqrt(2 * p)));
  if (std::holds_alternative<SpinMotionKraus>(kind))
    return superop_from_kraus(spin_motion_kraus(p));
  return superop_from_unitary(stark_phase_unitary(p));  // p read as phase
}

CycleMaps perturbed_cycle(const ProtocolParams& params, const ErrorChannelSpec& spec, double p) {
  params.validate();
  const SuperOperator err = error_superop(spec.kind, p);
  const SuperOperator sa = superop_from_unitary(drive_A_unitary(params.phi));
  const SuperOperator sb = superop_from_kraus(drive_B_kraus(params.gamma));

  auto one_cycle = [&](double theta) {
    const SuperOperator sc = superop_from_unitary(drive_C_unitary(theta));
    switch (spec.where) {
      case InsertionPoint::AfterA: return compose(sc, compose(sb, compose(err, sa)));
      case InsertionPoint::AfterB: return compose(sc, compose(err, compose(sb, sa)));
      case InsertionPoint::AfterC: return compose(err, compose(sc, compose(sb, sa)));
    }
    fail("perturbed_cycle: bad insertion point");
  };

  CycleMaps out;
  if (const auto* c = std::get_if<ConstantSchedule>(&params.schedule)) {
    out.odd = one_cycle(c->theta);
    out.even = out.odd;
    out.composed = out.odd;
    out.alternating = false;
  } else {
    const auto& alt = std::get<AlternatingSchedule>(params.schedule);
    out.odd = one_cycle(alt.theta_odd);
    out.even = one_cycle(alt.theta_even);
    out.composed = compose(out.even, out.odd);
    out.alternating = true;
  }
  return out;
}

double steady_state_error(const ProtocolParams& params, const ErrorChannelSpec& spec, double p) {
  const CycleMaps maps = perturbed_cycle(params, spec, p);
  const SpectralResult res = spectral_analysis(maps.composed, MapKind::Discrete);
  return 1.0 - singlet_fidelity(res.steady_state);
}

SlopeFit steady_state_error_slope(const ProtocolParams& params, const ErrorChannelSpec& spec,
                                  const std::vector<double>& p_grid) {
  if (p_grid.size() < 2) fail("steady_state_error_slope: need at least two grid points");
  for (double p : p_grid)
    if (!(p > 0 && p < 0.01 + 1e-12)) fail("steady_state_error_slope: grid must lie in (0, 0.01]");

  SlopeFit fit;
  fit.errors.reserve(p_grid.size());
  for (double p : p_grid) fit.errors.push_back(steady_state_error(params, spec, p));

  const size_t n = p_grid.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t k = 0; k < n; ++k) {
    sx += p_grid[k];
    sy += fit.errors[k];
    sxx += p_grid[k] * p_grid[k];
    sxy += p_grid[k] * fit.errors[k];
    syy += fit.errors[k] * fit.errors[k];
  }
  const double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;

  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (size_t k = 0; k < n; ++k) {
    const double pred = fit.slope * p_grid[k] + fit.intercept;
    ss_res += (fit.errors[k] - pred) * (fit.errors[k] - pred);
    ss_tot += (fit.errors[k] - mean) * (fit.errors[k] - mean);
  }
  // flat (zero-error) channels are linear by construction
  fit.r_squared = ss_tot > 1e-24 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.nonlinear = fit.r_squared < 0.99;
  return fit;
}

ProtocolParams error_analysis_params() {
  return ProtocolParams{kPi / 4, 0.22 * kPi, ConstantSchedule{0.72 * kPi}};
}

}  // namespace sp
