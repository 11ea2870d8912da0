#include "sp/continuous.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sp {

namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

Operator sigma_x_de() {
  Operator m((HilbertSpace({3})));
  m.at(2, 0) = 1;
  m.at(0, 2) = 1;
  return m;
}

Operator sigma_x_ground() {
  Operator m((HilbertSpace({3})));
  m.at(0, 1) = 1;
  m.at(1, 0) = 1;
  return m;
}

Operator n_up() {
  Operator m((HilbertSpace({3})));
  m.at(1, 1) = 1;
  return m;
}

// single-ion decay |target><e| embedded on the chosen ion
Operator jump_op(int ion, int target, double rate) {
  Operator l((HilbertSpace({3})));
  l.at(target, 2) = std::sqrt(rate);
  const Operator I3 = Operator::identity(HilbertSpace({3}));
  return ion == 0 ? kron(l, I3) : kron(I3, l);
}

}  // namespace

void ContinuousParams::validate() const {
  if (!(j > 0)) fail("ContinuousParams: J must be positive");
  if (!(kappa > 0)) fail("ContinuousParams: kappa must be positive");
  if (!(gamma > 0 && gamma < kPi / 2)) fail("ContinuousParams: gamma out of (0, pi/2)");
  if (!std::isfinite(omega_c)) fail("ContinuousParams: non-finite omega_c");
}

LindbladModel build_continuous_model(const ContinuousParams& p) {
  p.validate();
  const Operator I3 = Operator::identity(HilbertSpace({3}));
  const Operator s = kron(sigma_x_de(), I3) + kron(I3, sigma_x_de());
  const Operator sx_coll = kron(sigma_x_ground(), I3) + kron(I3, sigma_x_ground());
  const Operator nu_coll = kron(n_up(), I3) + kron(I3, n_up());

  LindbladModel m;
  m.hamiltonian = p.j * (s * s) + cx(p.omega_c / 2, 0) * sx_coll +
                  cx(p.beta_or_default(), 0) * nu_coll;
  const double pd = std::sin(p.gamma) * std::sin(p.gamma);
  const double pu = std::cos(p.gamma) * std::cos(p.gamma);
  m.jumps = {jump_op(0, 0, pd * p.kappa), jump_op(0, 1, pu * p.kappa),
             jump_op(1, 0, pd * p.kappa), jump_op(1, 1, pu * p.kappa)};
  return m;
}

ContinuousGap continuous_gap(const ContinuousParams& p) {
  const LindbladModel m = build_continuous_model(p);
  const SpectralResult res = spectral_analysis(liouvillian(m), MapKind::Generator);
  ContinuousGap out;
  out.spectrum = res;
  out.degenerate = res.degenerate;
  out.gap_over_j = res.gap / p.j;
  out.steady_fidelity = singlet_fidelity(res.steady_state);
  if (res.degenerate)
    throw std::runtime_error("continuous_gap: degenerate steady state");
  return out;
}

DressedStates dressed_states() {
  DressedStates d;
  d.chi_plus.assign(9, cx(0, 0));
  d.chi_zero.assign(9, cx(0, 0));
  d.chi_minus.assign(9, cx(0, 0));
  const double r2 = std::sqrt(2.0);
  // |dd> = 0, |du> = 1, |ud> = 3, |uu> = 4
  d.chi_zero[0] = 1 / r2;
  d.chi_zero[4] = -1 / r2;
  for (auto [vec, sign] : {std::pair{&d.chi_plus, 1.0}, std::pair{&d.chi_minus, -1.0}}) {
    (*vec)[0] = 0.5;
    (*vec)[4] = 0.5;
    // +- sqrt2 |Psi+> / 2 puts +-1/2 on each of |du>, |ud>
    (*vec)[1] = 0.5 * sign;
    (*vec)[3] = 0.5 * sign;
  }
  return d;
}

Operator dressed_transform() {
  const DressedStates d = dressed_states();
  const auto singlet = singlet_ket();
  Operator w = Operator::identity(two_ion_space());
  const int ground[4] = {0, 1, 3, 4};
  const std::vector<cx>* cols[4] = {&d.chi_plus, &d.chi_zero, &d.chi_minus, &singlet};
  for (int c = 0; c < 4; ++c) {
    for (int g : ground) w.at(g, ground[c]) = 0;
    for (int i = 0; i < 9; ++i)
      if ((*cols[c])[i] != cx(0, 0)) w.at(i, ground[c]) = (*cols[c])[i];
  }
  return w;
}

EffectiveModel effective_model(const ContinuousParams& p) {
  p.validate();
  EffectiveModel out;
  out.regime_valid = p.effective_regime_valid();

  const double j = p.j, oc = p.omega_c, kp = p.kappa;
  const cx c_plus = j / cx(-oc, -kp);
  const cx c_zero = std::sqrt(2.0) * j / cx(0, -kp);
  const cx c_minus = j / cx(oc, -kp);
  out.c = {c_plus, c_zero, c_minus};

  const DressedStates d = dressed_states();
  auto outer = [](const std::vector<cx>& a, const std::vector<cx>& b) {
    Operator m(two_ion_space());
    for (int i = 0; i < 9; ++i)
      for (int k = 0; k < 9; ++k) m.at(i, k) = a[i] * std::conj(b[k]);
    return m;
  };

  // printed effective couplings on the dressed triplet; "+ H.c." terms are
  // symmetrized explicitly
  const double shift = oc * (1 + j * j / (kp * kp + oc * oc));
  Operator h = shift * (outer(d.chi_plus, d.chi_plus) - outer(d.chi_minus, d.chi_minus));
  const cx g_plus = oc / 2.0 * std::sqrt(2.0) * j * j / cx(kp * kp, -kp * oc);
  const cx g_minus = -oc / 2.0 * std::sqrt(2.0) * j * j / cx(kp * kp, kp * oc);
  Operator cross = g_plus * outer(d.chi_zero, d.chi_plus) + g_minus * outer(d.chi_zero, d.chi_minus);
  h += cross + cross.adjoint();

  // untouched single-excitation block of the full Hamiltonian, referenced to
  // the uniform 2J ground-manifold energy that beta = J establishes
  const LindbladModel full = build_continuous_model(p);
  const int se[4] = {2, 5, 6, 7};  // |de>, |ue>, |ed>, |eu>
  for (int a : se)
    for (int b : se) h.at(a, b) += full.hamiltonian.at(a, b) - (a == b ? 2 * p.j : 0.0);

  out.model.hamiltonian = std::move(h);

  // effective decays from the dressed states into the single-excitation states
  const double pd = std::sin(p.gamma) * std::sin(p.gamma);
  const double pu = std::cos(p.gamma) * std::cos(p.gamma);
  // row vector C_+ <chi_+| + C_0 <chi_0| + C_- <chi_-| (the chi kets are real)
  std::vector<cx> bra(9, cx(0, 0));
  for (int i = 0; i < 9; ++i)
    bra[i] = c_plus * d.chi_plus[i] + c_zero * d.chi_zero[i] + c_minus * d.chi_minus[i];
  auto eff_jump = [&](int target_idx, double prob) {
    Operator l(two_ion_space());
    for (int i = 0; i < 9; ++i) l.at(target_idx, i) = std::sqrt(prob * p.kappa) * bra[i];
    return l;
  };
  out.model.jumps = {eff_jump(5, pu), eff_jump(7, pu), eff_jump(2, pd), eff_jump(6, pd)};
  // the single-excitation states still decay through the original repump
  for (const Operator& l : full.jumps) out.model.jumps.push_back(l);
  return out;
}

double effective_gap(const ContinuousParams& p) {
  const EffectiveModel em = effective_model(p);
  const SpectralResult res = spectral_analysis(liouvillian(em.model), MapKind::Generator);
  return res.gap / p.j;
}

double empirical_rate(double j, double omega_c, double kappa, double gamma) {
  if (!(omega_c + kappa > j))
    fail("empirical_rate: requires omega_c + kappa > j (effective regime)");
  const double c2 = std::cos(gamma) * std::cos(gamma);
  const double s2 = std::sin(gamma) * std::sin(gamma);
  const double denom = kappa * kappa + omega_c * omega_c;
  const double term1 = (c2 * c2 + s2 * s2) * kappa * std::pow(omega_c / 2 * j / denom, 2);
  const double term2 = s2 * c2 * kappa * j * j / denom;
  return 2.4 * (term1 + term2);
}

namespace {

struct Simplex3 {
  std::array<double, 3> x;
};

double clampv(double v, double lo, double hi) { return std::max(lo, std::min(hi, v)); }

}  // namespace

ContinuousOptimum optimize_continuous(const ContinuousBounds& b, unsigned seed) {
  auto objective = [&](std::array<double, 3> x) -> double {
    ContinuousParams p;
    p.j = 1.0;
    p.omega_c = clampv(x[0], b.omega_c_min, b.omega_c_max);
    p.kappa = clampv(x[1], b.kappa_min, b.kappa_max);
    p.gamma = clampv(x[2], b.gamma_min, b.gamma_max);
    try {
      return -continuous_gap(p).gap_over_j;
    } catch (const std::exception&) {
      return 1e9;
    }
  };

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);

  double best_f = 1e300;
  std::array<double, 3> best_x{};
  for (int a = 0; a < 5; ++a)
    for (int c = 0; c < 5; ++c)
      for (int g = 0; g < 5; ++g) {
        std::array<double, 3> x = {
            b.omega_c_min + (b.omega_c_max - b.omega_c_min) * (a + 0.5) / 5,
            b.kappa_min + (b.kappa_max - b.kappa_min) * (c + 0.5) / 5,
            b.gamma_min + (b.gamma_max - b.gamma_min) * (g + 0.5) / 5};
        const double f = objective(x);
        if (f < best_f) { best_f = f; best_x = x; }
      }

  // Nelder-Mead from the best grid cell (jittered initial simplex)
  std::array<std::array<double, 3>, 4> sim;
  std::array<double, 4> fv;
  sim[0] = best_x;
  for (int k = 1; k < 4; ++k) {
    sim[k] = best_x;
    sim[k][k - 1] *= 1.1 + jitter(rng);
    sim[k][k - 1] += 0.01;
  }
  for (int k = 0; k < 4; ++k) fv[k] = objective(sim[k]);

  const int max_iter = 400;
  for (int it = 0; it < max_iter; ++it) {
    std::array<int, 4> ord = {0, 1, 2, 3};
    std::sort(ord.begin(), ord.end(), [&](int i, int j) { return fv[i] < fv[j]; });
    std::array<std::array<double, 3>, 4> s2;
    std::array<double, 4> f2;
    for (int k = 0; k < 4; ++k) { s2[k] = sim[ord[k]]; f2[k] = fv[ord[k]]; }
    sim = s2; fv = f2;

    double spread = 0;
    for (int d = 0; d < 3; ++d)
      spread = std::max(spread, std::abs(sim[3][d] - sim[0][d]));
    if (spread < 1e-5 && std::abs(fv[3] - fv[0]) < 1e-10) break;

    std::array<double, 3> centroid{};
    for (int k = 0; k < 3; ++k)
      for (int d = 0; d < 3; ++d) centroid[d] += sim[k][d] / 3.0;

    auto lerp = [&](double t) {
      std::array<double, 3> x;
      for (int d = 0; d < 3; ++d) x[d] = centroid[d] + t * (sim[3][d] - centroid[d]);
      return x;
    };
    const auto xr = lerp(-1.0);
    const double fr = objective(xr);
    if (fr < fv[0]) {
      const auto xe = lerp(-2.0);
      const double fe = objective(xe);
      if (fe < fr) { sim[3] = xe; fv[3] = fe; }
      else { sim[3] = xr; fv[3] = fr; }
    } else if (fr < fv[2]) {
      sim[3] = xr; fv[3] = fr;
    } else {
      const auto xc = lerp(fr < fv[3] ? -0.5 : 0.5);
      const double fc = objective(xc);
      if (fc < std::min(fr, fv[3])) { sim[3] = xc; fv[3] = fc; }
      else {
        for (int k = 1; k < 4; ++k) {
          for (int d = 0; d < 3; ++d) sim[k][d] = 0.5 * (sim[k][d] + sim[0][d]);
          fv[k] = objective(sim[k]);
        }
      }
    }
  }

  int ib = 0;
  for (int k = 1; k < 4; ++k)
    if (fv[k] < fv[ib]) ib = k;
  ContinuousOptimum out;
  out.omega_c = clampv(sim[ib][0], b.omega_c_min, b.omega_c_max);
  out.kappa = clampv(sim[ib][1], b.kappa_min, b.kappa_max);
  out.gamma = clampv(sim[ib][2], b.gamma_min, b.gamma_max);
  out.gap_over_j = -fv[ib];
  return out;
}

RateHz rate_hz(double gap_over_j, double j_hz) {
  return {gap_over_j * j_hz, 2 * gap_over_j * j_hz};
}

}  // namespace sp
