#include "sp/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

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

const Operator& qutrit_identity() {
  static const Operator I = Operator::identity(HilbertSpace({3}));
  return I;
}

// indices of the four ground product states |dd>, |du>, |ud>, |uu>
constexpr int kGround[4] = {0, 1, 3, 4};

}  // namespace

void ProtocolParams::validate() const {
  if (!std::isfinite(phi) || !std::isfinite(gamma)) fail("ProtocolParams: non-finite angle");
  if (!(gamma > 0 && gamma < kPi / 2))
    fail("ProtocolParams: gamma must lie in (0, pi/2)");
  std::visit(
      [](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, ConstantSchedule>) {
          if (!std::isfinite(s.theta)) fail("ProtocolParams: non-finite theta");
        } else {
          if (!std::isfinite(s.theta_odd) || !std::isfinite(s.theta_even))
            fail("ProtocolParams: non-finite theta");
        }
      },
      schedule);
}

const HilbertSpace& two_ion_space() {
  static const HilbertSpace s({3, 3});
  return s;
}

const HilbertSpace& ground_space() {
  static const HilbertSpace s({2, 2});
  return s;
}

std::vector<cx> singlet_ket() {
  std::vector<cx> v(9, cx(0, 0));
  const double r = 1.0 / std::sqrt(2.0);
  v[3] = r;   // |up down>
  v[1] = -r;  // |down up>
  return v;
}

std::vector<cx> triplet_plus_ket() {
  std::vector<cx> v(9, cx(0, 0));
  const double r = 1.0 / std::sqrt(2.0);
  v[3] = r;
  v[1] = r;
  return v;
}

DensityMatrix singlet_state() { return DensityMatrix::pure(two_ion_space(), singlet_ket()); }

DensityMatrix down_down_state() {
  std::vector<cx> v(9, cx(0, 0));
  v[0] = 1;
  return DensityMatrix::pure(two_ion_space(), v);
}

DensityMatrix ground_mixed_state() {
  Operator rho(two_ion_space());
  for (int g : kGround) rho.at(g, g) = 0.25;
  return DensityMatrix::trusted(rho);
}

Operator drive_A_unitary(double phi) {
  if (!std::isfinite(phi)) fail("drive_A_unitary: non-finite phi");
  const Operator s = kron(sigma_x_de(), qutrit_identity()) + kron(qutrit_identity(), sigma_x_de());
  return expm(cx(0, -phi) * (s * s));
}

KrausChannel drive_B_kraus(double gamma) {
  if (!(gamma > 0 && gamma < kPi / 2)) fail("drive_B_kraus: gamma out of (0, pi/2)");
  const double pd = std::sin(gamma) * std::sin(gamma);
  const double pu = std::cos(gamma) * std::cos(gamma);

  Operator e0((HilbertSpace({3})));
  e0.at(0, 0) = 1;
  e0.at(1, 1) = 1;
  Operator e1((HilbertSpace({3})));
  e1.at(0, 2) = std::sqrt(pd);
  Operator e2((HilbertSpace({3})));
  e2.at(1, 2) = std::sqrt(pu);

  const Operator singles[3] = {e0, e1, e2};
  KrausChannel out;
  out.elements.reserve(9);
  for (const Operator& a : singles)
    for (const Operator& b : singles) out.elements.push_back(kron(a, b));
  return out;
}

Operator drive_C_unitary(double theta) {
  if (!std::isfinite(theta)) fail("drive_C_unitary: non-finite theta");
  const Operator u1 = expm(cx(0, theta / 2) * sigma_x_ground());
  return kron(u1, u1);
}

CycleMaps cycle_superop(const ProtocolParams& p) {
  p.validate();
  const SuperOperator sa = superop_from_unitary(drive_A_unitary(p.phi));
  const SuperOperator sb = superop_from_kraus(drive_B_kraus(p.gamma));
  const SuperOperator sba = compose(sb, sa);

  CycleMaps out;
  if (const auto* c = std::get_if<ConstantSchedule>(&p.schedule)) {
    const SuperOperator cyc = compose(superop_from_unitary(drive_C_unitary(c->theta)), sba);
    out.odd = cyc;
    out.even = cyc;
    out.composed = cyc;
    out.alternating = false;
  } else {
    const auto& alt = std::get<AlternatingSchedule>(p.schedule);
    out.odd = compose(superop_from_unitary(drive_C_unitary(alt.theta_odd)), sba);
    out.even = compose(superop_from_unitary(drive_C_unitary(alt.theta_even)), sba);
    out.composed = compose(out.even, out.odd);
    out.alternating = true;
  }
  return out;
}

SuperOperator reduce_to_ground_manifold(const SuperOperator& full) {
  if (full.dim() != 9) fail("reduce_to_ground_manifold: expected the 9-dim two-ion space");
  // embedding E = conj(V) (x) V for the isometry V: C^4 -> C^9
  // reduced S_r[(a,b),(c,d)] = S[vec(g_a, g_b), vec(g_c, g_d)]
  const int d = 4;
  std::vector<cx> red(static_cast<size_t>(d) * d * d * d);
  auto vec9 = [](int i, int j) { return j * 9 + i; };
  auto vec4 = [](int i, int j) { return j * 4 + i; };
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int e = 0; e < 4; ++e)
          red[static_cast<size_t>(vec4(a, b)) * 16 + vec4(c, e)] =
              full.at(vec9(kGround[a], kGround[b]), vec9(kGround[c], kGround[e]));
  return SuperOperator(ground_space(), std::move(red));
}

CycleMaps cycle_superop_reduced(const ProtocolParams& p) {
  if (std::abs(p.phi - kPi / 4) > 1e-12)
    fail("cycle_superop_reduced: the ground-manifold reduction is exact only at phi = pi/4");
  CycleMaps full = cycle_superop(p);
  CycleMaps out;
  out.odd = reduce_to_ground_manifold(full.odd);
  out.even = reduce_to_ground_manifold(full.even);
  out.composed = reduce_to_ground_manifold(full.composed);
  out.alternating = full.alternating;
  return out;
}

double singlet_fidelity(const DensityMatrix& rho) {
  if (rho.dim() != 9) fail("singlet_fidelity: expected the 9-dim two-ion space");
  const auto psi = singlet_ket();
  cx f = 0;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) f += std::conj(psi[i]) * rho.at(i, j) * psi[j];
  return std::clamp(f.real(), 0.0, 1.0 + 1e-9);
}

Trajectory run_protocol(const DensityMatrix& rho0, const ProtocolParams& p, int cycles) {
  if (rho0.dim() != 9) fail("run_protocol: expected the 9-dim two-ion space");
  if (cycles < 0) fail("run_protocol: negative cycle count");
  const CycleMaps maps = cycle_superop(p);

  Trajectory t;
  t.states.reserve(cycles + 1);
  t.fidelities.reserve(cycles + 1);
  t.states.push_back(rho0);
  t.fidelities.push_back(singlet_fidelity(rho0));
  DensityMatrix rho = rho0;
  for (int n = 1; n <= cycles; ++n) {
    const SuperOperator& step = (n % 2 == 1) ? maps.odd : maps.even;
    rho = apply(step, rho);
    t.states.push_back(rho);
    t.fidelities.push_back(singlet_fidelity(rho));
  }
  return t;
}

double convergence_rate_cycles(const ProtocolParams& p) {
  p.validate();
  const bool reduced_ok = std::abs(p.phi - kPi / 4) < 1e-12;
  const CycleMaps maps = reduced_ok ? cycle_superop_reduced(p) : cycle_superop(p);
  const SpectralResult spec = spectral_analysis(maps.composed, MapKind::Discrete);
  if (spec.degenerate)
    throw std::runtime_error("convergence_rate: degenerate top eigenvalue, no unique rate");
  if (!(spec.gap > 0) || !std::isfinite(spec.gap))
    throw std::runtime_error("convergence_rate: no spectral gap");
  return maps.alternating ? 2.0 / spec.gap : 1.0 / spec.gap;
}

LambdaPair lambda_plus_closed_form(double gamma) {
  if (!(gamma > 0 && gamma < kPi / 2)) fail("lambda_plus_closed_form: gamma out of range");
  const double c = std::cos(gamma);
  const double s2g = std::sin(2 * gamma);
  const double inner = 1.0 - (2.0 / 9.0) * (2.0 + c * c * c * c) * s2g * s2g;
  const double root = std::sqrt(std::max(0.0, inner));
  return {0.25 * (1 + 3 * root), 0.25 * (1 - 3 * root)};
}

namespace {

// minimize f over [a, b] by golden-section search
template <typename F>
double golden_min(F f, double a, double b, int iters = 60) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters && (b - a) > 1e-10; ++i) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

double lambda_max_constant(double theta, double gamma) {
  ProtocolParams p{kPi / 4, gamma, ConstantSchedule{theta}};
  const CycleMaps maps = cycle_superop_reduced(p);
  EigOptions opt;
  opt.want_vectors = false;
  auto eigs = eig_general(maps.composed.as_matrix(), opt);
  std::vector<double> mods(eigs.size());
  for (size_t k = 0; k < eigs.size(); ++k) mods[k] = std::abs(eigs[k].value);
  std::sort(mods.rbegin(), mods.rend());
  return mods[1];
}

double lambda_plus_alternating(double gamma) {
  ProtocolParams p{kPi / 4, gamma, AlternatingSchedule{kPi, kPi / 2}};
  const CycleMaps maps = cycle_superop_reduced(p);
  EigOptions opt;
  opt.want_vectors = false;
  auto eigs = eig_general(maps.composed.as_matrix(), opt);
  std::vector<double> mods(eigs.size());
  for (size_t k = 0; k < eigs.size(); ++k) mods[k] = std::abs(eigs[k].value);
  std::sort(mods.rbegin(), mods.rend());
  return mods[1];
}

}  // namespace

OptimizeResult optimize_params_constant(const GridSpec& grid) {
  if (grid.points_per_axis < 64) fail("optimize_params: grid resolution must be >= 64 per axis");
  const int n = grid.points_per_axis;
  double best = std::numeric_limits<double>::infinity();
  double bt = 0, bg = 0;
  for (int i = 0; i < n; ++i) {
    const double th = grid.theta_min + (grid.theta_max - grid.theta_min) * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double gm = grid.gamma_min + (grid.gamma_max - grid.gamma_min) * j / (n - 1);
      const double lm = lambda_max_constant(th, gm);
      if (lm < best) { best = lm; bt = th; bg = gm; }
    }
  }
  // local refinement, one golden-section pass per axis (twice)
  const double dth = (grid.theta_max - grid.theta_min) / (n - 1);
  const double dgm = (grid.gamma_max - grid.gamma_min) / (n - 1);
  for (int pass = 0; pass < 2; ++pass) {
    bt = golden_min([&](double t) { return lambda_max_constant(t, bg); },
                    std::max(grid.theta_min, bt - dth), std::min(grid.theta_max, bt + dth));
    bg = golden_min([&](double g) { return lambda_max_constant(bt, g); },
                    std::max(grid.gamma_min, bg - dgm), std::min(grid.gamma_max, bg + dgm));
  }
  const double lm = lambda_max_constant(bt, bg);
  return {bt, bg, -1.0 / std::log(lm), lm};
}

OptimizeResult optimize_params_alternating(const GridSpec& grid) {
  if (grid.points_per_axis < 64) fail("optimize_params: grid resolution must be >= 64 per axis");
  const int n = grid.points_per_axis;
  double best = std::numeric_limits<double>::infinity();
  double bg = 0;
  for (int j = 0; j < n; ++j) {
    const double gm = grid.gamma_min + (grid.gamma_max - grid.gamma_min) * j / (n - 1);
    const double lp = lambda_plus_alternating(gm);
    if (lp < best) { best = lp; bg = gm; }
  }
  const double dgm = (grid.gamma_max - grid.gamma_min) / (n - 1);
  bg = golden_min(lambda_plus_alternating, std::max(grid.gamma_min, bg - dgm),
                  std::min(grid.gamma_max, bg + dgm));
  const double lp = lambda_plus_alternating(bg);
  return {kPi, bg, -2.0 / std::log(lp), lp};
}

ParityFidelity fidelity_from_parities(double xx, double yy, double zz) {
  for (double v : {xx, yy, zz})
    if (!(v >= -1.0 && v <= 1.0)) fail("fidelity_from_parities: parity outside [-1, 1]");
  const double f = 0.25 * (1.0 - xx - yy - zz);
  // any two-qubit state satisfies F in [0, 1]; anything else is unphysical input
  const bool physical = f >= -1e-12 && f <= 1.0 + 1e-12;
  return {f, physical};
}

Parities parities_of(const DensityMatrix& rho) {
  if (rho.dim() != 9) fail("parities_of: expected the 9-dim two-ion space");
  Operator sx(( HilbertSpace({3})));
  sx.at(0, 1) = 1; sx.at(1, 0) = 1;
  Operator sy((HilbertSpace({3})));
  sy.at(0, 1) = cx(0, -1); sy.at(1, 0) = cx(0, 1);
  Operator sz((HilbertSpace({3})));
  sz.at(0, 0) = 1; sz.at(1, 1) = -1;

  auto expect = [&rho](const Operator& a, const Operator& b) {
    const Operator o = kron(a, b);
    cx s = 0;
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) s += rho.at(i, j) * o.at(j, i);
    return s.real();
  };
  return {expect(sx, sx), expect(sy, sy), expect(sz, sz)};
}

ReadoutCorrected readout_correction(double p1_obs, double p2_obs, double p, double q) {
  if (!(p >= 0 && q >= 0 && p + q < 1)) fail("readout_correction: need p, q >= 0 and p + q < 1");
  if (!(p1_obs >= 0 && p1_obs <= 1 && p2_obs >= 0 && p2_obs <= 1))
    fail("readout_correction: observed probabilities must lie in [0, 1]");
  const double denom = 1.0 - p - q;
  return {((1.0 - p) * p2_obs - p * p1_obs) / denom,
          ((1.0 - q) * p2_obs - q * p1_obs) / denom};
}

double expected_scatter_count(double gamma) {
  if (!(gamma > 0 && gamma < kPi / 2)) fail("expected_scatter_count: gamma out of range");
  if (gamma < 1e-6 || kPi / 2 - gamma < 1e-6) return std::numeric_limits<double>::infinity();
  const double s = std::sin(2 * gamma);
  return 4.0 / (s * s);
}

std::string trajectory_to_csv(const Trajectory& t) {
  std::ostringstream out;
  out << "cycle,fidelity,p_dd,p_uu,p_mixed,purity\n";
  char buf[256];
  for (size_t n = 0; n < t.states.size(); ++n) {
    const DensityMatrix& rho = t.states[n];
    const double pdd = rho.at(0, 0).real();
    const double puu = rho.at(4, 4).real();
    const double pmix = rho.at(1, 1).real() + rho.at(3, 3).real();
    const Operator sq = rho.op() * rho.op();
    const double purity = sq.trace().real();
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%.12g,%.12g,%.12g\n", n, t.fidelities[n],
                  pdd, puu, pmix, purity);
    out << buf;
  }
  return out.str();
}

}  // namespace sp
