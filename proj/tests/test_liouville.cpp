#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sp/liouville.hpp"
#include "sp/protocol.hpp"

using namespace sp;

namespace {

constexpr double kPi = 3.14159265358979323846;

double maxdist(const Operator& a, const Operator& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("vectorize of I/2 and round trip") {
  Operator half = Operator::identity(HilbertSpace({2}));
  half *= cx(0.5, 0);
  const auto v = vectorize(half);
  CHECK(v[0] == cx(0.5, 0));
  CHECK(v[1] == cx(0, 0));
  CHECK(v[2] == cx(0, 0));
  CHECK(v[3] == cx(0.5, 0));

  const auto rho = oracle::random_density(HilbertSpace({3}), 3);
  CHECK(maxdist(devectorize(vectorize(rho.op()), rho.space()), rho.op()) == 0.0);
}

TEST_CASE("column stacking: vec(AXB) = (B^T kron A) vec(X)") {
  const HilbertSpace q({3});
  const Operator a = oracle::random_operator(q, 1);
  const Operator x = oracle::random_operator(q, 2);
  const Operator b = oracle::random_operator(q, 3);
  const auto lhs = vectorize(a * x * b);
  // (B^T kron A) in the superoperator layout equals conj-left kron of conj(B)
  const Operator bt_kron_a = kron(b.transpose(), a);
  const auto rhs = bt_kron_a.apply(vectorize(x));
  double d = 0;
  for (size_t k = 0; k < lhs.size(); ++k) d = std::max(d, std::abs(lhs[k] - rhs[k]));
  CHECK(d < 1e-13);
}

TEST_CASE("superop_from_unitary basics") {
  const HilbertSpace q({2});
  CHECK(maxdist(superop_from_unitary(Operator::identity(q)).as_matrix(),
                SuperOperator::identity(q).as_matrix()) == 0.0);

  Operator x(q);
  x.at(0, 1) = 1;
  x.at(1, 0) = 1;
  const SuperOperator sx = superop_from_unitary(x);
  Operator rho0(q);
  rho0.at(0, 0) = 1;
  const auto out = devectorize(sx.apply_vec(vectorize(rho0)), q);
  CHECK(std::abs(out.at(1, 1) - cx(1, 0)) < 1e-15);

  Operator not_unitary(q);
  not_unitary.at(0, 0) = 2;
  CHECK_THROWS_AS(superop_from_unitary(not_unitary), std::invalid_argument);
}

TEST_CASE("S_A(pi/4) maps |dd><dd| to |ee><ee|") {
  const SuperOperator sa = superop_from_unitary(drive_A_unitary(kPi / 4));
  const auto out = devectorize(sa.apply_vec(vectorize(down_down_state().op())), two_ion_space());
  CHECK(out.at(8, 8).real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("one-ion decay channel at gamma = pi/4 splits |e><e| evenly") {
  // single-qutrit Kraus set, applied by the brute-force oracle and the superop
  const double pd = 0.5, pu = 0.5;
  Operator e0((HilbertSpace({3})));
  e0.at(0, 0) = 1;
  e0.at(1, 1) = 1;
  Operator e1((HilbertSpace({3})));
  e1.at(0, 2) = std::sqrt(pd);
  Operator e2((HilbertSpace({3})));
  e2.at(1, 2) = std::sqrt(pu);
  KrausChannel ch;
  ch.elements = {e0, e1, e2};

  Operator rho((HilbertSpace({3})));
  rho.at(2, 2) = 1;
  const Operator expect = oracle::kraus_apply(ch.elements, rho);
  CHECK(expect.at(0, 0).real() == doctest::Approx(0.5));
  CHECK(expect.at(1, 1).real() == doctest::Approx(0.5));

  const auto got = devectorize(superop_from_kraus(ch).apply_vec(vectorize(rho)), rho.space());
  CHECK(maxdist(got, expect) < 1e-14);
}

TEST_CASE("two-ion channel redistributes |ee><ee| with product weights") {
  const double gamma = 0.3 * kPi;
  const double pd = std::sin(gamma) * std::sin(gamma);
  const double pu = 1 - pd;
  const KrausChannel ch = drive_B_kraus(gamma);
  CHECK(ch.completeness_defect() < 1e-12);

  Operator rho(two_ion_space());
  rho.at(8, 8) = 1;  // |ee><ee|
  const Operator expect = oracle::kraus_apply(ch.elements, rho);  // tensor-product oracle
  CHECK(expect.at(0, 0).real() == doctest::Approx(pd * pd));
  CHECK(expect.at(1, 1).real() == doctest::Approx(pd * pu));
  CHECK(expect.at(3, 3).real() == doctest::Approx(pu * pd));
  CHECK(expect.at(4, 4).real() == doctest::Approx(pu * pu));

  const auto got = devectorize(superop_from_kraus(ch).apply_vec(vectorize(rho)), rho.space());
  CHECK(maxdist(got, expect) < 1e-14);

  KrausChannel incomplete;
  incomplete.elements = {ch.elements[0]};
  CHECK_THROWS_AS(superop_from_kraus(incomplete), std::invalid_argument);
}

TEST_CASE("compose with identity and drive-C population swap") {
  const SuperOperator sb = superop_from_kraus(drive_B_kraus(kPi / 4));
  CHECK(maxdist(compose(sb, SuperOperator::identity(two_ion_space())).as_matrix(),
                sb.as_matrix()) < 1e-15);

  // B leaves ground states alone
  const DensityMatrix dd = down_down_state();
  CHECK(maxdist(apply(sb, dd).op(), dd.op()) < 1e-14);

  // U_C(pi) swaps |dd> and |uu| populations; oracle is direct conjugation
  const Operator uc = drive_C_unitary(kPi);
  const auto rho = oracle::random_density(two_ion_space(), 12);
  const Operator expect = uc * rho.op() * uc.adjoint();
  const DensityMatrix got = apply(superop_from_unitary(uc), rho);
  CHECK(maxdist(got.op(), expect) < 1e-12);
  const DensityMatrix swapped = apply(superop_from_unitary(uc), down_down_state());
  CHECK(swapped.at(4, 4).real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("channels preserve trace and Hermiticity of random states") {
  const SuperOperator maps[] = {
      superop_from_unitary(drive_A_unitary(0.3)),
      superop_from_kraus(drive_B_kraus(0.22 * kPi)),
      superop_from_unitary(drive_C_unitary(1.1)),
  };
  for (const auto& s : maps) {
    CHECK(trace_preservation_defect(s) < 1e-10);
    CHECK(choi_min_eigenvalue(s) > -1e-9);
    for (unsigned seed : {40u, 41u}) {
      const auto rho = oracle::random_density(two_ion_space(), seed);
      const DensityMatrix out = apply(s, rho);
      CHECK(std::abs(out.op().trace() - cx(1, 0)) < 1e-10);
    }
  }
}

TEST_CASE("CPTP discrete maps keep eigenvalue moduli at or below one") {
  ProtocolParams p{kPi / 4, 0.22 * kPi, ConstantSchedule{0.72 * kPi}};
  const auto res = spectral_analysis(cycle_superop(p).composed, MapKind::Discrete);
  for (const cx& v : res.eigenvalues) CHECK(std::abs(v) <= 1 + 1e-9);
}

TEST_CASE("identity map is flagged degenerate") {
  const auto res =
      spectral_analysis(SuperOperator::identity(HilbertSpace({3})), MapKind::Discrete);
  CHECK(res.degenerate);
  for (const cx& v : res.eigenvalues) CHECK(std::abs(v - cx(1, 0)) < 1e-9);
}

TEST_CASE("ideal cycle steady state is the singlet") {
  ProtocolParams p{kPi / 4, kPi / 4, ConstantSchedule{3 * kPi / 4}};
  const auto res = spectral_analysis(cycle_superop(p).composed, MapKind::Discrete);
  CHECK(!res.degenerate);
  CHECK(singlet_fidelity(res.steady_state) >= 1 - 1e-10);
}

TEST_CASE("alternating composed map has exactly three nonzero eigenvalues") {
  ProtocolParams p{kPi / 4, 0.22 * kPi, AlternatingSchedule{kPi, kPi / 2}};
  const auto res = spectral_analysis(cycle_superop_reduced(p).composed, MapKind::Discrete);
  // defective zero clusters surface at ~sqrt(eps); count above that scale
  CHECK(count_nonzero_eigenvalues(res.eigenvalues) == 3);
  const LambdaPair lp = lambda_plus_closed_form(0.22 * kPi);
  CHECK(std::abs(res.eigenvalues[1] - cx(lp.plus, 0)) < 1e-10);
  CHECK(std::abs(res.eigenvalues[2] - cx(lp.minus, 0)) < 1e-10);
}

TEST_CASE("liouvillian of the trivial model is zero") {
  LindbladModel m;
  m.hamiltonian = Operator(HilbertSpace({3}));
  const SuperOperator l = liouvillian(m);
  CHECK(l.as_matrix().max_abs() == 0.0);
}

TEST_CASE("liouvillian reproduces exponential decay of |e>") {
  // single qutrit, H = 0, L = sqrt(kappa)|d><e|
  const double kappa = 0.7;
  LindbladModel m;
  m.hamiltonian = Operator(HilbertSpace({3}));
  Operator l((HilbertSpace({3})));
  l.at(0, 2) = std::sqrt(kappa);
  m.jumps = {l};
  const SuperOperator gen = liouvillian(m);

  Operator rho((HilbertSpace({3})));
  rho.at(2, 2) = 1;
  const double t = 1.3;
  Operator prop = gen.as_matrix();
  prop *= cx(t, 0);
  // exp(L t) acting on vec(rho) via dense expm of the 9x9 generator
  Operator propagator = expm(prop);
  Operator re9(rho.space());
  const auto v = propagator.apply(vectorize(rho));
  const Operator out = devectorize(v, rho.space());
  CHECK(out.at(2, 2).real() == doctest::Approx(std::exp(-kappa * t)).epsilon(1e-10));

  // exp(L t) is CPTP at t = 1/||L||
  const double ts = 1.0 / gen.as_matrix().frobenius_norm();
  Operator small = gen.as_matrix();
  small *= cx(ts, 0);
  const SuperOperator channel(rho.space(), expm(small).data());
  CHECK(trace_preservation_defect(channel) < 1e-10);
  CHECK(choi_min_eigenvalue(channel) > -1e-9);
}

TEST_CASE("generator eigenvalue real parts are non-positive") {
  LindbladModel m;
  m.hamiltonian = oracle::random_hermitian(HilbertSpace({3}), 8);
  Operator l = oracle::random_operator(HilbertSpace({3}), 9, 0.5);
  m.jumps = {l};
  const auto res = spectral_analysis(liouvillian(m), MapKind::Generator);
  for (const cx& v : res.eigenvalues) CHECK(v.real() <= 1e-9);
}

TEST_CASE("liouvillian rejects a non-Hermitian Hamiltonian") {
  LindbladModel m;
  m.hamiltonian = oracle::random_operator(HilbertSpace({2}), 10);
  CHECK_THROWS_AS(liouvillian(m), std::invalid_argument);
}

TEST_CASE("spectral gap matches the fitted decay of trajectories") {
  ProtocolParams p{kPi / 4, 0.26 * kPi, ConstantSchedule{0.65 * kPi}};
  const SuperOperator cyc = cycle_superop(p).composed;
  const auto res = spectral_analysis(cyc, MapKind::Discrete);

  DensityMatrix rho = oracle::random_density(two_ion_space(), 77);
  const DensityMatrix& ss = res.steady_state;
  std::vector<double> dist;
  for (int n = 0; n <= 40; ++n) {
    if (n >= 5) dist.push_back((rho.op() - ss.op()).frobenius_norm());
    rho = apply(cyc, rho);
  }
  // fit ln(dist) over cycles [5, 40]
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(dist.size());
  for (int k = 0; k < n; ++k) {
    const double x = 5 + k, y = std::log(dist[k]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(std::abs(-slope - res.gap) / res.gap < 0.02);
}
