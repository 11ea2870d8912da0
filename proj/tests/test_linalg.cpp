#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sp/linalg.hpp"

using namespace sp;

namespace {

constexpr double kPi = 3.14159265358979323846;

Operator pauli_x2() {
  Operator m((HilbertSpace({2})));
  m.at(0, 1) = 1;
  m.at(1, 0) = 1;
  return m;
}

Operator sigma_x_de() {
  Operator m((HilbertSpace({3})));
  m.at(2, 0) = 1;
  m.at(0, 2) = 1;
  return m;
}

Operator collective_sx() {
  const Operator I3 = Operator::identity(HilbertSpace({3}));
  return kron(sigma_x_de(), I3) + kron(I3, sigma_x_de());
}

double opdist(const Operator& a, const Operator& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("HilbertSpace validates dimensions") {
  CHECK_THROWS_AS(HilbertSpace({1, 3}), std::invalid_argument);
  CHECK_THROWS_AS(HilbertSpace({64, 65}), std::invalid_argument);  // over the 4096 cap
  CHECK(HilbertSpace({3, 3}).total() == 9);
  CHECK(HilbertSpace({3, 3, 12}).total() == 108);
}

TEST_CASE("kron identity case") {
  const Operator i2 = Operator::identity(HilbertSpace({2}));
  const Operator i3 = Operator::identity(HilbertSpace({3}));
  const Operator k = kron(i2, i3);
  CHECK(k.dim() == 6);
  CHECK(opdist(k, Operator::identity(HilbertSpace({2, 3}))) == 0.0);
}

TEST_CASE("kron permutation case: sigma_x x sigma_x maps |00> to |11>") {
  const Operator xx = kron(pauli_x2(), pauli_x2());
  std::vector<cx> v(4, cx(0, 0));
  v[0] = 1;
  const auto w = xx.apply(v);
  CHECK(std::abs(w[3] - cx(1, 0)) < 1e-15);
  CHECK(std::abs(w[0]) + std::abs(w[1]) + std::abs(w[2]) < 1e-15);
}

TEST_CASE("collective S^2 has |up down> as a +1 eigenvector") {
  // expand S^2 = sigma^2 x 1 + 1 x sigma^2 + 2 sigma x sigma by hand on the
  // 9-dim basis: only the 1 x sigma^2 term acts on |up down>, giving it back.
  const Operator s = collective_sx();
  const Operator s2 = s * s;
  std::vector<cx> ud(9, cx(0, 0));
  ud[3] = 1;  // |up down>
  const auto w = s2.apply(ud);
  double offdiag = 0;
  for (int i = 0; i < 9; ++i)
    if (i != 3) offdiag += std::abs(w[i]);
  CHECK(std::abs(w[3] - cx(1, 0)) < 1e-14);
  CHECK(offdiag < 1e-14);
}

TEST_CASE("kron associativity") {
  const HilbertSpace q({2});
  const Operator a = oracle::random_operator(q, 11);
  const Operator b = oracle::random_operator(q, 22);
  const Operator c = oracle::random_operator(q, 33);
  const Operator lhs = kron(kron(a, b), c);
  Operator rhs = kron(a, kron(b, c));
  // same dims up to grouping; compare raw data
  double d = 0;
  for (size_t k = 0; k < lhs.data().size(); ++k) d = std::max(d, std::abs(lhs.data()[k] - rhs.data()[k]));
  CHECK(d < 1e-14);
}

TEST_CASE("partial trace of a product state") {
  const auto ra = oracle::random_density(HilbertSpace({2}), 5);
  const auto rb = oracle::random_density(HilbertSpace({3}), 6);
  const Operator prod = kron(ra.op(), rb.op());
  const Operator back = partial_trace(prod, {0});
  CHECK(opdist(back, ra.op()) < 1e-14);
  const Operator backb = partial_trace(prod, {1});
  CHECK(opdist(backb, rb.op()) < 1e-14);
}

TEST_CASE("partial trace of a Bell state is maximally mixed") {
  std::vector<cx> bell(4, cx(0, 0));
  bell[1] = 1 / std::sqrt(2.0);
  bell[2] = -1 / std::sqrt(2.0);
  const auto rho = DensityMatrix::pure(HilbertSpace({2, 2}), bell);
  const Operator red = partial_trace(rho.op(), {0});
  Operator half = Operator::identity(HilbertSpace({2}));
  half *= cx(0.5, 0);
  CHECK(opdist(red, half) < 1e-14);
}

TEST_CASE("partial trace preserves trace and damps coherences by coherent overlap") {
  // spin-motion entangled state (|0> x |alpha> + |1> x |-alpha>)/sqrt(2):
  // tracing the oscillator leaves spin coherences exp(-2|alpha|^2).
  const int nmax = 24;
  const cx alpha(0.8, 0.35);
  const auto cp = oracle::coherent_fock_amplitudes(alpha, nmax);
  const auto cm = oracle::coherent_fock_amplitudes(-alpha, nmax);
  std::vector<cx> psi(2 * nmax, cx(0, 0));
  for (int n = 0; n < nmax; ++n) {
    psi[n] = cp[n] / std::sqrt(2.0);
    psi[nmax + n] = cm[n] / std::sqrt(2.0);
  }
  const auto rho = DensityMatrix::pure(HilbertSpace({2, nmax}), psi);
  const Operator spin = partial_trace(rho.op(), {0});
  CHECK(std::abs(spin.trace() - cx(1, 0)) < 1e-12);
  // brute-force Fock sum for the overlap <-alpha|alpha>
  cx overlap = 0;
  for (int n = 0; n < nmax; ++n) overlap += std::conj(cm[n]) * cp[n];
  const double expected = std::exp(-2.0 * std::norm(alpha));
  CHECK(std::abs(std::abs(overlap) - expected) < 1e-10);
  CHECK(std::abs(spin.at(0, 1) - 0.5 * overlap) < 1e-10);
}

TEST_CASE("expm of zero is identity") {
  const Operator z((HilbertSpace({5})));
  CHECK(opdist(expm(z), Operator::identity(HilbertSpace({5}))) < 1e-15);
}

TEST_CASE("expm Pauli rotation identity") {
  const Operator rot = expm(cx(0, -kPi / 2) * pauli_x2());
  Operator expect = pauli_x2();
  expect *= cx(0, -1);
  CHECK(opdist(rot, expect) < 1e-14);
}

TEST_CASE("expm(-i pi/4 S^2) fully transfers |dd> to |ee>") {
  const Operator s = collective_sx();
  const Operator u = expm(cx(0, -kPi / 4) * (s * s));
  std::vector<cx> dd(9, cx(0, 0));
  dd[0] = 1;
  const auto w = u.apply(dd);
  CHECK(std::norm(w[8]) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(w[8] - cx(-1, 0)) < 1e-12);
}

TEST_CASE("expm(A) expm(-A) = I for random A with norm up to 10") {
  for (unsigned seed : {1u, 2u, 3u, 4u}) {
    Operator a = oracle::random_operator(HilbertSpace({6}), seed);
    a *= cx(10.0 / a.frobenius_norm(), 0);
    const Operator prod = expm(a) * expm(cx(-1, 0) * a);
    CHECK(opdist(prod, Operator::identity(a.space())) < 1e-10);
  }
}

TEST_CASE("expm matches eigendecomposition for Hermitian input") {
  const Operator h = oracle::random_hermitian(HilbertSpace({8}), 77, 2.0);
  const auto pairs = eig_general(h);
  Operator expect(h.space());
  for (const auto& p : pairs) {
    const cx e = std::exp(p.value.real());
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        expect.at(i, j) += e * p.vector[i] * std::conj(p.vector[j]);
  }
  CHECK((expm(h) - expect).frobenius_norm() / expect.frobenius_norm() < 1e-9);
}

TEST_CASE("eig_general on a diagonal matrix returns the diagonal") {
  Operator d((HilbertSpace({4})));
  const cx vals[4] = {cx(1, 0), cx(-2, 0.5), cx(0, 3), cx(4, -4)};
  for (int i = 0; i < 4; ++i) d.at(i, i) = vals[i];
  auto pairs = eig_general(d);
  for (const cx& v : vals) {
    double best = 1e300;
    for (const auto& p : pairs) best = std::min(best, std::abs(p.value - v));
    CHECK(best < 1e-12);
  }
}

TEST_CASE("eig_general on a near-Jordan upper triangular matrix") {
  Operator a((HilbertSpace({2})));
  a.at(0, 0) = 1;
  a.at(0, 1) = 1;
  a.at(1, 1) = 1 + 1e-6;
  auto pairs = eig_general(a);
  double d1 = 1e300, d2 = 1e300;
  for (const auto& p : pairs) {
    d1 = std::min(d1, std::abs(p.value - cx(1, 0)));
    d2 = std::min(d2, std::abs(p.value - cx(1 + 1e-6, 0)));
  }
  CHECK(d1 < 1e-10);
  CHECK(d2 < 1e-10);
}

TEST_CASE("eig_general residuals meet the contract on random matrices") {
  for (unsigned seed : {7u, 8u}) {
    const Operator a = oracle::random_operator(HilbertSpace({12}), seed);
    const double norm = a.frobenius_norm();
    for (const auto& p : eig_general(a)) {
      const auto av = a.apply(p.vector);
      double r2 = 0;
      for (int i = 0; i < a.dim(); ++i) r2 += std::norm(av[i] - p.value * p.vector[i]);
      CHECK(std::sqrt(r2) <= 1e-9 * norm);
    }
  }
}

TEST_CASE("eig_general agrees with the Jacobi Hermitian oracle") {
  const Operator h = oracle::random_hermitian(HilbertSpace({10}), 99);
  const auto ours = eigvals_hermitian(h);
  const auto ref = oracle::jacobi_hermitian_eigenvalues(h);
  for (size_t k = 0; k < ours.size(); ++k) CHECK(std::abs(ours[k] - ref[k]) < 1e-9);
}

TEST_CASE("eig_general handles the fully degenerate identity") {
  const Operator I = Operator::identity(HilbertSpace({6}));
  for (const auto& p : eig_general(I)) {
    CHECK(std::abs(p.value - cx(1, 0)) < 1e-12);
    const auto av = I.apply(p.vector);
    double r2 = 0;
    for (int i = 0; i < 6; ++i) r2 += std::norm(av[i] - p.value * p.vector[i]);
    CHECK(std::sqrt(r2) < 1e-10);
  }
}

TEST_CASE("lu_solve reproduces the identity inverse relation") {
  const Operator a = oracle::random_operator(HilbertSpace({9}), 31);
  const Operator I = Operator::identity(a.space());
  const auto x = lu_solve(a, I.data(), a.dim());
  Operator ainv(a.space());
  ainv.data() = x;
  CHECK(opdist(a * ainv, I) < 1e-10);
}

TEST_CASE("cholesky_psd factors a PSD matrix and tolerates rank deficiency") {
  const Operator b = oracle::random_operator(HilbertSpace({5}), 17);
  Operator psd = b * b.adjoint();
  const Operator l = cholesky_psd(psd);
  CHECK(opdist(l * l.adjoint(), psd) < 1e-10);

  // rank-1 projector
  Operator proj((HilbertSpace({3})));
  proj.at(0, 0) = 1;
  const Operator lp = cholesky_psd(proj);
  CHECK(opdist(lp * lp.adjoint(), proj) < 1e-12);
}

TEST_CASE("DensityMatrix invariants are enforced") {
  Operator bad((HilbertSpace({2})));
  bad.at(0, 0) = 0.5;
  bad.at(1, 1) = 0.5;
  bad.at(0, 1) = cx(0.1, 0.1);
  bad.at(1, 0) = cx(0.1, 0.1);  // not Hermitian (should be the conjugate)
  CHECK_THROWS_AS(DensityMatrix::trusted(bad), std::invalid_argument);

  Operator neg((HilbertSpace({2})));
  neg.at(0, 0) = 1.2;
  neg.at(1, 1) = -0.2;
  CHECK_THROWS_AS(DensityMatrix::checked(neg), std::invalid_argument);
}

TEST_CASE("expm rejects non-finite input") {
  Operator a((HilbertSpace({2})));
  a.at(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(expm(a));
}
