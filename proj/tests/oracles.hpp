#pragma once

// Test-only reference computations, kept independent of the library paths
// they are used to check.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "sp/linalg.hpp"

namespace oracle {

using sp::cx;

// Cyclic complex Jacobi eigensolver for Hermitian matrices. Returns the
// eigenvalues in ascending order. Completely independent of sp::eig_general.
inline std::vector<double> jacobi_hermitian_eigenvalues(const sp::Operator& a_in) {
  const int n = a_in.dim();
  std::vector<cx> a = a_in.data();
  auto A = [&](int i, int j) -> cx& { return a[static_cast<size_t>(i) * n + j]; };

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += std::norm(A(i, j));
    if (off < 1e-28) break;

    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        const cx apq = A(p, q);
        if (std::abs(apq) < 1e-300) continue;
        // phase out the pivot, then rotate by the classic Jacobi angle:
        // U = diag(e^{i phi/2}, e^{-i phi/2}) * [[c, -s], [s, c]]
        const double app = A(p, p).real(), aqq = A(q, q).real();
        const double phi = std::arg(apq);
        const double theta = 0.5 * std::atan2(2.0 * std::abs(apq), app - aqq);
        const double c = std::cos(theta), s = std::sin(theta);
        const cx ep = std::exp(cx(0, phi / 2)), em = std::conj(ep);
        const cx u00 = ep * c, u01 = -ep * s, u10 = em * s, u11 = em * c;
        for (int k = 0; k < n; ++k) {  // A <- U^dagger A
          const cx rp = A(p, k), rq = A(q, k);
          A(p, k) = std::conj(u00) * rp + std::conj(u10) * rq;
          A(q, k) = std::conj(u01) * rp + std::conj(u11) * rq;
        }
        for (int k = 0; k < n; ++k) {  // A <- A U
          const cx cp = A(k, p), cq = A(k, q);
          A(k, p) = cp * u00 + cq * u10;
          A(k, q) = cp * u01 + cq * u11;
        }
      }
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = A(i, i).real();
  std::sort(w.begin(), w.end());
  return w;
}

// Brute-force Kraus application: rho -> sum_k E_k rho E_k^dagger.
inline sp::Operator kraus_apply(const std::vector<sp::Operator>& ks, const sp::Operator& rho) {
  sp::Operator out(rho.space());
  for (const sp::Operator& e : ks) out += e * rho * e.adjoint();
  return out;
}

// <m|alpha> coherent-state amplitudes by direct Fock sums.
inline std::vector<cx> coherent_fock_amplitudes(cx alpha, int nmax) {
  std::vector<cx> c(nmax);
  c[0] = std::exp(-0.5 * std::norm(alpha));
  for (int nn = 1; nn < nmax; ++nn) c[nn] = c[nn - 1] * alpha / std::sqrt(double(nn));
  return c;
}

inline sp::Operator random_operator(const sp::HilbertSpace& space, unsigned seed,
                                    double scale = 1.0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0, scale);
  sp::Operator a(space);
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) a.at(i, j) = cx(g(rng), g(rng));
  return a;
}

inline sp::Operator random_hermitian(const sp::HilbertSpace& space, unsigned seed,
                                     double scale = 1.0) {
  sp::Operator a = random_operator(space, seed, scale);
  sp::Operator h(space);
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) h.at(i, j) = 0.5 * (a.at(i, j) + std::conj(a.at(j, i)));
  return h;
}

inline sp::Operator random_unitary(const sp::HilbertSpace& space, unsigned seed) {
  return sp::expm(cx(0, 1) * random_hermitian(space, seed));
}

inline sp::DensityMatrix random_density(const sp::HilbertSpace& space, unsigned seed) {
  sp::Operator a = random_operator(space, seed);
  sp::Operator rho = a * a.adjoint();
  const double tr = rho.trace().real();
  rho *= cx(1.0 / tr, 0);
  return sp::DensityMatrix::trusted(rho);
}

}  // namespace oracle
