#include "sp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#ifdef SP_HAVE_CBLAS
#include <cblas.h>
#endif

namespace sp {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

// --- HilbertSpace -----------------------------------------------------------

HilbertSpace::HilbertSpace(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) fail("HilbertSpace: empty dimension list");
  long total = 1;
  for (int d : dims_) {
    if (d < 2) fail("HilbertSpace: every subsystem dimension must be >= 2");
    total *= d;
    if (total > kDimCap) fail("HilbertSpace: total dimension exceeds cap " + std::to_string(kDimCap));
  }
  total_ = static_cast<int>(total);
}

// --- Operator ----------------------------------------------------------------

Operator::Operator(HilbertSpace space)
    : space_(std::move(space)), n_(space_.total()), a_(static_cast<size_t>(n_) * n_, cx(0, 0)) {}

Operator Operator::identity(HilbertSpace space) {
  Operator out(std::move(space));
  for (int i = 0; i < out.n_; ++i) out.at(i, i) = 1.0;
  return out;
}

Operator Operator::from_rows(HilbertSpace space, const std::vector<std::vector<cx>>& rows) {
  Operator out(std::move(space));
  if (static_cast<int>(rows.size()) != out.n_) fail("from_rows: row count mismatch");
  for (int i = 0; i < out.n_; ++i) {
    if (static_cast<int>(rows[i].size()) != out.n_) fail("from_rows: column count mismatch");
    for (int j = 0; j < out.n_; ++j) out.at(i, j) = rows[i][j];
  }
  return out;
}

Operator Operator::adjoint() const {
  Operator out(space_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) out.at(j, i) = std::conj(at(i, j));
  return out;
}

Operator Operator::transpose() const {
  Operator out(space_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) out.at(j, i) = at(i, j);
  return out;
}

Operator Operator::conjugate() const {
  Operator out(space_);
  for (size_t k = 0; k < a_.size(); ++k) out.a_[k] = std::conj(a_[k]);
  return out;
}

cx Operator::trace() const {
  cx t = 0;
  for (int i = 0; i < n_; ++i) t += at(i, i);
  return t;
}

double Operator::frobenius_norm() const {
  double s = 0;
  for (const cx& v : a_) s += std::norm(v);
  return std::sqrt(s);
}

double Operator::one_norm() const {
  double best = 0;
  for (int j = 0; j < n_; ++j) {
    double s = 0;
    for (int i = 0; i < n_; ++i) s += std::abs(at(i, j));
    best = std::max(best, s);
  }
  return best;
}

double Operator::max_abs() const {
  double best = 0;
  for (const cx& v : a_) best = std::max(best, std::abs(v));
  return best;
}

bool Operator::all_finite() const {
  for (const cx& v : a_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

Operator& Operator::operator+=(const Operator& o) {
  if (o.n_ != n_) fail("operator+: dimension mismatch");
  for (size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}

Operator& Operator::operator-=(const Operator& o) {
  if (o.n_ != n_) fail("operator-: dimension mismatch");
  for (size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
  return *this;
}

Operator& Operator::operator*=(cx s) {
  for (cx& v : a_) v *= s;
  return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
  if (a.n_ != b.n_) fail("matmul: dimension mismatch");
  if (a.space_ != b.space_) fail("matmul: space tag mismatch");
  Operator out(a.space_);
  const int n = a.n_;
#ifdef SP_HAVE_CBLAS
  const cx one(1, 0), zero(0, 0);
  cblas_zgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, n, n, n, &one, a.a_.data(), n,
              b.a_.data(), n, &zero, out.a_.data(), n);
#else
  for (int i = 0; i < n; ++i) {
    const cx* arow = &a.a_[static_cast<size_t>(i) * n];
    cx* orow = &out.a_[static_cast<size_t>(i) * n];
    for (int k = 0; k < n; ++k) {
      const cx aik = arow[k];
      if (aik == cx(0, 0)) continue;
      const cx* brow = &b.a_[static_cast<size_t>(k) * n];
      for (int j = 0; j < n; ++j) orow[j] += aik * brow[j];
    }
  }
#endif
  return out;
}

std::vector<cx> Operator::apply(const std::vector<cx>& x) const {
  if (static_cast<int>(x.size()) != n_) fail("apply: vector dimension mismatch");
  std::vector<cx> y(n_, cx(0, 0));
  for (int i = 0; i < n_; ++i) {
    const cx* row = &a_[static_cast<size_t>(i) * n_];
    cx s = 0;
    for (int j = 0; j < n_; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

// --- DensityMatrix ----------------------------------------------------------

DensityMatrix DensityMatrix::trusted(const Operator& rho, double herm_tol, double trace_tol) {
  const int n = rho.dim();
  double herm = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      herm = std::max(herm, std::abs(rho.at(i, j) - std::conj(rho.at(j, i))));
  if (herm > herm_tol)
    throw std::invalid_argument("DensityMatrix: Hermiticity violation " + std::to_string(herm));
  if (std::abs(rho.trace() - cx(1, 0)) > trace_tol)
    throw std::invalid_argument("DensityMatrix: trace violation");
  return DensityMatrix(rho);
}

DensityMatrix DensityMatrix::checked(const Operator& rho, double herm_tol, double trace_tol,
                                     double eig_floor) {
  DensityMatrix out = trusted(rho, herm_tol, trace_tol);
  for (double w : eigvals_hermitian(rho))
    if (w < eig_floor)
      throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(w));
  return out;
}

DensityMatrix DensityMatrix::pure(const HilbertSpace& space, const std::vector<cx>& psi) {
  if (static_cast<int>(psi.size()) != space.total()) fail("pure: dimension mismatch");
  double n2 = 0;
  for (const cx& c : psi) n2 += std::norm(c);
  if (n2 <= 0) fail("pure: zero state");
  Operator rho(space);
  const double inv = 1.0 / n2;
  for (int i = 0; i < space.total(); ++i)
    for (int j = 0; j < space.total(); ++j) rho.at(i, j) = psi[i] * std::conj(psi[j]) * inv;
  return DensityMatrix(rho);
}

// --- kron / partial trace -----------------------------------------------------

Operator kron(const Operator& a, const Operator& b) {
  std::vector<int> dims = a.space().dims();
  dims.insert(dims.end(), b.space().dims().begin(), b.space().dims().end());
  Operator out((HilbertSpace(dims)));  // throws on cap overflow
  const int na = a.dim(), nb = b.dim();
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j) {
      const cx aij = a.at(i, j);
      if (aij == cx(0, 0)) continue;
      for (int k = 0; k < nb; ++k)
        for (int l = 0; l < nb; ++l)
          out.at(i * nb + k, j * nb + l) = aij * b.at(k, l);
    }
  return out;
}

Operator partial_trace(const Operator& rho, const std::vector<int>& keep) {
  const auto& dims = rho.space().dims();
  const int s = static_cast<int>(dims.size());
  if (keep.empty()) fail("partial_trace: keep set empty");
  std::vector<bool> kept(s, false);
  for (int k : keep) {
    if (k < 0 || k >= s) fail("partial_trace: invalid subsystem index");
    if (kept[k]) fail("partial_trace: duplicate subsystem index");
    kept[k] = true;
  }
  std::vector<int> keep_sorted;
  std::vector<int> traced;
  for (int k = 0; k < s; ++k) (kept[k] ? keep_sorted : traced).push_back(k);

  std::vector<int> kdims, tdims;
  for (int k : keep_sorted) kdims.push_back(dims[k]);
  for (int k : traced) tdims.push_back(dims[k]);
  const int nk = std::accumulate(kdims.begin(), kdims.end(), 1, std::multiplies<int>());
  const int nt = std::accumulate(tdims.begin(), tdims.end(), 1, std::multiplies<int>());

  // strides of each subsystem in the full index
  std::vector<int> stride(s, 1);
  for (int k = s - 2; k >= 0; --k) stride[k] = stride[k + 1] * dims[k + 1];

  auto full_index = [&](int ik, int it) {
    int idx = 0;
    for (int p = static_cast<int>(keep_sorted.size()) - 1; p >= 0; --p) {
      const int d = kdims[p];
      idx += (ik % d) * stride[keep_sorted[p]];
      ik /= d;
    }
    for (int p = static_cast<int>(traced.size()) - 1; p >= 0; --p) {
      const int d = tdims[p];
      idx += (it % d) * stride[traced[p]];
      it /= d;
    }
    return idx;
  };

  Operator out((HilbertSpace(kdims)));
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < nk; ++j) {
      cx s_ = 0;
      for (int t = 0; t < nt; ++t) s_ += rho.at(full_index(i, t), full_index(j, t));
      out.at(i, j) = s_;
    }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  return DensityMatrix::trusted(partial_trace(rho.op(), keep));
}

// --- LU solve ------------------------------------------------------------------

std::vector<cx> lu_solve(const Operator& a, const std::vector<cx>& b, int m) {
  const int n = a.dim();
  if (static_cast<int>(b.size()) != n * m) fail("lu_solve: rhs size mismatch");
  std::vector<cx> lu = a.data();
  std::vector<int> piv(n);
  auto L = [&](int i, int j) -> cx& { return lu[static_cast<size_t>(i) * n + j]; };

  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::abs(L(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = std::abs(L(i, k));
      if (v > best) { best = v; p = i; }
    }
    piv[k] = p;
    if (p != k)
      for (int j = 0; j < n; ++j) std::swap(L(k, j), L(p, j));
    if (best == 0.0)
      throw std::runtime_error("lu_solve: singular matrix");
    const cx inv = 1.0 / L(k, k);
    for (int i = k + 1; i < n; ++i) {
      const cx f = L(i, k) * inv;
      L(i, k) = f;
      if (f == cx(0, 0)) continue;
      for (int j = k + 1; j < n; ++j) L(i, j) -= f * L(k, j);
    }
  }

  std::vector<cx> x = b;
  auto X = [&](int i, int j) -> cx& { return x[static_cast<size_t>(i) * m + j]; };
  for (int k = 0; k < n; ++k)
    if (piv[k] != k)
      for (int j = 0; j < m; ++j) std::swap(X(k, j), X(piv[k], j));
  for (int k = 0; k < n; ++k)
    for (int i = k + 1; i < n; ++i) {
      const cx f = L(i, k);
      if (f == cx(0, 0)) continue;
      for (int j = 0; j < m; ++j) X(i, j) -= f * X(k, j);
    }
  for (int k = n - 1; k >= 0; --k) {
    const cx inv = 1.0 / L(k, k);
    for (int j = 0; j < m; ++j) {
      cx s = X(k, j);
      for (int i = k + 1; i < n; ++i) s -= L(k, i) * X(i, j);
      X(k, j) = s * inv;
    }
  }
  return x;
}

// --- Cholesky ---------------------------------------------------------------------

Operator cholesky_psd(const Operator& a, double psd_tol) {
  const int n = a.dim();
  Operator L(a.space());
  const double scale = std::max(1.0, a.max_abs());
  for (int j = 0; j < n; ++j) {
    cx djj = a.at(j, j);
    for (int k = 0; k < j; ++k) djj -= L.at(j, k) * std::conj(L.at(j, k));
    const double d = djj.real();
    if (d < -psd_tol * scale)
      throw std::runtime_error("cholesky_psd: matrix not positive semidefinite");
    if (d <= psd_tol * scale) continue;  // zero pivot: column stays zero
    const double ljj = std::sqrt(d);
    L.at(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      cx s = a.at(i, j);
      for (int k = 0; k < j; ++k) s -= L.at(i, k) * std::conj(L.at(j, k));
      L.at(i, j) = s / ljj;
    }
  }
  return L;
}

// --- expm: Pade 13 with scaling and squaring ------------------------------------

namespace {

const double kPade13[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                          1187353796428800.0,  129060195264000.0,   10559470521600.0,
                          670442572800.0,      33522128640.0,       1323241920.0,
                          40840800.0,          960960.0,            16380.0,
                          182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

}  // namespace

Operator expm(const Operator& a) {
  if (!a.all_finite()) throw std::invalid_argument("expm: non-finite input");
  const int n = a.dim();
  const double norm = a.one_norm();
  int squarings = 0;
  if (norm > kTheta13)
    squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));

  Operator A = a;
  if (squarings > 0) A *= cx(std::ldexp(1.0, -squarings), 0);

  const Operator I = Operator::identity(a.space());
  const Operator A2 = A * A;
  const Operator A4 = A2 * A2;
  const Operator A6 = A2 * A4;
  const double* b = kPade13;

  Operator U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) +
                    (b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I));
  Operator V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) +
               (b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I);

  const Operator num = V + U;
  const Operator den = V - U;
  std::vector<cx> x = lu_solve(den, num.data(), n);
  Operator R(a.space());
  R.data() = std::move(x);
  for (int s = 0; s < squarings; ++s) R = R * R;
  return R;
}

// --- general eigensolver -----------------------------------------------------------
//
// Hessenberg reduction (Householder) followed by shifted single-shift QR with
// deflation; eigenvectors by inverse iteration on the Hessenberg form.

namespace {

struct Hessenberg {
  int n;
  std::vector<cx> h;  // row-major n x n, upper Hessenberg
  std::vector<cx> q;  // accumulated transform, A = Q H Q^dagger
  cx& H(int i, int j) { return h[static_cast<size_t>(i) * n + j]; }
  cx& Q(int i, int j) { return q[static_cast<size_t>(i) * n + j]; }
};

Hessenberg hessenberg_reduce(const Operator& a) {
  const int n = a.dim();
  Hessenberg out;
  out.n = n;
  out.h = a.data();
  out.q.assign(static_cast<size_t>(n) * n, cx(0, 0));
  for (int i = 0; i < n; ++i) out.Q(i, i) = 1.0;

  for (int k = 0; k < n - 2; ++k) {
    // Householder vector annihilating column k below row k+1
    double colnorm = 0;
    for (int i = k + 1; i < n; ++i) colnorm += std::norm(out.H(i, k));
    colnorm = std::sqrt(colnorm);
    if (colnorm == 0.0) continue;
    cx alpha = out.H(k + 1, k);
    const double aa = std::abs(alpha);
    const cx phase = (aa == 0.0) ? cx(1, 0) : alpha / aa;
    const cx beta = -phase * colnorm;

    std::vector<cx> v(n, cx(0, 0));
    v[k + 1] = alpha - beta;
    for (int i = k + 2; i < n; ++i) v[i] = out.H(i, k);
    double vnorm2 = 0;
    for (int i = k + 1; i < n; ++i) vnorm2 += std::norm(v[i]);
    if (vnorm2 == 0.0) continue;
    const double tau = 2.0 / vnorm2;

    // H <- P H, P = I - tau v v^dagger
    for (int j = k; j < n; ++j) {
      cx s = 0;
      for (int i = k + 1; i < n; ++i) s += std::conj(v[i]) * out.H(i, j);
      s *= tau;
      for (int i = k + 1; i < n; ++i) out.H(i, j) -= s * v[i];
    }
    // H <- H P
    for (int i = 0; i < n; ++i) {
      cx s = 0;
      for (int j = k + 1; j < n; ++j) s += out.H(i, j) * v[j];
      s *= tau;
      for (int j = k + 1; j < n; ++j) out.H(i, j) -= s * std::conj(v[j]);
    }
    // Q <- Q P
    for (int i = 0; i < n; ++i) {
      cx s = 0;
      for (int j = k + 1; j < n; ++j) s += out.Q(i, j) * v[j];
      s *= tau;
      for (int j = k + 1; j < n; ++j) out.Q(i, j) -= s * std::conj(v[j]);
    }
    out.H(k + 1, k) = beta;
    for (int i = k + 2; i < n; ++i) out.H(i, k) = 0.0;
  }
  return out;
}

// Eigenvalues of the trailing 2x2 block; returns the root closer to h(1,1).
cx wilkinson_shift(cx h00, cx h01, cx h10, cx h11) {
  const cx tr = h00 + h11;
  const cx det = h00 * h11 - h01 * h10;
  const cx disc = std::sqrt(tr * tr - 4.0 * det);
  const cx r1 = 0.5 * (tr + disc);
  const cx r2 = 0.5 * (tr - disc);
  return (std::abs(r1 - h11) < std::abs(r2 - h11)) ? r1 : r2;
}

// Shifted QR on the Hessenberg matrix (values only; h is destroyed).
std::vector<cx> qr_eigenvalues(std::vector<cx> h, int n, int max_sweeps) {
  auto H = [&](int i, int j) -> cx& { return h[static_cast<size_t>(i) * n + j]; };
  std::vector<cx> eigs(n);
  const double eps = 2.2e-16;
  int hi = n - 1;
  int sweeps = 0;
  int stagnation = 0;

  while (hi >= 0) {
    // deflation scan
    int lo = hi;
    while (lo > 0) {
      const double sub = std::abs(H(lo, lo - 1));
      const double diag = std::abs(H(lo - 1, lo - 1)) + std::abs(H(lo, lo));
      if (sub <= eps * (diag > 0 ? diag : 1.0)) {
        H(lo, lo - 1) = 0.0;
        break;
      }
      --lo;
    }
    if (lo == hi) {
      eigs[hi] = H(hi, hi);
      --hi;
      stagnation = 0;
      continue;
    }
    if (lo == hi - 1) {
      const cx tr = H(lo, lo) + H(hi, hi);
      const cx det = H(lo, lo) * H(hi, hi) - H(lo, hi) * H(hi, lo);
      const cx disc = std::sqrt(tr * tr - 4.0 * det);
      eigs[hi] = 0.5 * (tr + disc);
      eigs[lo] = 0.5 * (tr - disc);
      if (std::abs(eigs[hi]) < std::abs(eigs[lo])) std::swap(eigs[hi], eigs[lo]);
      hi -= 2;
      stagnation = 0;
      continue;
    }

    if (++sweeps > max_sweeps)
      throw std::runtime_error("eig_general: QR iteration did not converge within sweep cap");

    cx mu;
    if (++stagnation % 11 == 0) {
      // exceptional shift to break limit cycles
      mu = cx(std::abs(H(hi, hi - 1)) + std::abs(H(hi - 1, hi - 2)), 0.0);
    } else {
      mu = wilkinson_shift(H(hi - 1, hi - 1), H(hi - 1, hi), H(hi, hi - 1), H(hi, hi));
    }

    // explicit single-shift QR step on the active block:
    // QR-factor (H - mu I) with Givens rotations, form RQ, add mu back.
    for (int i = lo; i <= hi; ++i) H(i, i) -= mu;
    std::vector<cx> cs(hi - lo), sn(hi - lo);
    for (int k = lo; k < hi; ++k) {
      const cx x = H(k, k), y = H(k + 1, k);
      const double r = std::sqrt(std::norm(x) + std::norm(y));
      cx c(1, 0), s(0, 0);
      if (r > 0) { c = std::conj(x) / r; s = std::conj(y) / r; }
      cs[k - lo] = c;
      sn[k - lo] = s;
      for (int j = k; j <= hi; ++j) {
        const cx t1 = H(k, j), t2 = H(k + 1, j);
        H(k, j) = c * t1 + s * t2;
        H(k + 1, j) = -std::conj(s) * t1 + std::conj(c) * t2;
      }
      H(k + 1, k) = 0.0;
    }
    for (int k = lo; k < hi; ++k) {
      const cx c = cs[k - lo], s = sn[k - lo];
      const int top = std::min(k + 1, hi);
      for (int i = lo; i <= top; ++i) {
        const cx t1 = H(i, k), t2 = H(i, k + 1);
        H(i, k) = t1 * std::conj(c) + t2 * std::conj(s);
        H(i, k + 1) = -t1 * s + t2 * c;
      }
    }
    for (int i = lo; i <= hi; ++i) H(i, i) += mu;
  }
  return eigs;
}

// Solve (H - lambda I) x = b for Hessenberg H, Gaussian elimination with
// partial pivoting; zero pivots are replaced by a small multiple of ||H||.
std::vector<cx> hessenberg_shifted_solve(const std::vector<cx>& h0, int n, cx lambda,
                                         std::vector<cx> b, double hnorm) {
  std::vector<cx> m = h0;
  auto M = [&](int i, int j) -> cx& { return m[static_cast<size_t>(i) * n + j]; };
  for (int i = 0; i < n; ++i) M(i, i) -= lambda;
  const double tiny = 1e-300 + 2.2e-16 * hnorm;

  for (int k = 0; k < n - 1; ++k) {
    if (std::abs(M(k + 1, k)) > std::abs(M(k, k))) {
      for (int j = k; j < n; ++j) std::swap(M(k, j), M(k + 1, j));
      std::swap(b[k], b[k + 1]);
    }
    if (std::abs(M(k, k)) < tiny) M(k, k) = tiny;
    const cx f = M(k + 1, k) / M(k, k);
    if (f != cx(0, 0)) {
      for (int j = k; j < n; ++j) M(k + 1, j) -= f * M(k, j);
      b[k + 1] -= f * b[k];
    }
  }
  if (std::abs(M(n - 1, n - 1)) < tiny) M(n - 1, n - 1) = tiny;
  for (int k = n - 1; k >= 0; --k) {
    cx s = b[k];
    for (int j = k + 1; j < n; ++j) s -= M(k, j) * b[j];
    b[k] = s / M(k, k);
  }
  return b;
}

}  // namespace

std::vector<EigPair> eig_general(const Operator& a, const EigOptions& opt) {
  const int n = a.dim();
  if (n > 256) fail("eig_general: dimension exceeds 256");
  if (!a.all_finite()) fail("eig_general: non-finite input");

  Hessenberg hess = hessenberg_reduce(a);
  const std::vector<cx> h0 = hess.h;  // keep for inverse iteration
  std::vector<cx> eigs = qr_eigenvalues(hess.h, n, opt.max_sweeps_per_dim * n);

  std::vector<EigPair> out(n);
  for (int k = 0; k < n; ++k) out[k].value = eigs[k];
  if (!opt.want_vectors) return out;

  const double hnorm = a.frobenius_norm();
  const double anorm = hnorm > 0 ? hnorm : 1.0;

  for (int k = 0; k < n; ++k) {
    // separate numerically coincident eigenvalues before shifting
    int cluster = 0;
    for (int j = 0; j < k; ++j)
      if (std::abs(eigs[j] - eigs[k]) <= 1e-12 * anorm) ++cluster;
    cx lambda = eigs[k];
    if (cluster > 0) lambda += cx(cluster * 1e-11 * anorm, cluster * 0.7e-11 * anorm);

    // deterministic pseudo-random start vector
    std::vector<cx> y(n);
    uint64_t state = 0x9e3779b97f4a7c15ull ^ (static_cast<uint64_t>(k) * 0xbf58476d1ce4e5b9ull);
    auto next = [&state]() {
      state ^= state << 13; state ^= state >> 7; state ^= state << 17;
      return 0.5 + (state >> 11) * (1.0 / (1ull << 53));
    };
    for (int i = 0; i < n; ++i) y[i] = cx(next(), next());

    auto hess_apply = [&](const std::vector<cx>& x) {
      std::vector<cx> hx(n, cx(0, 0));
      for (int i = 0; i < n; ++i) {
        cx s = 0;
        const int j0 = std::max(0, i - 1);
        for (int j = j0; j < n; ++j) s += h0[static_cast<size_t>(i) * n + j] * x[j];
        hx[i] = s;
      }
      return hx;
    };
    auto residual_of = [&](const std::vector<cx>& x, cx lam) {
      const auto hx = hess_apply(x);
      double r2 = 0;
      for (int i = 0; i < n; ++i) r2 += std::norm(hx[i] - lam * x[i]);
      return std::sqrt(r2);
    };

    std::vector<cx> v;
    double residual = 1e300;
    for (int attempt = 0; attempt < 3 && residual > opt.residual_tol * anorm; ++attempt) {
      if (attempt > 0) {
        for (int i = 0; i < n; ++i) y[i] = cx(next(), next());
        lambda += cx(1e-12 * anorm, -0.3e-12 * anorm);
      }
      for (int it = 0; it < 5; ++it) {
        y = hessenberg_shifted_solve(h0, n, lambda, y, anorm);
        double nrm = 0;
        for (const cx& c : y) nrm += std::norm(c);
        nrm = std::sqrt(nrm);
        if (!(nrm > 0) || !std::isfinite(nrm)) break;
        for (cx& c : y) c /= nrm;
        residual = residual_of(y, eigs[k]);
        if (residual <= 0.25 * opt.residual_tol * anorm) break;
      }
      v = y;
    }

    // In a defective cluster the QR value can sit sqrt(eps) away from the
    // invariant direction the iteration found; the Rayleigh quotient of the
    // converged vector is then the better value. Keep whichever residual wins.
    {
      const auto hv = hess_apply(v);
      cx rayleigh = 0;
      for (int i = 0; i < n; ++i) rayleigh += std::conj(v[i]) * hv[i];
      double r2 = 0;
      for (int i = 0; i < n; ++i) r2 += std::norm(hv[i] - rayleigh * v[i]);
      if (std::sqrt(r2) < residual_of(v, eigs[k])) {
        eigs[k] = rayleigh;
        out[k].value = rayleigh;
      }
    }

    // back-transform v = Q y
    std::vector<cx> x(n, cx(0, 0));
    for (int i = 0; i < n; ++i) {
      cx s = 0;
      for (int j = 0; j < n; ++j) s += hess.q[static_cast<size_t>(i) * n + j] * v[j];
      x[i] = s;
    }
    double nrm = 0;
    for (const cx& c : x) nrm += std::norm(c);
    nrm = std::sqrt(nrm);
    for (cx& c : x) c /= nrm;
    out[k].vector = std::move(x);
  }
  return out;
}

std::vector<double> eigvals_hermitian(const Operator& a) {
  // Hermitize to guard against 1e-15 drift, then reuse the general solver.
  Operator h = a;
  const int n = a.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h.at(i, j) = 0.5 * (a.at(i, j) + std::conj(a.at(j, i)));
  EigOptions opt;
  opt.want_vectors = false;
  auto pairs = eig_general(h, opt);
  std::vector<double> w(n);
  for (int k = 0; k < n; ++k) w[k] = pairs[k].value.real();
  std::sort(w.begin(), w.end());
  return w;
}

}  // namespace sp
