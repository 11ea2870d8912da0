#include "sp/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef SP_HAVE_CBLAS
#include <cblas.h>
#endif

namespace sp {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

// vec index of matrix entry (i, j) under column stacking
inline int vec_idx(int i, int j, int d) { return j * d + i; }

}  // namespace

SuperOperator::SuperOperator(HilbertSpace space, std::vector<cx> data)
    : space_(std::move(space)), d_(space_.total()), a_(std::move(data)) {
  if (a_.size() != static_cast<size_t>(d_) * d_ * d_ * d_)
    fail("SuperOperator: data size must be d^2 x d^2");
}

SuperOperator SuperOperator::identity(const HilbertSpace& space) {
  const int d = space.total();
  std::vector<cx> a(static_cast<size_t>(d) * d * d * d, cx(0, 0));
  for (int i = 0; i < d * d; ++i) a[static_cast<size_t>(i) * d * d + i] = 1.0;
  return SuperOperator(space, std::move(a));
}

SuperOperator& SuperOperator::operator+=(const SuperOperator& o) {
  if (o.d_ != d_) fail("SuperOperator+: dimension mismatch");
  for (size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}

SuperOperator& SuperOperator::operator*=(cx s) {
  for (cx& v : a_) v *= s;
  return *this;
}

std::vector<cx> SuperOperator::apply_vec(const std::vector<cx>& v) const {
  const int n = sdim();
  if (static_cast<int>(v.size()) != n) fail("apply_vec: dimension mismatch");
  std::vector<cx> y(n, cx(0, 0));
#ifdef SP_HAVE_CBLAS
  const cx one(1, 0), zero(0, 0);
  cblas_zgemv(CblasRowMajor, CblasNoTrans, n, n, &one, a_.data(), n, v.data(), 1, &zero,
              y.data(), 1);
#else
  for (int i = 0; i < n; ++i) {
    const cx* row = &a_[static_cast<size_t>(i) * n];
    cx s = 0;
    for (int j = 0; j < n; ++j) s += row[j] * v[j];
    y[i] = s;
  }
#endif
  return y;
}

Operator SuperOperator::as_matrix() const {
  Operator out((HilbertSpace({sdim()})));
  out.data() = a_;
  return out;
}

double KrausChannel::completeness_defect() const {
  if (elements.empty()) return 1.0;
  const int n = elements.front().dim();
  Operator sum(elements.front().space());
  for (const Operator& e : elements) sum += e.adjoint() * e;
  double defect = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      defect = std::max(defect, std::abs(sum.at(i, j) - (i == j ? cx(1, 0) : cx(0, 0))));
  return defect;
}

std::vector<cx> vectorize(const Operator& rho) {
  const int d = rho.dim();
  std::vector<cx> v(static_cast<size_t>(d) * d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) v[vec_idx(i, j, d)] = rho.at(i, j);
  return v;
}

Operator devectorize(const std::vector<cx>& v, const HilbertSpace& space) {
  const int d = space.total();
  if (static_cast<int>(v.size()) != d * d) fail("devectorize: size mismatch");
  Operator rho(space);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) rho.at(i, j) = v[vec_idx(i, j, d)];
  return rho;
}

namespace {

// conj(A) (x) B laid out directly in the d^2 x d^2 superoperator frame
SuperOperator kron_conj_left(const Operator& a, const Operator& b) {
  const int d = a.dim();
  std::vector<cx> s(static_cast<size_t>(d) * d * d * d, cx(0, 0));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const cx aij = std::conj(a.at(i, j));
      if (aij == cx(0, 0)) continue;
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          const cx bkl = b.at(k, l);
          if (bkl == cx(0, 0)) continue;
          s[static_cast<size_t>(i * d + k) * d * d + (j * d + l)] += aij * bkl;
        }
    }
  return SuperOperator(a.space(), std::move(s));
}

}  // namespace

SuperOperator superop_from_unitary(const Operator& u) {
  const Operator gram = u.adjoint() * u;
  double defect = 0;
  for (int i = 0; i < u.dim(); ++i)
    for (int j = 0; j < u.dim(); ++j)
      defect = std::max(defect, std::abs(gram.at(i, j) - (i == j ? cx(1, 0) : cx(0, 0))));
  if (defect > 1e-10) fail("superop_from_unitary: input not unitary, defect " + std::to_string(defect));
  return kron_conj_left(u, u);
}

SuperOperator superop_from_kraus(const KrausChannel& k) {
  if (k.elements.empty()) fail("superop_from_kraus: empty Kraus set");
  const double defect = k.completeness_defect();
  if (defect > 1e-10)
    fail("superop_from_kraus: incomplete Kraus set, defect " + std::to_string(defect));
  SuperOperator s = kron_conj_left(k.elements.front(), k.elements.front());
  for (size_t i = 1; i < k.elements.size(); ++i)
    s += kron_conj_left(k.elements[i], k.elements[i]);
  return s;
}

SuperOperator liouvillian(const LindbladModel& m) {
  const Operator& h = m.hamiltonian;
  const int d = h.dim();
  double herm = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      herm = std::max(herm, std::abs(h.at(i, j) - std::conj(h.at(j, i))));
  if (herm > tol::kHermitian) fail("liouvillian: Hamiltonian not Hermitian");
  if (d * d > 256) fail("liouvillian: dense construction capped at d^2 <= 256");

  const Operator I = Operator::identity(h.space());
  const int n = d * d;
  std::vector<cx> a(static_cast<size_t>(n) * n, cx(0, 0));
  SuperOperator L(h.space(), std::move(a));

  // -i (I (x) H - H^T (x) I): conj-left layout means conj(A)(x)B with A=I,B=H etc.
  {
    SuperOperator lh = kron_conj_left(I, h);
    SuperOperator rh = kron_conj_left(h.conjugate(), I);  // conj(conj(H))=H^T on the left
    lh *= cx(0, -1);
    rh *= cx(0, 1);
    L += lh;
    L += rh;
  }
  for (const Operator& j : m.jumps) {
    const Operator jdj = j.adjoint() * j;
    SuperOperator sandwich = kron_conj_left(j, j);
    SuperOperator left = kron_conj_left(I, jdj);
    SuperOperator right = kron_conj_left(jdj.conjugate(), I);
    left *= cx(-0.5, 0);
    right *= cx(-0.5, 0);
    L += sandwich;
    L += left;
    L += right;
  }
  return L;
}

SuperOperator compose(const SuperOperator& s2, const SuperOperator& s1) {
  if (s2.dim() != s1.dim() || !(s2.space() == s1.space()))
    fail("compose: space mismatch");
  const int n = s2.sdim();
  std::vector<cx> out(static_cast<size_t>(n) * n, cx(0, 0));
#ifdef SP_HAVE_CBLAS
  const cx one(1, 0), zero(0, 0);
  cblas_zgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, n, n, n, &one, s2.data().data(), n,
              s1.data().data(), n, &zero, out.data(), n);
#else
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const cx v = s2.data()[static_cast<size_t>(i) * n + k];
      if (v == cx(0, 0)) continue;
      for (int j = 0; j < n; ++j)
        out[static_cast<size_t>(i) * n + j] += v * s1.data()[static_cast<size_t>(k) * n + j];
    }
#endif
  return SuperOperator(s2.space(), std::move(out));
}

DensityMatrix apply(const SuperOperator& s, const DensityMatrix& rho) {
  if (!(s.space() == rho.space())) fail("apply: space mismatch");
  Operator out = devectorize(s.apply_vec(vectorize(rho.op())), s.space());

  const int d = out.dim();
  double herm_drift = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      herm_drift = std::max(herm_drift, std::abs(out.at(i, j) - std::conj(out.at(j, i))));
  const double trace_drift = std::abs(out.trace() - cx(1, 0));

  if (herm_drift > 1e-12) {
    Operator sym(out.space());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) sym.at(i, j) = 0.5 * (out.at(i, j) + std::conj(out.at(j, i)));
    out = std::move(sym);
  }
  if (trace_drift > 1e-12) {
    const double tr = out.trace().real();
    if (tr <= 0) throw std::runtime_error("apply: non-positive trace");
    out *= cx(1.0 / tr, 0);
  }
  return DensityMatrix::trusted(out, 1e-10, 1e-8);
}

double trace_preservation_defect(const SuperOperator& s) {
  const int d = s.dim();
  const int n = s.sdim();
  // (S^dagger vec(I))_j = sum_i conj(S_ij) [vec(I)]_i
  double defect = 0;
  for (int j = 0; j < n; ++j) {
    cx acc = 0;
    for (int k = 0; k < d; ++k) acc += std::conj(s.at(vec_idx(k, k, d), j));
    const cx target = (j % d == j / d) ? cx(1, 0) : cx(0, 0);
    defect = std::max(defect, std::abs(acc - target));
  }
  return defect;
}

Operator choi_matrix(const SuperOperator& s) {
  // C = sum_{ij} |i><j| (x) E(|i><j|); C[(i,k),(j,l)] = S[(k,l) frame...]
  // With column stacking, E(|i><j|) has entries [E]_{kl} = S[vec(k,l), vec(i,j)].
  const int d = s.dim();
  Operator c((HilbertSpace({d, d})));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
          c.at(i * d + k, j * d + l) = s.at(vec_idx(k, l, d), vec_idx(i, j, d));
  return c;
}

double choi_min_eigenvalue(const SuperOperator& s) {
  const auto w = eigvals_hermitian(choi_matrix(s));
  return w.front();
}

int count_nonzero_eigenvalues(const std::vector<cx>& eigs, double threshold) {
  int n = 0;
  for (const cx& v : eigs)
    if (std::abs(v) > threshold) ++n;
  return n;
}

namespace {

DensityMatrix state_from_eigvec(const std::vector<cx>& v, const HilbertSpace& space) {
  Operator raw = devectorize(v, space);
  // rotate away the arbitrary eigenvector phase so the trace is real positive
  const cx tr = raw.trace();
  if (std::abs(tr) > 1e-12) raw *= std::conj(tr) / std::abs(tr);
  const int d = raw.dim();
  Operator sym(raw.space());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) sym.at(i, j) = 0.5 * (raw.at(i, j) + std::conj(raw.at(j, i)));
  const double tr2 = sym.trace().real();
  if (std::abs(tr2) < 1e-12)
    throw std::runtime_error("spectral_analysis: traceless top eigenvector");
  sym *= cx(1.0 / tr2, 0);
  return DensityMatrix::trusted(sym, 1e-8, 1e-8);
}

}  // namespace

SpectralResult spectral_analysis(const SuperOperator& s, MapKind kind,
                                 const SpectralOptions& opt) {
  if (s.sdim() > 256)
    fail("spectral_analysis: dense analysis capped at d^2 <= 256");
  auto pairs = eig_general(s.as_matrix());

  auto better = [&](const EigPair& a, const EigPair& b) {
    return kind == MapKind::Discrete ? std::abs(a.value) > std::abs(b.value)
                                     : a.value.real() > b.value.real();
  };
  std::sort(pairs.begin(), pairs.end(), better);

  SpectralResult out;
  out.eigenvalues.reserve(pairs.size());
  for (const auto& p : pairs) out.eigenvalues.push_back(p.value);

  const cx top = pairs.front().value;
  if (kind == MapKind::Discrete) {
    if (std::abs(std::abs(top) - 1.0) > 1e-9)
      throw std::runtime_error("spectral_analysis: top eigenvalue modulus " +
                               std::to_string(std::abs(top)) + " != 1");
  } else {
    if (std::abs(top) > 1e-6)
      throw std::runtime_error("spectral_analysis: generator top eigenvalue not ~0");
  }

  // collect all eigenvectors tied at the top
  size_t ties = 1;
  while (ties < pairs.size()) {
    const double sep = kind == MapKind::Discrete
                           ? std::abs(top) - std::abs(pairs[ties].value)
                           : top.real() - pairs[ties].value.real();
    if (sep < opt.degeneracy_tol) ++ties; else break;
  }
  out.degenerate = ties > 1;
  for (size_t k = 0; k < ties; ++k)
    out.top_states.push_back(state_from_eigvec(pairs[k].vector, s.space()));
  out.steady_state = out.top_states.front();

  // gap from the first eigenvalue below the top tie
  if (ties < pairs.size()) {
    if (kind == MapKind::Discrete) {
      const double l2 = std::abs(pairs[ties].value);
      out.gap = l2 > 0 ? -std::log(l2) : std::numeric_limits<double>::infinity();
    } else {
      double slowest = -std::numeric_limits<double>::infinity();
      for (size_t k = ties; k < pairs.size(); ++k)
        slowest = std::max(slowest, pairs[k].value.real());
      out.gap = -slowest;
    }
  }
  return out;
}

}  // namespace sp
