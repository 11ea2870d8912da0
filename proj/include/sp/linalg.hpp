#pragma once

// Dense complex linear algebra for small Hilbert spaces.
//
// Everything here is a value type: operations return new objects and never
// mutate their inputs, so concurrent use from sweep workers needs no locking.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace sp {

using cx = std::complex<double>;

namespace tol {
// Fixed default tolerances (see config overrides on the individual calls).
inline constexpr double kHermitian = 1e-12;
inline constexpr double kTrace = 1e-10;
inline constexpr double kEigResidual = 1e-9;   // relative to ||A||_F
inline constexpr double kPositivity = -1e-10;  // density-matrix eigenvalue floor
}  // namespace tol

// Ordered list of subsystem dimensions, e.g. {3,3} for two qutrits or
// {3,3,12} with a truncated oscillator.
class HilbertSpace {
 public:
  static constexpr long kDimCap = 4096;

  HilbertSpace() = default;
  explicit HilbertSpace(std::vector<int> dims);
  HilbertSpace(std::initializer_list<int> dims)
      : HilbertSpace(std::vector<int>(dims)) {}

  const std::vector<int>& dims() const { return dims_; }
  int subsystems() const { return static_cast<int>(dims_.size()); }
  int total() const { return total_; }

  friend bool operator==(const HilbertSpace& a, const HilbertSpace& b) {
    return a.dims_ == b.dims_;
  }
  friend bool operator!=(const HilbertSpace& a, const HilbertSpace& b) {
    return !(a == b);
  }

 private:
  std::vector<int> dims_;
  int total_ = 0;
};

// Square dense complex matrix tagged with its Hilbert space. Row-major.
class Operator {
 public:
  Operator() = default;
  explicit Operator(HilbertSpace space);  // zero-filled

  static Operator identity(HilbertSpace space);
  static Operator from_rows(HilbertSpace space, const std::vector<std::vector<cx>>& rows);

  const HilbertSpace& space() const { return space_; }
  int dim() const { return n_; }

  cx& at(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
  const cx& at(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }
  const std::vector<cx>& data() const { return a_; }
  std::vector<cx>& data() { return a_; }

  Operator adjoint() const;
  Operator transpose() const;
  Operator conjugate() const;
  cx trace() const;
  double frobenius_norm() const;
  double one_norm() const;  // max column sum, used by expm scaling
  double max_abs() const;
  bool all_finite() const;

  Operator& operator+=(const Operator& o);
  Operator& operator-=(const Operator& o);
  Operator& operator*=(cx s);

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(cx s, Operator a) { return a *= s; }
  friend Operator operator*(Operator a, cx s) { return a *= s; }
  friend Operator operator*(const Operator& a, const Operator& b);  // matmul

  // y = A x
  std::vector<cx> apply(const std::vector<cx>& x) const;

 private:
  HilbertSpace space_;
  int n_ = 0;
  std::vector<cx> a_;
};

// Hermitian, unit-trace, positive wrapper around Operator.
// `checked` validates all three invariants (positivity via eigenvalues, so it
// costs an eigendecomposition); `trusted` only validates Hermiticity + trace.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  static DensityMatrix checked(const Operator& rho,
                               double herm_tol = tol::kHermitian,
                               double trace_tol = tol::kTrace,
                               double eig_floor = tol::kPositivity);
  static DensityMatrix trusted(const Operator& rho,
                               double herm_tol = tol::kHermitian,
                               double trace_tol = tol::kTrace);
  static DensityMatrix pure(const HilbertSpace& space, const std::vector<cx>& psi);

  const Operator& op() const { return rho_; }
  const HilbertSpace& space() const { return rho_.space(); }
  int dim() const { return rho_.dim(); }
  const cx& at(int i, int j) const { return rho_.at(i, j); }

 private:
  explicit DensityMatrix(Operator rho) : rho_(std::move(rho)) {}
  Operator rho_;
};

// --- construction helpers -------------------------------------------------

// Kronecker product; result space is the concatenation of the input spaces.
Operator kron(const Operator& a, const Operator& b);

// Trace out all subsystems not listed in `keep` (indices into space().dims()).
// `keep` must be nonempty, sorted output order follows the original order.
Operator partial_trace(const Operator& rho, const std::vector<int>& keep);
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);

// --- dense numerics --------------------------------------------------------

// Matrix exponential, scaling-and-squaring with a degree-13 Pade approximant.
Operator expm(const Operator& a);

// Solve A X = B with partial-pivot LU; B and the result are n x m (row-major).
std::vector<cx> lu_solve(const Operator& a, const std::vector<cx>& b, int m);

// Cholesky factor L (lower) of a Hermitian PSD matrix, with tolerant handling
// of zero pivots (column zeroed when the pivot falls below `psd_tol`).
Operator cholesky_psd(const Operator& a, double psd_tol = 1e-12);

struct EigPair {
  cx value;
  std::vector<cx> vector;  // right eigenvector, unit norm
};

struct EigOptions {
  // QR sweep budget; the solver throws after 100*N sweeps by default.
  int max_sweeps_per_dim = 100;
  double residual_tol = tol::kEigResidual;  // relative to ||A||_F
  bool want_vectors = true;
};

// Full eigendecomposition of a general complex matrix (N <= 256).
// Hessenberg reduction + shifted QR for eigenvalues, inverse iteration on the
// Hessenberg form for eigenvectors. Unordered.
std::vector<EigPair> eig_general(const Operator& a, const EigOptions& opt = {});

// Eigenvalues of a Hermitian matrix in ascending order (via eig_general on the
// Hermitized input; the imaginary parts are discarded).
std::vector<double> eigvals_hermitian(const Operator& a);

}  // namespace sp
