#pragma once

// Quantum channels and Lindblad generators as dense superoperators acting on
// column-stacked density matrices, plus spectral analysis of both.

#include <optional>
#include <vector>

#include "sp/linalg.hpp"

namespace sp {

// Dense d^2 x d^2 matrix acting on vec(rho), column-stacking convention:
// vec(A X B) = (B^T (x) A) vec(X).
class SuperOperator {
 public:
  SuperOperator() = default;
  SuperOperator(HilbertSpace space, std::vector<cx> data);
  static SuperOperator identity(const HilbertSpace& space);

  const HilbertSpace& space() const { return space_; }
  int dim() const { return d_; }        // Hilbert-space dimension d
  int sdim() const { return d_ * d_; }  // superoperator dimension d^2

  cx& at(int i, int j) { return a_[static_cast<size_t>(i) * sdim() + j]; }
  const cx& at(int i, int j) const { return a_[static_cast<size_t>(i) * sdim() + j]; }
  const std::vector<cx>& data() const { return a_; }

  SuperOperator& operator+=(const SuperOperator& o);
  SuperOperator& operator*=(cx s);
  friend SuperOperator operator+(SuperOperator a, const SuperOperator& b) { return a += b; }
  friend SuperOperator operator*(cx s, SuperOperator a) { return a *= s; }

  std::vector<cx> apply_vec(const std::vector<cx>& v) const;

  // Interpret this superoperator as a plain matrix (for eig_general etc.).
  Operator as_matrix() const;

 private:
  HilbertSpace space_;
  int d_ = 0;
  std::vector<cx> a_;
};

struct KrausChannel {
  std::vector<Operator> elements;

  // max elementwise deviation of sum_k E_k^dagger E_k from identity
  double completeness_defect() const;
};

struct LindbladModel {
  Operator hamiltonian;          // angular-frequency units, Hermitian
  std::vector<Operator> jumps;   // units of sqrt(rate)
};

enum class MapKind { Discrete, Generator };

struct SpectralResult {
  // sorted by descending |lambda| (Discrete) or descending Re lambda (Generator)
  std::vector<cx> eigenvalues;
  DensityMatrix steady_state;
  double gap = 0;
  bool degenerate = false;                  // top eigenvalue tied within 1e-9
  std::vector<DensityMatrix> top_states;    // all states tied at the top
};

// --- vectorization -----------------------------------------------------------

std::vector<cx> vectorize(const Operator& rho);
Operator devectorize(const std::vector<cx>& v, const HilbertSpace& space);

// --- channel construction ------------------------------------------------------

// S vec(rho) = vec(U rho U^dagger); throws if U is not unitary to 1e-10.
SuperOperator superop_from_unitary(const Operator& u);

// S = sum_k conj(E_k) (x) E_k; throws if the Kraus set is incomplete (1e-10).
SuperOperator superop_from_kraus(const KrausChannel& k);

// Lindblad generator:
// L = -i(I(x)H - H^T(x)I) + sum_j [conj(L_j)(x)L_j - 1/2 I(x)L_j^dag L_j
//                                   - 1/2 (L_j^dag L_j)^T (x) I]
SuperOperator liouvillian(const LindbladModel& m);

// --- composition / application ----------------------------------------------------

SuperOperator compose(const SuperOperator& s2, const SuperOperator& s1);  // s2 * s1

// devectorize(S vec(rho)), Hermitized and trace-renormalized only when the
// drift exceeds 1e-12.
DensityMatrix apply(const SuperOperator& s, const DensityMatrix& rho);

// --- diagnostics -----------------------------------------------------------------

// || S^dagger vec(I) - vec(I) ||_inf, zero for a trace-preserving map
double trace_preservation_defect(const SuperOperator& s);

// Choi matrix (d^2 x d^2, Hermitian for Hermiticity-preserving maps)
Operator choi_matrix(const SuperOperator& s);

double choi_min_eigenvalue(const SuperOperator& s);

// --- spectral analysis -------------------------------------------------------------

struct SpectralOptions {
  double degeneracy_tol = 1e-9;
};

// Count of eigenvalues with |lambda| above the threshold. Defective zero
// clusters of a channel surface at ~sqrt(machine eps) in any backward-stable
// solver, so thresholds below ~1e-7 are not meaningful for that purpose.
int count_nonzero_eigenvalues(const std::vector<cx>& eigs, double threshold = 1e-7);

SpectralResult spectral_analysis(const SuperOperator& s, MapKind kind,
                                 const SpectralOptions& opt = {});

}  // namespace sp
