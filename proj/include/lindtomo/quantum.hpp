#pragma once

// Quantum-state and measurement primitives: density matrices, POVMs, the
// Pauli-tensor operator basis, Cholesky parameterization of PSD matrices and
// the preparation/measurement pulse labels of the tomography protocol.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lindtomo/linalg.hpp"

namespace lindtomo {

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdFloor = -1e-9;

// Hermitian, unit-trace, PSD matrix. Construction through from() validates;
// the matrix is immutable afterwards.
class DensityMatrix {
 public:
  static DensityMatrix from(CMatrix m);
  // Skips validation; callers guarantee the invariants by construction.
  static DensityMatrix trusted(CMatrix m);

  static DensityMatrix ground(int n_qubits);
  static DensityMatrix maximally_mixed(Eigen::Index dim);
  static DensityMatrix thermal(double a);

  const CMatrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }

 private:
  explicit DensityMatrix(CMatrix m) : m_(std::move(m)) {}
  CMatrix m_;
};

// PSD elements summing to the identity, one per outcome bitstring (outcome
// index == integer value of the bitstring, qubit A most significant).
class Povm {
 public:
  static Povm from(std::vector<CMatrix> elements);
  static Povm trusted(std::vector<CMatrix> elements);
  static Povm projective(int n_qubits);

  const std::vector<CMatrix>& elements() const noexcept { return elements_; }
  const CMatrix& operator[](std::size_t i) const { return elements_[i]; }
  std::size_t size() const noexcept { return elements_.size(); }
  Eigen::Index dim() const { return elements_.front().rows(); }

 private:
  explicit Povm(std::vector<CMatrix> e) : elements_(std::move(e)) {}
  std::vector<CMatrix> elements_;
};

// Traceless Hermitian, Hilbert-Schmidt orthogonal operators with
// Tr[s_i s_j] = dim * delta_ij (Pauli tensor products without the identity).
// Every serialized Lindblad matrix is expressed in this basis and order.
struct HermitianBasis {
  Eigen::Index dim = 0;
  std::vector<CMatrix> operators;
  std::vector<std::string> labels;  // e.g. "X", "ZI", "IY"

  std::size_t size() const noexcept { return operators.size(); }
  double normalization() const noexcept { return static_cast<double>(dim); }
};

HermitianBasis hermitian_basis(Eigen::Index dim);

// Lower-triangular complex A (real diagonal) packed into dim^2 reals, rows of
// the lower triangle in order: diagonal entries take one real, off-diagonal
// entries two (re, im).
struct CholeskyParam {
  Eigen::Index dim = 0;
  std::vector<double> reals;
};

CMatrix cholesky_factor(Eigen::Index dim, std::span<const double> reals);
// A A^dagger, divided by its trace when normalize is set.
CMatrix cholesky_decode(const CholeskyParam& p, bool normalize);
CMatrix cholesky_decode(Eigen::Index dim, std::span<const double> reals, bool normalize);
// Factorization of a PSD matrix; zero pivots produce zero columns.
CholeskyParam cholesky_encode(const CMatrix& psd);
void pack_cholesky_factor(const CMatrix& lower, std::span<double> out);
// Gradient wrt the packed reals given dF/dRe(A) + i dF/dIm(A) for the full factor.
void pack_cholesky_gradient(const CMatrix& grad, std::span<double> out);

CMatrix tensor(const CMatrix& a, const CMatrix& b);
double trace_distance(const CMatrix& a, const CMatrix& b);
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);
double outcome_prob(const CMatrix& rho, const CMatrix& element);
double outcome_prob(const DensityMatrix& rho, const CMatrix& element);

// Reduced state of one qubit of an n-qubit state (qubit 0 = A, the most
// significant tensor factor).
CMatrix partial_trace_keep(const CMatrix& rho, int n_qubits, int keep);
DensityMatrix partial_trace(const DensityMatrix& rho, int keep);

// ---- Protocol pulses -------------------------------------------------------

enum class PrepSymbol { zero, one, plus, minus, plus_i, minus_i };
enum class BasisSymbol { z, x, y };

inline constexpr int kPrepSymbols = 6;
inline constexpr int kBasisSymbols = 3;

std::string_view to_string(PrepSymbol s);
std::string_view to_string(BasisSymbol s);

// Exact single-qubit rotations (perfect pulses): preparation
// {Id, X_pi, Y_pi/2, Y_-pi/2, X_-pi/2, X_pi/2} for {0, 1, +, -, +i, -i};
// measurement {Id, Y_-pi/2, X_pi/2} for the {z, x, y} bases.
CMatrix rotation(PrepSymbol s);
CMatrix rotation(BasisSymbol s);

// Per-qubit pulse symbols, qubit A first. Text form concatenates the
// per-qubit symbols ("0", "+i", "1-i", "zx").
struct PrepLabel {
  std::vector<PrepSymbol> symbols;

  int n_qubits() const { return static_cast<int>(symbols.size()); }
  int index() const;  // lexicographic, qubit A most significant
  std::string str() const;
  CMatrix rotation() const;
  static PrepLabel parse(std::string_view text);
  static PrepLabel from_index(int index, int n_qubits);
  friend bool operator==(const PrepLabel&, const PrepLabel&) = default;
};

struct BasisLabel {
  std::vector<BasisSymbol> symbols;

  int n_qubits() const { return static_cast<int>(symbols.size()); }
  int index() const;
  std::string str() const;
  CMatrix rotation() const;
  static BasisLabel parse(std::string_view text);
  static BasisLabel from_index(int index, int n_qubits);
  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
};

int count_preps(int n_qubits);
int count_bases(int n_qubits);
int count_outcomes(int n_qubits);
std::string outcome_label(int outcome, int n_qubits);
int parse_outcome(std::string_view bits, int n_qubits);
int qubits_for_dim(Eigen::Index dim);

}  // namespace lindtomo
