#include "lindtomo/quantum.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "lindtomo/error.hpp"

namespace lindtomo {

namespace {

void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError(std::string(what) + ": matrix must be square and non-empty");
  }
}

const std::array<CMatrix, 4>& paulis() {
  static const std::array<CMatrix, 4> p = [] {
    std::array<CMatrix, 4> out;
    out[0] = CMatrix::Identity(2, 2);
    out[1] = CMatrix::Zero(2, 2);
    out[1](0, 1) = out[1](1, 0) = 1.0;
    out[2] = CMatrix::Zero(2, 2);
    out[2](0, 1) = -kI;
    out[2](1, 0) = kI;
    out[3] = CMatrix::Zero(2, 2);
    out[3](0, 0) = 1.0;
    out[3](1, 1) = -1.0;
    return out;
  }();
  return p;
}

CMatrix rx(double theta) {
  CMatrix r(2, 2);
  r << std::cos(theta / 2), -kI * std::sin(theta / 2), -kI * std::sin(theta / 2), std::cos(theta / 2);
  return r;
}

CMatrix ry(double theta) {
  CMatrix r(2, 2);
  r << std::cos(theta / 2), -std::sin(theta / 2), std::sin(theta / 2), std::cos(theta / 2);
  return r;
}

}  // namespace

// ---- DensityMatrix / Povm --------------------------------------------------

DensityMatrix DensityMatrix::from(CMatrix m) {
  require_square(m, "DensityMatrix");
  if (hermiticity_error(m) > kHermitianTol) throw ModelError("DensityMatrix: not Hermitian");
  if (std::abs(m.trace() - cplx(1.0)) > kTraceTol) throw ModelError("DensityMatrix: trace is not 1");
  if (min_eigenvalue(m) < kPsdFloor) throw ModelError("DensityMatrix: not positive semidefinite");
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::trusted(CMatrix m) { return DensityMatrix(std::move(m)); }

DensityMatrix DensityMatrix::ground(int n_qubits) {
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  return DensityMatrix(matrix_unit(d, 0, 0));
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
  return DensityMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::thermal(double a) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = 1.0 - a;
  return from(std::move(m));
}

Povm Povm::from(std::vector<CMatrix> elements) {
  if (elements.empty()) throw ModelError("Povm: no elements");
  const auto d = elements.front().rows();
  CMatrix sum = CMatrix::Zero(d, d);
  for (const auto& e : elements) {
    require_square(e, "Povm");
    if (e.rows() != d) throw DimensionError("Povm: elements differ in dimension");
    if (hermiticity_error(e) > kHermitianTol) throw ModelError("Povm: element not Hermitian");
    if (min_eigenvalue(e) < kPsdFloor) throw ModelError("Povm: element not positive semidefinite");
    sum += e;
  }
  if (max_abs(sum - CMatrix::Identity(d, d)) > kTraceTol) {
    throw ModelError("Povm: elements do not sum to identity");
  }
  return Povm(std::move(elements));
}

Povm Povm::trusted(std::vector<CMatrix> elements) { return Povm(std::move(elements)); }

Povm Povm::projective(int n_qubits) {
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  std::vector<CMatrix> e;
  for (Eigen::Index k = 0; k < d; ++k) e.push_back(matrix_unit(d, k, k));
  return Povm(std::move(e));
}

// ---- Operator basis --------------------------------------------------------

HermitianBasis hermitian_basis(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if (dim < 2 || (Eigen::Index{1} << n) != dim) {
    throw DimensionError("hermitian_basis: dimension must be a power of two >= 2");
  }
  static constexpr char kNames[] = {'I', 'X', 'Y', 'Z'};
  HermitianBasis basis;
  basis.dim = dim;
  const int total = 1 << (2 * n);
  for (int code = 1; code < total; ++code) {
    CMatrix op = CMatrix::Identity(1, 1);
    std::string label;
    for (int q = 0; q < n; ++q) {
      const int p = (code >> (2 * (n - 1 - q))) & 3;
      op = kron(op, paulis()[p]);
      label.push_back(kNames[p]);
    }
    basis.operators.push_back(std::move(op));
    basis.labels.push_back(std::move(label));
  }
  return basis;
}

// ---- Cholesky parameterization ---------------------------------------------

CMatrix cholesky_factor(Eigen::Index dim, std::span<const double> reals) {
  if (static_cast<Eigen::Index>(reals.size()) != dim * dim) {
    throw DimensionError("CholeskyParam: expected dim^2 reals");
  }
  CMatrix a = CMatrix::Zero(dim, dim);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      a(i, j) = cplx(reals[k], reals[k + 1]);
      k += 2;
    }
    a(i, i) = reals[k++];
  }
  return a;
}

void pack_cholesky_factor(const CMatrix& lower, std::span<double> out) {
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < lower.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      out[k++] = lower(i, j).real();
      out[k++] = lower(i, j).imag();
    }
    out[k++] = lower(i, i).real();
  }
}

void pack_cholesky_gradient(const CMatrix& grad, std::span<double> out) {
  pack_cholesky_factor(grad, out);
}

CMatrix cholesky_decode(Eigen::Index dim, std::span<const double> reals, bool normalize) {
  const CMatrix a = cholesky_factor(dim, reals);
  CMatrix m = a * a.adjoint();
  if (normalize) {
    const double tr = m.trace().real();
    if (!(tr > 0.0)) throw ModelError("cholesky_decode: zero trace cannot be normalized");
    m /= tr;
  }
  return m;
}

CMatrix cholesky_decode(const CholeskyParam& p, bool normalize) {
  return cholesky_decode(p.dim, p.reals, normalize);
}

CholeskyParam cholesky_encode(const CMatrix& psd) {
  require_square(psd, "cholesky_encode");
  const CMatrix m = hermitian_part(psd);
  const auto d = m.rows();
  const double tol = 1e-14 * std::max(1.0, m.trace().real());
  CMatrix l = CMatrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double s = m(j, j).real();
    for (Eigen::Index k = 0; k < j; ++k) s -= std::norm(l(j, k));
    if (s <= tol) continue;
    const double ljj = std::sqrt(s);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < d; ++i) {
      cplx v = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l(i, k) * std::conj(l(j, k));
      l(i, j) = v / ljj;
    }
  }
  CholeskyParam p{d, std::vector<double>(static_cast<std::size_t>(d * d))};
  pack_cholesky_factor(l, p.reals);
  return p;
}

// ---- Basic operations -------------------------------------------------------

CMatrix tensor(const CMatrix& a, const CMatrix& b) { return kron(a, b); }

double trace_distance(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("trace_distance: dimension mismatch");
  }
  return 0.5 * trace_norm(a - b);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_distance(a.matrix(), b.matrix());
}

double outcome_prob(const CMatrix& rho, const CMatrix& element) {
  if (rho.rows() != element.rows() || rho.cols() != element.cols()) {
    throw DimensionError("outcome_prob: dimension mismatch");
  }
  // Tr[rho M] without forming the product.
  return (rho.transpose().cwiseProduct(element)).sum().real();
}

double outcome_prob(const DensityMatrix& rho, const CMatrix& element) {
  return outcome_prob(rho.matrix(), element);
}

int qubits_for_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim || n == 0) throw DimensionError("dimension is not 2^n");
  return n;
}

CMatrix partial_trace_keep(const CMatrix& rho, int n_qubits, int keep) {
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  if (rho.rows() != d || rho.cols() != d || keep < 0 || keep >= n_qubits) {
    throw DimensionError("partial_trace: unsupported dimension or subsystem");
  }
  const int shift = n_qubits - 1 - keep;
  CMatrix out = CMatrix::Zero(2, 2);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      // Other qubits must agree between row and column.
      const Eigen::Index mask = ~(Eigen::Index{1} << shift);
      if ((i & mask) != (j & mask)) continue;
      out((i >> shift) & 1, (j >> shift) & 1) += rho(i, j);
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, int keep) {
  if (rho.dim() != 4) throw DimensionError("partial_trace: expected a two-qubit state");
  return DensityMatrix::trusted(partial_trace_keep(rho.matrix(), 2, keep));
}

// ---- Pulses -----------------------------------------------------------------

std::string_view to_string(PrepSymbol s) {
  switch (s) {
    case PrepSymbol::zero: return "0";
    case PrepSymbol::one: return "1";
    case PrepSymbol::plus: return "+";
    case PrepSymbol::minus: return "-";
    case PrepSymbol::plus_i: return "+i";
    case PrepSymbol::minus_i: return "-i";
  }
  return "?";
}

std::string_view to_string(BasisSymbol s) {
  switch (s) {
    case BasisSymbol::z: return "z";
    case BasisSymbol::x: return "x";
    case BasisSymbol::y: return "y";
  }
  return "?";
}

CMatrix rotation(PrepSymbol s) {
  using std::numbers::pi;
  switch (s) {
    case PrepSymbol::zero: return CMatrix::Identity(2, 2);
    case PrepSymbol::one: return rx(pi);
    case PrepSymbol::plus: return ry(pi / 2);
    case PrepSymbol::minus: return ry(-pi / 2);
    case PrepSymbol::plus_i: return rx(-pi / 2);
    case PrepSymbol::minus_i: return rx(pi / 2);
  }
  return CMatrix::Identity(2, 2);
}

CMatrix rotation(BasisSymbol s) {
  using std::numbers::pi;
  switch (s) {
    case BasisSymbol::z: return CMatrix::Identity(2, 2);
    case BasisSymbol::x: return ry(-pi / 2);
    case BasisSymbol::y: return rx(pi / 2);
  }
  return CMatrix::Identity(2, 2);
}

namespace {

template <typename Symbol>
int lexicographic_index(const std::vector<Symbol>& symbols, int radix) {
  int idx = 0;
  for (auto s : symbols) idx = idx * radix + static_cast<int>(s);
  return idx;
}

template <typename Symbol>
std::vector<Symbol> symbols_from_index(int index, int n_qubits, int radix) {
  std::vector<Symbol> out(static_cast<std::size_t>(n_qubits));
  for (int q = n_qubits - 1; q >= 0; --q) {
    out[static_cast<std::size_t>(q)] = static_cast<Symbol>(index % radix);
    index /= radix;
  }
  return out;
}

template <typename Symbol>
CMatrix tensor_rotation(const std::vector<Symbol>& symbols) {
  CMatrix r = CMatrix::Identity(1, 1);
  for (auto s : symbols) r = kron(r, rotation(s));
  return r;
}

}  // namespace

int PrepLabel::index() const { return lexicographic_index(symbols, kPrepSymbols); }
int BasisLabel::index() const { return lexicographic_index(symbols, kBasisSymbols); }

std::string PrepLabel::str() const {
  std::string s;
  for (auto p : symbols) s += to_string(p);
  return s;
}

std::string BasisLabel::str() const {
  std::string s;
  for (auto b : symbols) s += to_string(b);
  return s;
}

CMatrix PrepLabel::rotation() const { return tensor_rotation(symbols); }
CMatrix BasisLabel::rotation() const { return tensor_rotation(symbols); }

PrepLabel PrepLabel::parse(std::string_view text) {
  PrepLabel label;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    const bool has_i = i + 1 < text.size() && text[i + 1] == 'i';
    if (c == '0') {
      label.symbols.push_back(PrepSymbol::zero);
    } else if (c == '1') {
      label.symbols.push_back(PrepSymbol::one);
    } else if (c == '+') {
      label.symbols.push_back(has_i ? PrepSymbol::plus_i : PrepSymbol::plus);
      if (has_i) ++i;
    } else if (c == '-') {
      label.symbols.push_back(has_i ? PrepSymbol::minus_i : PrepSymbol::minus);
      if (has_i) ++i;
    } else {
      throw SchemaError("invalid preparation label '" + std::string(text) + "'");
    }
    ++i;
  }
  if (label.symbols.empty()) throw SchemaError("empty preparation label");
  return label;
}

BasisLabel BasisLabel::parse(std::string_view text) {
  BasisLabel label;
  for (char c : text) {
    switch (c) {
      case 'z': label.symbols.push_back(BasisSymbol::z); break;
      case 'x': label.symbols.push_back(BasisSymbol::x); break;
      case 'y': label.symbols.push_back(BasisSymbol::y); break;
      default: throw SchemaError("invalid basis label '" + std::string(text) + "'");
    }
  }
  if (label.symbols.empty()) throw SchemaError("empty basis label");
  return label;
}

PrepLabel PrepLabel::from_index(int index, int n_qubits) {
  return {symbols_from_index<PrepSymbol>(index, n_qubits, kPrepSymbols)};
}

BasisLabel BasisLabel::from_index(int index, int n_qubits) {
  return {symbols_from_index<BasisSymbol>(index, n_qubits, kBasisSymbols)};
}

int count_preps(int n_qubits) {
  int c = 1;
  for (int q = 0; q < n_qubits; ++q) c *= kPrepSymbols;
  return c;
}

int count_bases(int n_qubits) {
  int c = 1;
  for (int q = 0; q < n_qubits; ++q) c *= kBasisSymbols;
  return c;
}

int count_outcomes(int n_qubits) { return 1 << n_qubits; }

std::string outcome_label(int outcome, int n_qubits) {
  std::string s(static_cast<std::size_t>(n_qubits), '0');
  for (int q = 0; q < n_qubits; ++q) {
    if ((outcome >> (n_qubits - 1 - q)) & 1) s[static_cast<std::size_t>(q)] = '1';
  }
  return s;
}

int parse_outcome(std::string_view bits, int n_qubits) {
  if (static_cast<int>(bits.size()) != n_qubits) {
    throw SchemaError("outcome label '" + std::string(bits) + "' has the wrong length");
  }
  int v = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw SchemaError("outcome label must be a bitstring");
    v = 2 * v + (c - '0');
  }
  return v;
}

}  // namespace lindtomo
