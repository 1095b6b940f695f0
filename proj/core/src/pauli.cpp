#include "qbell/pauli.hpp"

#include <bit>
#include <cassert>
#include <stdexcept>

namespace qbell {

namespace {

std::size_t popcount_and(const std::vector<Word>& a, const std::vector<Word>& b) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < a.size(); ++i) c += std::popcount(a[i] & b[i]);
  return c;
}

}  // namespace

PauliOperator PauliOperator::single(std::size_t n, std::size_t q, char p) {
  PauliOperator out(n);
  out.set_letter(q, p);
  return out;
}

void PauliOperator::set_x(std::size_t q, bool v) {
  Word m = Word(1) << (q & 63);
  if (v)
    x_[q >> 6] |= m;
  else
    x_[q >> 6] &= ~m;
}

void PauliOperator::set_z(std::size_t q, bool v) {
  Word m = Word(1) << (q & 63);
  if (v)
    z_[q >> 6] |= m;
  else
    z_[q >> 6] &= ~m;
}

char PauliOperator::letter(std::size_t q) const {
  bool x = x_bit(q), z = z_bit(q);
  if (x && z) return 'Y';
  if (x) return 'X';
  if (z) return 'Z';
  return 'I';
}

void PauliOperator::set_letter(std::size_t q, char p) {
  // Remove the current factor's phase contribution, then add the new one.
  if (x_bit(q) && z_bit(q)) phase_ = (phase_ + 3) & 3;
  switch (p) {
    case 'I': set_x(q, false); set_z(q, false); break;
    case 'X': set_x(q, true); set_z(q, false); break;
    case 'Z': set_x(q, false); set_z(q, true); break;
    case 'Y':
      set_x(q, true);
      set_z(q, true);
      phase_ = (phase_ + 1) & 3;
      break;
    default: throw std::invalid_argument("bad Pauli letter");
  }
}

bool PauliOperator::masks_zero() const {
  for (std::size_t i = 0; i < x_.size(); ++i)
    if (x_[i] | z_[i]) return false;
  return true;
}

std::size_t PauliOperator::weight() const {
  std::size_t w = 0;
  for (std::size_t i = 0; i < x_.size(); ++i) w += std::popcount(x_[i] | z_[i]);
  return w;
}

bool PauliOperator::commutes_with(const PauliOperator& other) const {
  assert(n_ == other.n_);
  std::size_t s = popcount_and(x_, other.z_) + popcount_and(z_, other.x_);
  return (s & 1) == 0;
}

PauliOperator& PauliOperator::operator*=(const PauliOperator& rhs) {
  if (n_ != rhs.n_) throw std::invalid_argument("pauli_mul: dimension mismatch");
  // (i^a X(x1)Z(z1)) (i^b X(x2)Z(z2)) = i^(a+b) (-1)^{z1.x2} X(x1^x2) Z(z1^z2)
  std::size_t anti = popcount_and(z_, rhs.x_);
  phase_ = (phase_ + rhs.phase_ + 2 * (anti & 1)) & 3;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    x_[i] ^= rhs.x_[i];
    z_[i] ^= rhs.z_[i];
  }
  return *this;
}

PauliOperator PauliOperator::embed(std::size_t m,
                                   const std::vector<std::size_t>& offsets) const {
  PauliOperator out(m);
  out.set_phase(phase_);
  for (std::size_t q = 0; q < n_; ++q) {
    if (x_bit(q)) out.set_x(offsets[q], true);
    if (z_bit(q)) out.set_z(offsets[q], true);
  }
  return out;
}

std::string PauliOperator::str() const {
  static const char* pre[4] = {"+", "+i", "-", "-i"};
  // Report the phase relative to letter form (Y factors absorb one i each).
  std::size_t ys = popcount_and(x_, z_);
  std::uint8_t disp = (phase_ + 4 - (ys & 3)) & 3;
  std::string s = pre[disp];
  for (std::size_t q = 0; q < n_; ++q) s += letter(q);
  return s;
}

PauliOperator pauli_mul(const PauliOperator& a, const PauliOperator& b) {
  PauliOperator out = a;
  out *= b;
  return out;
}

bool gate_is_two_qubit(Gate g) { return g == Gate::CNOT || g == Gate::SWAP; }

const char* gate_name(Gate g) {
  switch (g) {
    case Gate::I: return "id";
    case Gate::X: return "x";
    case Gate::Y: return "y";
    case Gate::Z: return "z";
    case Gate::H: return "h";
    case Gate::S: return "s";
    case Gate::SDG: return "sdg";
    case Gate::CNOT: return "cnot";
    case Gate::SWAP: return "swap";
  }
  return "?";
}

std::optional<Gate> gate_from_name(std::string_view s) {
  if (s == "id" || s == "i") return Gate::I;
  if (s == "x") return Gate::X;
  if (s == "y") return Gate::Y;
  if (s == "z") return Gate::Z;
  if (s == "h") return Gate::H;
  if (s == "s") return Gate::S;
  if (s == "sdg") return Gate::SDG;
  if (s == "cnot" || s == "cx") return Gate::CNOT;
  if (s == "swap") return Gate::SWAP;
  return std::nullopt;
}

Gate gate_inverse(Gate g) {
  switch (g) {
    case Gate::S: return Gate::SDG;
    case Gate::SDG: return Gate::S;
    default: return g;
  }
}

CliffordAction CliffordAction::identity(std::size_t n) {
  CliffordAction c;
  c.n_ = n;
  c.x_img_.reserve(n);
  c.z_img_.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    c.x_img_.push_back(PauliOperator::single(n, j, 'X'));
    c.z_img_.push_back(PauliOperator::single(n, j, 'Z'));
  }
  return c;
}

CliffordAction CliffordAction::from_gate(std::size_t n, Gate g, std::size_t q0,
                                         std::size_t q1) {
  CliffordAction c = identity(n);
  auto X = [&](std::size_t q) { return PauliOperator::single(n, q, 'X'); };
  auto Z = [&](std::size_t q) { return PauliOperator::single(n, q, 'Z'); };
  auto Y = [&](std::size_t q) { return PauliOperator::single(n, q, 'Y'); };
  auto neg = [](PauliOperator p) {
    p.mul_phase(2);
    return p;
  };
  switch (g) {
    case Gate::I: break;
    case Gate::X:
      c.z_img_[q0] = neg(Z(q0));
      break;
    case Gate::Y:
      c.x_img_[q0] = neg(X(q0));
      c.z_img_[q0] = neg(Z(q0));
      break;
    case Gate::Z:
      c.x_img_[q0] = neg(X(q0));
      break;
    case Gate::H:
      c.x_img_[q0] = Z(q0);
      c.z_img_[q0] = X(q0);
      break;
    case Gate::S:
      c.x_img_[q0] = Y(q0);
      break;
    case Gate::SDG:
      c.x_img_[q0] = neg(Y(q0));
      break;
    case Gate::CNOT:
      c.x_img_[q0] = pauli_mul(X(q0), X(q1));
      c.z_img_[q1] = pauli_mul(Z(q0), Z(q1));
      break;
    case Gate::SWAP:
      c.x_img_[q0] = X(q1);
      c.x_img_[q1] = X(q0);
      c.z_img_[q0] = Z(q1);
      c.z_img_[q1] = Z(q0);
      break;
  }
  return c;
}

PauliOperator CliffordAction::conjugate(const PauliOperator& p) const {
  if (p.num_qubits() != n_) throw std::invalid_argument("conjugate: dimension mismatch");
  PauliOperator out(n_);
  out.set_phase(p.phase());
  // c (i^a prod X_j^xj prod Z_j^zj) c^-1 accumulated in canonical factor order.
  for (std::size_t j = 0; j < n_; ++j)
    if (p.x_bit(j)) out *= x_img_[j];
  for (std::size_t j = 0; j < n_; ++j)
    if (p.z_bit(j)) out *= z_img_[j];
  return out;
}

CliffordAction CliffordAction::compose_after(const CliffordAction& earlier) const {
  assert(n_ == earlier.n_);
  CliffordAction out;
  out.n_ = n_;
  out.x_img_.reserve(n_);
  out.z_img_.reserve(n_);
  for (std::size_t j = 0; j < n_; ++j) {
    out.x_img_.push_back(conjugate(earlier.x_img_[j]));
    out.z_img_.push_back(conjugate(earlier.z_img_[j]));
  }
  return out;
}

CliffordAction CliffordAction::inverse() const {
  // Invert the 2n x 2n GF(2) symplectic matrix, then fix phases by checking
  // the forward image of each candidate preimage.
  std::size_t n = n_;
  std::size_t dim = 2 * n;
  // Row j of M = (x|z) vector of the image of generator j (X_0..X_{n-1}, Z_0..).
  std::vector<std::vector<std::uint8_t>> m(dim, std::vector<std::uint8_t>(dim, 0));
  std::vector<std::vector<std::uint8_t>> inv(dim, std::vector<std::uint8_t>(dim, 0));
  for (std::size_t j = 0; j < dim; ++j) inv[j][j] = 1;
  for (std::size_t j = 0; j < dim; ++j) {
    const PauliOperator& img = j < n ? x_img_[j] : z_img_[j - n];
    for (std::size_t q = 0; q < n; ++q) {
      m[j][q] = img.x_bit(q);
      m[j][n + q] = img.z_bit(q);
    }
  }
  // Gauss-Jordan over GF(2).
  std::size_t row = 0;
  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t piv = row;
    while (piv < dim && !m[piv][col]) ++piv;
    if (piv == dim) throw std::runtime_error("CliffordAction::inverse: singular map");
    std::swap(m[piv], m[row]);
    std::swap(inv[piv], inv[row]);
    for (std::size_t r = 0; r < dim; ++r) {
      if (r != row && m[r][col]) {
        for (std::size_t k = 0; k < dim; ++k) {
          m[r][k] ^= m[row][k];
          inv[r][k] ^= inv[row][k];
        }
      }
    }
    ++row;
  }
  CliffordAction out;
  out.n_ = n;
  out.x_img_.resize(n);
  out.z_img_.resize(n);
  for (std::size_t j = 0; j < dim; ++j) {
    // Preimage of generator j has coordinate vector inv[j].
    PauliOperator pre(n);
    for (std::size_t q = 0; q < n; ++q) {
      if (inv[j][q]) pre.set_x(q, true);
      if (inv[j][n + q]) pre.set_z(q, true);
    }
    PauliOperator fwd = conjugate(pre);
    // fwd = i^k * generator_j; absorb i^{-k} into the preimage phase.
    pre.set_phase((4 - fwd.phase()) & 3);
    if (j < n)
      out.x_img_[j] = pre;
    else
      out.z_img_[j - n] = pre;
  }
  return out;
}

bool CliffordAction::is_symplectic() const {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (!x_img_[i].commutes_with(x_img_[j])) return false;
      if (!z_img_[i].commutes_with(z_img_[j])) return false;
      bool want_commute = (i != j);
      if (x_img_[i].commutes_with(z_img_[j]) != want_commute) return false;
    }
  }
  return true;
}

PauliOperator clifford_conjugate(const CliffordAction& c, const PauliOperator& p) {
  return c.conjugate(p);
}

}  // namespace qbell
