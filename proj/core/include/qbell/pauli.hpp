#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qbell {

using Word = std::uint64_t;

inline std::size_t words_for(std::size_t bits) { return (bits + 63) / 64; }

// n-qubit Pauli stored as i^phase * X(x_mask) * Z(z_mask), phase in Z_4.
// The X-then-Z factor order is the canonical form all phase arithmetic
// assumes. Y on one qubit is (x=1, z=1, phase=1), i.e. Y = i*X*Z.
class PauliOperator {
 public:
  PauliOperator() : n_(0), phase_(0) {}
  explicit PauliOperator(std::size_t n)
      : n_(n), x_(words_for(n), 0), z_(words_for(n), 0), phase_(0) {}

  static PauliOperator identity(std::size_t n) { return PauliOperator(n); }
  // p is one of 'I','X','Y','Z'.
  static PauliOperator single(std::size_t n, std::size_t q, char p);

  std::size_t num_qubits() const { return n_; }

  bool x_bit(std::size_t q) const { return (x_[q >> 6] >> (q & 63)) & 1; }
  bool z_bit(std::size_t q) const { return (z_[q >> 6] >> (q & 63)) & 1; }
  void set_x(std::size_t q, bool v);
  void set_z(std::size_t q, bool v);

  // Letter view of qubit q ('I','X','Y','Z'), ignoring the global phase.
  char letter(std::size_t q) const;
  // Sets qubit q's letter, adjusting the phase so the operator equals
  // (previous operator with factor q replaced), e.g. setting 'Y' adds i.
  void set_letter(std::size_t q, char p);

  std::uint8_t phase() const { return phase_; }
  void set_phase(std::uint8_t p) { phase_ = p & 3; }
  void mul_phase(std::uint8_t p) { phase_ = (phase_ + p) & 3; }

  bool is_identity() const { return masks_zero() && phase_ == 0; }
  bool masks_zero() const;
  std::size_t weight() const;

  bool commutes_with(const PauliOperator& other) const;

  PauliOperator& operator*=(const PauliOperator& rhs);
  friend PauliOperator operator*(PauliOperator lhs, const PauliOperator& rhs) {
    lhs *= rhs;
    return lhs;
  }
  bool operator==(const PauliOperator&) const = default;

  // Embeds this operator into a larger register at the given qubit offsets
  // (offsets[q] = target qubit of our qubit q).
  PauliOperator embed(std::size_t m, const std::vector<std::size_t>& offsets) const;

  std::string str() const;

  const std::vector<Word>& x_words() const { return x_; }
  const std::vector<Word>& z_words() const { return z_; }
  std::vector<Word>& x_words() { return x_; }
  std::vector<Word>& z_words() { return z_; }

 private:
  std::size_t n_;
  std::vector<Word> x_, z_;
  std::uint8_t phase_;
};

PauliOperator pauli_mul(const PauliOperator& a, const PauliOperator& b);

enum class Gate : std::uint8_t { I, X, Y, Z, H, S, SDG, CNOT, SWAP };

bool gate_is_two_qubit(Gate g);
const char* gate_name(Gate g);
std::optional<Gate> gate_from_name(std::string_view s);
Gate gate_inverse(Gate g);

// A Clifford unitary represented by the images of the generators X_j, Z_j
// under conjugation.
class CliffordAction {
 public:
  CliffordAction() : n_(0) {}
  static CliffordAction identity(std::size_t n);
  static CliffordAction from_gate(std::size_t n, Gate g, std::size_t q0,
                                  std::size_t q1 = SIZE_MAX);

  std::size_t num_qubits() const { return n_; }

  const PauliOperator& x_image(std::size_t j) const { return x_img_[j]; }
  const PauliOperator& z_image(std::size_t j) const { return z_img_[j]; }

  // c p c^-1 with exact phase.
  PauliOperator conjugate(const PauliOperator& p) const;

  // Composition: (later.then_after(*this)) == later o this as unitaries.
  CliffordAction compose_after(const CliffordAction& earlier) const;
  CliffordAction inverse() const;

  bool is_symplectic() const;
  bool operator==(const CliffordAction&) const = default;

 private:
  std::size_t n_;
  std::vector<PauliOperator> x_img_, z_img_;
};

PauliOperator clifford_conjugate(const CliffordAction& c, const PauliOperator& p);

}  // namespace qbell
