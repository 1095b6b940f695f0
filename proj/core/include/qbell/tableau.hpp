#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "qbell/pauli.hpp"

namespace qbell {

using Rng = std::mt19937_64;

enum class BellStatus { bell, not_bell, mixed };

// Aaronson-Gottesman style tableau: n destabilizer rows followed by n
// stabilizer rows, each an i^a * X(x) * Z(z) Pauli (a even for X/Z rows, odd
// when the row carries Y factors; a - popcount(x&z) mod 4 is the +-1 sign).
class StabilizerState {
 public:
  explicit StabilizerState(std::size_t n);

  std::size_t num_qubits() const { return n_; }

  void apply(Gate g, std::size_t q0, std::size_t q1 = SIZE_MAX);
  // Conjugates the state by the given Pauli (global phases cancel; only
  // anticommuting stabilizer rows flip sign).
  void apply_pauli(const PauliOperator& p);

  // Measures qubit q in the Z basis. Deterministic outcomes do not consume
  // randomness.
  int measure_z(std::size_t q, Rng& rng);
  // Returns the outcome if it is determined by the state.
  std::optional<int> deterministic_z(std::size_t q) const;
  // Forces the outcome of a non-deterministic measurement (branch
  // enumeration); sets *was_random accordingly. A deterministic measurement
  // ignores `forced` and returns the determined bit.
  int measure_z_forced(std::size_t q, int forced, bool* was_random);

  void reset_to_zero(std::size_t q, Rng& rng);

  // Canonical generating set: Gaussian elimination with X-block pivots first,
  // then Z-block, qubit ascending. Rows are returned most-significant pivot
  // first; equality of canonical forms is state equality.
  std::vector<PauliOperator> canonical_stabilizers() const;
  bool same_state_as(const StabilizerState& other) const;

  // Membership of +-P in the stabilizer group: returns +1 / -1 when i^k P is
  // in the group for k = 0 / 2, nullopt when P is not proportional to any
  // element.
  std::optional<int> sign_of_in_group(const PauliOperator& p) const;

  BellStatus bell_status(std::size_t q1, std::size_t q2) const;

  // Canonical generators restricted to `keep` after eliminating all other
  // qubits; requires every eliminated qubit to be in a product Z-eigenstate
  // or disentangled from `keep` (true after they have been measured).
  // Returns nullopt if entanglement with the complement remains.
  std::optional<std::vector<PauliOperator>> reduced_canonical(
      const std::vector<std::size_t>& keep) const;

  PauliOperator stabilizer_row(std::size_t j) const;  // j in [0, n)
  PauliOperator destabilizer_row(std::size_t j) const;

 private:
  std::size_t n_, w_;
  std::vector<Word> xs_, zs_;     // 2n rows, row-major, w_ words each
  std::vector<std::uint8_t> ph_;  // per-row phase exponent mod 4

  Word* xrow(std::size_t r) { return &xs_[r * w_]; }
  Word* zrow(std::size_t r) { return &zs_[r * w_]; }
  const Word* xrow(std::size_t r) const { return &xs_[r * w_]; }
  const Word* zrow(std::size_t r) const { return &zs_[r * w_]; }
  bool xbit(std::size_t r, std::size_t q) const {
    return (xrow(r)[q >> 6] >> (q & 63)) & 1;
  }
  bool zbit(std::size_t r, std::size_t q) const {
    return (zrow(r)[q >> 6] >> (q & 63)) & 1;
  }

  // row_i := row_i * row_j (group product with exact phase).
  void rmul(std::size_t i, std::size_t j);
  PauliOperator row_pauli(std::size_t r) const;
  int do_measure(std::size_t q, const std::function<int()>& sample_bit);
};

}  // namespace qbell
