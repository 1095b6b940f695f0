#pragma once

#include "qbell/circuit.hpp"
#include "qbell/passes.hpp"

namespace qbell {

// The [[7,1,3]] code: Hamming-check stabilizers of both types, logicals on
// qubits {0,1,2}.
struct CodeSpec {
  std::uint32_t n = 7, k = 1, d = 3, t = 1;
  std::vector<std::vector<std::uint32_t>> x_stabs, z_stabs;  // supports
  std::vector<std::uint32_t> logical_x, logical_z;

  // 3-bit Hamming syndrome of an error support set.
  std::uint32_t syndrome(const std::vector<std::uint32_t>& support) const;
  bool syndrome_bit(std::uint32_t row, std::uint32_t qubit) const;
  // Coset leader: the unique weight<=1 pattern with the given syndrome
  // (qubit index, or SIZE_MAX for syndrome 0).
  std::size_t leader(std::uint32_t syndrome) const;
};

const CodeSpec& steane_spec();

enum class GadgetRole : std::uint8_t { prep0, gate, meas, ec, enc, dec };

// Layout of logical block b on the bilinear register: 9 ladder columns per
// block (7 data + 2 flag columns), data on rail A, helpers/flags on rail B.
struct BlockLayout {
  std::uint32_t blocks = 0;

  static constexpr std::uint32_t cols_per_block = 9;
  std::uint32_t columns() const { return cols_per_block * blocks; }
  std::uint32_t num_qubits() const { return 2 * columns(); }
  std::uint32_t rail_a(std::uint32_t col) const { return 2 * col; }
  std::uint32_t rail_b(std::uint32_t col) const { return 2 * col + 1; }
  std::uint32_t data(std::uint32_t block, std::uint32_t i) const {
    return rail_a(cols_per_block * block + i);
  }
  std::uint32_t helper(std::uint32_t block, std::uint32_t i) const {
    return rail_b(cols_per_block * block + i);
  }
  InteractionGraph graph() const { return InteractionGraph::bilinear(columns()); }
};

struct Gadget {
  GadgetRole role;
  Gate gate = Gate::I;
  Circuit circuit;  // standalone register (1 or 2 blocks)
  std::uint32_t blocks = 1;
};

struct GadgetMetrics {
  std::uint32_t n_max = 0;
  std::size_t d_min = 0, d_max = 0;
  std::size_t ec_depth = 0;
};

// Standalone gadget circuit. Two-qubit gate gadgets act on blocks 0 and 1.
Gadget build_gadget(GadgetRole role, Gate gate = Gate::I);

// Level-1 encoder/decoder on one block: Enc takes the bare input on data
// qubit 0 plus 6 fresh ancillas; Dec inverts, measures the 6 ancillas and
// applies a table-driven correction to the surviving qubit.
std::pair<Gadget, Gadget> enc_dec_circuits();

GadgetMetrics gadget_metrics();

struct FtConfig {
  std::size_t level = 0;
};

// Recursive gadget substitution; level 0 returns the input unchanged.
Circuit level_simulate(const Circuit& c, const FtConfig& cfg);

// Level-by-level composed encoder/decoder for one logical qubit.
Circuit concat_enc(std::size_t level);
Circuit concat_dec(std::size_t level);

// Dec^{(x)N_out} o C^(L) o Enc^{(x)N_in}.
Circuit build_c_ft(const Circuit& c, std::size_t level);

}  // namespace qbell
