#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qbell/pauli.hpp"

namespace qbell {

// Dynamic bit vector used for GF(2) rows and masks.
struct Bits {
  std::size_t n = 0;
  std::vector<Word> w;

  Bits() = default;
  explicit Bits(std::size_t size) : n(size), w(words_for(size), 0) {}

  bool get(std::size_t i) const { return (w[i >> 6] >> (i & 63)) & 1; }
  void set(std::size_t i, bool v) {
    Word m = Word(1) << (i & 63);
    if (v)
      w[i >> 6] |= m;
    else
      w[i >> 6] &= ~m;
  }
  void flip(std::size_t i) { w[i >> 6] ^= Word(1) << (i & 63); }
  void operator^=(const Bits& o) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] ^= o.w[i];
  }
  bool parity_and(const Bits& o) const {
    Word acc = 0;
    for (std::size_t i = 0; i < w.size(); ++i) acc ^= w[i] & o.w[i];
    return __builtin_parityll(acc);
  }
  bool any() const {
    for (Word x : w)
      if (x) return true;
    return false;
  }
  void resize(std::size_t size) {
    n = size;
    w.resize(words_for(size), 0);
  }
  bool operator==(const Bits&) const = default;
};

// Phase-free Pauli over a local target list: value = X(x) Z(z).
struct PauliMask {
  Bits x, z;
  PauliMask() = default;
  explicit PauliMask(std::size_t targets) : x(targets), z(targets) {}
  bool any() const { return x.any() || z.any(); }
  void operator^=(const PauliMask& o) {
    x ^= o.x;
    z ^= o.z;
  }
  bool operator==(const PauliMask&) const = default;
};

// Bit-valued function of classical bits in product form:
//   f(v) = affine + lin.v + sum_t table_t[key_t(v)]   (mod 2)
// where v is the value vector of `sources` and each key is a GF(2) map of v.
struct BitFn {
  std::vector<std::uint32_t> sources;
  Bits lin;          // over source positions
  std::uint8_t affine = 0;
  struct Term {
    std::vector<Bits> key_rows;      // k rows over source positions
    std::vector<std::uint8_t> table;  // 2^k bits
    bool operator==(const Term&) const = default;
  };
  std::vector<Term> terms;

  BitFn() = default;
  explicit BitFn(std::vector<std::uint32_t> srcs)
      : sources(std::move(srcs)), lin(sources.size()) {}

  int eval(const std::vector<std::uint8_t>& bit_values) const;  // indexed by bit id
  bool operator==(const BitFn&) const = default;
};

// Classically controlled Pauli in product form:
//   P(v) = X(a0)Z(b0) * prod_j [X(col_j.x)Z(col_j.z)]^{v_j} * prod_t table_t[key_t(v)]
// (phase-free; classically controlled Paulis act identically up to sign).
// Masks are indexed by position in the owning operation's target list.
struct ClassicalFunction {
  std::vector<std::uint32_t> sources;
  std::vector<PauliMask> columns;  // one per source
  PauliMask affine;
  struct Term {
    std::vector<Bits> key_rows;     // over source positions
    std::vector<PauliMask> table;   // 2^k entries
    bool operator==(const Term&) const = default;
  };
  std::vector<Term> terms;

  ClassicalFunction() = default;
  ClassicalFunction(std::vector<std::uint32_t> srcs, std::size_t num_targets)
      : sources(std::move(srcs)),
        columns(sources.size(), PauliMask(num_targets)),
        affine(num_targets) {}

  std::size_t num_targets() const { return affine.x.n; }
  bool is_linear() const { return terms.empty(); }
  PauliMask eval(const std::vector<std::uint8_t>& bit_values) const;
  // x-component at target position t, as a bit function of the sources.
  BitFn x_component(std::size_t t) const;
  bool operator==(const ClassicalFunction&) const = default;
};

// One postponed correction: a classical function to apply, plus the
// measurement-record flips it caused while being commuted to the end
// (Fig-8(e) bookkeeping). Stages of a cascade evaluate in order against an
// adjusted copy of the record. A decode stage instead writes a derived bit
// (a postponed ClassicalDecode), so later stages read adjusted inputs.
struct CorrectionStage {
  ClassicalFunction fn;
  struct Flip {
    std::uint32_t bit;
    BitFn indicator;  // over fn.sources
    bool operator==(const Flip&) const = default;
  };
  std::vector<Flip> flips;
  bool is_decode = false;
  BitFn decode;
  std::uint32_t decode_bit = 0;
  bool operator==(const CorrectionStage&) const = default;
};

struct CorrectionCascade {
  std::vector<CorrectionStage> stages;
  bool operator==(const CorrectionCascade&) const = default;
};

enum class OpKind : std::uint8_t {
  Prep0,
  MeasureZ,
  Unitary,
  ControlledPauli,
  Wait,
  Discard,
  ClassicalDecode,  // derived classical bit; occupies no quantum location
};

struct Operation {
  OpKind kind = OpKind::Wait;
  Gate gate = Gate::I;
  std::vector<std::uint32_t> qubits;  // acted-on qubits (targets for ControlledPauli)
  std::uint32_t out_bit = 0;          // MeasureZ / ClassicalDecode
  // Payloads sit behind pointers to keep the common ops small; large
  // unfolded circuits hold millions of operations.
  std::shared_ptr<CorrectionCascade> cascade;  // ControlledPauli
  std::shared_ptr<BitFn> decode;               // ClassicalDecode

  static Operation prep0(std::uint32_t q);
  static Operation measure_z(std::uint32_t q, std::uint32_t bit);
  static Operation unitary(Gate g, std::uint32_t q0);
  static Operation unitary(Gate g, std::uint32_t q0, std::uint32_t q1);
  static Operation wait(std::uint32_t q);
  static Operation discard(std::uint32_t q);
  static Operation controlled_pauli(ClassicalFunction fn,
                                    std::vector<std::uint32_t> targets);
  static Operation classical_decode(BitFn fn, std::uint32_t bit);

  bool is_quantum() const { return kind != OpKind::ClassicalDecode; }
  bool operator==(const Operation& o) const {
    if (kind != o.kind || gate != o.gate || qubits != o.qubits ||
        out_bit != o.out_bit)
      return false;
    if (bool(cascade) != bool(o.cascade) || (cascade && !(*cascade == *o.cascade)))
      return false;
    if (bool(decode) != bool(o.decode) || (decode && !(*decode == *o.decode)))
      return false;
    return true;
  }
};

struct Layer {
  std::vector<Operation> ops;  // qubits not covered by any op are waiting
  bool operator==(const Layer&) const = default;
};

struct WireCoord {
  std::uint32_t t;  // layer index (0-based internally)
  std::uint32_t q;
  auto operator<=>(const WireCoord&) const = default;
};

// Layered adaptive Clifford circuit. Wait is represented implicitly (a qubit
// with no operation in a layer is idle); parse accepts and audit tolerates
// explicit wait lines.
struct Circuit {
  std::uint32_t n = 0;
  std::vector<std::uint32_t> inputs, outputs;
  std::uint32_t num_cbits = 0;
  std::vector<Layer> layers;
  std::string graph_tag;  // optional locality annotation

  std::size_t depth() const { return layers.size(); }
  // Every quantum op slot, waits included, classical processing excluded.
  std::size_t locations() const;
  std::size_t gate_count() const;  // non-wait quantum ops

  // Validates layer disjointness, classical write-before-read and
  // single-assignment, input/output conventions. Throws on violation.
  void audit() const;

  void add_layer() { layers.emplace_back(); }
  Layer& back() { return layers.back(); }
  // Appends op to the last layer.
  void push(Operation op) { layers.back().ops.push_back(std::move(op)); }

  std::uint32_t fresh_bit() { return num_cbits++; }

  bool operator==(const Circuit&) const = default;
};

struct InteractionGraph {
  std::uint32_t n = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // a < b, sorted

  static InteractionGraph path(std::uint32_t n);
  // Bilinear array B'_{2r}: vertices 0..2r-1 in ladder order (column k holds
  // vertices 2k and 2k+1), with the 3-coloring E1 = rungs, E2/E3 = alternating
  // rail edges.
  static InteractionGraph bilinear(std::uint32_t r);
  static InteractionGraph grid(std::uint32_t lx, std::uint32_t ly);
  static InteractionGraph complete(std::uint32_t n);

  bool has_edge(std::uint32_t a, std::uint32_t b) const;
  void add_edge(std::uint32_t a, std::uint32_t b);
  std::uint32_t max_degree() const;

  // Proper edge coloring (greedy; at most 2*maxdeg - 1 colors, exact for the
  // named constructions). Returns color classes.
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> edge_coloring() const;

  bool operator==(const InteractionGraph&) const = default;
};

// The fixed 3-coloring of the bilinear array used by the routing lemma.
std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> bilinear_coloring(
    std::uint32_t r);

enum class RectFlavor : std::uint8_t { unitary, adaptive, clifford_sub };

struct Rectangle {
  std::vector<std::uint32_t> qubits;  // Omega
  std::size_t t = 0;                  // start layer (wires {t..t+delta} x Omega)
  std::size_t delta = 0;
  RectFlavor flavor = RectFlavor::unitary;
  std::vector<std::uint32_t> omega1, omega2;  // adaptive flavor

  bool contains_wire(const WireCoord& wc) const;
  bool interior_wire(const WireCoord& wc) const;
};

struct LocalityReport {
  struct Violation {
    std::size_t layer;
    std::uint32_t a, b;
  };
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

LocalityReport validate_locality(const Circuit& c, const InteractionGraph& g);

// Serial composition: feeds a's outputs into b's inputs (arity must match).
Circuit compose(const Circuit& a, const Circuit& b);
// Parallel composition on disjoint qubits, layers zipped with wait padding.
Circuit tensor(const Circuit& a, const Circuit& b);

// Rectangle validity: no two-qubit op crossing the boundary within layers
// (t, t+delta]; unitary flavor additionally requires only unitary ops inside.
bool rectangle_valid(const Circuit& c, const Rectangle& r, std::string* why = nullptr);

// The set of qubit pairs used by two-qubit operations.
InteractionGraph used_interaction_graph(const Circuit& c);

}  // namespace qbell
