#pragma once

#include <functional>

#include "qbell/circuit.hpp"
#include "qbell/noise.hpp"

namespace qbell {

// A circuit transform together with its constructive fault map: a fault
// pattern on the new circuit maps to one on the old circuit realizing the
// same noisy instrument.
struct PassResult {
  Circuit circuit;
  std::function<FaultPattern(const FaultPattern&)> fault_map;
  std::string cert_formula;
};

// Moves every adaptive Pauli (and derived-bit computation) into a single
// final-layer correction cascade. Depth and interaction graph unchanged;
// fault map is the identity (support preserved or shrunk).
PassResult postpone_adaptive_paulis(const Circuit& c);

// Inserts m idle layers after every layer; depth becomes (m+1)*depth.
PassResult inflate(const Circuit& c, std::size_t m);

// Replaces unitary subcircuits in valid disjoint rectangles by equal-depth,
// equal-action replacements (symplectic check, phases included).
PassResult substitute_unitary(const Circuit& c,
                              const std::vector<std::pair<Rectangle, Circuit>>& pairs);

// Depth 2D: even layers (0-based) hold preparations/measurements, odd layers
// hold unitaries only.
PassResult to_alternating_form(const Circuit& c);

using EdgeColoring = std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>>;

// Depth (chi'+1)*D: per original layer one prep/measure layer then chi'
// color-pure unitary layers.
PassResult to_normal_form(const Circuit& c, const InteractionGraph& g,
                          const EdgeColoring& coloring);

struct Routing {
  InteractionGraph g_from, g_to;
  struct ColorRoute {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> color_class;  // edges of g_from
    std::vector<std::uint32_t> pi;  // vertex permutation
    // factorization of pi into layers of disjoint transposition of g_to edges
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> swap_layers;
  };
  std::vector<ColorRoute> colors;

  std::size_t delta() const;
  // pi(E'_alpha) subset E(g_to), swap layers disjoint g_to transpositions
  // composing to pi, color classes a proper coloring covering g_from.
  void validate() const;
};

// The path graph P_2r Delta-reduces to the bilinear array with Delta = 1;
// permutations as printed (pi1 = id, pi2, pi3). Requires r even.
Routing path_bilinear_routing(std::uint32_t r);

// For g_from subset g_to: per-color identity permutations, no swaps.
Routing identity_routing(const InteractionGraph& g_from, const InteractionGraph& g_to);

// Realizes a g_from-local circuit on g_to using the routing witness; depth
// (chi'(2*Delta+1)+1) * depth(c).
PassResult change_geometry(const Circuit& c, const Routing& routing);

// Standalone depth-10 gate teleportation circuit for a 1- or 2-qubit
// Clifford: Choi preparation, Bell measurements, linear Pauli correction,
// SWAP repositioning. Input/output on qubit 0 (and 5 for two-qubit gates).
Circuit teleport_circuit(Gate g);

// Inflates by 9 and replaces every unitary slab (including idling qubits in
// gate slabs) by gate-teleportation instances on a 5x-widened path register.
// Requires 1D-local input with adaptivity only in the final layer.
PassResult teleport_substitute(const Circuit& c);

// Maximum number of layers between a qubit's (re)initialization and its next
// measurement or reset, over all qubits (the qubit lifespan of the circuit).
std::size_t qubit_lifespan(const Circuit& c);

}  // namespace qbell
