#pragma once

#include "qbell/engine.hpp"
#include "qbell/steane.hpp"

namespace qbell {

enum class Variant : std::uint8_t { bell_strip, square_grid };

struct ProtocolConfig {
  std::uint32_t distance = 4;  // R: depth of the logical identity
  std::size_t level = 1;       // concatenation level L
  NoiseSpec noise;
  std::uint64_t seed = 1;
  Variant variant = Variant::bell_strip;
};

struct GridLayout {
  std::uint32_t lx = 0, ly = 0;
  // qubit id -> lattice point; role is one of 'i' (input slice), 'o'
  // (output slice), 'w' (the idling partner), 'b' (bulk).
  struct Cell {
    std::uint32_t x = 0, y = 0;
    char role = 'b';
  };
  std::vector<Cell> placement;
  std::uint32_t q1 = 0, q2 = 0;

  std::uint32_t manhattan(std::uint32_t a, std::uint32_t b) const {
    const Cell& ca = placement[a];
    const Cell& cb = placement[b];
    auto d = [](std::uint32_t u, std::uint32_t v) { return u > v ? u - v : v - u; };
    return d(ca.x, cb.x) + d(ca.y, cb.y);
  }
  InteractionGraph graph() const { return InteractionGraph::grid(lx, ly); }
  std::string to_csv() const;
};

// The composed end-of-circuit correction restricted to the protocol outputs.
struct CorrectionDecoder {
  CorrectionCascade cascade;           // over all final targets
  std::vector<std::uint32_t> targets;  // final-layer target qubits
  std::uint32_t q1 = 0, q2 = 0;        // protocol outputs (circuit qubit ids)

  // Evaluates the cascade and returns the (letter_q1, letter_q2) correction.
  std::pair<char, char> eval(const std::vector<std::uint8_t>& bits) const;
  std::string serialize() const;
};

struct ThermalConfig {
  double beta = 1.0;
};

// p = (1 - tanh(beta)) / 2.
double thermal_noise_strength(const ThermalConfig& t);

// The two-qubit Bell preparation: Prep0 x2, H, CNOT; depth 3.
Circuit build_c_prep();
// All-wait single-qubit circuit of the given depth.
Circuit build_c_wait(std::size_t depth, std::uint32_t n = 1);

struct PipelineResult {
  Circuit circuit;  // C^1D,res: path-local, adaptive only in the final layer
  std::vector<std::string> cert_chain;
};

// build_c_ft -> change_geometry (bilinear routing when two-qubit gates are
// present) -> postpone -> inflate(9)+teleport -> postpone.
PipelineResult build_c_1d_res(const Circuit& c, std::size_t level);

struct Unfolded {
  Circuit circuit;  // constant-depth 2D circuit
  GridLayout layout;
  std::size_t nodes = 0;
};

// Space-time unfolding: one fresh qubit per (re)initialization, swaps
// virtualized away, layers repacked as early as possible.
Unfolded unfold_to_2d(const Circuit& c1d_res);

// Structural measurements of the unfolding without materializing the ops.
struct UnfoldStats {
  std::uint32_t lx = 0, ly = 0;
  std::size_t depth = 0;
  std::size_t nodes = 0;
  std::uint32_t q1_x = 0, q1_y = 0, q2_x = 0, q2_y = 0;
  std::uint32_t q1_q2_distance = 0;
};
UnfoldStats unfold_stats(const Circuit& c1d_res);

struct BellArtifacts {
  // Executable form for trials: C^prep composed with the 1D implementation
  // and the idling partner; faults on it stand in faithfully for the 2D form.
  Circuit exec;
  std::uint32_t q1 = 0, q2 = 0;  // output qubit ids in exec
  CorrectionDecoder decoder;
  // Structural 2D data (layout extended with the prep/wait corner).
  GridLayout layout;
  UnfoldStats stats;
  std::vector<std::string> cert_chain;
  std::size_t lifespan = 0;
};

BellArtifacts build_c_bell(const ProtocolConfig& cfg);

TrialResult run_protocol_trial(const ProtocolConfig& cfg, const BellArtifacts& art,
                               std::uint64_t trial_index);

// Gibbs-state arm: the ideal pre-measurement state corrupted by U-conjugated
// iid X noise at rate p = (1-tanh beta)/2, then measured and decoded. The
// noise is sampled on the preparation-slice wires and conjugated forward
// through the unitary part before injection.
TrialResult run_thermal_trial(const ProtocolConfig& cfg, const BellArtifacts& art,
                              double beta, std::uint64_t trial_index);

std::string serialize_decoder(const CorrectionDecoder& dec);

}  // namespace qbell
