#pragma once

#include <cstdint>
#include <string>

#include "qbell/circuit.hpp"
#include "qbell/noise.hpp"
#include "qbell/tableau.hpp"

namespace qbell {

struct OutcomeRecord {
  std::vector<std::uint8_t> bits;
  std::vector<std::uint8_t> written;
  std::vector<WireCoord> provenance;  // measurement wire per bit (t, q)

  explicit OutcomeRecord(std::size_t num_bits = 0)
      : bits(num_bits, 0), written(num_bits, 0),
        provenance(num_bits, WireCoord{0, 0}) {}
  std::uint64_t digest() const;
};

struct RunOptions {
  bool streaming = false;
  // Skip ControlledPauli operations in the final layer (the protocol applies
  // the extracted decoder instead).
  bool skip_final_adaptive = false;
};

struct RunResult {
  OutcomeRecord record;
  StabilizerState state;
  // qubit id -> tableau slot (SIZE_MAX when the qubit was never live or has
  // been retired). In flat mode this is the identity map.
  std::vector<std::size_t> slot_of;
  std::size_t faults_applied = 0;
  std::size_t gate_ops = 0;

  RunResult() : state(0) {}
};

// Executes F |x| C: layer ops in order, then the wires (t, .) of the fault
// pattern. Streaming mode recycles tableau slots across qubit lifetimes so
// the live width, not the total qubit count, bounds the tableau size.
RunResult run(const Circuit& c, const FaultPattern& f, Rng& outcome_rng,
              const RunOptions& opts = {});

// Evaluates a correction cascade against a (mutable, adjusted) record copy.
PauliMask eval_cascade(const CorrectionCascade& cascade,
                       std::vector<std::uint8_t>& bits);

struct TrialResult {
  bool success = false;
  std::size_t fault_count = 0;
  std::uint64_t digest = 0;
  char corr_q1 = 'I', corr_q2 = 'I';
};

// Counter-based stream split: deterministic per (seed, trial, stream tag).
Rng make_rng(std::uint64_t master_seed, std::uint64_t trial, std::uint64_t stream);

struct BranchOracleVerdict {
  bool equal = false;
  std::string detail;
  std::size_t branches_a = 0, branches_b = 0;
};

// Attaches a reference Bell half to every input qubit, enumerates all outcome
// branches of both (noisy) circuits, and compares the multisets of
// (probability, canonical reduced state on outputs + references).
BranchOracleVerdict branch_oracle(const Circuit& a, const Circuit& b,
                                  const FaultPattern& fa = {},
                                  const FaultPattern& fb = {},
                                  std::size_t branch_cap = std::size_t(1) << 20);

}  // namespace qbell
