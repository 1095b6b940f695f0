#pragma once

// Sampled-branch Choi comparison: attaches a reference Bell half per input,
// runs both circuits with seeded outcome randomness, and compares the reduced
// canonical states on outputs + references. Suitable when the corrected
// output is branch-independent (the gadget contracts assert exactly that).

#include <optional>

#include "qbell/engine.hpp"

namespace qbell::testing {

inline Circuit attach_choi_refs(const Circuit& c) {
  Circuit aug;
  aug.n = c.n + std::uint32_t(c.inputs.size());
  aug.num_cbits = c.num_cbits;
  aug.outputs = c.outputs;
  for (std::size_t j = 0; j < c.inputs.size(); ++j)
    aug.outputs.push_back(c.n + std::uint32_t(j));
  aug.add_layer();
  for (std::size_t j = 0; j < c.inputs.size(); ++j)
    aug.layers[0].ops.push_back(Operation::unitary(Gate::H, c.n + std::uint32_t(j)));
  aug.add_layer();
  for (std::size_t j = 0; j < c.inputs.size(); ++j)
    aug.layers[1].ops.push_back(
        Operation::unitary(Gate::CNOT, c.n + std::uint32_t(j), c.inputs[j]));
  for (const auto& layer : c.layers) aug.layers.push_back(layer);
  return aug;
}

inline FaultPattern shift_faults(const FaultPattern& f, std::uint32_t dt) {
  FaultPattern g;
  for (const auto& [w, l] : f.entries) g.set({w.t + dt, w.q}, l);
  return g;
}

inline std::optional<std::vector<PauliOperator>> run_choi_reduced(
    const Circuit& c, const FaultPattern& f, std::uint64_t seed) {
  Circuit aug = attach_choi_refs(c);
  Rng rng = make_rng(seed, 0, 7);
  auto res = run(aug, shift_faults(f, 2), rng);
  std::vector<std::size_t> keep;
  for (auto q : aug.outputs) keep.push_back(q);
  return res.state.reduced_canonical(keep);
}

// Compares a's (noisy, random-branch) corrected output against b's on every
// sampled branch; b is expected to be branch-deterministic.
inline bool choi_equiv_sampled(const Circuit& a, const Circuit& b,
                               const FaultPattern& fa, const FaultPattern& fb,
                               int seeds, std::string* why = nullptr) {
  auto want = run_choi_reduced(b, fb, 1);
  if (!want) {
    if (why) *why = "reference circuit leaves residual entanglement";
    return false;
  }
  for (int s = 0; s < seeds; ++s) {
    auto got = run_choi_reduced(a, fa, 1000 + std::uint64_t(s));
    if (!got) {
      if (why) *why = "left side leaves residual entanglement";
      return false;
    }
    if (*got != *want) {
      if (why) {
        *why = "state mismatch at seed " + std::to_string(s);
        for (const auto& r : *got) *why += " " + r.str();
        *why += " vs";
        for (const auto& r : *want) *why += " " + r.str();
      }
      return false;
    }
  }
  return true;
}

}  // namespace qbell::testing
