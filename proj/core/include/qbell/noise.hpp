#pragma once

#include <map>
#include <string>
#include <vector>

#include "qbell/circuit.hpp"
#include "qbell/tableau.hpp"

namespace qbell {

// Sparse Pauli fault: wire (t,q) -> letter. Wire t carries faults acting
// after layer t.
struct FaultPattern {
  std::map<WireCoord, char> entries;  // letters 'X','Y','Z' only

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  void set(WireCoord w, char letter);
  char at(WireCoord w) const;  // 'I' when absent
  // Wire-wise product; identity results removed.
  void mul(WireCoord w, char letter);
  bool operator==(const FaultPattern&) const = default;
};

struct NoiseSpec {
  enum class Kind { none, iid_depolarizing, iid_xz };
  Kind kind = Kind::none;
  double p = 0.0;        // depolarizing strength
  double px = 0.0, pz = 0.0;  // iid_xz axis strengths

  static NoiseSpec none() { return {}; }
  static NoiseSpec depolarizing(double p) {
    NoiseSpec s;
    s.kind = Kind::iid_depolarizing;
    s.p = p;
    return s;
  }
  static NoiseSpec xz(double px, double pz) {
    NoiseSpec s;
    s.kind = Kind::iid_xz;
    s.px = px;
    s.pz = pz;
    return s;
  }
  // Per-wire probability of any fault.
  double wire_rate() const;
};

// Diagnostic record of local-stochastic strength bookkeeping. Never used for
// control flow; the Monte Carlo measures actual behavior.
struct StrengthCertificate {
  double p = 0.0;
  std::vector<std::string> trace;

  void step(const std::string& what, double new_p) {
    trace.push_back(what);
    p = std::min(1.0, new_p);
  }
};

// Named strength formulas.
double cert_multiply(std::size_t r, double pmax);
double cert_propagate(std::size_t depth, double p);
double cert_clean_unitary(std::size_t delta, double p);
double cert_clean_adaptive(std::size_t u, std::size_t v, double p);
double cert_inflate(std::size_t m, double p);
double cert_alternating(double p);

// Composes a chain of named steps: each entry is "name:arg1[,arg2]" with
// names multiply,propagate,clean_unitary,clean_adaptive,inflate,alternating,
// postpone. Throws on an unknown name.
StrengthCertificate certificate_chain(const std::vector<std::string>& steps, double p0);

// Samples iid noise over the circuit's wire set, t-major then q-minor, using
// geometric skips. Deterministic for a given rng state.
FaultPattern sample_noise(const Circuit& c, const NoiseSpec& spec, Rng& rng);
// Same sampler restricted to an arbitrary subset of wires (given in order).
FaultPattern sample_noise_on_wires(const std::vector<WireCoord>& wires,
                                   const NoiseSpec& spec, Rng& rng);

struct MultiplyResult {
  FaultPattern pattern;
  StrengthCertificate cert;
};
MultiplyResult multiply(const FaultPattern& f1, double p1, const FaultPattern& f2,
                        double p2);

struct PropagateResult {
  FaultPattern pattern;
  StrengthCertificate cert;
};
// Pushes every fault to the final wire row of a unitary-only circuit.
PropagateResult propagate_to_end(const Circuit& c, const FaultPattern& f);

// Conjugates the masks of `p` (phase dropped) through one circuit layer.
void conjugate_masks_through_layer(const Layer& layer, PauliOperator& p);

PropagateResult clean_unitary_rects(const Circuit& c, const FaultPattern& f,
                                    const std::vector<Rectangle>& rects);
PropagateResult clean_adaptive_rects(const Circuit& c, const FaultPattern& f,
                                     const std::vector<Rectangle>& rects);

// Fault pattern text format: lines `fault t=<layer> q=<qubit> p=<X|Y|Z>`.
std::string serialize_faults(const FaultPattern& f);
FaultPattern parse_faults(const std::string& text);

}  // namespace qbell
