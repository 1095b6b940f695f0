#pragma once

// Random adaptive Clifford circuit generator for pass equivalence tests.

#include "qbell/circuit.hpp"
#include "qbell/noise.hpp"
#include "qbell/tableau.hpp"

namespace qbell::testing {

struct GenOptions {
  std::uint32_t n = 4;
  std::size_t depth = 10;
  std::size_t max_measurements = 8;
  bool adaptive = true;
  bool adjacent_two_qubit = false;  // restrict 2q gates to path neighbors
  bool unitary_only = false;
  double op_density = 0.7;
};

inline Circuit random_circuit(Rng& rng, const GenOptions& o) {
  Circuit c;
  c.n = o.n;
  std::vector<std::uint8_t> alive(o.n, 1);  // start as inputs
  for (std::uint32_t q = 0; q < o.n; ++q) c.inputs.push_back(q);
  std::vector<std::uint32_t> bits;       // readable (earlier-layer) bits
  std::vector<std::uint32_t> bits_new;   // written this layer
  std::size_t measures = 0;
  for (std::size_t t = 0; t < o.depth; ++t) {
    c.add_layer();
    bits.insert(bits.end(), bits_new.begin(), bits_new.end());
    bits_new.clear();
    std::vector<std::uint8_t> used(o.n, 0);
    for (std::uint32_t q = 0; q < o.n; ++q) {
      if (used[q]) continue;
      if (double(rng() % 1000) / 1000.0 > o.op_density) continue;
      std::size_t pick = rng() % 10;
      if (o.unitary_only && pick >= 6) pick = rng() % 6;
      if (pick < 4) {  // 1q unitary
        Gate g = static_cast<Gate>(1 + rng() % 6);
        if (!alive[q]) continue;
        c.push(Operation::unitary(g, q));
        used[q] = 1;
      } else if (pick < 6) {  // 2q unitary
        std::uint32_t q2 =
            o.adjacent_two_qubit ? q + 1 : (q + 1 + rng() % (o.n - 1)) % o.n;
        if (q2 >= o.n || used[q2] || !alive[q] || !alive[q2]) continue;
        Gate g = rng() % 2 ? Gate::CNOT : Gate::SWAP;
        c.push(Operation::unitary(g, q, q2));
        used[q] = used[q2] = 1;
      } else if (pick < 7 && t > 0 && t + 1 < o.depth) {  // prep
        c.push(Operation::prep0(q));
        used[q] = 1;
        alive[q] = 1;
      } else if (pick < 8 && measures < o.max_measurements && alive[q] &&
                 t + 1 < o.depth) {
        std::uint32_t b = c.fresh_bit();
        c.push(Operation::measure_z(q, b));
        bits_new.push_back(b);
        ++measures;
        used[q] = 1;
        alive[q] = 0;
      } else if (o.adaptive && pick < 9 && !bits.empty() && alive[q]) {
        std::size_t k = 1 + rng() % std::min<std::size_t>(2, bits.size());
        std::vector<std::uint32_t> srcs;
        for (std::size_t j = 0; j < k; ++j) srcs.push_back(bits[rng() % bits.size()]);
        std::sort(srcs.begin(), srcs.end());
        srcs.erase(std::unique(srcs.begin(), srcs.end()), srcs.end());
        ClassicalFunction fn(srcs, 1);
        for (std::size_t j = 0; j < srcs.size(); ++j) {
          if (rng() & 1) fn.columns[j].x.set(0, true);
          if (rng() & 1) fn.columns[j].z.set(0, true);
        }
        if (rng() % 4 == 0) fn.affine.x.set(0, true);
        c.push(Operation::controlled_pauli(fn, {q}));
        used[q] = 1;
      }
    }
  }
  for (std::uint32_t q = 0; q < o.n; ++q)
    if (alive[q]) c.outputs.push_back(q);
  c.audit();
  return c;
}

inline FaultPattern random_faults(Rng& rng, const Circuit& c, std::size_t count) {
  FaultPattern f;
  if (c.depth() == 0 || c.n == 0) return f;
  for (std::size_t k = 0; k < count; ++k)
    f.mul({std::uint32_t(rng() % c.depth()), std::uint32_t(rng() % c.n)},
          "XYZ"[rng() % 3]);
  return f;
}

}  // namespace qbell::testing
