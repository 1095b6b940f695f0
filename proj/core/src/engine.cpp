#include "qbell/engine.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <sstream>
#include <stdexcept>

namespace qbell {

std::uint64_t OutcomeRecord::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    h ^= (bits[i] & 1) | (std::uint64_t(written[i]) << 1);
    h *= 0x100000001b3ull;
    h ^= i;
    h *= 0x100000001b3ull;
  }
  return h;
}

Rng make_rng(std::uint64_t master_seed, std::uint64_t trial, std::uint64_t stream) {
  // splitmix64 over the concatenated identifiers
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  std::uint64_t s = mix(master_seed);
  s = mix(s ^ mix(trial + 0x51ull));
  s = mix(s ^ mix(stream + 0xa3ull));
  return Rng(s);
}

PauliMask eval_cascade(const CorrectionCascade& cascade,
                       std::vector<std::uint8_t>& bits) {
  PauliMask total;
  bool first = true;
  for (const auto& stage : cascade.stages) {
    if (stage.is_decode) {
      bits[stage.decode_bit] = std::uint8_t(stage.decode.eval(bits));
      continue;
    }
    PauliMask v = stage.fn.eval(bits);
    if (first) {
      total = v;
      first = false;
    } else {
      total ^= v;
    }
    // Record flips caused by commuting this correction past later
    // measurements; indicators read the same adjusted snapshot.
    std::vector<std::pair<std::uint32_t, int>> flips;
    flips.reserve(stage.flips.size());
    for (const auto& f : stage.flips)
      flips.push_back({f.bit, f.indicator.eval(bits)});
    for (const auto& [bit, v2] : flips)
      if (v2) bits[bit] ^= 1;
  }
  return total;
}

namespace {

struct SlotPlan {
  // Streaming: per qubit, the layer after which it can be retired
  // (only when its last quantum op is a measurement or discard).
  std::vector<std::int64_t> retire_after;
  std::vector<std::int64_t> first_use;
  std::size_t capacity = 0;
};

SlotPlan plan_slots(const Circuit& c) {
  SlotPlan plan;
  plan.retire_after.assign(c.n, -1);
  plan.first_use.assign(c.n, -1);
  std::vector<std::int64_t> last_use(c.n, -1);
  std::vector<std::uint8_t> last_is_terminal(c.n, 0);
  for (std::size_t t = 0; t < c.layers.size(); ++t) {
    for (const auto& op : c.layers[t].ops) {
      if (!op.is_quantum()) continue;
      for (auto q : op.qubits) {
        if (plan.first_use[q] < 0) plan.first_use[q] = std::int64_t(t);
        last_use[q] = std::int64_t(t);
        last_is_terminal[q] =
            op.kind == OpKind::MeasureZ || op.kind == OpKind::Discard;
      }
    }
  }
  std::vector<std::uint8_t> is_output(c.n, 0);
  for (auto q : c.outputs) is_output[q] = 1;
  for (std::uint32_t q = 0; q < c.n; ++q) {
    if (last_use[q] >= 0 && last_is_terminal[q] && !is_output[q])
      plan.retire_after[q] = last_use[q];
  }
  // Peak live count.
  std::size_t live = 0, peak = 0;
  std::vector<std::vector<std::uint32_t>> born(c.layers.size()),
      dies(c.layers.size());
  for (std::uint32_t q = 0; q < c.n; ++q) {
    if (plan.first_use[q] < 0) continue;
    born[plan.first_use[q]].push_back(q);
    if (plan.retire_after[q] >= 0) dies[plan.retire_after[q]].push_back(q);
  }
  std::size_t never_retired = 0;
  for (std::size_t t = 0; t < c.layers.size(); ++t) {
    live += born[t].size();
    peak = std::max(peak, live + never_retired);
    live -= dies[t].size();
    (void)never_retired;
  }
  plan.capacity = std::max<std::size_t>(peak, 1);
  return plan;
}

}  // namespace

RunResult run(const Circuit& c, const FaultPattern& f, Rng& outcome_rng,
              const RunOptions& opts) {
  RunResult res;
  res.record = OutcomeRecord(c.num_cbits);
  std::size_t width = c.n;
  SlotPlan plan;
  if (opts.streaming) {
    plan = plan_slots(c);
    width = plan.capacity;
  }
  res.state = StabilizerState(width);
  res.slot_of.assign(c.n, SIZE_MAX);
  std::vector<std::size_t> free_slots;
  std::size_t next_slot = 0;
  if (!opts.streaming)
    for (std::uint32_t q = 0; q < c.n; ++q) res.slot_of[q] = q;

  auto ensure_slot = [&](std::uint32_t q) -> std::size_t {
    std::size_t& s = res.slot_of[q];
    if (s != SIZE_MAX) return s;
    if (!free_slots.empty()) {
      s = free_slots.back();
      free_slots.pop_back();
      res.state.reset_to_zero(s, outcome_rng);  // deterministic: slot is a Z eigenstate
    } else {
      if (next_slot >= width) throw std::runtime_error("run: slot capacity exceeded");
      s = next_slot++;
    }
    return s;
  };
  auto retire = [&](std::uint32_t q, std::size_t t) {
    if (!opts.streaming) return;
    if (plan.retire_after[q] == std::int64_t(t)) {
      free_slots.push_back(res.slot_of[q]);
      res.slot_of[q] = SIZE_MAX;
    }
  };

  auto fault_it = f.entries.begin();
  for (std::size_t t = 0; t < c.layers.size(); ++t) {
    bool final_layer = (t + 1 == c.layers.size());
    for (const auto& op : c.layers[t].ops) {
      switch (op.kind) {
        case OpKind::Prep0: {
          std::size_t s = ensure_slot(op.qubits[0]);
          res.state.reset_to_zero(s, outcome_rng);
          ++res.gate_ops;
          break;
        }
        case OpKind::Unitary: {
          std::size_t s0 = ensure_slot(op.qubits[0]);
          if (op.qubits.size() == 2) {
            std::size_t s1 = ensure_slot(op.qubits[1]);
            res.state.apply(op.gate, s0, s1);
          } else {
            res.state.apply(op.gate, s0);
          }
          ++res.gate_ops;
          break;
        }
        case OpKind::MeasureZ: {
          std::size_t s = ensure_slot(op.qubits[0]);
          int bit = res.state.measure_z(s, outcome_rng);
          res.record.bits[op.out_bit] = std::uint8_t(bit);
          res.record.written[op.out_bit] = 1;
          res.record.provenance[op.out_bit] = {std::uint32_t(t), op.qubits[0]};
          ++res.gate_ops;
          retire(op.qubits[0], t);
          break;
        }
        case OpKind::Discard: {
          std::size_t s = ensure_slot(op.qubits[0]);
          (void)res.state.measure_z(s, outcome_rng);
          ++res.gate_ops;
          retire(op.qubits[0], t);
          break;
        }
        case OpKind::ControlledPauli: {
          if (final_layer && opts.skip_final_adaptive) break;
          std::vector<std::uint8_t> adj = res.record.bits;
          PauliMask v = eval_cascade(*op.cascade, adj);
          // Flips recorded by the cascade feed forward into the live record.
          res.record.bits = adj;
          for (std::size_t i = 0; i < op.qubits.size(); ++i) {
            bool x = v.x.get(i), z = v.z.get(i);
            if (!x && !z) continue;
            std::size_t s = ensure_slot(op.qubits[i]);
            if (x) res.state.apply(Gate::X, s);
            if (z) res.state.apply(Gate::Z, s);
            ++res.gate_ops;
          }
          break;
        }
        case OpKind::ClassicalDecode: {
          res.record.bits[op.out_bit] =
              std::uint8_t(op.decode->eval(res.record.bits));
          res.record.written[op.out_bit] = 1;
          break;
        }
        case OpKind::Wait:
          break;
      }
    }
    // Faults on wires (t, .) act after the layer.
    while (fault_it != f.entries.end() && fault_it->first.t == t) {
      std::uint32_t q = fault_it->first.q;
      if (q >= c.n) throw std::runtime_error("run: fault on missing qubit");
      std::size_t s = res.slot_of[q];
      if (s != SIZE_MAX) {
        char l = fault_it->second;
        if (l == 'X' || l == 'Y') res.state.apply(Gate::X, s);
        if (l == 'Z' || l == 'Y') res.state.apply(Gate::Z, s);
        ++res.faults_applied;
      }
      ++fault_it;
    }
    if (fault_it != f.entries.end() && fault_it->first.t < t)
      throw std::runtime_error("run: fault pattern out of order");
  }
  return res;
}

namespace {

struct BranchKey {
  std::size_t coin_count;
  std::string state_repr;
  auto operator<=>(const BranchKey&) const = default;
};

std::string canon_repr(const std::vector<PauliOperator>& rows) {
  std::ostringstream os;
  for (const auto& r : rows) os << r.str() << ";";
  return os.str();
}

// Enumerates all outcome branches of (f |x| c) with a Choi reference attached
// to each input qubit. Collects (coin_count, reduced canonical state).
void enumerate_branches(const Circuit& c, const FaultPattern& f,
                        std::size_t branch_cap,
                        std::vector<BranchKey>& out) {
  std::size_t n_ref = c.inputs.size();
  std::size_t width = c.n + n_ref;
  StabilizerState init(width);
  Rng dummy(0);
  for (std::size_t j = 0; j < n_ref; ++j) {
    std::size_t ref = c.n + j;
    init.apply(Gate::H, ref);
    init.apply(Gate::CNOT, ref, c.inputs[j]);
  }
  std::vector<std::size_t> keep;
  for (auto q : c.outputs) keep.push_back(q);
  for (std::size_t j = 0; j < n_ref; ++j) keep.push_back(c.n + j);

  struct Frame {
    StabilizerState state;
    std::vector<std::uint8_t> bits;
    std::size_t layer, op_index;
    std::size_t coins;
    Frame(StabilizerState s, std::vector<std::uint8_t> b, std::size_t l,
          std::size_t o, std::size_t k)
        : state(std::move(s)), bits(std::move(b)), layer(l), op_index(o), coins(k) {}
  };
  std::vector<Frame> stack;
  stack.emplace_back(init, std::vector<std::uint8_t>(c.num_cbits, 0), 0, 0, 0);

  while (!stack.empty()) {
    if (out.size() + stack.size() > branch_cap)
      throw std::runtime_error("branch_oracle: branch cap exceeded");
    Frame fr = std::move(stack.back());
    stack.pop_back();
    bool forked = false;
    std::size_t t = fr.layer;
    std::size_t oi = fr.op_index;
    while (t < c.layers.size() && !forked) {
      const auto& ops = c.layers[t].ops;
      while (oi < ops.size() && !forked) {
        const Operation& op = ops[oi];
        switch (op.kind) {
          case OpKind::Prep0: {
            // Deterministic reset without rng: measure forced-0; if the
            // outcome was random we must fork (both halves re-prepared to the
            // same |0>, so no fork is actually needed for the state, but the
            // coin would never be observed; reset directly).
            bool was_random = false;
            int m = fr.state.measure_z_forced(op.qubits[0], 0, &was_random);
            if (m) fr.state.apply(Gate::X, op.qubits[0]);
            break;
          }
          case OpKind::Unitary:
            if (op.qubits.size() == 2)
              fr.state.apply(op.gate, op.qubits[0], op.qubits[1]);
            else
              fr.state.apply(op.gate, op.qubits[0]);
            break;
          case OpKind::MeasureZ:
          case OpKind::Discard: {
            auto det = fr.state.deterministic_z(op.qubits[0]);
            if (det) {
              if (op.kind == OpKind::MeasureZ) fr.bits[op.out_bit] = std::uint8_t(*det);
              (void)fr.state.measure_z_forced(op.qubits[0], *det, nullptr);
            } else {
              // Fork: push the 1-branch, continue with the 0-branch.
              Frame other(fr.state, fr.bits, t, oi + 1, fr.coins + 1);
              (void)other.state.measure_z_forced(op.qubits[0], 1, nullptr);
              if (op.kind == OpKind::MeasureZ) other.bits[op.out_bit] = 1;
              stack.push_back(std::move(other));
              (void)fr.state.measure_z_forced(op.qubits[0], 0, nullptr);
              if (op.kind == OpKind::MeasureZ) fr.bits[op.out_bit] = 0;
              fr.coins += 1;
            }
            break;
          }
          case OpKind::ControlledPauli: {
            PauliMask v = eval_cascade(*op.cascade, fr.bits);
            for (std::size_t i = 0; i < op.qubits.size(); ++i) {
              if (v.x.get(i)) fr.state.apply(Gate::X, op.qubits[i]);
              if (v.z.get(i)) fr.state.apply(Gate::Z, op.qubits[i]);
            }
            break;
          }
          case OpKind::ClassicalDecode:
            fr.bits[op.out_bit] = std::uint8_t(op.decode->eval(fr.bits));
            break;
          case OpKind::Wait:
            break;
        }
        ++oi;
      }
      if (oi >= ops.size()) {
        // Apply this wire row's faults, advance to next layer.
        for (std::uint32_t q = 0; q < c.n; ++q) {
          char l = f.at({std::uint32_t(t), q});
          if (l == 'I') continue;
          if (l == 'X' || l == 'Y') fr.state.apply(Gate::X, q);
          if (l == 'Z' || l == 'Y') fr.state.apply(Gate::Z, q);
        }
        ++t;
        oi = 0;
      }
    }
    if (t >= c.layers.size()) {
      // Trace out non-kept qubits: measure them, forking when random.
      std::vector<std::uint8_t> kept(width, 0);
      for (auto q : keep) kept[q] = 1;
      bool pushed = false;
      for (std::size_t q = 0; q < width && !pushed; ++q) {
        if (kept[q]) continue;
        auto red = fr.state.deterministic_z(q);
        if (red) {
          (void)fr.state.measure_z_forced(q, *red, nullptr);
        } else {
          Frame other(fr.state, fr.bits, c.layers.size(), q, fr.coins + 1);
          (void)other.state.measure_z_forced(q, 1, nullptr);
          stack.push_back(std::move(other));
          (void)fr.state.measure_z_forced(q, 0, nullptr);
          fr.coins += 1;
        }
      }
      auto red = fr.state.reduced_canonical(keep);
      if (!red)
        throw std::runtime_error("branch_oracle: residual entanglement after trace");
      out.push_back({fr.coins, canon_repr(*red)});
    } else {
      stack.push_back(std::move(fr));
    }
  }
}

}  // namespace

BranchOracleVerdict branch_oracle(const Circuit& a, const Circuit& b,
                                  const FaultPattern& fa, const FaultPattern& fb,
                                  std::size_t branch_cap) {
  BranchOracleVerdict v;
  if (a.inputs.size() != b.inputs.size() || a.outputs.size() != b.outputs.size()) {
    v.detail = "arity mismatch";
    return v;
  }
  std::vector<BranchKey> ba, bb;
  enumerate_branches(a, fa, branch_cap, ba);
  enumerate_branches(b, fb, branch_cap, bb);
  v.branches_a = ba.size();
  v.branches_b = bb.size();
  // Compare as probability-weighted multisets: expand coin counts to a common
  // resolution.
  std::size_t kmax = 0;
  for (const auto& k : ba) kmax = std::max(kmax, k.coin_count);
  for (const auto& k : bb) kmax = std::max(kmax, k.coin_count);
  auto weigh = [&](const std::vector<BranchKey>& in) {
    std::map<std::string, std::uint64_t> w;
    for (const auto& k : in)
      w[k.state_repr] += std::uint64_t(1) << (kmax - k.coin_count);
    return w;
  };
  auto wa = weigh(ba), wb = weigh(bb);
  if (wa == wb) {
    v.equal = true;
    return v;
  }
  for (const auto& [repr, weight] : wa) {
    auto it = wb.find(repr);
    if (it == wb.end() || it->second != weight) {
      std::ostringstream os;
      os << "first mismatch: weight " << weight << " vs "
         << (it == wb.end() ? 0 : it->second) << " for state " << repr;
      v.detail = os.str();
      return v;
    }
  }
  v.detail = "extra branches in b";
  return v;
}

}  // namespace qbell
