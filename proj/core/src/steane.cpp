#include "qbell/steane.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>
#include <stdexcept>

namespace qbell {

namespace {

// Hamming rows; pivots chosen from a right-reduced basis so the flagged
// fan-outs happen near the flag columns.
const std::vector<std::vector<std::uint32_t>> kXStabs = {
    {3, 4, 5, 6}, {1, 2, 5, 6}, {0, 2, 4, 6}};

// Basis used by the helper-state fan-outs: pivot, then targets ordered
// near-to-far, plus the flag-conditioned repair mask {pivot, last target}.
struct FanRow {
  std::uint32_t pivot;
  std::array<std::uint32_t, 3> targets;
  std::array<std::uint32_t, 2> repair;
};
const std::array<FanRow, 3> kFanRows = {{
    {6, {3, 1, 0}, {6, 0}},  // {0,1,3,6}
    {5, {3, 2, 0}, {5, 0}},  // {0,2,3,5}
    {4, {3, 2, 1}, {4, 1}},  // {1,2,3,4}
}};

}  // namespace

std::uint32_t CodeSpec::syndrome(const std::vector<std::uint32_t>& support) const {
  std::uint32_t s = 0;
  for (std::uint32_t row = 0; row < 3; ++row) {
    int par = 0;
    for (auto q : support) par ^= syndrome_bit(row, q);
    s |= std::uint32_t(par) << (2 - row);
  }
  return s;
}

bool CodeSpec::syndrome_bit(std::uint32_t row, std::uint32_t qubit) const {
  const auto& r = x_stabs[row];
  return std::find(r.begin(), r.end(), qubit) != r.end();
}

std::size_t CodeSpec::leader(std::uint32_t s) const { return s == 0 ? SIZE_MAX : s - 1; }

const CodeSpec& steane_spec() {
  static const CodeSpec spec = [] {
    CodeSpec sp;
    sp.x_stabs = kXStabs;
    sp.z_stabs = kXStabs;  // self-dual
    sp.logical_x = {0, 1, 2};
    sp.logical_z = {0, 1, 2};
    return sp;
  }();
  return spec;
}

namespace {

// Greedy router over a contiguous rail segment: non-adjacent gates shuttle
// the second operand toward the first; the permutation is restored at the
// end. Layers pack as-soon-as-possible.
struct RailRouter {
  std::vector<std::uint32_t> ids;  // path-ordered global qubit ids
  std::vector<std::size_t> pos;    // slot -> position
  std::vector<std::size_t> occ;    // position -> slot
  std::vector<std::size_t> busy;   // position -> next free layer
  std::vector<Layer> layers;

  explicit RailRouter(std::vector<std::uint32_t> qubit_ids)
      : ids(std::move(qubit_ids)), pos(ids.size()), occ(ids.size()),
        busy(ids.size(), 0) {
    for (std::size_t i = 0; i < ids.size(); ++i) pos[i] = occ[i] = i;
  }

  std::size_t place(std::initializer_list<std::size_t> positions, Operation op) {
    std::size_t layer = 0;
    for (auto p : positions) layer = std::max(layer, busy[p]);
    if (layer >= layers.size()) layers.resize(layer + 1);
    layers[layer].ops.push_back(std::move(op));
    for (auto p : positions) busy[p] = layer + 1;
    return layer;
  }

  void swap_positions(std::size_t a, std::size_t b) {
    place({a, b}, Operation::unitary(Gate::SWAP, ids[a], ids[b]));
    std::swap(occ[a], occ[b]);
    pos[occ[a]] = a;
    pos[occ[b]] = b;
  }

  // Moves slot b adjacent to slot a.
  void bring_together(std::size_t a, std::size_t b) {
    while (true) {
      std::size_t pa = pos[a], pb = pos[b];
      if (pa + 1 == pb || pb + 1 == pa) return;
      if (pb > pa)
        swap_positions(pb - 1, pb);
      else
        swap_positions(pb, pb + 1);
    }
  }

  void cnot(std::size_t ctrl, std::size_t tgt) {
    bring_together(ctrl, tgt);
    place({pos[ctrl], pos[tgt]},
          Operation::unitary(Gate::CNOT, ids[pos[ctrl]], ids[pos[tgt]]));
  }

  void one(Gate g, std::size_t slot) {
    place({pos[slot]}, Operation::unitary(g, ids[pos[slot]]));
  }
  void prep(std::size_t slot) { place({pos[slot]}, Operation::prep0(ids[pos[slot]])); }
  void measure(std::size_t slot, std::uint32_t bit) {
    place({pos[slot]}, Operation::measure_z(ids[pos[slot]], bit));
  }

  // Sorts the permutation back to identity with odd-even transposition
  // rounds (parallel swap layers, depth at most the segment length).
  void restore() {
    bool dirty = true;
    while (dirty) {
      dirty = false;
      for (std::size_t parity = 0; parity < 2; ++parity) {
        for (std::size_t a = parity; a + 1 < occ.size(); a += 2) {
          if (occ[a] > occ[a + 1]) {
            swap_positions(a, a + 1);
            dirty = true;
          }
        }
      }
    }
  }
};

// Appends router layers into `out` starting at `start`; returns depth used.
std::size_t splice(Circuit& out, std::size_t start, const std::vector<Layer>& layers) {
  if (out.layers.size() < start + layers.size())
    out.layers.resize(start + layers.size());
  for (std::size_t k = 0; k < layers.size(); ++k)
    for (const auto& op : layers[k].ops) out.layers[start + k].ops.push_back(op);
  return layers.size();
}

std::size_t ensure_layers(Circuit& out, std::size_t upto) {
  if (out.layers.size() < upto) out.layers.resize(upto);
  return upto;
}

struct HelperPrep {
  std::vector<Layer> layers;
  // per fan row: the two flag bits and the repair mask
  std::array<std::array<std::uint32_t, 2>, 3> flag_bits;
};

// Flagged |0-bar> preparation on the rail-B segment of one block (slots
// 0..6 helpers, 7..8 flags). Each pivot fan-out is bracketed by two nested
// flag windows so that any single fault either leaves a weight<=1-equivalent
// error or raises both flags, in which case the fixed repair mask applies.
HelperPrep helper_prep(Circuit& parent, const BlockLayout& lay, std::uint32_t block) {
  HelperPrep hp;
  std::vector<std::uint32_t> ids;
  for (std::uint32_t i = 0; i < 9; ++i) ids.push_back(lay.helper(block, i));
  RailRouter rr(ids);
  for (std::size_t s = 0; s < 9; ++s) rr.prep(s);
  for (std::size_t row = 0; row < 3; ++row) {
    const FanRow& fr = kFanRows[row];
    std::uint32_t p = fr.pivot;
    rr.one(Gate::H, p);
    rr.cnot(p, 7);              // f1 open
    rr.cnot(p, fr.targets[0]);  // T1
    rr.cnot(p, 8);              // f2 open
    rr.cnot(p, fr.targets[1]);  // T2
    rr.cnot(p, fr.targets[2]);  // T3
    rr.cnot(p, 7);              // f1 close
    rr.cnot(p, 8);              // f2 close
    std::uint32_t b1 = parent.fresh_bit();
    std::uint32_t b2 = parent.fresh_bit();
    rr.measure(7, b1);
    rr.measure(8, b2);
    rr.prep(7);
    rr.prep(8);
    hp.flag_bits[row] = {b1, b2};
  }
  rr.restore();
  hp.layers = std::move(rr.layers);
  return hp;
}

const std::array<std::uint32_t, 3> kSyndromeValue = {1, 2, 4};  // q in row -> bit

// Key rows computing the Hamming syndrome of 7 measurement bits located at
// positions [offset, offset+7) of the source list.
std::vector<Bits> syndrome_key_rows(std::size_t num_sources, std::size_t offset) {
  // Key bit k holds check row 2-k so the assembled key equals
  // CodeSpec::syndrome (row 0 is the most significant bit).
  const CodeSpec& sp = steane_spec();
  std::vector<Bits> rows;
  for (std::uint32_t k = 0; k < 3; ++k) {
    std::uint32_t r = 2 - k;
    Bits row(num_sources);
    for (std::uint32_t q = 0; q < 7; ++q)
      if (sp.syndrome_bit(r, q)) row.set(offset + q, true);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::uint32_t key_syndrome_of_entry(std::size_t entry, std::size_t offset_in_key) {
  return std::uint32_t((entry >> offset_in_key) & 7);
}

// One detection round: a flagged helper |0-bar>, transversal CNOT from the
// helpers into the data rail, transversal H and measurement of the helpers.
struct Round {
  std::size_t depth;
  std::array<std::uint32_t, 7> m_bits;
  std::array<std::array<std::uint32_t, 2>, 3> flag_bits;
};

Round emit_round(Circuit& out, const BlockLayout& lay, std::uint32_t block,
                 std::size_t start) {
  Round rd{};
  HelperPrep hp = helper_prep(out, lay, block);
  rd.flag_bits = hp.flag_bits;
  std::size_t d = splice(out, start, hp.layers);
  std::size_t t = start + d;
  ensure_layers(out, t + 3);
  for (std::uint32_t i = 0; i < 7; ++i)
    out.layers[t].ops.push_back(
        Operation::unitary(Gate::CNOT, lay.helper(block, i), lay.data(block, i)));
  for (std::uint32_t i = 0; i < 7; ++i)
    out.layers[t + 1].ops.push_back(Operation::unitary(Gate::H, lay.helper(block, i)));
  for (std::uint32_t i = 0; i < 7; ++i) {
    rd.m_bits[i] = out.fresh_bit();
    out.layers[t + 2].ops.push_back(
        Operation::measure_z(lay.helper(block, i), rd.m_bits[i]));
  }
  rd.depth = d + 3;
  return rd;
}

// The syndrome-keyed part of the correction: a 64-entry table over
// (syndrome of m, syndrome of m2) giving Z(e(s1)) X(e(s2)).
void add_default_term(ClassicalFunction& fn, std::size_t m_off, std::size_t m2_off) {
  const CodeSpec& sp = steane_spec();
  ClassicalFunction::Term term;
  auto rows1 = syndrome_key_rows(fn.sources.size(), m_off);
  auto rows2 = syndrome_key_rows(fn.sources.size(), m2_off);
  term.key_rows = rows1;
  for (auto& r : rows2) term.key_rows.push_back(std::move(r));
  term.table.assign(64, PauliMask(7));
  for (std::size_t e = 0; e < 64; ++e) {
    std::uint32_t s1 = key_syndrome_of_entry(e, 0);
    std::uint32_t s2 = key_syndrome_of_entry(e, 3);
    if (auto q = sp.leader(s1); q != SIZE_MAX) term.table[e].z.set(q, true);
    if (auto q = sp.leader(s2); q != SIZE_MAX) term.table[e].x.set(q, true);
  }
  fn.terms.push_back(std::move(term));
}

std::size_t source_pos(const ClassicalFunction& fn, std::uint32_t bit) {
  for (std::size_t i = 0; i < fn.sources.size(); ++i)
    if (fn.sources[i] == bit) return i;
  throw std::logic_error("source_pos: bit not a source");
}

// Both-flags repair term. When suppress_off != SIZE_MAX the term also cancels
// the default X(e(s)) correction keyed on the partner round's syndrome.
void add_flag_term(ClassicalFunction& fn, const std::array<std::uint32_t, 2>& flags,
                   const std::array<std::uint32_t, 2>& repair, bool x_type,
                   std::size_t suppress_off) {
  const CodeSpec& sp = steane_spec();
  ClassicalFunction::Term term;
  Bits f1(fn.sources.size()), f2(fn.sources.size());
  f1.set(source_pos(fn, flags[0]), true);
  f2.set(source_pos(fn, flags[1]), true);
  term.key_rows = {f1, f2};
  std::size_t synd_keys = suppress_off != SIZE_MAX ? 3 : 0;
  if (synd_keys) {
    auto rows = syndrome_key_rows(fn.sources.size(), suppress_off);
    for (auto& r : rows) term.key_rows.push_back(std::move(r));
  }
  term.table.assign(std::size_t(1) << term.key_rows.size(), PauliMask(7));
  for (std::size_t e = 0; e < term.table.size(); ++e) {
    if ((e & 3) != 3) continue;  // fire only when both flags are set
    PauliMask& pm = term.table[e];
    Bits& side = x_type ? pm.x : pm.z;
    side.set(repair[0], true);
    side.set(repair[1], true);
    if (synd_keys) {
      std::uint32_t s = key_syndrome_of_entry(e, 2);
      if (auto q = sp.leader(s); q != SIZE_MAX) side.flip(q);
    }
  }
  fn.terms.push_back(std::move(term));
}

std::size_t emit_ec(Circuit& out, const BlockLayout& lay, std::uint32_t block,
                    std::size_t start) {
  Round r1 = emit_round(out, lay, block, start);
  std::size_t t = start + r1.depth;
  ensure_layers(out, t + 1);
  for (std::uint32_t i = 0; i < 7; ++i)
    out.layers[t].ops.push_back(Operation::unitary(Gate::H, lay.data(block, i)));
  Round r2 = emit_round(out, lay, block, t + 1);
  t = t + 1 + r2.depth;
  ensure_layers(out, t + 2);
  for (std::uint32_t i = 0; i < 7; ++i)
    out.layers[t].ops.push_back(Operation::unitary(Gate::H, lay.data(block, i)));
  // Correction: sources are m, m2 and the four flag pairs.
  std::vector<std::uint32_t> sources;
  for (auto b : r1.m_bits) sources.push_back(b);
  for (auto b : r2.m_bits) sources.push_back(b);
  for (const auto& fb : r1.flag_bits) {
    sources.push_back(fb[0]);
    sources.push_back(fb[1]);
  }
  for (const auto& fb : r2.flag_bits) {
    sources.push_back(fb[0]);
    sources.push_back(fb[1]);
  }
  ClassicalFunction fn(sources, 7);
  add_default_term(fn, 0, 7);
  for (std::size_t row = 0; row < 3; ++row) {
    // Round-1 helper X-copies are seen by round 2's syndrome: repair plus
    // default suppression. Round-2 helper copies become Z-type after the
    // rotation back and are invisible to both syndromes: bare repair.
    add_flag_term(fn, r1.flag_bits[row],
                  {kFanRows[row].repair[0], kFanRows[row].repair[1]}, true, 7);
    add_flag_term(fn, r2.flag_bits[row],
                  {kFanRows[row].repair[0], kFanRows[row].repair[1]}, false,
                  SIZE_MAX);
  }
  std::vector<std::uint32_t> targets;
  for (std::uint32_t i = 0; i < 7; ++i) targets.push_back(lay.data(block, i));
  out.layers[t + 1].ops.push_back(Operation::controlled_pauli(std::move(fn), targets));
  return (t + 2) - start;
}

std::size_t emit_prep(Circuit& out, const BlockLayout& lay, std::uint32_t block,
                      std::size_t start) {
  ensure_layers(out, start + 1);
  for (std::uint32_t i = 0; i < 7; ++i)
    out.layers[start].ops.push_back(Operation::prep0(lay.data(block, i)));
  Round r = emit_round(out, lay, block, start + 1);
  std::size_t t = start + 1 + r.depth;
  ensure_layers(out, t + 1);
  std::vector<std::uint32_t> sources;
  for (auto b : r.m_bits) sources.push_back(b);
  for (const auto& fb : r.flag_bits) {
    sources.push_back(fb[0]);
    sources.push_back(fb[1]);
  }
  ClassicalFunction fn(sources, 7);
  {
    const CodeSpec& sp = steane_spec();
    ClassicalFunction::Term term;
    term.key_rows = syndrome_key_rows(sources.size(), 0);
    term.table.assign(8, PauliMask(7));
    for (std::size_t e = 0; e < 8; ++e)
      if (auto q = sp.leader(std::uint32_t(e)); q != SIZE_MAX)
        term.table[e].z.set(q, true);
    fn.terms.push_back(std::move(term));
  }
  for (std::size_t row = 0; row < 3; ++row)
    add_flag_term(fn, r.flag_bits[row],
                  {kFanRows[row].repair[0], kFanRows[row].repair[1]}, true, SIZE_MAX);
  std::vector<std::uint32_t> targets;
  for (std::uint32_t i = 0; i < 7; ++i) targets.push_back(lay.data(block, i));
  out.layers[t].ops.push_back(Operation::controlled_pauli(std::move(fn), targets));
  return (t + 1) - start;
}

std::size_t emit_gate1(Circuit& out, const BlockLayout& lay, std::uint32_t block,
                       Gate g, std::size_t start) {
  ensure_layers(out, start + 1);
  Gate phys = g;
  if (g == Gate::S) phys = Gate::SDG;  // transversal S-bar is SDG^x7
  if (g == Gate::SDG) phys = Gate::S;
  if (g == Gate::I) return 1;
  for (std::uint32_t i = 0; i < 7; ++i)
    out.layers[start].ops.push_back(Operation::unitary(phys, lay.data(block, i)));
  return 1;
}

// Transversal two-block gate: the second operand's data rides down to the
// first operand's helper rail (a staggered convoy through idle helpers),
// interacts on the rungs, and rides back.
std::size_t emit_gate2(Circuit& out, const BlockLayout& lay, std::uint32_t b_ctrl,
                       std::uint32_t b_tgt, Gate g, std::size_t start) {
  std::uint32_t c_from = BlockLayout::cols_per_block * b_tgt;
  std::uint32_t c_to = BlockLayout::cols_per_block * b_ctrl;
  std::size_t t = start;
  ensure_layers(out, t + 1);
  for (std::uint32_t i = 0; i < 7; ++i)
    out.layers[t].ops.push_back(Operation::unitary(
        Gate::SWAP, lay.rail_a(c_from + i), lay.rail_b(c_from + i)));
  ++t;
  auto convoy = [&](bool back) {
    // Items i=0..6 travel between rail-B columns c_from+i and c_to+i. The
    // leading item moves first; followers stagger in behind it so the
    // per-layer swaps stay disjoint.
    std::int64_t from = back ? std::int64_t(c_to) : std::int64_t(c_from);
    std::int64_t to = back ? std::int64_t(c_from) : std::int64_t(c_to);
    std::int64_t dir = to > from ? 1 : -1;
    std::vector<std::int64_t> at(7), goal(7);
    for (int i = 0; i < 7; ++i) {
      at[i] = from + i;
      goal[i] = to + i;
    }
    std::vector<int> order(7);
    for (int i = 0; i < 7; ++i) order[i] = dir > 0 ? 6 - i : i;
    while (true) {
      bool done = true;
      for (int i = 0; i < 7; ++i) done = done && at[i] == goal[i];
      if (done) break;
      ensure_layers(out, t + 1);
      std::set<std::int64_t> busy_cols;
      std::set<std::int64_t> item_cells(at.begin(), at.end());
      for (int idx : order) {
        if (at[idx] == goal[idx]) continue;
        std::int64_t cur = at[idx], nxt = cur + dir;
        if (item_cells.count(nxt) || busy_cols.count(cur) || busy_cols.count(nxt))
          continue;
        out.layers[t].ops.push_back(Operation::unitary(
            Gate::SWAP, lay.rail_b(std::uint32_t(cur)), lay.rail_b(std::uint32_t(nxt))));
        busy_cols.insert(cur);
        busy_cols.insert(nxt);
        item_cells.erase(cur);
        item_cells.insert(nxt);
        at[idx] = nxt;
      }
      ++t;
    }
  };
  convoy(false);
  ensure_layers(out, t + 1);
  for (std::uint32_t i = 0; i < 7; ++i) {
    std::uint32_t a = lay.rail_a(c_to + i);  // control-block data
    std::uint32_t b = lay.rail_b(c_to + i);  // visiting target data
    if (g == Gate::CNOT)
      out.layers[t].ops.push_back(Operation::unitary(Gate::CNOT, a, b));
    else
      out.layers[t].ops.push_back(Operation::unitary(Gate::SWAP, a, b));
  }
  ++t;
  convoy(true);
  ensure_layers(out, t + 1);
  for (std::uint32_t i = 0; i < 7; ++i)
    out.layers[t].ops.push_back(Operation::unitary(
        Gate::SWAP, lay.rail_b(c_from + i), lay.rail_a(c_from + i)));
  ++t;
  return t - start;
}

struct MeasOut {
  std::size_t depth;
  std::array<std::uint32_t, 7> bits;
};

MeasOut emit_meas(Circuit& out, const BlockLayout& lay, std::uint32_t block,
                  std::size_t start, std::uint32_t logical_bit) {
  MeasOut mo{};
  ensure_layers(out, start + 2);
  for (std::uint32_t i = 0; i < 7; ++i) {
    mo.bits[i] = out.fresh_bit();
    out.layers[start].ops.push_back(
        Operation::measure_z(lay.data(block, i), mo.bits[i]));
  }
  // logical bit = parity over the logical-Z support of the corrected word
  const CodeSpec& sp = steane_spec();
  std::vector<std::uint32_t> srcs(mo.bits.begin(), mo.bits.end());
  BitFn fn(srcs);
  for (auto q : sp.logical_z) fn.lin.set(q, true);
  BitFn::Term term;
  term.key_rows = syndrome_key_rows(7, 0);
  term.table.assign(8, 0);
  for (std::size_t e = 0; e < 8; ++e) {
    auto q = sp.leader(std::uint32_t(e));
    if (q == SIZE_MAX) continue;
    term.table[e] = std::count(sp.logical_z.begin(), sp.logical_z.end(),
                               std::uint32_t(q)) != 0;
  }
  fn.terms.push_back(std::move(term));
  out.layers[start + 1].ops.push_back(Operation::classical_decode(fn, logical_bit));
  mo.depth = 2;
  return mo;
}

// Abstract (pre-routing) encoder gate list for the logical fan plus pivot
// fan-outs; used both by the router and by the decode-table construction.
struct EncGate {
  bool is_h;
  std::uint32_t a, b;
};

std::vector<EncGate> encoder_gates() {
  std::vector<EncGate> gs;
  gs.push_back({false, 0, 1});
  gs.push_back({false, 0, 2});
  for (const auto& fr : kFanRows) {
    gs.push_back({true, fr.pivot, 0});
    // natural near-to-far target order; flags are not used here
    gs.push_back({false, fr.pivot, fr.targets[0]});
    gs.push_back({false, fr.pivot, fr.targets[1]});
    gs.push_back({false, fr.pivot, fr.targets[2]});
  }
  return gs;
}

CliffordAction encoder_action() {
  CliffordAction u = CliffordAction::identity(7);
  for (const auto& g : encoder_gates()) {
    CliffordAction step = g.is_h ? CliffordAction::from_gate(7, Gate::H, g.a)
                                 : CliffordAction::from_gate(7, Gate::CNOT, g.a, g.b);
    u = step.compose_after(u);
  }
  return u;
}

std::size_t emit_enc(Circuit& out, const BlockLayout& lay, std::uint32_t block,
                     std::size_t start) {
  ensure_layers(out, start + 1);
  for (std::uint32_t i = 1; i < 7; ++i)
    out.layers[start].ops.push_back(Operation::prep0(lay.data(block, i)));
  std::vector<std::uint32_t> ids;
  for (std::uint32_t i = 0; i < 9; ++i)
    ids.push_back(lay.rail_a(BlockLayout::cols_per_block * block + i));
  RailRouter rr(ids);
  for (const auto& g : encoder_gates()) {
    if (g.is_h)
      rr.one(Gate::H, g.a);
    else
      rr.cnot(g.a, g.b);
  }
  rr.restore();
  return 1 + splice(out, start + 1, rr.layers);
}

// Decode table for the level-1 decoder: measured-ancilla bit pattern of
// U^dagger E U for every correctable E, filled to minimum weight elsewhere.
struct DecTable {
  std::array<PauliMask, 64> table;  // correction on the surviving qubit
};

const DecTable& dec_table() {
  static const DecTable dt = [] {
    DecTable d;
    for (auto& pm : d.table) pm = PauliMask(1);
    CliffordAction u = encoder_action();
    CliffordAction uinv = u.inverse();
    std::vector<std::uint8_t> filled(64, 0);
    auto consider = [&](const PauliOperator& e) {
      PauliOperator back = uinv.conjugate(e);
      std::size_t key = 0;
      for (std::uint32_t q = 1; q < 7; ++q)
        if (back.x_bit(q)) key |= std::size_t(1) << (q - 1);
      if (filled[key]) return;
      filled[key] = 1;
      d.table[key].x.set(0, back.x_bit(0));
      d.table[key].z.set(0, back.z_bit(0));
    };
    consider(PauliOperator::identity(7));
    const char letters[3] = {'X', 'Y', 'Z'};
    for (std::uint32_t q = 0; q < 7; ++q)
      for (char l : letters) consider(PauliOperator::single(7, q, l));
    // weight-2 by qubit-ascending order
    for (std::uint32_t q1 = 0; q1 < 7; ++q1)
      for (std::uint32_t q2 = q1 + 1; q2 < 7; ++q2)
        for (char l1 : letters)
          for (char l2 : letters) {
            PauliOperator e(7);
            e.set_letter(q1, l1);
            e.set_letter(q2, l2);
            consider(e);
          }
    return d;
  }();
  return dt;
}

std::size_t emit_dec(Circuit& out, const BlockLayout& lay, std::uint32_t block,
                     std::size_t start) {
  std::vector<std::uint32_t> ids;
  for (std::uint32_t i = 0; i < 9; ++i)
    ids.push_back(lay.rail_a(BlockLayout::cols_per_block * block + i));
  RailRouter rr(ids);
  auto gs = encoder_gates();
  for (auto it = gs.rbegin(); it != gs.rend(); ++it) {
    if (it->is_h)
      rr.one(Gate::H, it->a);
    else
      rr.cnot(it->a, it->b);
  }
  rr.restore();
  std::size_t t = start + splice(out, start, rr.layers);
  ensure_layers(out, t + 2);
  std::vector<std::uint32_t> bits;
  for (std::uint32_t i = 1; i < 7; ++i) {
    std::uint32_t b = out.fresh_bit();
    bits.push_back(b);
    out.layers[t].ops.push_back(Operation::measure_z(lay.data(block, i), b));
  }
  ClassicalFunction fn(bits, 1);
  ClassicalFunction::Term term;
  for (std::size_t r = 0; r < 6; ++r) {
    Bits row(6);
    row.set(r, true);
    term.key_rows.push_back(std::move(row));
  }
  term.table.assign(64, PauliMask(1));
  for (std::size_t e = 0; e < 64; ++e) term.table[e] = dec_table().table[e];
  fn.terms.push_back(std::move(term));
  out.layers[t + 1].ops.push_back(
      Operation::controlled_pauli(std::move(fn), {lay.data(block, 0)}));
  return (t + 2) - start;
}

std::size_t emit_discard(Circuit& out, const BlockLayout& lay, std::uint32_t block,
                         std::size_t start) {
  ensure_layers(out, start + 1);
  for (std::uint32_t i = 0; i < 7; ++i)
    out.layers[start].ops.push_back(Operation::discard(lay.data(block, i)));
  return 1;
}

}  // namespace

Gadget build_gadget(GadgetRole role, Gate gate) {
  Gadget g;
  g.role = role;
  g.gate = gate;
  g.blocks = (role == GadgetRole::gate && gate_is_two_qubit(gate)) ? 2 : 1;
  BlockLayout lay{g.blocks};
  Circuit& c = g.circuit;
  c.n = lay.num_qubits();
  switch (role) {
    case GadgetRole::ec:
      emit_ec(c, lay, 0, 0);
      break;
    case GadgetRole::prep0:
      emit_prep(c, lay, 0, 0);
      break;
    case GadgetRole::gate:
      if (g.blocks == 2)
        emit_gate2(c, lay, 0, 1, gate, 0);
      else
        emit_gate1(c, lay, 0, gate, 0);
      break;
    case GadgetRole::meas: {
      std::uint32_t bit = c.fresh_bit();
      emit_meas(c, lay, 0, 0, bit);
      break;
    }
    case GadgetRole::enc:
      emit_enc(c, lay, 0, 0);
      break;
    case GadgetRole::dec:
      emit_dec(c, lay, 0, 0);
      break;
  }
  auto block_data = [&](std::uint32_t b, std::vector<std::uint32_t>& dst) {
    for (std::uint32_t i = 0; i < 7; ++i) dst.push_back(lay.data(b, i));
  };
  switch (role) {
    case GadgetRole::ec:
      block_data(0, c.inputs);
      block_data(0, c.outputs);
      break;
    case GadgetRole::prep0:
      block_data(0, c.outputs);
      break;
    case GadgetRole::meas:
      block_data(0, c.inputs);
      break;
    case GadgetRole::gate:
      block_data(0, c.inputs);
      block_data(0, c.outputs);
      if (g.blocks == 2) {
        block_data(1, c.inputs);
        block_data(1, c.outputs);
      }
      break;
    case GadgetRole::enc:
      c.inputs = {lay.data(0, 0)};
      block_data(0, c.outputs);
      break;
    case GadgetRole::dec:
      block_data(0, c.inputs);
      c.outputs = {lay.data(0, 0)};
      break;
  }
  c.graph_tag = "bilinear";
  return g;
}

std::pair<Gadget, Gadget> enc_dec_circuits() {
  return {build_gadget(GadgetRole::enc), build_gadget(GadgetRole::dec)};
}

GadgetMetrics gadget_metrics() {
  GadgetMetrics m;
  std::size_t ec = build_gadget(GadgetRole::ec).circuit.depth();
  m.ec_depth = ec;
  std::size_t dmin = SIZE_MAX, dmax = 0;
  std::uint32_t nmax = 0;
  auto look = [&](const Gadget& g) {
    dmin = std::min(dmin, g.circuit.depth());
    dmax = std::max(dmax, g.circuit.depth());
    nmax = std::max(nmax, g.circuit.n);
  };
  look(build_gadget(GadgetRole::prep0));
  look(build_gadget(GadgetRole::meas));
  for (Gate g : {Gate::I, Gate::X, Gate::Y, Gate::Z, Gate::H, Gate::S, Gate::SDG})
    look(build_gadget(GadgetRole::gate, g));
  for (Gate g : {Gate::CNOT, Gate::SWAP}) look(build_gadget(GadgetRole::gate, g));
  nmax = std::max<std::uint32_t>(nmax, build_gadget(GadgetRole::ec).circuit.n);
  m.n_max = nmax;
  m.d_min = ec + dmin;
  m.d_max = ec + dmax;
  return m;
}

namespace {

Circuit sim1(const Circuit& c) {
  BlockLayout lay{c.n};
  Circuit out;
  out.n = lay.num_qubits();
  out.num_cbits = c.num_cbits;
  out.graph_tag = "bilinear";
  for (auto q : c.inputs)
    for (std::uint32_t i = 0; i < 7; ++i) out.inputs.push_back(lay.data(q, i));
  for (auto q : c.outputs)
    for (std::uint32_t i = 0; i < 7; ++i) out.outputs.push_back(lay.data(q, i));

  std::size_t slab = 0;
  for (std::size_t t = 0; t < c.layers.size(); ++t) {
    std::size_t slab_end = slab;
    auto grow = [&](std::size_t end) { slab_end = std::max(slab_end, end); };
    for (const auto& op : c.layers[t].ops) {
      switch (op.kind) {
        case OpKind::Prep0: {
          std::uint32_t b = op.qubits[0];
          std::size_t d = emit_prep(out, lay, b, slab);
          d += emit_ec(out, lay, b, slab + d);
          grow(slab + d);
          break;
        }
        case OpKind::Unitary: {
          if (op.qubits.size() == 2) {
            std::uint32_t b0 = op.qubits[0], b1 = op.qubits[1];
            std::size_t d = emit_gate2(out, lay, b0, b1, op.gate, slab);
            std::size_t d0 = emit_ec(out, lay, b0, slab + d);
            std::size_t d1 = emit_ec(out, lay, b1, slab + d);
            grow(slab + d + std::max(d0, d1));
          } else {
            std::uint32_t b = op.qubits[0];
            std::size_t d = emit_gate1(out, lay, b, op.gate, slab);
            d += emit_ec(out, lay, b, slab + d);
            grow(slab + d);
          }
          break;
        }
        case OpKind::MeasureZ: {
          std::uint32_t b = op.qubits[0];
          std::size_t d = emit_ec(out, lay, b, slab);
          MeasOut mo = emit_meas(out, lay, b, slab + d, op.out_bit);
          grow(slab + d + mo.depth);
          break;
        }
        case OpKind::Discard: {
          grow(slab + emit_discard(out, lay, op.qubits[0], slab));
          break;
        }
        case OpKind::ControlledPauli: {
          // Transversal lift: every target qubit becomes its block's 7 data
          // qubits with the same letter.
          Operation lifted = op;
          lifted.qubits.clear();
          for (auto q : op.qubits)
            for (std::uint32_t i = 0; i < 7; ++i)
              lifted.qubits.push_back(lay.data(q, i));
          lifted.cascade = std::make_shared<CorrectionCascade>(*op.cascade);
          for (auto& st : lifted.cascade->stages) {
            if (st.is_decode) continue;
            ClassicalFunction fat(st.fn.sources, lifted.qubits.size());
            auto blow = [&](const PauliMask& src, PauliMask& dst) {
              for (std::size_t p = 0; p < op.qubits.size(); ++p)
                for (std::uint32_t i = 0; i < 7; ++i) {
                  if (src.x.get(p)) dst.x.set(7 * p + i, true);
                  if (src.z.get(p)) dst.z.set(7 * p + i, true);
                }
            };
            blow(st.fn.affine, fat.affine);
            for (std::size_t j = 0; j < st.fn.sources.size(); ++j)
              blow(st.fn.columns[j], fat.columns[j]);
            for (const auto& term : st.fn.terms) {
              ClassicalFunction::Term nt;
              nt.key_rows = term.key_rows;
              for (const auto& e : term.table) {
                PauliMask pm(lifted.qubits.size());
                blow(e, pm);
                nt.table.push_back(std::move(pm));
              }
              fat.terms.push_back(std::move(nt));
            }
            st.fn = std::move(fat);
          }
          ensure_layers(out, slab + 1);
          out.layers[slab].ops.push_back(std::move(lifted));
          std::size_t d = 1;
          std::size_t dec_max = 0;
          for (auto q : op.qubits)
            dec_max = std::max(dec_max, emit_ec(out, lay, q, slab + d));
          grow(slab + d + dec_max);
          break;
        }
        case OpKind::ClassicalDecode: {
          ensure_layers(out, slab + 1);
          out.layers[slab].ops.push_back(op);
          grow(slab + 1);
          break;
        }
        case OpKind::Wait:
          break;
      }
    }
    if (slab_end == slab) {
      ensure_layers(out, slab + 1);
      slab_end = slab + 1;  // all-wait layer
    }
    slab = slab_end;
  }
  ensure_layers(out, slab);
  return out;
}

}  // namespace

Circuit level_simulate(const Circuit& c, const FtConfig& cfg) {
  Circuit out = c;
  for (std::size_t j = 0; j < cfg.level; ++j) out = sim1(out);
  return out;
}

Circuit concat_enc(std::size_t level) {
  Gadget enc1 = build_gadget(GadgetRole::enc);
  Circuit total = enc1.circuit;
  Circuit enc_j = enc1.circuit;
  for (std::size_t j = 2; j <= level; ++j) {
    enc_j = sim1(enc_j);
    total = compose(total, enc_j);
  }
  return total;
}

Circuit concat_dec(std::size_t level) {
  Gadget dec1 = build_gadget(GadgetRole::dec);
  Circuit dec_j = dec1.circuit;
  Circuit total = dec1.circuit;
  for (std::size_t j = 2; j <= level; ++j) {
    dec_j = sim1(dec_j);
    total = compose(dec_j, total);
  }
  return total;
}

namespace {

// Concatenates b's layers after a's on the same register, reindexing b's
// classical bits.
void append_in_place(Circuit& a, const Circuit& b) {
  std::uint32_t off = a.num_cbits;
  for (const auto& layer : b.layers) {
    Layer l;
    for (const auto& op : layer.ops) {
      Operation g = op;
      if (g.kind == OpKind::MeasureZ || g.kind == OpKind::ClassicalDecode)
        g.out_bit += off;
      if (g.kind == OpKind::ClassicalDecode) {
        g.decode = std::make_shared<BitFn>(*op.decode);
        for (auto& src : g.decode->sources) src += off;
      }
      if (g.kind == OpKind::ControlledPauli) {
        g.cascade = std::make_shared<CorrectionCascade>(*op.cascade);
        for (auto& st : g.cascade->stages) {
          for (auto& src : st.fn.sources) src += off;
          for (auto& f : st.flips) {
            f.bit += off;
            for (auto& src : f.indicator.sources) src += off;
          }
          if (st.is_decode) {
            st.decode_bit += off;
            for (auto& src : st.decode.sources) src += off;
          }
        }
      }
      l.ops.push_back(std::move(g));
    }
    a.layers.push_back(std::move(l));
  }
  a.num_cbits += b.num_cbits;
}

}  // namespace

Circuit build_c_ft(const Circuit& c, std::size_t level) {
  if (level == 0) return c;
  if (level == 1) {
    // Emit the encoding/decoding fringes onto the block register itself so
    // the result stays bilinear-local in one coordinate system.
    Circuit mid = level_simulate(c, {1});
    BlockLayout lay{c.n};
    Circuit ft;
    ft.n = mid.n;
    ft.graph_tag = mid.graph_tag;
    for (auto q : c.inputs) {
      ft.inputs.push_back(lay.data(q, 0));
      emit_enc(ft, lay, q, 0);
    }
    append_in_place(ft, mid);
    Circuit post;
    post.n = mid.n;
    for (auto q : c.outputs) {
      emit_dec(post, lay, q, 0);
      post.outputs.push_back(lay.data(q, 0));
    }
    std::vector<std::uint32_t> outs = post.outputs;
    append_in_place(ft, post);
    ft.outputs = outs;
    return ft;
  }
  // Higher levels compose the level-by-level encoders as separate registers
  // (used for noiseless checks; the routed pipeline runs at L <= 1).
  Circuit mid = level_simulate(c, {level});
  if (!c.inputs.empty()) {
    Circuit enc_all = concat_enc(level);
    for (std::size_t j = 1; j < c.inputs.size(); ++j)
      enc_all = tensor(enc_all, concat_enc(level));
    mid = compose(enc_all, mid);
  }
  if (!c.outputs.empty()) {
    Circuit dec_all = concat_dec(level);
    for (std::size_t j = 1; j < c.outputs.size(); ++j)
      dec_all = tensor(dec_all, concat_dec(level));
    mid = compose(mid, dec_all);
  }
  return mid;
}

}  // namespace qbell
