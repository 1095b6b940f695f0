#include "qbell/protocol.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qbell/circuit_io.hpp"

namespace qbell {

double thermal_noise_strength(const ThermalConfig& t) {
  if (!(t.beta > 0)) throw std::invalid_argument("thermal_noise_strength: beta <= 0");
  return (1.0 - std::tanh(t.beta)) / 2.0;
}

Circuit build_c_prep() {
  Circuit c;
  c.n = 2;
  c.outputs = {0, 1};
  c.add_layer();
  c.push(Operation::prep0(0));
  c.push(Operation::prep0(1));
  c.add_layer();
  c.push(Operation::unitary(Gate::H, 0));
  c.add_layer();
  c.push(Operation::unitary(Gate::CNOT, 0, 1));
  return c;
}

Circuit build_c_wait(std::size_t depth, std::uint32_t n) {
  Circuit c;
  c.n = n;
  for (std::uint32_t q = 0; q < n; ++q) {
    c.inputs.push_back(q);
    c.outputs.push_back(q);
  }
  for (std::size_t t = 0; t < depth; ++t) c.add_layer();
  return c;
}

PipelineResult build_c_1d_res(const Circuit& c, std::size_t level) {
  PipelineResult out;
  Circuit ft = build_c_ft(c, level);
  Routing routing;
  if (level >= 1) {
    std::uint32_t cols = ft.n / 2;
    if (cols % 2) {
      // pad to an even column count for the bilinear-to-path reduction
      Circuit pad;
      pad.n = 2;
      ft = tensor(ft, pad);
      cols += 1;
    }
    routing = path_bilinear_routing(cols);
    out.cert_chain.push_back("geometry:3,1");
  } else {
    InteractionGraph used = used_interaction_graph(ft);
    routing = identity_routing(used, InteractionGraph::path(ft.n));
    out.cert_chain.push_back("geometry:" + std::to_string(routing.colors.size()) +
                             ",0");
  }
  Circuit routed;
  {
    auto cg = change_geometry(ft, routing);
    routed = std::move(cg.circuit);
  }
  Circuit postponed;
  {
    auto pp = postpone_adaptive_paulis(routed);
    postponed = std::move(pp.circuit);
    out.cert_chain.push_back("postpone");
  }
  Circuit teleported;
  {
    auto ts = teleport_substitute(postponed);
    teleported = std::move(ts.circuit);
    out.cert_chain.push_back("inflate:9");
    out.cert_chain.push_back("teleport");
  }
  {
    auto pp = postpone_adaptive_paulis(teleported);
    out.circuit = std::move(pp.circuit);
    out.cert_chain.push_back("postpone");
  }
  out.circuit.graph_tag = "path";
  return out;
}

namespace {

// Space-time unfolding walker. Swaps become pointer moves; each
// (re)initialization starts a fresh grid qubit; layers repack as soon as
// their operands and classical sources allow.
struct Walker {
  const Circuit& c;
  bool materialize;

  struct Node {
    std::uint32_t col = 0;        // 1D column at (re)birth
    std::size_t birth_1d = 0;     // 1D layer of the (re)initialization
    std::size_t busy = 0;         // next free 2D layer
    std::size_t op_count = 0;     // ops applied (the prep included)
    std::int64_t partner = -1;    // first two-qubit partner node
    bool is_input = false;
    std::int64_t x = -1, y = -1;
  };
  std::vector<Node> nodes;
  std::vector<std::int64_t> cur;        // column -> node id
  std::vector<std::size_t> bit_ready;   // bit -> 2D layer it becomes readable after
  std::vector<Layer> layers;
  std::size_t depth = 0;

  explicit Walker(const Circuit& circuit, bool mat)
      : c(circuit), materialize(mat), cur(circuit.n, -1),
        bit_ready(circuit.num_cbits, 0) {}

  std::int64_t new_node(std::uint32_t col, std::size_t t1d, bool input) {
    nodes.push_back({col, t1d, 0, 0, -1, input, -1, -1});
    return std::int64_t(nodes.size()) - 1;
  }

  void emit(std::size_t layer, Operation op) {
    depth = std::max(depth, layer + 1);
    if (!materialize) return;
    if (layers.size() <= layer) layers.resize(layer + 1);
    layers[layer].ops.push_back(std::move(op));
  }

  void walk() {
    for (auto q : c.inputs) {
      cur[q] = new_node(q, 0, true);
      nodes[cur[q]].op_count = 1;  // occupied from the start
    }
    for (std::size_t t = 0; t < c.layers.size(); ++t) {
      for (const auto& op : c.layers[t].ops) {
        switch (op.kind) {
          case OpKind::Unitary: {
            if (op.gate == Gate::SWAP) {
              std::swap(cur[op.qubits[0]], cur[op.qubits[1]]);
              break;
            }
            if (op.qubits.size() == 2) {
              std::int64_t a = require(op.qubits[0], t);
              std::int64_t b = require(op.qubits[1], t);
              std::size_t layer = std::max(nodes[a].busy, nodes[b].busy);
              Operation g = op;
              g.qubits = {std::uint32_t(a), std::uint32_t(b)};
              emit(layer, std::move(g));
              nodes[a].busy = nodes[b].busy = layer + 1;
              nodes[a].op_count++;
              nodes[b].op_count++;
              if (nodes[a].partner < 0) nodes[a].partner = b;
              if (nodes[b].partner < 0) nodes[b].partner = a;
            } else {
              std::int64_t a = require(op.qubits[0], t);
              std::size_t layer = nodes[a].busy;
              Operation g = op;
              g.qubits = {std::uint32_t(a)};
              emit(layer, std::move(g));
              nodes[a].busy = layer + 1;
              nodes[a].op_count++;
            }
            break;
          }
          case OpKind::Prep0: {
            std::uint32_t col = op.qubits[0];
            std::int64_t existing = cur[col];
            if (existing >= 0 && nodes[existing].op_count <= 1 &&
                !nodes[existing].is_input) {
              // Fresh unused qubit: relabel instead of spawning another.
              nodes[existing].col = col;
              nodes[existing].birth_1d = t;
              break;
            }
            std::int64_t id = new_node(col, t, false);
            cur[col] = id;
            Operation g = Operation::prep0(std::uint32_t(id));
            emit(0, std::move(g));
            nodes[id].busy = 1;
            nodes[id].op_count = 1;
            break;
          }
          case OpKind::MeasureZ:
          case OpKind::Discard: {
            std::int64_t a = require(op.qubits[0], t);
            std::size_t layer = nodes[a].busy;
            Operation g = op;
            g.qubits = {std::uint32_t(a)};
            emit(layer, std::move(g));
            nodes[a].busy = layer + 1;
            nodes[a].op_count++;
            if (op.kind == OpKind::MeasureZ) bit_ready[op.out_bit] = layer + 1;
            cur[op.qubits[0]] = -1;
            break;
          }
          case OpKind::ControlledPauli: {
            std::size_t layer = 0;
            std::vector<std::uint32_t> tgt;
            for (auto q : op.qubits) {
              std::int64_t a = require(q, t);
              layer = std::max(layer, nodes[a].busy);
              tgt.push_back(std::uint32_t(a));
            }
            for (const auto& st : op.cascade->stages) {
              if (st.is_decode) {
                for (auto s : st.decode.sources) layer = std::max(layer, bit_ready[s]);
              } else {
                for (auto s : st.fn.sources) layer = std::max(layer, bit_ready[s]);
                for (const auto& f : st.flips) {
                  layer = std::max(layer, bit_ready[f.bit]);
                  for (auto s : f.indicator.sources)
                    layer = std::max(layer, bit_ready[s]);
                }
              }
            }
            Operation g = op;
            g.qubits = tgt;
            emit(layer, std::move(g));
            for (auto a : tgt) {
              nodes[a].busy = layer + 1;
              nodes[a].op_count++;
            }
            for (const auto& st : op.cascade->stages)
              if (st.is_decode) bit_ready[st.decode_bit] = layer + 1;
            break;
          }
          case OpKind::ClassicalDecode: {
            std::size_t layer = 0;
            for (auto s : op.decode->sources) layer = std::max(layer, bit_ready[s]);
            emit(layer, op);
            bit_ready[op.out_bit] = layer + 1;
            depth = std::max(depth, layer + 1);
            break;
          }
          case OpKind::Wait:
            break;
        }
      }
    }
  }

  std::int64_t require(std::uint32_t col, std::size_t t) {
    if (cur[col] < 0) {
      // operating on an unprepared qubit: treat as implicit |0> start
      cur[col] = new_node(col, t, false);
      Operation g = Operation::prep0(std::uint32_t(cur[col]));
      emit(0, std::move(g));
      nodes[cur[col]].busy = 1;
      nodes[cur[col]].op_count = 1;
    }
    return cur[col];
  }

  // Assign grid coordinates: columns collapse to teleport slots, vertical
  // position follows the slab of (re)birth.
  void place() {
    auto slot_of = [](std::uint32_t col) { return (col + 2) / 5; };
    std::int64_t ymax = 0;
    for (auto& nd : nodes) {
      std::uint32_t m = nd.col % 5;
      std::size_t slab = nd.birth_1d / 10;
      if (m == 1 || m == 4) {
        nd.x = slot_of(nd.col);
        nd.y = std::int64_t(2 * slab + 1);
      } else if (m == 2 || m == 3) {
        nd.x = slot_of(nd.col);
        nd.y = std::int64_t(2 * slab + 2);
      }
      if (nd.y > ymax) ymax = nd.y;
    }
    // Data-column nodes sit directly below their first partner.
    for (auto& nd : nodes) {
      if (nd.x >= 0) continue;
      nd.x = slot_of(nd.col);
      if (nd.partner >= 0 && nodes[nd.partner].y >= 0)
        nd.y = nodes[nd.partner].y - 1;
    }
    // Park the rest (and resolve collisions) on free rows per column.
    std::map<std::int64_t, std::set<std::int64_t>> used;
    for (auto& nd : nodes)
      if (nd.y >= 0) {
        auto& col_used = used[nd.x];
        while (col_used.count(nd.y)) ++nd.y;
        col_used.insert(nd.y);
        if (nd.y > ymax) ymax = nd.y;
      }
    for (auto& nd : nodes) {
      if (nd.y >= 0) continue;
      auto& col_used = used[nd.x];
      std::int64_t y = 0;
      while (col_used.count(y)) ++y;
      nd.y = y;
      col_used.insert(y);
      if (nd.y > ymax) ymax = nd.y;
    }
  }
};

}  // namespace

Unfolded unfold_to_2d(const Circuit& c1d_res) {
  Walker w(c1d_res, true);
  w.walk();
  w.place();
  Unfolded out;
  out.nodes = w.nodes.size();
  Circuit& c2 = out.circuit;
  c2.n = std::uint32_t(w.nodes.size());
  c2.num_cbits = c1d_res.num_cbits;
  c2.layers = std::move(w.layers);
  c2.graph_tag = "grid";
  for (auto q : c1d_res.inputs) {
    // input columns hold input nodes from layer 0
    (void)q;
  }
  for (std::size_t id = 0; id < w.nodes.size(); ++id)
    if (w.nodes[id].is_input) c2.inputs.push_back(std::uint32_t(id));
  for (auto q : c1d_res.outputs) c2.outputs.push_back(std::uint32_t(w.cur[q]));
  GridLayout& lay = out.layout;
  lay.lx = std::max<std::uint32_t>(c1d_res.n, 1);
  lay.ly = std::uint32_t(std::max<std::size_t>(c1d_res.depth(), 1));
  lay.placement.resize(w.nodes.size());
  for (std::size_t id = 0; id < w.nodes.size(); ++id) {
    lay.placement[id] = {std::uint32_t(w.nodes[id].x), std::uint32_t(w.nodes[id].y),
                         'b'};
    if (w.nodes[id].is_input) lay.placement[id].role = 'i';
  }
  for (auto q : c2.outputs) lay.placement[q].role = 'o';
  if (!c2.outputs.empty()) {
    lay.q1 = c2.outputs[0];
    lay.q2 = c2.outputs.size() > 1 ? c2.outputs[1] : c2.outputs[0];
  }
  return out;
}

UnfoldStats unfold_stats(const Circuit& c1d_res) {
  Walker w(c1d_res, false);
  w.walk();
  w.place();
  UnfoldStats st;
  st.lx = std::max<std::uint32_t>(c1d_res.n, 1);
  st.ly = std::uint32_t(std::max<std::size_t>(c1d_res.depth(), 1));
  st.depth = w.depth;
  st.nodes = w.nodes.size();
  if (!c1d_res.outputs.empty()) {
    auto a = w.cur[c1d_res.outputs[0]];
    st.q1_x = std::uint32_t(w.nodes[a].x);
    st.q1_y = std::uint32_t(w.nodes[a].y);
    auto b = c1d_res.outputs.size() > 1 ? w.cur[c1d_res.outputs[1]] : a;
    st.q2_x = std::uint32_t(w.nodes[b].x);
    st.q2_y = std::uint32_t(w.nodes[b].y);
    auto d = [](std::uint32_t u, std::uint32_t v) { return u > v ? u - v : v - u; };
    st.q1_q2_distance = d(st.q1_x, st.q2_x) + d(st.q1_y, st.q2_y);
  }
  return st;
}

std::pair<char, char> CorrectionDecoder::eval(
    const std::vector<std::uint8_t>& bits) const {
  std::vector<std::uint8_t> adj = bits;
  PauliMask v = eval_cascade(cascade, adj);
  auto letter_at = [&](std::uint32_t q) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (targets[i] != q) continue;
      bool x = v.x.get(i), z = v.z.get(i);
      return x && z ? 'Y' : (x ? 'X' : (z ? 'Z' : 'I'));
    }
    return 'I';
  };
  return {letter_at(q1), letter_at(q2)};
}

std::string CorrectionDecoder::serialize() const {
  // Reuse the circuit text format: one cpauli line carries the cascade.
  Circuit shell;
  shell.n = targets.empty() ? 1 : *std::max_element(targets.begin(), targets.end()) + 1;
  std::uint32_t maxbit = 0;
  auto see = [&](const std::vector<std::uint32_t>& ss) {
    for (auto s : ss) maxbit = std::max(maxbit, s + 1);
  };
  for (const auto& stc : cascade.stages) {
    if (stc.is_decode) {
      see(stc.decode.sources);
      maxbit = std::max(maxbit, stc.decode_bit + 1);
    } else {
      see(stc.fn.sources);
      for (const auto& f : stc.flips) {
        see(f.indicator.sources);
        maxbit = std::max(maxbit, f.bit + 1);
      }
    }
  }
  shell.num_cbits = maxbit;
  shell.add_layer();
  Operation op;
  op.kind = OpKind::ControlledPauli;
  op.qubits = targets;
  op.cascade = std::make_shared<CorrectionCascade>(cascade);
  shell.layers[0].ops.push_back(std::move(op));
  std::ostringstream os;
  os << "# decoder: q1=" << q1 << " q2=" << q2 << "\n";
  os << qbell::serialize(shell);
  return os.str();
}

std::string serialize_decoder(const CorrectionDecoder& dec) { return dec.serialize(); }

std::string GridLayout::to_csv() const {
  std::ostringstream os;
  os << "qubit,x,y,role\n";
  for (std::size_t q = 0; q < placement.size(); ++q)
    os << q << "," << placement[q].x << "," << placement[q].y << ","
       << placement[q].role << "\n";
  return os.str();
}

BellArtifacts build_c_bell(const ProtocolConfig& cfg) {
  if (cfg.distance < 3) throw std::invalid_argument("build_c_bell: R must be >= 3");
  BellArtifacts art;
  Circuit logical;
  if (cfg.variant == Variant::bell_strip) {
    logical.n = 1;
    logical.inputs = {0};
    logical.outputs = {0};
    for (std::uint32_t t = 0; t < cfg.distance; ++t) {
      logical.add_layer();
      logical.push(Operation::unitary(Gate::I, 0));
    }
  } else {
    logical = build_c_prep();
  }
  PipelineResult pipe = build_c_1d_res(logical, cfg.level);
  art.cert_chain = pipe.cert_chain;
  art.lifespan = qubit_lifespan(pipe.circuit);
  art.stats = unfold_stats(pipe.circuit);

  if (cfg.variant == Variant::bell_strip) {
    Circuit wait = build_c_wait(pipe.circuit.depth());
    art.exec = compose(build_c_prep(), tensor(pipe.circuit, wait));
  } else {
    art.exec = pipe.circuit;
  }
  art.q1 = art.exec.outputs.at(0);
  art.q2 = art.exec.outputs.at(1);

  // Extract the decoder from the final adaptive layer.
  const Operation* final_corr = nullptr;
  if (!art.exec.layers.empty())
    for (const auto& op : art.exec.layers.back().ops)
      if (op.kind == OpKind::ControlledPauli) final_corr = &op;
  if (final_corr) {
    art.decoder.cascade = *final_corr->cascade;
    art.decoder.targets = final_corr->qubits;
  }
  art.decoder.q1 = art.q1;
  art.decoder.q2 = art.q2;

  // Grid layout: unfold the 1D implementation; for the strip variant, shift
  // everything up one row and put the idling partner under the input slice.
  Unfolded unf;
  bool small_enough = pipe.circuit.depth() * std::size_t(pipe.circuit.n) < 6000000;
  if (small_enough) {
    unf = unfold_to_2d(pipe.circuit);
    art.layout = unf.layout;
  } else {
    art.layout.lx = pipe.circuit.n;
    art.layout.ly = std::uint32_t(pipe.circuit.depth());
  }
  if (cfg.variant == Variant::bell_strip && small_enough) {
    for (auto& cell : art.layout.placement) cell.y += 1;
    art.layout.ly += 1;
    GridLayout::Cell q2cell;
    std::uint32_t in_node = unf.circuit.inputs.empty() ? 0 : unf.circuit.inputs[0];
    q2cell.x = art.layout.placement[in_node].x;
    q2cell.y = 0;
    q2cell.role = 'w';
    art.layout.placement.push_back(q2cell);
    art.layout.q2 = std::uint32_t(art.layout.placement.size() - 1);
    art.layout.q1 = unf.layout.q1;
    art.layout.placement[art.layout.q1].role = 'o';
    // stats gain the same shift
    art.stats.q1_y += 1;
    art.stats.q2_x = q2cell.x;
    art.stats.q2_y = 0;
    auto d = [](std::uint32_t u, std::uint32_t v) { return u > v ? u - v : v - u; };
    art.stats.q1_q2_distance =
        d(art.stats.q1_x, art.stats.q2_x) + d(art.stats.q1_y, art.stats.q2_y);
    art.stats.ly += 1;
  } else if (cfg.variant == Variant::bell_strip) {
    // structural-only path: stats q2 = under the input
    Walker w(pipe.circuit, false);
    w.walk();
    w.place();
    std::uint32_t in_col = pipe.circuit.inputs.empty() ? 0 : pipe.circuit.inputs[0];
    art.stats.q2_x = (in_col + 2) / 5;
    art.stats.q2_y = 0;
    art.stats.q1_y += 1;
    auto d = [](std::uint32_t u, std::uint32_t v) { return u > v ? u - v : v - u; };
    art.stats.q1_q2_distance =
        d(art.stats.q1_x, art.stats.q2_x) + d(art.stats.q1_y, art.stats.q2_y);
    art.stats.ly += 1;
  }
  return art;
}

TrialResult run_protocol_trial(const ProtocolConfig& cfg, const BellArtifacts& art,
                               std::uint64_t trial_index) {
  Rng frng = make_rng(cfg.seed, trial_index, 0);
  Rng orng = make_rng(cfg.seed, trial_index, 1);
  FaultPattern f = sample_noise(art.exec, cfg.noise, frng);
  RunOptions ro;
  ro.skip_final_adaptive = true;
  auto res = run(art.exec, f, orng, ro);
  auto [p1, p2] = art.decoder.eval(res.record.bits);
  auto s1 = res.slot_of[art.q1];
  auto s2 = res.slot_of[art.q2];
  auto apply_letter = [&](std::size_t slot, char l) {
    if (l == 'X' || l == 'Y') res.state.apply(Gate::X, slot);
    if (l == 'Z' || l == 'Y') res.state.apply(Gate::Z, slot);
  };
  apply_letter(s1, p1);
  apply_letter(s2, p2);
  TrialResult tr;
  tr.success = res.state.bell_status(s1, s2) == BellStatus::bell;
  tr.fault_count = f.size();
  tr.digest = res.record.digest();
  tr.corr_q1 = p1;
  tr.corr_q2 = p2;
  return tr;
}

TrialResult run_thermal_trial(const ProtocolConfig& cfg, const BellArtifacts& art,
                              double beta, std::uint64_t trial_index) {
  double p = thermal_noise_strength({beta});
  // Every (re)initialization wire of the executable circuit: X there with
  // probability p is the U-conjugated stabilizer-flip noise of the Gibbs
  // state pushed back through the preparation unitary.
  std::vector<WireCoord> wires;
  for (std::uint32_t t = 0; t < art.exec.depth(); ++t)
    for (const auto& op : art.exec.layers[t].ops)
      if (op.kind == OpKind::Prep0) wires.push_back({t, op.qubits[0]});
  Rng frng = make_rng(cfg.seed, trial_index, 2);
  FaultPattern f = sample_noise_on_wires(wires, NoiseSpec::xz(p, 0.0), frng);
  Rng orng = make_rng(cfg.seed, trial_index, 3);
  RunOptions ro;
  ro.skip_final_adaptive = true;
  auto res = run(art.exec, f, orng, ro);
  auto [p1, p2] = art.decoder.eval(res.record.bits);
  auto s1 = res.slot_of[art.q1];
  auto s2 = res.slot_of[art.q2];
  auto apply_letter = [&](std::size_t slot, char l) {
    if (l == 'X' || l == 'Y') res.state.apply(Gate::X, slot);
    if (l == 'Z' || l == 'Y') res.state.apply(Gate::Z, slot);
  };
  apply_letter(s1, p1);
  apply_letter(s2, p2);
  TrialResult tr;
  tr.success = res.state.bell_status(s1, s2) == BellStatus::bell;
  tr.fault_count = f.size();
  tr.digest = res.record.digest();
  tr.corr_q1 = p1;
  tr.corr_q2 = p2;
  return tr;
}

}  // namespace qbell
