#include "qbell/circuit.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>

namespace qbell {

namespace {

std::size_t key_index(const std::vector<Bits>& rows,
                      const std::vector<std::uint8_t>& vals,
                      const std::vector<std::uint32_t>& sources) {
  std::size_t idx = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    int bit = 0;
    for (std::size_t j = 0; j < sources.size(); ++j)
      if (rows[r].get(j)) bit ^= vals[sources[j]] & 1;
    idx |= std::size_t(bit) << r;
  }
  return idx;
}

}  // namespace

int BitFn::eval(const std::vector<std::uint8_t>& bit_values) const {
  int out = affine & 1;
  for (std::size_t j = 0; j < sources.size(); ++j)
    if (lin.get(j)) out ^= bit_values[sources[j]] & 1;
  for (const auto& t : terms) out ^= t.table[key_index(t.key_rows, bit_values, sources)] & 1;
  return out;
}

PauliMask ClassicalFunction::eval(const std::vector<std::uint8_t>& bit_values) const {
  PauliMask out = affine;
  for (std::size_t j = 0; j < sources.size(); ++j)
    if (bit_values[sources[j]] & 1) out ^= columns[j];
  for (const auto& t : terms)
    out ^= t.table[key_index(t.key_rows, bit_values, sources)];
  return out;
}

BitFn ClassicalFunction::x_component(std::size_t t) const {
  BitFn out(sources);
  out.affine = affine.x.get(t);
  for (std::size_t j = 0; j < sources.size(); ++j)
    out.lin.set(j, columns[j].x.get(t));
  for (const auto& term : terms) {
    BitFn::Term bt;
    bt.key_rows = term.key_rows;
    bt.table.resize(term.table.size());
    bool nonzero = false;
    for (std::size_t e = 0; e < term.table.size(); ++e) {
      bt.table[e] = term.table[e].x.get(t);
      nonzero |= bt.table[e] != 0;
    }
    if (nonzero) out.terms.push_back(std::move(bt));
  }
  return out;
}

Operation Operation::prep0(std::uint32_t q) {
  Operation op;
  op.kind = OpKind::Prep0;
  op.qubits = {q};
  return op;
}

Operation Operation::measure_z(std::uint32_t q, std::uint32_t bit) {
  Operation op;
  op.kind = OpKind::MeasureZ;
  op.qubits = {q};
  op.out_bit = bit;
  return op;
}

Operation Operation::unitary(Gate g, std::uint32_t q0) {
  assert(!gate_is_two_qubit(g));
  Operation op;
  op.kind = OpKind::Unitary;
  op.gate = g;
  op.qubits = {q0};
  return op;
}

Operation Operation::unitary(Gate g, std::uint32_t q0, std::uint32_t q1) {
  assert(gate_is_two_qubit(g));
  Operation op;
  op.kind = OpKind::Unitary;
  op.gate = g;
  op.qubits = {q0, q1};
  return op;
}

Operation Operation::wait(std::uint32_t q) {
  Operation op;
  op.kind = OpKind::Wait;
  op.qubits = {q};
  return op;
}

Operation Operation::discard(std::uint32_t q) {
  Operation op;
  op.kind = OpKind::Discard;
  op.qubits = {q};
  return op;
}

Operation Operation::controlled_pauli(ClassicalFunction fn,
                                      std::vector<std::uint32_t> targets) {
  assert(fn.num_targets() == targets.size());
  Operation op;
  op.kind = OpKind::ControlledPauli;
  op.qubits = std::move(targets);
  CorrectionStage st;
  st.fn = std::move(fn);
  op.cascade = std::make_shared<CorrectionCascade>();
  op.cascade->stages.push_back(std::move(st));
  return op;
}

Operation Operation::classical_decode(BitFn fn, std::uint32_t bit) {
  Operation op;
  op.kind = OpKind::ClassicalDecode;
  op.decode = std::make_shared<BitFn>(std::move(fn));
  op.out_bit = bit;
  return op;
}

std::size_t Circuit::locations() const {
  std::size_t count = 0;
  for (const auto& layer : layers) {
    std::size_t covered = 0;
    for (const auto& op : layer.ops) {
      switch (op.kind) {
        case OpKind::Unitary:
          covered += op.qubits.size();
          count += 1;
          break;
        case OpKind::Prep0:
        case OpKind::MeasureZ:
        case OpKind::Discard:
          covered += 1;
          count += 1;
          break;
        case OpKind::Wait:
          covered += 1;
          count += 1;
          break;
        case OpKind::ControlledPauli:
          // A classically controlled Pauli of weight w occupies w single-qubit
          // gate locations.
          covered += op.qubits.size();
          count += op.qubits.size();
          break;
        case OpKind::ClassicalDecode:
          break;
      }
    }
    count += n - covered;  // implicit waits
  }
  return count;
}

std::size_t Circuit::gate_count() const {
  std::size_t count = 0;
  for (const auto& layer : layers)
    for (const auto& op : layer.ops)
      if (op.is_quantum() && op.kind != OpKind::Wait) ++count;
  return count;
}

void Circuit::audit() const {
  std::vector<std::uint8_t> written(num_cbits, 0);
  for (std::size_t t = 0; t < layers.size(); ++t) {
    std::vector<std::uint8_t> seen(n, 0);
    std::vector<std::uint32_t> written_this_layer;
    for (const auto& op : layers[t].ops) {
      for (auto q : op.qubits) {
        if (q >= n) throw std::runtime_error("audit: qubit out of range");
        if (seen[q]) throw std::runtime_error("audit: layer not disjoint at layer " +
                                              std::to_string(t));
        seen[q] = 1;
      }
      auto check_sources = [&](const std::vector<std::uint32_t>& srcs) {
        for (auto s : srcs) {
          if (s >= num_cbits) throw std::runtime_error("audit: bit out of range");
          if (!written[s])
            throw std::runtime_error("audit: bit read before write at layer " +
                                     std::to_string(t));
        }
      };
      switch (op.kind) {
        case OpKind::MeasureZ:
        case OpKind::ClassicalDecode:
          if (op.out_bit >= num_cbits)
            throw std::runtime_error("audit: out bit out of range");
          if (written[op.out_bit])
            throw std::runtime_error("audit: bit written twice");
          written_this_layer.push_back(op.out_bit);
          if (op.kind == OpKind::ClassicalDecode) check_sources(op.decode->sources);
          break;
        case OpKind::ControlledPauli: {
          // Decode stages may feed later stages of the same cascade.
          std::set<std::uint32_t> local;
          auto check_cascade_sources = [&](const std::vector<std::uint32_t>& srcs) {
            for (auto s : srcs) {
              if (s >= num_cbits) throw std::runtime_error("audit: bit out of range");
              if (!written[s] && !local.count(s))
                throw std::runtime_error("audit: bit read before write at layer " +
                                         std::to_string(t));
            }
          };
          for (const auto& st : op.cascade->stages) {
            if (st.is_decode) {
              check_cascade_sources(st.decode.sources);
              if (st.decode_bit >= num_cbits)
                throw std::runtime_error("audit: bit out of range");
              if (written[st.decode_bit] || local.count(st.decode_bit))
                throw std::runtime_error("audit: bit written twice");
              local.insert(st.decode_bit);
              written_this_layer.push_back(st.decode_bit);
            } else {
              check_cascade_sources(st.fn.sources);
              for (const auto& f : st.flips) {
                check_cascade_sources(f.indicator.sources);
                if (f.bit >= num_cbits)
                  throw std::runtime_error("audit: bit out of range");
              }
              if (st.fn.num_targets() != op.qubits.size())
                throw std::runtime_error("audit: cpauli target arity mismatch");
            }
          }
          break;
        }
        default:
          break;
      }
    }
    // Sources must come from strictly earlier layers; bits written in this
    // layer become visible afterwards.
    for (auto b : written_this_layer) written[b] = 1;
    if (t == 0) {
      for (const auto& op : layers[t].ops)
        if (op.kind == OpKind::Prep0)
          for (auto in : inputs)
            if (op.qubits[0] == in)
              throw std::runtime_error("audit: input qubit prepared in layer 1");
    }
    if (t + 1 == layers.size()) {
      for (const auto& op : layers[t].ops)
        if (op.kind == OpKind::MeasureZ || op.kind == OpKind::Discard)
          for (auto out : outputs)
            if (op.qubits[0] == out)
              throw std::runtime_error("audit: output qubit consumed in final layer");
    }
  }
}

InteractionGraph InteractionGraph::path(std::uint32_t n) {
  InteractionGraph g;
  g.n = n;
  for (std::uint32_t i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1});
  return g;
}

InteractionGraph InteractionGraph::bilinear(std::uint32_t r) {
  InteractionGraph g;
  g.n = 2 * r;
  for (const auto& cls : bilinear_coloring(r))
    for (const auto& e : cls) g.edges.push_back(e);
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

InteractionGraph InteractionGraph::grid(std::uint32_t lx, std::uint32_t ly) {
  InteractionGraph g;
  g.n = lx * ly;
  for (std::uint32_t y = 0; y < ly; ++y) {
    for (std::uint32_t x = 0; x < lx; ++x) {
      std::uint32_t v = y * lx + x;
      if (x + 1 < lx) g.edges.push_back({v, v + 1});
      if (y + 1 < ly) g.edges.push_back({v, v + lx});
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

InteractionGraph InteractionGraph::complete(std::uint32_t n) {
  InteractionGraph g;
  g.n = n;
  for (std::uint32_t a = 0; a < n; ++a)
    for (std::uint32_t b = a + 1; b < n; ++b) g.edges.push_back({a, b});
  return g;
}

bool InteractionGraph::has_edge(std::uint32_t a, std::uint32_t b) const {
  if (a > b) std::swap(a, b);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(a, b));
}

void InteractionGraph::add_edge(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  auto e = std::make_pair(a, b);
  auto it = std::lower_bound(edges.begin(), edges.end(), e);
  if (it == edges.end() || *it != e) edges.insert(it, e);
}

std::uint32_t InteractionGraph::max_degree() const {
  std::vector<std::uint32_t> deg(n, 0);
  for (const auto& e : edges) {
    ++deg[e.first];
    ++deg[e.second];
  }
  std::uint32_t m = 0;
  for (auto d : deg) m = std::max(m, d);
  return m;
}

std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>>
InteractionGraph::edge_coloring() const {
  // Greedy: assign each edge the smallest color free at both endpoints.
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> classes;
  std::vector<std::set<std::uint32_t>> used(n);
  for (const auto& e : edges) {
    std::uint32_t c = 0;
    while (used[e.first].count(c) || used[e.second].count(c)) ++c;
    if (c >= classes.size()) classes.resize(c + 1);
    classes[c].push_back(e);
    used[e.first].insert(c);
    used[e.second].insert(c);
  }
  return classes;
}

std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> bilinear_coloring(
    std::uint32_t r) {
  // Ladder order: column k holds vertices (2k, 2k+1). In the paper's
  // 1-indexed numbering E1 = {(2a-1,2a)}, E2 = {(4a-3,4a-1),(4a-2,4a)},
  // E3 = {(4a-1,4a+1),(4a,4a+2)}; below is the same partition 0-indexed.
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> cls(3);
  for (std::uint32_t k = 0; k < r; ++k) cls[0].push_back({2 * k, 2 * k + 1});
  for (std::uint32_t a = 0; 2 * a + 1 < r; ++a) {
    // rail edges between columns 2a and 2a+1
    cls[1].push_back({4 * a, 4 * a + 2});
    cls[1].push_back({4 * a + 1, 4 * a + 3});
  }
  for (std::uint32_t a = 0; 2 * a + 2 < r; ++a) {
    // rail edges between columns 2a+1 and 2a+2
    cls[2].push_back({4 * a + 2, 4 * a + 4});
    cls[2].push_back({4 * a + 3, 4 * a + 5});
  }
  return cls;
}

bool Rectangle::contains_wire(const WireCoord& wc) const {
  if (wc.t < t || wc.t > t + delta) return false;
  return std::find(qubits.begin(), qubits.end(), wc.q) != qubits.end();
}

bool Rectangle::interior_wire(const WireCoord& wc) const {
  if (wc.t <= t || wc.t >= t + delta) return false;
  return std::find(qubits.begin(), qubits.end(), wc.q) != qubits.end();
}

LocalityReport validate_locality(const Circuit& c, const InteractionGraph& g) {
  LocalityReport rep;
  if (c.n != g.n) {
    rep.violations.push_back({0, c.n, g.n});
    return rep;
  }
  for (std::size_t t = 0; t < c.layers.size(); ++t) {
    for (const auto& op : c.layers[t].ops) {
      if (op.kind == OpKind::Unitary && op.qubits.size() == 2) {
        if (!g.has_edge(op.qubits[0], op.qubits[1]))
          rep.violations.push_back({t, op.qubits[0], op.qubits[1]});
      }
    }
  }
  return rep;
}

namespace {

Operation remap_op(const Operation& op, const std::vector<std::uint32_t>& qmap,
                   std::uint32_t bit_offset) {
  Operation out = op;
  for (auto& q : out.qubits) q = qmap[q];
  if (op.kind == OpKind::MeasureZ || op.kind == OpKind::ClassicalDecode)
    out.out_bit += bit_offset;
  if (op.kind == OpKind::ClassicalDecode) {
    out.decode = std::make_shared<BitFn>(*op.decode);
    for (auto& s : out.decode->sources) s += bit_offset;
  }
  if (op.kind == OpKind::ControlledPauli) {
    out.cascade = std::make_shared<CorrectionCascade>(*op.cascade);
    for (auto& st : out.cascade->stages) {
      for (auto& s : st.fn.sources) s += bit_offset;
      for (auto& f : st.flips) {
        f.bit += bit_offset;
        for (auto& s : f.indicator.sources) s += bit_offset;
      }
      if (st.is_decode) {
        st.decode_bit += bit_offset;
        for (auto& s : st.decode.sources) s += bit_offset;
      }
    }
  }
  return out;
}

}  // namespace

Circuit compose(const Circuit& a, const Circuit& b) {
  if (a.outputs.size() != b.inputs.size())
    throw std::invalid_argument("compose: arity mismatch");
  Circuit out;
  std::vector<std::uint32_t> bmap(b.n, UINT32_MAX);
  for (std::size_t j = 0; j < b.inputs.size(); ++j) bmap[b.inputs[j]] = a.outputs[j];
  std::uint32_t next = a.n;
  for (std::uint32_t q = 0; q < b.n; ++q)
    if (bmap[q] == UINT32_MAX) bmap[q] = next++;
  out.n = next;
  out.num_cbits = a.num_cbits + b.num_cbits;
  out.inputs = a.inputs;
  out.outputs.reserve(b.outputs.size());
  for (auto q : b.outputs) out.outputs.push_back(bmap[q]);
  out.layers.reserve(a.layers.size() + b.layers.size());
  std::vector<std::uint32_t> idmap(a.n);
  for (std::uint32_t q = 0; q < a.n; ++q) idmap[q] = q;
  for (const auto& layer : a.layers) {
    Layer l;
    for (const auto& op : layer.ops) l.ops.push_back(remap_op(op, idmap, 0));
    out.layers.push_back(std::move(l));
  }
  for (const auto& layer : b.layers) {
    Layer l;
    for (const auto& op : layer.ops) l.ops.push_back(remap_op(op, bmap, a.num_cbits));
    out.layers.push_back(std::move(l));
  }
  return out;
}

Circuit tensor(const Circuit& a, const Circuit& b) {
  Circuit out;
  out.n = a.n + b.n;
  out.num_cbits = a.num_cbits + b.num_cbits;
  out.inputs = a.inputs;
  out.outputs = a.outputs;
  std::vector<std::uint32_t> bmap(b.n);
  for (std::uint32_t q = 0; q < b.n; ++q) bmap[q] = a.n + q;
  for (auto q : b.inputs) out.inputs.push_back(a.n + q);
  for (auto q : b.outputs) out.outputs.push_back(a.n + q);
  std::size_t depth = std::max(a.layers.size(), b.layers.size());
  std::vector<std::uint32_t> idmap(a.n);
  for (std::uint32_t q = 0; q < a.n; ++q) idmap[q] = q;
  for (std::size_t t = 0; t < depth; ++t) {
    Layer l;
    if (t < a.layers.size())
      for (const auto& op : a.layers[t].ops) l.ops.push_back(remap_op(op, idmap, 0));
    if (t < b.layers.size())
      for (const auto& op : b.layers[t].ops)
        l.ops.push_back(remap_op(op, bmap, a.num_cbits));
    out.layers.push_back(std::move(l));
  }
  return out;
}

bool rectangle_valid(const Circuit& c, const Rectangle& r, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (r.t + r.delta >= c.layers.size() + 1 && r.delta > 0) {
    // Wires extend to t+delta which indexes a wire after layer t+delta; the
    // last usable wire row is depth(). Operations checked live in layers
    // (t, t+delta].
    if (r.t + r.delta > c.layers.size()) return fail("rectangle exceeds depth");
  }
  std::vector<std::uint8_t> inside(c.n, 0);
  for (auto q : r.qubits) inside[q] = 1;
  for (std::size_t t = r.t + 1; t <= r.t + r.delta && t <= c.layers.size(); ++t) {
    for (const auto& op : c.layers[t - 1].ops) {
      if (!op.is_quantum()) continue;
      bool any_in = false, any_out = false;
      for (auto q : op.qubits) (inside[q] ? any_in : any_out) = true;
      if (any_in && any_out) return fail("two-qubit op crosses boundary");
      if (any_in && r.flavor == RectFlavor::unitary && op.kind != OpKind::Unitary &&
          op.kind != OpKind::Wait)
        return fail("non-unitary op inside unitary rectangle");
    }
  }
  return true;
}

InteractionGraph used_interaction_graph(const Circuit& c) {
  InteractionGraph g;
  g.n = c.n;
  std::set<std::pair<std::uint32_t, std::uint32_t>> es;
  for (const auto& layer : c.layers)
    for (const auto& op : layer.ops)
      if (op.kind == OpKind::Unitary && op.qubits.size() == 2) {
        auto a = op.qubits[0], b = op.qubits[1];
        if (a > b) std::swap(a, b);
        es.insert({a, b});
      }
  g.edges.assign(es.begin(), es.end());
  return g;
}

}  // namespace qbell
