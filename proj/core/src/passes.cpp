#include "qbell/passes.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>
#include <stdexcept>

namespace qbell {

namespace {

// Phase-free conjugation of one (x, z) mask pair through a gate acting on
// positions p0 (and p1) of the mask.
void conj_mask(PauliMask& m, Gate g, std::size_t p0, std::size_t p1) {
  bool x0 = m.x.get(p0), z0 = m.z.get(p0);
  switch (g) {
    case Gate::I:
    case Gate::X:
    case Gate::Y:
    case Gate::Z:
      break;
    case Gate::H:
      m.x.set(p0, z0);
      m.z.set(p0, x0);
      break;
    case Gate::S:
    case Gate::SDG:
      m.z.set(p0, z0 ^ x0);
      break;
    case Gate::CNOT:
      m.x.set(p1, m.x.get(p1) ^ x0);
      m.z.set(p0, z0 ^ m.z.get(p1));
      break;
    case Gate::SWAP: {
      bool x1 = m.x.get(p1), z1 = m.z.get(p1);
      m.x.set(p0, x1);
      m.z.set(p0, z1);
      m.x.set(p1, x0);
      m.z.set(p1, z0);
      break;
    }
  }
}

// A correction in flight during postponement: masks over an explicit target
// list that can grow under conjugation.
struct PendingFn {
  std::vector<std::uint32_t> targets;
  ClassicalFunction fn;
  std::vector<CorrectionStage::Flip> flips;

  std::size_t pos_of(std::uint32_t q) const {
    for (std::size_t i = 0; i < targets.size(); ++i)
      if (targets[i] == q) return i;
    return SIZE_MAX;
  }

  template <typename F>
  void for_each_mask(F&& f) {
    f(fn.affine);
    for (auto& col : fn.columns) f(col);
    for (auto& term : fn.terms)
      for (auto& e : term.table) f(e);
  }

  std::size_t ensure(std::uint32_t q) {
    std::size_t p = pos_of(q);
    if (p != SIZE_MAX) return p;
    targets.push_back(q);
    std::size_t nt = targets.size();
    for_each_mask([&](PauliMask& m) {
      m.x.resize(nt);
      m.z.resize(nt);
    });
    return nt - 1;
  }

  void conj_gate(Gate g, std::uint32_t q0, std::uint32_t q1) {
    bool two = gate_is_two_qubit(g);
    if (!two) {
      std::size_t p0 = pos_of(q0);
      if (p0 == SIZE_MAX) return;
      for_each_mask([&](PauliMask& m) { conj_mask(m, g, p0, SIZE_MAX); });
      return;
    }
    if (pos_of(q0) == SIZE_MAX && pos_of(q1) == SIZE_MAX) return;
    std::size_t p0 = ensure(q0);
    std::size_t p1 = ensure(q1);
    for_each_mask([&](PauliMask& m) { conj_mask(m, g, p0, p1); });
  }

  void drop_component(std::uint32_t q, bool drop_x, bool drop_z) {
    std::size_t p = pos_of(q);
    if (p == SIZE_MAX) return;
    for_each_mask([&](PauliMask& m) {
      if (drop_x) m.x.set(p, false);
      if (drop_z) m.z.set(p, false);
    });
  }

  bool x_nonzero(std::uint32_t q) const {
    std::size_t p = pos_of(q);
    if (p == SIZE_MAX) return false;
    if (fn.affine.x.get(p)) return true;
    for (const auto& col : fn.columns)
      if (col.x.get(p)) return true;
    for (const auto& term : fn.terms)
      for (const auto& e : term.table)
        if (e.x.get(p)) return true;
    return false;
  }

  void prune() {
    std::vector<std::size_t> keep;
    for (std::size_t p = 0; p < targets.size(); ++p) {
      bool used = fn.affine.x.get(p) || fn.affine.z.get(p);
      for (const auto& col : fn.columns)
        used = used || col.x.get(p) || col.z.get(p);
      for (const auto& term : fn.terms)
        for (const auto& e : term.table) used = used || e.x.get(p) || e.z.get(p);
      if (used) keep.push_back(p);
    }
    if (keep.size() == targets.size()) return;
    std::vector<std::uint32_t> nt;
    for (auto p : keep) nt.push_back(targets[p]);
    for_each_mask([&](PauliMask& m) {
      PauliMask nm(keep.size());
      for (std::size_t i = 0; i < keep.size(); ++i) {
        nm.x.set(i, m.x.get(keep[i]));
        nm.z.set(i, m.z.get(keep[i]));
      }
      m = std::move(nm);
    });
    targets = std::move(nt);
  }
};

// Re-embeds a mask over `from` targets into positions of `to` targets.
PauliMask embed_mask(const PauliMask& m, const std::vector<std::uint32_t>& from,
                     const std::vector<std::size_t>& pos_in_to,
                     std::size_t to_size) {
  PauliMask out(to_size);
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (m.x.get(i)) out.x.set(pos_in_to[i], true);
    if (m.z.get(i)) out.z.set(pos_in_to[i], true);
  }
  return out;
}

}  // namespace

PassResult postpone_adaptive_paulis(const Circuit& c) {
  PassResult res;
  Circuit out = c;
  struct Item {
    std::size_t layer;
    Operation op;
  };
  std::vector<Item> items;
  for (std::size_t t = 0; t < out.layers.size(); ++t) {
    auto& ops = out.layers[t].ops;
    for (auto it = ops.begin(); it != ops.end();) {
      if (it->kind == OpKind::ControlledPauli || it->kind == OpKind::ClassicalDecode) {
        items.push_back({t, std::move(*it)});
        it = ops.erase(it);
      } else {
        ++it;
      }
    }
  }
  struct DoneStage {
    bool is_decode = false;
    BitFn decode;
    std::uint32_t decode_bit = 0;
    PendingFn pf;
  };
  std::vector<DoneStage> done;
  for (auto& item : items) {
    // Cascade payloads may be shared with the caller's circuit: copy, never
    // move out of them.
    if (item.op.kind == OpKind::ClassicalDecode) {
      DoneStage d;
      d.is_decode = true;
      d.decode = *item.op.decode;
      d.decode_bit = item.op.out_bit;
      done.push_back(std::move(d));
      continue;
    }
    for (const auto& stage : item.op.cascade->stages) {
      if (stage.is_decode) {
        DoneStage d;
        d.is_decode = true;
        d.decode = stage.decode;
        d.decode_bit = stage.decode_bit;
        done.push_back(std::move(d));
        continue;
      }
      DoneStage d;
      d.pf.targets = item.op.qubits;
      d.pf.fn = stage.fn;
      d.pf.flips = stage.flips;
      for (std::size_t t = item.layer + 1; t < out.layers.size(); ++t) {
        // Corrections commuted into a teleportation get measured away; stop
        // walking once nothing is left to commute.
        if (t % 16 == 0) {
          d.pf.prune();
          if (d.pf.targets.empty()) break;
        }
        for (const auto& op2 : out.layers[t].ops) {
          switch (op2.kind) {
            case OpKind::Unitary:
              d.pf.conj_gate(op2.gate, op2.qubits[0],
                             op2.qubits.size() > 1 ? op2.qubits[1] : 0);
              break;
            case OpKind::Prep0:
            case OpKind::Discard:
              d.pf.drop_component(op2.qubits[0], true, true);
              break;
            case OpKind::MeasureZ: {
              std::uint32_t q = op2.qubits[0];
              if (d.pf.pos_of(q) == SIZE_MAX) break;
              if (d.pf.x_nonzero(q)) {
                std::size_t p = d.pf.pos_of(q);
                d.pf.flips.push_back({op2.out_bit, d.pf.fn.x_component(p)});
              }
              // Z commutes with the measurement; the X part keeps acting on
              // the post-measurement state until a repreparation drops it.
              d.pf.drop_component(q, false, true);
              break;
            }
            default:
              break;
          }
        }
      }
      d.pf.prune();
      if (d.pf.targets.empty() && d.pf.flips.empty()) continue;  // fully dead
      done.push_back(std::move(d));
    }
  }
  if (!done.empty()) {
    // Union target list over Pauli stages.
    std::vector<std::uint32_t> union_targets;
    for (const auto& d : done) {
      if (d.is_decode) continue;
      for (auto q : d.pf.targets)
        if (std::find(union_targets.begin(), union_targets.end(), q) ==
            union_targets.end())
          union_targets.push_back(q);
    }
    std::sort(union_targets.begin(), union_targets.end());
    Operation op;
    op.kind = OpKind::ControlledPauli;
    op.qubits = union_targets;
    op.cascade = std::make_shared<CorrectionCascade>();
    for (auto& d : done) {
      CorrectionStage st;
      if (d.is_decode) {
        st.is_decode = true;
        st.decode = std::move(d.decode);
        st.decode_bit = d.decode_bit;
      } else {
        std::vector<std::size_t> pos(d.pf.targets.size());
        for (std::size_t i = 0; i < d.pf.targets.size(); ++i) {
          pos[i] = std::size_t(std::find(union_targets.begin(), union_targets.end(),
                                         d.pf.targets[i]) -
                               union_targets.begin());
        }
        ClassicalFunction fn(d.pf.fn.sources, union_targets.size());
        fn.affine = embed_mask(d.pf.fn.affine, d.pf.targets, pos, union_targets.size());
        for (std::size_t j = 0; j < fn.sources.size(); ++j)
          fn.columns[j] =
              embed_mask(d.pf.fn.columns[j], d.pf.targets, pos, union_targets.size());
        for (const auto& term : d.pf.fn.terms) {
          ClassicalFunction::Term nt;
          nt.key_rows = term.key_rows;
          for (const auto& e : term.table)
            nt.table.push_back(embed_mask(e, d.pf.targets, pos, union_targets.size()));
          fn.terms.push_back(std::move(nt));
        }
        st.fn = std::move(fn);
        st.flips = std::move(d.pf.flips);
      }
      op.cascade->stages.push_back(std::move(st));
    }
    // Place in the final layer if its target qubits are free there, else add
    // a fresh layer.
    bool conflict = false;
    if (out.layers.empty()) {
      out.add_layer();
    } else {
      std::set<std::uint32_t> want(union_targets.begin(), union_targets.end());
      for (const auto& other : out.layers.back().ops)
        for (auto q : other.qubits)
          if (want.count(q)) conflict = true;
    }
    bool added_layer = false;
    if (conflict) {
      out.add_layer();
      added_layer = true;
    }
    out.layers.back().ops.push_back(std::move(op));
    if (added_layer) {
      std::size_t d_old = c.depth();
      res.fault_map = [d_old](const FaultPattern& f) {
        // Aggregate the appended wire row into the old final row.
        FaultPattern g;
        for (const auto& [w, l] : f.entries) {
          WireCoord tgt = w;
          if (tgt.t >= d_old) tgt.t = std::uint32_t(d_old - 1);
          g.mul(tgt, l);
        }
        return g;
      };
    }
  }
  if (!res.fault_map)
    res.fault_map = [](const FaultPattern& f) { return f; };
  res.circuit = std::move(out);
  res.cert_formula = "postpone";
  return res;
}

PassResult inflate(const Circuit& c, std::size_t m) {
  PassResult res;
  Circuit out = c;
  out.layers.clear();
  for (const auto& layer : c.layers) {
    out.layers.push_back(layer);
    for (std::size_t k = 0; k < m; ++k) out.add_layer();
  }
  res.circuit = std::move(out);
  res.cert_formula = "inflate:" + std::to_string(m);
  res.fault_map = [m](const FaultPattern& f) {
    FaultPattern g;
    for (const auto& [w, l] : f.entries)
      g.mul({std::uint32_t(w.t / (m + 1)), w.q}, l);
    return g;
  };
  return res;
}

namespace {

// Unitary action of a rectangle's subcircuit on its qubit list.
CliffordAction rect_action(const Circuit& c, const std::vector<std::uint32_t>& qubits,
                           std::size_t first_layer, std::size_t len) {
  std::map<std::uint32_t, std::size_t> local;
  for (std::size_t i = 0; i < qubits.size(); ++i) local[qubits[i]] = i;
  CliffordAction act = CliffordAction::identity(qubits.size());
  for (std::size_t t = first_layer; t < first_layer + len; ++t) {
    for (const auto& op : c.layers[t].ops) {
      if (op.kind == OpKind::Wait || !op.is_quantum()) continue;
      bool inside = local.count(op.qubits[0]);
      if (!inside) continue;
      if (op.kind != OpKind::Unitary)
        throw std::invalid_argument("rect_action: non-unitary op inside rectangle");
      CliffordAction g =
          op.qubits.size() == 2
              ? CliffordAction::from_gate(qubits.size(), op.gate, local[op.qubits[0]],
                                          local[op.qubits[1]])
              : CliffordAction::from_gate(qubits.size(), op.gate, local[op.qubits[0]]);
      act = g.compose_after(act);
    }
  }
  return act;
}

}  // namespace

PassResult substitute_unitary(const Circuit& c,
                              const std::vector<std::pair<Rectangle, Circuit>>& pairs) {
  PassResult res;
  Circuit out = c;
  std::vector<Rectangle> rects;
  for (const auto& [rect, repl] : pairs) {
    std::string why;
    if (rect.flavor != RectFlavor::unitary || !rectangle_valid(c, rect, &why))
      throw std::invalid_argument("substitute_unitary: invalid rectangle: " + why);
    if (repl.depth() != rect.delta)
      throw std::invalid_argument("substitute_unitary: replacement depth mismatch");
    if (repl.n != rect.qubits.size())
      throw std::invalid_argument("substitute_unitary: replacement width mismatch");
    CliffordAction old_act = rect_action(c, rect.qubits, rect.t + 1, rect.delta);
    std::vector<std::uint32_t> local_ids(repl.n);
    for (std::uint32_t i = 0; i < repl.n; ++i) local_ids[i] = i;
    CliffordAction new_act = rect_action(repl, local_ids, 0, repl.depth());
    if (!(old_act == new_act))
      throw std::invalid_argument("substitute_unitary: action mismatch");
    // Splice the replacement in.
    std::set<std::uint32_t> inside(rect.qubits.begin(), rect.qubits.end());
    for (std::size_t k = 0; k < rect.delta; ++k) {
      auto& ops = out.layers[rect.t + 1 + k].ops;
      for (auto it = ops.begin(); it != ops.end();) {
        bool in = false;
        for (auto q : it->qubits)
          if (inside.count(q)) in = true;
        it = in ? ops.erase(it) : it + 1;
      }
      for (const auto& op : repl.layers[k].ops) {
        Operation g = op;
        for (auto& q : g.qubits) q = rect.qubits[q];
        ops.push_back(std::move(g));
      }
    }
    rects.push_back(rect);
  }
  std::size_t max_delta = 0;
  for (const auto& r : rects) max_delta = std::max(max_delta, r.delta);
  Circuit out_copy = out;  // capture for the fault map
  res.circuit = std::move(out);
  res.cert_formula = "clean_unitary:" + std::to_string(max_delta);
  res.fault_map = [out_copy, rects](const FaultPattern& f) {
    return clean_unitary_rects(out_copy, f, rects).pattern;
  };
  return res;
}

namespace {

// Fault map for slab-structured rewrites: new rows [start, start+len) of each
// slab map onto one old row by pushing everything forward to the slab end.
std::function<FaultPattern(const FaultPattern&)> slab_fault_map(
    Circuit new_c, std::vector<std::pair<std::size_t, std::size_t>> slabs) {
  return [new_c = std::move(new_c),
          slabs = std::move(slabs)](const FaultPattern& f) {
    FaultPattern g;
    for (std::size_t old_t = 0; old_t < slabs.size(); ++old_t) {
      auto [start, len] = slabs[old_t];
      PauliOperator acc(new_c.n);
      bool any = false;
      for (std::size_t r = start; r < start + len; ++r) {
        if (r > start) conjugate_masks_through_layer(new_c.layers[r], acc);
        auto it = f.entries.lower_bound({std::uint32_t(r), 0});
        auto end = f.entries.lower_bound({std::uint32_t(r + 1), 0});
        for (; it != end; ++it) {
          char l = it->second;
          std::uint32_t q = it->first.q;
          if (l == 'X' || l == 'Y') acc.set_x(q, !acc.x_bit(q));
          if (l == 'Z' || l == 'Y') acc.set_z(q, !acc.z_bit(q));
          any = true;
        }
      }
      if (!any) continue;
      for (std::uint32_t q = 0; q < new_c.n; ++q) {
        bool x = acc.x_bit(q), z = acc.z_bit(q);
        if (!x && !z) continue;
        char l = x && z ? 'Y' : (x ? 'X' : 'Z');
        g.mul({std::uint32_t(old_t), q}, l);
      }
    }
    return g;
  };
}

bool is_pm_op(const Operation& op) {
  return op.kind == OpKind::Prep0 || op.kind == OpKind::MeasureZ ||
         op.kind == OpKind::Discard;
}

}  // namespace

PassResult to_alternating_form(const Circuit& c) {
  PassResult res;
  Circuit out = c;
  out.layers.clear();
  for (const auto& layer : c.layers) {
    Layer pm, un;
    for (const auto& op : layer.ops) {
      if (is_pm_op(op) || op.kind == OpKind::ClassicalDecode)
        pm.ops.push_back(op);
      else if (op.kind != OpKind::Wait)
        un.ops.push_back(op);
    }
    out.layers.push_back(std::move(pm));
    out.layers.push_back(std::move(un));
  }
  std::vector<std::pair<std::size_t, std::size_t>> slabs;
  for (std::size_t t = 0; t < c.depth(); ++t) slabs.push_back({2 * t, 2});
  res.fault_map = slab_fault_map(out, std::move(slabs));
  res.circuit = std::move(out);
  res.cert_formula = "alternating";
  return res;
}

namespace {

std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> color_index(
    const EdgeColoring& coloring) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> m;
  for (std::size_t a = 0; a < coloring.size(); ++a)
    for (auto e : coloring[a]) {
      if (e.first > e.second) std::swap(e.first, e.second);
      m[e] = a;
    }
  return m;
}

}  // namespace

PassResult to_normal_form(const Circuit& c, const InteractionGraph& g,
                          const EdgeColoring& coloring) {
  auto loc = validate_locality(c, g);
  if (!loc.ok()) throw std::invalid_argument("to_normal_form: circuit not g-local");
  // Proper coloring check.
  for (const auto& cls : coloring) {
    std::vector<int> deg(g.n, 0);
    for (auto [a, b] : cls) {
      if (++deg[a] > 1 || ++deg[b] > 1)
        throw std::invalid_argument("to_normal_form: improper coloring");
      if (!g.has_edge(a, b))
        throw std::invalid_argument("to_normal_form: coloring edge not in graph");
    }
  }
  auto cmap = color_index(coloring);
  std::size_t chi = coloring.size();
  PassResult res;
  Circuit out = c;
  out.layers.clear();
  for (const auto& layer : c.layers) {
    Layer pm;
    std::vector<Layer> colors(chi);
    for (const auto& op : layer.ops) {
      if (is_pm_op(op) || op.kind == OpKind::ClassicalDecode) {
        pm.ops.push_back(op);
      } else if (op.kind == OpKind::Unitary && op.qubits.size() == 2) {
        auto e = std::minmax(op.qubits[0], op.qubits[1]);
        auto it = cmap.find({e.first, e.second});
        if (it == cmap.end())
          throw std::invalid_argument("to_normal_form: edge not colored");
        colors[it->second].ops.push_back(op);
      } else if (op.kind != OpKind::Wait) {
        colors[0].ops.push_back(op);  // 1q unitaries and controlled Paulis
      }
    }
    out.layers.push_back(std::move(pm));
    for (auto& cl : colors) out.layers.push_back(std::move(cl));
  }
  std::vector<std::pair<std::size_t, std::size_t>> slabs;
  for (std::size_t t = 0; t < c.depth(); ++t)
    slabs.push_back({t * (chi + 1), chi + 1});
  res.fault_map = slab_fault_map(out, std::move(slabs));
  res.circuit = std::move(out);
  res.cert_formula = "normal_form:" + std::to_string(chi);
  return res;
}

std::size_t Routing::delta() const {
  std::size_t d = 0;
  for (const auto& cr : colors) d = std::max(d, cr.swap_layers.size());
  return d;
}

void Routing::validate() const {
  std::set<std::pair<std::uint32_t, std::uint32_t>> covered;
  for (const auto& cr : colors) {
    if (cr.pi.size() != g_from.n)
      throw std::invalid_argument("routing: permutation size mismatch");
    // The swap layers must compose to pi.
    std::vector<std::uint32_t> occupant(g_from.n);
    for (std::uint32_t v = 0; v < g_from.n; ++v) occupant[v] = v;
    for (const auto& layer : cr.swap_layers) {
      std::vector<int> touched(g_from.n, 0);
      for (auto [a, b] : layer) {
        if (!g_to.has_edge(a, b))
          throw std::invalid_argument("routing: swap not a g_to edge");
        if (touched[a]++ || touched[b]++)
          throw std::invalid_argument("routing: overlapping swaps in a layer");
        std::swap(occupant[a], occupant[b]);
      }
    }
    std::vector<std::uint32_t> pos(g_from.n);
    for (std::uint32_t v = 0; v < g_from.n; ++v) pos[occupant[v]] = v;
    if (pos != cr.pi)
      throw std::invalid_argument("routing: swap layers do not realize pi");
    for (auto e : cr.color_class) {
      std::vector<int> dummy;
      if (!g_to.has_edge(cr.pi[e.first], cr.pi[e.second]))
        throw std::invalid_argument("routing: pi(edge) not a g_to edge");
      auto key = std::minmax(e.first, e.second);
      if (!covered.insert({key.first, key.second}).second)
        throw std::invalid_argument("routing: edge colored twice");
    }
    // Proper coloring within the class.
    std::vector<int> deg(g_from.n, 0);
    for (auto [a, b] : cr.color_class)
      if (++deg[a] > 1 || ++deg[b] > 1)
        throw std::invalid_argument("routing: color class not a matching");
  }
  for (const auto& e : g_from.edges)
    if (!covered.count(e))
      throw std::invalid_argument("routing: edge not covered by any color");
}

Routing path_bilinear_routing(std::uint32_t r) {
  if (r % 2 != 0) throw std::invalid_argument("path_bilinear_routing: r must be even");
  Routing rt;
  rt.g_from = InteractionGraph::bilinear(r);
  rt.g_to = InteractionGraph::path(2 * r);
  auto coloring = bilinear_coloring(r);
  auto ident = [&]() {
    std::vector<std::uint32_t> pi(2 * r);
    for (std::uint32_t v = 0; v < 2 * r; ++v) pi[v] = v;
    return pi;
  };
  // pi1 = id: rungs are already path edges.
  Routing::ColorRoute c1;
  c1.color_class = coloring[0];
  c1.pi = ident();
  rt.colors.push_back(c1);
  // pi2 = prod_k (4k+1, 4k+2)  [0-indexed]
  Routing::ColorRoute c2;
  c2.color_class = coloring[1];
  c2.pi = ident();
  c2.swap_layers.emplace_back();
  for (std::uint32_t k = 0; k < r / 2; ++k) {
    std::swap(c2.pi[4 * k + 1], c2.pi[4 * k + 2]);
    c2.swap_layers[0].push_back({4 * k + 1, 4 * k + 2});
  }
  rt.colors.push_back(c2);
  // pi3 = prod_{k>=1} (4k-1, 4k)  [0-indexed]
  Routing::ColorRoute c3;
  c3.color_class = coloring[2];
  c3.pi = ident();
  c3.swap_layers.emplace_back();
  for (std::uint32_t k = 1; 2 * k < r; ++k) {
    std::swap(c3.pi[4 * k - 1], c3.pi[4 * k]);
    c3.swap_layers[0].push_back({4 * k - 1, 4 * k});
  }
  if (c3.swap_layers[0].empty()) c3.swap_layers.clear();
  rt.colors.push_back(c3);
  rt.validate();
  return rt;
}

Routing identity_routing(const InteractionGraph& g_from, const InteractionGraph& g_to) {
  Routing rt;
  rt.g_from = g_from;
  rt.g_to = g_to;
  for (const auto& e : g_from.edges)
    if (!g_to.has_edge(e.first, e.second))
      throw std::invalid_argument("identity_routing: g_from not a subgraph of g_to");
  auto coloring = g_from.edge_coloring();
  if (coloring.empty()) coloring.emplace_back();  // edgeless graph
  for (const auto& cls : coloring) {
    Routing::ColorRoute cr;
    cr.color_class = cls;
    cr.pi.resize(g_from.n);
    for (std::uint32_t v = 0; v < g_from.n; ++v) cr.pi[v] = v;
    rt.colors.push_back(std::move(cr));
  }
  rt.validate();
  return rt;
}

PassResult change_geometry(const Circuit& c, const Routing& routing) {
  routing.validate();
  auto loc = validate_locality(c, routing.g_from);
  if (!loc.ok())
    throw std::invalid_argument("change_geometry: circuit not local on source graph");
  auto cmap = [&]() {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> m;
    for (std::size_t a = 0; a < routing.colors.size(); ++a)
      for (auto e : routing.colors[a].color_class) {
        if (e.first > e.second) std::swap(e.first, e.second);
        m[e] = a;
      }
    return m;
  }();
  std::size_t chi = routing.colors.size();
  std::size_t delta = routing.delta();
  std::size_t block = 2 * delta + 1;

  PassResult res;
  Circuit out = c;
  out.layers.clear();
  out.graph_tag = "routed";
  for (const auto& layer : c.layers) {
    Layer pm;
    std::vector<std::vector<Operation>> color_gates(chi);
    for (const auto& op : layer.ops) {
      if (is_pm_op(op) || op.kind == OpKind::ClassicalDecode) {
        pm.ops.push_back(op);
      } else if (op.kind == OpKind::Unitary && op.qubits.size() == 2) {
        auto e = std::minmax(op.qubits[0], op.qubits[1]);
        auto it = cmap.find({e.first, e.second});
        if (it == cmap.end())
          throw std::invalid_argument("change_geometry: edge not colored");
        color_gates[it->second].push_back(op);
      } else if (op.kind != OpKind::Wait) {
        color_gates[0].push_back(op);
      }
    }
    out.layers.push_back(std::move(pm));
    for (std::size_t a = 0; a < chi; ++a) {
      const auto& cr = routing.colors[a];
      std::size_t pad = delta - cr.swap_layers.size();
      // forward swaps (padded to delta layers)
      for (const auto& swl : cr.swap_layers) {
        Layer l;
        for (auto [u, v] : swl) l.ops.push_back(Operation::unitary(Gate::SWAP, u, v));
        out.layers.push_back(std::move(l));
      }
      for (std::size_t k = 0; k < pad; ++k) out.add_layer();
      // gate layer at permuted positions
      Layer gl;
      for (const auto& op : color_gates[a]) {
        Operation g = op;
        for (auto& q : g.qubits) q = cr.pi[q];
        gl.ops.push_back(std::move(g));
      }
      out.layers.push_back(std::move(gl));
      // reverse swaps
      for (std::size_t k = 0; k < pad; ++k) out.add_layer();
      for (auto it = cr.swap_layers.rbegin(); it != cr.swap_layers.rend(); ++it) {
        Layer l;
        for (auto [u, v] : *it) l.ops.push_back(Operation::unitary(Gate::SWAP, u, v));
        out.layers.push_back(std::move(l));
      }
    }
  }
  std::size_t slab_len = chi * block + 1;
  std::vector<std::pair<std::size_t, std::size_t>> slabs;
  for (std::size_t t = 0; t < c.depth(); ++t) slabs.push_back({t * slab_len, slab_len});
  res.fault_map = slab_fault_map(out, std::move(slabs));
  res.circuit = std::move(out);
  res.cert_formula = "geometry:" + std::to_string(chi) + "," + std::to_string(delta);
  return res;
}

namespace {

// Correction function for teleporting gate g: the output carries
// g (X^{xbit} Z^{zbit})^{(x) pairs} g^dagger per teleported qubit.
ClassicalFunction teleport_correction(Gate g, std::size_t arity,
                                      const std::vector<std::uint32_t>& bits) {
  // bits: per teleported qubit j, [z-source, x-source] = (post-H qubit
  // measurement, ancilla measurement).
  std::size_t n = arity;
  CliffordAction ga = arity == 2 && gate_is_two_qubit(g)
                          ? CliffordAction::from_gate(2, g, 0, 1)
                          : CliffordAction::from_gate(n, g, 0);
  ClassicalFunction fn(bits, n);
  for (std::size_t j = 0; j < n; ++j) {
    PauliOperator zimg = ga.conjugate(PauliOperator::single(n, j, 'Z'));
    PauliOperator ximg = ga.conjugate(PauliOperator::single(n, j, 'X'));
    for (std::size_t t = 0; t < n; ++t) {
      if (zimg.x_bit(t)) fn.columns[2 * j].x.set(t, true);
      if (zimg.z_bit(t)) fn.columns[2 * j].z.set(t, true);
      if (ximg.x_bit(t)) fn.columns[2 * j + 1].x.set(t, true);
      if (ximg.z_bit(t)) fn.columns[2 * j + 1].z.set(t, true);
    }
  }
  return fn;
}

}  // namespace

Circuit teleport_circuit(Gate g) {
  Circuit c;
  if (!gate_is_two_qubit(g)) {
    c.n = 3;
    c.inputs = {0};
    c.outputs = {0};
    std::uint32_t b0 = c.fresh_bit();  // measured data qubit (post-H)
    std::uint32_t b1 = c.fresh_bit();  // measured ancilla
    c.add_layer();
    c.push(Operation::prep0(1));
    c.push(Operation::prep0(2));
    c.add_layer();
    c.push(Operation::unitary(Gate::H, 1));
    c.add_layer();
    c.push(Operation::unitary(Gate::CNOT, 1, 2));
    c.add_layer();
    if (g != Gate::I) c.push(Operation::unitary(g, 2));
    c.add_layer();
    c.push(Operation::unitary(Gate::CNOT, 0, 1));
    c.add_layer();
    c.push(Operation::unitary(Gate::H, 0));
    c.add_layer();
    c.push(Operation::measure_z(0, b0));
    c.push(Operation::measure_z(1, b1));
    c.add_layer();
    c.push(Operation::controlled_pauli(teleport_correction(g, 1, {b0, b1}), {2}));
    c.push(Operation::prep0(0));
    c.push(Operation::prep0(1));
    c.add_layer();
    c.push(Operation::unitary(Gate::SWAP, 2, 1));
    c.add_layer();
    c.push(Operation::unitary(Gate::SWAP, 1, 0));
    return c;
  }
  // Two-qubit gate: qubits [q1, A1, A2, B2, B1, q2].
  c.n = 6;
  c.inputs = {0, 5};
  c.outputs = {0, 5};
  std::uint32_t c0 = c.fresh_bit();  // q1 post-H
  std::uint32_t c1 = c.fresh_bit();  // A1
  std::uint32_t c2 = c.fresh_bit();  // q2 post-H
  std::uint32_t c3 = c.fresh_bit();  // B1
  c.add_layer();
  for (std::uint32_t q : {1u, 2u, 3u, 4u}) c.push(Operation::prep0(q));
  c.add_layer();
  c.push(Operation::unitary(Gate::H, 1));
  c.push(Operation::unitary(Gate::H, 4));
  c.add_layer();
  c.push(Operation::unitary(Gate::CNOT, 1, 2));
  c.push(Operation::unitary(Gate::CNOT, 4, 3));
  c.add_layer();
  c.push(Operation::unitary(g, 2, 3));
  c.add_layer();
  c.push(Operation::unitary(Gate::CNOT, 0, 1));
  c.push(Operation::unitary(Gate::CNOT, 5, 4));
  c.add_layer();
  c.push(Operation::unitary(Gate::H, 0));
  c.push(Operation::unitary(Gate::H, 5));
  c.add_layer();
  c.push(Operation::measure_z(0, c0));
  c.push(Operation::measure_z(1, c1));
  c.push(Operation::measure_z(5, c2));
  c.push(Operation::measure_z(4, c3));
  c.add_layer();
  c.push(Operation::controlled_pauli(teleport_correction(g, 2, {c0, c1, c2, c3}),
                                     {2, 3}));
  for (std::uint32_t q : {0u, 1u, 5u, 4u}) c.push(Operation::prep0(q));
  c.add_layer();
  c.push(Operation::unitary(Gate::SWAP, 2, 1));
  c.push(Operation::unitary(Gate::SWAP, 3, 4));
  c.add_layer();
  c.push(Operation::unitary(Gate::SWAP, 1, 0));
  c.push(Operation::unitary(Gate::SWAP, 4, 5));
  return c;
}

namespace {

struct Liveness {
  std::vector<std::int64_t> first_op, last_op;
  std::vector<std::uint8_t> is_output;

  Liveness(const Circuit& c) {
    first_op.assign(c.n, -1);
    last_op.assign(c.n, -1);
    is_output.assign(c.n, 0);
    for (auto q : c.outputs) is_output[q] = 1;
    for (auto q : c.inputs) first_op[q] = 0;
    for (std::size_t t = 0; t < c.layers.size(); ++t)
      for (const auto& op : c.layers[t].ops) {
        if (!op.is_quantum()) continue;
        for (auto q : op.qubits) {
          if (first_op[q] < 0) first_op[q] = std::int64_t(t);
          last_op[q] = std::int64_t(t);
        }
      }
  }

  bool live(std::uint32_t q, std::size_t t) const {
    if (first_op[q] < 0) return false;
    if (std::int64_t(t) < first_op[q]) return false;
    return is_output[q] || std::int64_t(t) <= last_op[q];
  }
};

}  // namespace

PassResult teleport_substitute(const Circuit& c) {
  // Adaptivity must be confined to the final layer.
  for (std::size_t t = 0; t + 1 < c.layers.size(); ++t)
    for (const auto& op : c.layers[t].ops)
      if (op.kind == OpKind::ControlledPauli)
        throw std::invalid_argument(
            "teleport_substitute: adaptive op before the final layer");
  Liveness live(c);
  PassResult res;
  Circuit out;
  out.n = 5 * c.n;
  out.num_cbits = c.num_cbits;
  for (auto q : c.inputs) out.inputs.push_back(5 * q);
  for (auto q : c.outputs) out.outputs.push_back(5 * q);
  out.graph_tag = c.graph_tag;

  struct Tele {
    Gate g;
    std::uint32_t q0, q1;  // original slots (q1 used for 2q)
    bool two;
    std::uint32_t bits[4];
  };

  for (std::size_t t = 0; t < c.layers.size(); ++t) {
    std::size_t base = out.layers.size();
    for (int k = 0; k < 10; ++k) out.add_layer();
    std::vector<std::uint8_t> handled(c.n, 0);
    std::vector<Tele> teles;
    for (const auto& op : c.layers[t].ops) {
      switch (op.kind) {
        case OpKind::Unitary: {
          if (op.qubits.size() == 2) {
            if (op.qubits[0] + 1 != op.qubits[1] && op.qubits[1] + 1 != op.qubits[0])
              throw std::invalid_argument(
                  "teleport_substitute: no valid subrectangle for non-adjacent gate");
            std::uint32_t lo = std::min(op.qubits[0], op.qubits[1]);
            std::uint32_t hi = lo + 1;
            Tele tl;
            tl.g = op.gate;
            // Preserve control/target orientation.
            tl.q0 = op.qubits[0];
            tl.q1 = op.qubits[1];
            tl.two = true;
            for (int i = 0; i < 4; ++i) tl.bits[i] = out.fresh_bit();
            teles.push_back(tl);
            handled[lo] = handled[hi] = 1;
          } else {
            Tele tl;
            tl.g = op.gate;
            tl.q0 = op.qubits[0];
            tl.two = false;
            tl.bits[0] = out.fresh_bit();
            tl.bits[1] = out.fresh_bit();
            teles.push_back(tl);
            handled[op.qubits[0]] = 1;
          }
          break;
        }
        case OpKind::Prep0:
        case OpKind::MeasureZ:
        case OpKind::Discard: {
          Operation g = op;
          g.qubits[0] = 5 * g.qubits[0];
          out.layers[base].ops.push_back(std::move(g));
          handled[op.qubits[0]] = 1;
          break;
        }
        case OpKind::ControlledPauli: {
          Operation g = op;
          for (auto& q : g.qubits) q = 5 * q;
          out.layers[base].ops.push_back(std::move(g));
          for (auto q : op.qubits) handled[q] = 1;
          break;
        }
        case OpKind::ClassicalDecode:
          out.layers[base].ops.push_back(op);
          break;
        case OpKind::Wait:
          break;
      }
    }
    // Idle live qubits get identity teleports to bound their lifespan.
    for (std::uint32_t q = 0; q < c.n; ++q) {
      if (handled[q] || !live.live(q, t)) continue;
      Tele tl;
      tl.g = Gate::I;
      tl.q0 = q;
      tl.two = false;
      tl.bits[0] = out.fresh_bit();
      tl.bits[1] = out.fresh_bit();
      teles.push_back(tl);
    }
    for (const auto& tl : teles) {
      if (!tl.two) {
        std::uint32_t q = 5 * tl.q0, a1 = q + 1, a2 = q + 2;
        out.layers[base + 0].ops.push_back(Operation::prep0(a1));
        out.layers[base + 0].ops.push_back(Operation::prep0(a2));
        out.layers[base + 1].ops.push_back(Operation::unitary(Gate::H, a1));
        out.layers[base + 2].ops.push_back(Operation::unitary(Gate::CNOT, a1, a2));
        if (tl.g != Gate::I)
          out.layers[base + 3].ops.push_back(Operation::unitary(tl.g, a2));
        out.layers[base + 4].ops.push_back(Operation::unitary(Gate::CNOT, q, a1));
        out.layers[base + 5].ops.push_back(Operation::unitary(Gate::H, q));
        out.layers[base + 6].ops.push_back(Operation::measure_z(q, tl.bits[0]));
        out.layers[base + 6].ops.push_back(Operation::measure_z(a1, tl.bits[1]));
        out.layers[base + 7].ops.push_back(Operation::controlled_pauli(
            teleport_correction(tl.g, 1, {tl.bits[0], tl.bits[1]}), {a2}));
        out.layers[base + 7].ops.push_back(Operation::prep0(q));
        out.layers[base + 7].ops.push_back(Operation::prep0(a1));
        out.layers[base + 8].ops.push_back(Operation::unitary(Gate::SWAP, a2, a1));
        out.layers[base + 9].ops.push_back(Operation::unitary(Gate::SWAP, a1, q));
      } else {
        std::uint32_t lo = std::min(tl.q0, tl.q1);
        std::uint32_t p1 = 5 * lo, a1 = p1 + 1, a2 = p1 + 2, b2 = p1 + 3, b1 = p1 + 4,
                      p2 = p1 + 5;
        out.layers[base + 0].ops.push_back(Operation::prep0(a1));
        out.layers[base + 0].ops.push_back(Operation::prep0(a2));
        out.layers[base + 0].ops.push_back(Operation::prep0(b2));
        out.layers[base + 0].ops.push_back(Operation::prep0(b1));
        out.layers[base + 1].ops.push_back(Operation::unitary(Gate::H, a1));
        out.layers[base + 1].ops.push_back(Operation::unitary(Gate::H, b1));
        out.layers[base + 2].ops.push_back(Operation::unitary(Gate::CNOT, a1, a2));
        out.layers[base + 2].ops.push_back(Operation::unitary(Gate::CNOT, b1, b2));
        // Gate on the Choi output halves; orientation follows (q0, q1).
        std::uint32_t g0 = tl.q0 == lo ? a2 : b2;
        std::uint32_t g1 = tl.q0 == lo ? b2 : a2;
        out.layers[base + 3].ops.push_back(Operation::unitary(tl.g, g0, g1));
        out.layers[base + 4].ops.push_back(Operation::unitary(Gate::CNOT, p1, a1));
        out.layers[base + 4].ops.push_back(Operation::unitary(Gate::CNOT, p2, b1));
        out.layers[base + 5].ops.push_back(Operation::unitary(Gate::H, p1));
        out.layers[base + 5].ops.push_back(Operation::unitary(Gate::H, p2));
        out.layers[base + 6].ops.push_back(Operation::measure_z(p1, tl.bits[0]));
        out.layers[base + 6].ops.push_back(Operation::measure_z(a1, tl.bits[1]));
        out.layers[base + 6].ops.push_back(Operation::measure_z(p2, tl.bits[2]));
        out.layers[base + 6].ops.push_back(Operation::measure_z(b1, tl.bits[3]));
        // Correction sources and targets follow the gate's (q0, q1) order:
        // bits (z, x) of q0's Bell measurement first, output halves likewise.
        std::vector<std::uint32_t> src =
            tl.q0 == lo
                ? std::vector<std::uint32_t>{tl.bits[0], tl.bits[1], tl.bits[2],
                                             tl.bits[3]}
                : std::vector<std::uint32_t>{tl.bits[2], tl.bits[3], tl.bits[0],
                                             tl.bits[1]};
        ClassicalFunction fn = teleport_correction(tl.g, 2, src);
        out.layers[base + 7].ops.push_back(
            Operation::controlled_pauli(std::move(fn), {g0, g1}));
        out.layers[base + 7].ops.push_back(Operation::prep0(p1));
        out.layers[base + 7].ops.push_back(Operation::prep0(a1));
        out.layers[base + 7].ops.push_back(Operation::prep0(p2));
        out.layers[base + 7].ops.push_back(Operation::prep0(b1));
        out.layers[base + 8].ops.push_back(Operation::unitary(Gate::SWAP, a2, a1));
        out.layers[base + 8].ops.push_back(Operation::unitary(Gate::SWAP, b2, b1));
        out.layers[base + 9].ops.push_back(Operation::unitary(Gate::SWAP, a1, p1));
        out.layers[base + 9].ops.push_back(Operation::unitary(Gate::SWAP, b1, p2));
      }
    }
  }

  // Fault map: per-slab Pauli-frame walk with linear-correction response.
  Circuit new_c = out;
  std::uint32_t old_n = c.n;
  res.fault_map = [new_c, old_n](const FaultPattern& f) {
    FaultPattern g;
    std::size_t slabs = new_c.depth() / 10;
    for (std::size_t s = 0; s < slabs; ++s) {
      PauliOperator frame(new_c.n);
      std::vector<std::uint8_t> flip(new_c.num_cbits, 0);
      bool any = false;
      for (std::size_t r = 10 * s; r < 10 * s + 10; ++r) {
        if (r > 10 * s) {
          // advance the frame through layer r
          for (const auto& op : new_c.layers[r].ops) {
            switch (op.kind) {
              case OpKind::Unitary: {
                bool x0 = frame.x_bit(op.qubits[0]), z0 = frame.z_bit(op.qubits[0]);
                switch (op.gate) {
                  case Gate::I:
                  case Gate::X:
                  case Gate::Y:
                  case Gate::Z:
                    break;
                  case Gate::H:
                    frame.set_x(op.qubits[0], z0);
                    frame.set_z(op.qubits[0], x0);
                    break;
                  case Gate::S:
                  case Gate::SDG:
                    frame.set_z(op.qubits[0], z0 ^ x0);
                    break;
                  case Gate::CNOT: {
                    std::uint32_t b = op.qubits[1];
                    frame.set_x(b, frame.x_bit(b) ^ x0);
                    frame.set_z(op.qubits[0], z0 ^ frame.z_bit(b));
                    break;
                  }
                  case Gate::SWAP: {
                    std::uint32_t b = op.qubits[1];
                    bool x1 = frame.x_bit(b), z1 = frame.z_bit(b);
                    frame.set_x(op.qubits[0], x1);
                    frame.set_z(op.qubits[0], z1);
                    frame.set_x(b, x0);
                    frame.set_z(b, z0);
                    break;
                  }
                }
                break;
              }
              case OpKind::Prep0:
              case OpKind::Discard:
                frame.set_x(op.qubits[0], false);
                frame.set_z(op.qubits[0], false);
                break;
              case OpKind::MeasureZ:
                if (frame.x_bit(op.qubits[0])) flip[op.out_bit] = 1;
                frame.set_z(op.qubits[0], false);
                break;
              case OpKind::ControlledPauli: {
                // Teleport corrections are linear, so the response to outcome
                // flips e is P(z+e)P(z) = P(e): evaluate at the flips alone.
                for (const auto& st : op.cascade->stages) {
                  if (st.is_decode) continue;
                  if (!st.fn.is_linear())
                    throw std::runtime_error(
                        "teleport_substitute fault map: nonlinear correction crossed");
                  PauliMask v = st.fn.eval(flip);
                  v ^= st.fn.affine;
                  for (std::size_t i = 0; i < op.qubits.size(); ++i) {
                    if (v.x.get(i))
                      frame.set_x(op.qubits[i], !frame.x_bit(op.qubits[i]));
                    if (v.z.get(i))
                      frame.set_z(op.qubits[i], !frame.z_bit(op.qubits[i]));
                  }
                }
                break;
              }
              case OpKind::ClassicalDecode:
              case OpKind::Wait:
                break;
            }
          }
        }
        auto it = f.entries.lower_bound({std::uint32_t(r), 0});
        auto end = f.entries.lower_bound({std::uint32_t(r + 1), 0});
        for (; it != end; ++it) {
          char l = it->second;
          std::uint32_t q = it->first.q;
          if (l == 'X' || l == 'Y') frame.set_x(q, !frame.x_bit(q));
          if (l == 'Z' || l == 'Y') frame.set_z(q, !frame.z_bit(q));
          any = true;
        }
      }
      if (!any) continue;
      for (std::uint32_t q = 0; q < old_n; ++q) {
        bool x = frame.x_bit(5 * q), z = frame.z_bit(5 * q);
        if (!x && !z) continue;
        g.mul({std::uint32_t(s), q}, x && z ? 'Y' : (x ? 'X' : 'Z'));
      }
      // Residual frame on ancilla columns is absorbed by the next slab's
      // repreparations.
    }
    return g;
  };
  res.circuit = std::move(out);
  res.cert_formula = "teleport";
  return res;
}

std::size_t qubit_lifespan(const Circuit& c) {
  std::vector<std::int64_t> birth(c.n, -1);
  std::size_t worst = 0;
  std::vector<std::uint8_t> had_op(c.n, 0);
  for (auto q : c.inputs) birth[q] = 0;
  for (std::size_t t = 0; t < c.layers.size(); ++t) {
    for (const auto& op : c.layers[t].ops) {
      if (!op.is_quantum()) continue;
      for (auto q : op.qubits) had_op[q] = 1;
      switch (op.kind) {
        case OpKind::Prep0: {
          std::uint32_t q = op.qubits[0];
          if (birth[q] >= 0) worst = std::max(worst, std::size_t(t - birth[q]));
          birth[q] = std::int64_t(t);
          break;
        }
        case OpKind::MeasureZ:
        case OpKind::Discard: {
          std::uint32_t q = op.qubits[0];
          if (birth[q] >= 0) worst = std::max(worst, std::size_t(t - birth[q]));
          birth[q] = -1;
          break;
        }
        default:
          break;
      }
    }
  }
  for (std::uint32_t q = 0; q < c.n; ++q)
    if (birth[q] >= 0 && had_op[q])
      worst = std::max(worst, std::size_t(std::int64_t(c.depth()) - birth[q]));
  return worst;
}

}  // namespace qbell
