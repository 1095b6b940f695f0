#include "doctest.h"
#include "qbell/circuit.hpp"
#include "qbell/circuit_io.hpp"
#include "qbell/tableau.hpp"

using namespace qbell;

namespace {

Circuit bell_prep() {
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

}  // namespace

TEST_CASE("layer disjointness and classical rules are audited") {
  Circuit c = bell_prep();
  CHECK_NOTHROW(c.audit());
  c.layers[2].ops.push_back(Operation::unitary(Gate::H, 1));
  CHECK_THROWS(c.audit());
}

TEST_CASE("locations counts waits and treats two-qubit gates as one") {
  Circuit c = bell_prep();
  // prep,prep | h,(wait) | cnot: 2 + 2 + 1
  CHECK(c.locations() == 5);
  Circuit d;
  d.n = 2;
  d.add_layer();
  d.push(Operation::unitary(Gate::CNOT, 0, 1));
  CHECK(d.locations() == 1);
  // depth-3 circuit on 2 qubits, all single-qubit slots filled: D*N.
  Circuit e;
  e.n = 2;
  for (int t = 0; t < 3; ++t) {
    e.add_layer();
    e.push(Operation::unitary(Gate::H, 0));
    e.push(Operation::unitary(Gate::S, 1));
  }
  CHECK(e.locations() == 6);
}

TEST_CASE("locality validation on the path graph") {
  auto p3 = InteractionGraph::path(3);
  Circuit ok;
  ok.n = 3;
  ok.add_layer();
  ok.push(Operation::unitary(Gate::CNOT, 0, 1));
  CHECK(validate_locality(ok, p3).ok());
  Circuit bad;
  bad.n = 3;
  bad.add_layer();
  bad.push(Operation::unitary(Gate::CNOT, 0, 2));
  auto rep = validate_locality(bad, p3);
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].layer == 0);
}

TEST_CASE("bilinear coloring is a proper edge coloring matching the paper") {
  for (std::uint32_t r : {2u, 4u, 6u, 8u}) {
    auto cls = bilinear_coloring(r);
    REQUIRE(cls.size() == 3);
    // proper: no vertex twice within a class
    for (const auto& cl : cls) {
      std::vector<int> deg(2 * r, 0);
      for (auto [a, b] : cl) {
        ++deg[a];
        ++deg[b];
      }
      for (int d : deg) CHECK(d <= 1);
    }
    // rungs
    CHECK(cls[0].size() == r);
    // rail edges split by parity; total edges of the ladder
    auto g = InteractionGraph::bilinear(r);
    CHECK(g.edges.size() == r + 2 * (r - 1));
  }
}

TEST_CASE("compose glues outputs to inputs and reindexes bits") {
  Circuit a = bell_prep();
  Circuit b;
  b.n = 2;
  b.inputs = {0, 1};
  b.outputs = {0, 1};
  b.num_cbits = 1;
  b.add_layer();
  b.push(Operation::unitary(Gate::H, 0));
  Circuit c = compose(a, b);
  CHECK(c.n == 2);
  CHECK(c.depth() == 4);
  CHECK(c.outputs == std::vector<std::uint32_t>{0, 1});
  CHECK_NOTHROW(c.audit());
  CHECK_THROWS(compose(a, bell_prep()));  // arity mismatch (2 out vs 0 in)
}

TEST_CASE("tensor zips layers with wait padding") {
  Circuit a = bell_prep();
  Circuit b = bell_prep();
  Circuit t = tensor(a, b);
  CHECK(t.n == 4);
  CHECK(t.depth() == 3);
  CHECK(t.outputs.size() == 4);
  CHECK_NOTHROW(t.audit());
}

TEST_CASE("empty identity circuit round-trips") {
  Circuit c;
  c.n = 1;
  c.inputs = {0};
  c.outputs = {0};
  c.add_layer();
  Circuit back = parse_circuit(serialize(c));
  CHECK(back == c);
}

TEST_CASE("Bell prep circuit round-trips byte-exactly") {
  Circuit c = bell_prep();
  std::string text = serialize(c);
  Circuit back = parse_circuit(text);
  CHECK(back == c);
  CHECK(serialize(back) == text);
}

TEST_CASE("spec-format op lines parse") {
  std::string text =
      "# comment\n"
      "circuit n=7 in=- out=- cbits=6\n"
      "layer 0:\n"
      "prep0 q3\n"
      "h q0\n"
      "wait q6\n"
      "layer 1:\n"
      "cnot q0 q1\n"
      "measz q2 -> c5\n"
      "layer 2:\n"
      "discard q2\n";
  Circuit c = parse_circuit(text);
  CHECK(c.n == 7);
  CHECK(c.depth() == 3);
  CHECK(c.layers[1].ops.size() == 2);
}

TEST_CASE("random circuits round-trip through the text format") {
  Rng rng(31337);
  for (int trial = 0; trial < 20; ++trial) {
    Circuit c;
    c.n = 2 + rng() % 5;
    c.num_cbits = 0;
    std::vector<std::uint32_t> measured;
    for (int t = 0; t < 50; ++t) {
      c.add_layer();
      std::vector<std::uint8_t> used(c.n, 0);
      for (std::uint32_t q = 0; q < c.n; ++q) {
        if (used[q]) continue;
        switch (rng() % 6) {
          case 0:
            c.push(Operation::prep0(q));
            used[q] = 1;
            break;
          case 1: {
            Gate g = static_cast<Gate>(1 + rng() % 6);
            c.push(Operation::unitary(g, q));
            used[q] = 1;
            break;
          }
          case 2: {
            if (q + 1 < c.n && !used[q + 1]) {
              c.push(Operation::unitary(rng() % 2 ? Gate::CNOT : Gate::SWAP, q, q + 1));
              used[q] = used[q + 1] = 1;
            }
            break;
          }
          case 3: {
            std::uint32_t bit = c.fresh_bit();
            c.push(Operation::measure_z(q, bit));
            measured.push_back(bit);
            used[q] = 1;
            break;
          }
          case 4: {
            if (!measured.empty()) {
              ClassicalFunction fn({measured[rng() % measured.size()]}, 1);
              fn.columns[0].x.set(0, true);
              if (rng() & 1) fn.affine.z.set(0, true);
              c.push(Operation::controlled_pauli(fn, {q}));
              used[q] = 1;
            }
            break;
          }
          default:
            break;  // implicit wait
        }
      }
    }
    Circuit back = parse_circuit(serialize(c));
    CHECK(back == c);
  }
}

TEST_CASE("cpauli with lookup terms and flips round-trips") {
  Circuit c;
  c.n = 3;
  c.num_cbits = 4;
  c.add_layer();
  c.push(Operation::measure_z(0, 0));
  c.push(Operation::measure_z(1, 1));
  c.add_layer();
  Operation op;
  op.kind = OpKind::ControlledPauli;
  op.qubits = {2};
  op.cascade = std::make_shared<CorrectionCascade>();
  CorrectionStage st;
  st.fn = ClassicalFunction({0, 1}, 1);
  st.fn.columns[0].x.set(0, true);
  ClassicalFunction::Term term;
  term.key_rows.push_back(Bits(2));
  term.key_rows[0].set(0, true);
  term.key_rows[0].set(1, true);
  term.table.assign(2, PauliMask(1));
  term.table[1].z.set(0, true);
  st.fn.terms.push_back(term);
  CorrectionStage::Flip flip;
  flip.bit = 3;
  flip.indicator = BitFn({0, 1});
  flip.indicator.lin.set(1, true);
  st.flips.push_back(flip);
  op.cascade->stages.push_back(st);
  c.push(op);
  Circuit back = parse_circuit(serialize(c));
  CHECK(back == c);
}

TEST_CASE("rectangle validity") {
  Circuit c;
  c.n = 3;
  for (int t = 0; t < 4; ++t) c.add_layer();
  c.layers[1].ops.push_back(Operation::unitary(Gate::CNOT, 0, 1));
  c.layers[2].ops.push_back(Operation::unitary(Gate::H, 0));
  Rectangle r;
  r.qubits = {0, 1};
  r.t = 0;
  r.delta = 2;
  CHECK(rectangle_valid(c, r));
  Rectangle crossing;
  crossing.qubits = {0};
  crossing.t = 0;
  crossing.delta = 2;
  CHECK(!rectangle_valid(c, crossing));
}
