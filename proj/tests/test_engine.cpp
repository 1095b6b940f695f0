#include "doctest.h"
#include "qbell/engine.hpp"

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

// A chain of `k` teleportation hops of the identity gate along a 3-qubit
// register with resets, exercising slot recycling.
Circuit teleport_chain(int k) {
  Circuit c;
  c.n = 3;
  c.outputs = {0};
  c.add_layer();
  c.push(Operation::prep0(0));
  c.push(Operation::prep0(1));
  c.push(Operation::prep0(2));
  c.add_layer();
  c.push(Operation::unitary(Gate::H, 0));
  for (int hop = 0; hop < k; ++hop) {
    // Bell pair on (1,2), Bell measurement on (0,1), output lands on 2,
    // swap back to 0.
    c.add_layer();
    c.push(Operation::prep0(1));
    c.push(Operation::prep0(2));
    c.add_layer();
    c.push(Operation::unitary(Gate::H, 1));
    c.add_layer();
    c.push(Operation::unitary(Gate::CNOT, 1, 2));
    c.add_layer();
    c.push(Operation::unitary(Gate::CNOT, 0, 1));
    c.add_layer();
    c.push(Operation::unitary(Gate::H, 0));
    std::uint32_t b1 = c.fresh_bit();
    std::uint32_t b2 = c.fresh_bit();
    c.add_layer();
    c.push(Operation::measure_z(0, b1));
    c.push(Operation::measure_z(1, b2));
    c.add_layer();
    ClassicalFunction fn({b1, b2}, 1);
    fn.columns[0].z.set(0, true);  // b1 -> Z
    fn.columns[1].x.set(0, true);  // b2 -> X
    c.push(Operation::controlled_pauli(fn, {2}));
    c.push(Operation::prep0(0));
    c.push(Operation::prep0(1));
    c.add_layer();
    c.push(Operation::unitary(Gate::SWAP, 2, 1));
    c.add_layer();
    c.push(Operation::unitary(Gate::SWAP, 1, 0));
  }
  return c;
}

}  // namespace

TEST_CASE("Bell prep with empty fault yields Bell stabilizers") {
  Circuit c = bell_prep();
  Rng rng(3);
  auto res = run(c, {}, rng);
  CHECK(res.state.bell_status(0, 1) == BellStatus::bell);
}

TEST_CASE("X on qubit 0's final wire flips ZZ") {
  Circuit c = bell_prep();
  FaultPattern f;
  f.set({2, 0}, 'X');
  Rng rng(3);
  auto res = run(c, f, rng);
  PauliOperator xx(2), zz(2);
  xx.set_letter(0, 'X');
  xx.set_letter(1, 'X');
  zz.set_letter(0, 'Z');
  zz.set_letter(1, 'Z');
  CHECK(res.state.sign_of_in_group(xx) == 1);
  CHECK(res.state.sign_of_in_group(zz) == -1);
}

TEST_CASE("teleport chain preserves the + state") {
  Circuit c = teleport_chain(5);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng(seed);
    auto res = run(c, {}, rng);
    // Output should be |+> on qubit 0: X in the group with +1.
    CHECK(res.state.sign_of_in_group(PauliOperator::single(2 + 1, 0, 'X')) == 1);
  }
}

TEST_CASE("streaming matches flat execution under a shared outcome schedule") {
  // The teleport chain resets qubits; streaming recycles their slots.
  Circuit c = teleport_chain(200);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Rng r1(seed), r2(seed);
    auto flat = run(c, {}, r1);
    auto stream = run(c, {}, r2, {.streaming = true});
    CHECK(flat.record.bits == stream.record.bits);
    auto q0f = flat.slot_of[0];
    auto q0s = stream.slot_of[0];
    CHECK(flat.state.sign_of_in_group(
              PauliOperator::single(flat.state.num_qubits(), q0f, 'X')) ==
          stream.state.sign_of_in_group(
              PauliOperator::single(stream.state.num_qubits(), q0s, 'X')));
  }
  // With a fault pattern.
  FaultPattern f;
  f.set({7, 2}, 'Y');
  f.set({31, 0}, 'X');
  Rng r1(11), r2(11);
  auto flat = run(c, f, r1);
  auto stream = run(c, f, r2, {.streaming = true});
  CHECK(flat.record.bits == stream.record.bits);
  CHECK(flat.faults_applied == stream.faults_applied);
}

TEST_CASE("branch oracle: circuit equals itself; HH equals identity") {
  Circuit id;
  id.n = 1;
  id.inputs = {0};
  id.outputs = {0};
  id.add_layer();
  Circuit hh = id;
  hh.layers.clear();
  hh.add_layer();
  hh.push(Operation::unitary(Gate::H, 0));
  hh.add_layer();
  hh.push(Operation::unitary(Gate::H, 0));
  auto v1 = branch_oracle(id, id);
  CHECK(v1.equal);
  auto v2 = branch_oracle(hh, id);
  CHECK(v2.equal);
  Circuit xgate = id;
  xgate.layers.clear();
  xgate.add_layer();
  xgate.push(Operation::unitary(Gate::X, 0));
  CHECK(!branch_oracle(xgate, id).equal);
}

TEST_CASE("branch oracle distinguishes sign differences") {
  Circuit plus;
  plus.n = 1;
  plus.outputs = {0};
  plus.add_layer();
  plus.push(Operation::prep0(0));
  plus.add_layer();
  plus.push(Operation::unitary(Gate::H, 0));
  Circuit minus = plus;
  minus.add_layer();
  minus.push(Operation::unitary(Gate::Z, 0));
  CHECK(!branch_oracle(plus, minus).equal);
  CHECK(branch_oracle(plus, plus).equal);
}

TEST_CASE("branch oracle sees through teleportation randomness") {
  Circuit chain = teleport_chain(2);
  Circuit direct;
  direct.n = 1;
  direct.outputs = {0};
  direct.add_layer();
  direct.push(Operation::prep0(0));
  direct.add_layer();
  direct.push(Operation::unitary(Gate::H, 0));
  auto v = branch_oracle(chain, direct);
  CHECK(v.equal);
  CHECK(v.branches_a == 16);  // 2 hops x 2 random bits
}

TEST_CASE("deterministic rng streams split by trial and tag") {
  auto a = make_rng(1, 2, 3);
  auto b = make_rng(1, 2, 3);
  CHECK(a() == b());
  auto c = make_rng(1, 2, 4);
  auto d = make_rng(1, 3, 3);
  CHECK(a() != c());
  (void)d;
}

TEST_CASE("run records measurement provenance and digest determinism") {
  Circuit c = teleport_chain(3);
  Rng r1(5), r2(5);
  auto a = run(c, {}, r1);
  auto b = run(c, {}, r2);
  CHECK(a.record.digest() == b.record.digest());
  CHECK(a.record.written == b.record.written);
}
