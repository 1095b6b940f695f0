#include "doctest.h"
#include "qbell/tableau.hpp"
#include "support/dense_sim.hpp"

using namespace qbell;
using namespace qbell::testing;

TEST_CASE("|0> + H is stabilized by X") {
  StabilizerState s(1);
  s.apply(Gate::H, 0);
  auto rows = s.canonical_stabilizers();
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == PauliOperator::single(1, 0, 'X'));
}

TEST_CASE("Bell preparation gives stabilizers XX and ZZ") {
  StabilizerState s(2);
  s.apply(Gate::H, 0);
  s.apply(Gate::CNOT, 0, 1);
  PauliOperator xx(2), zz(2);
  xx.set_letter(0, 'X');
  xx.set_letter(1, 'X');
  zz.set_letter(0, 'Z');
  zz.set_letter(1, 'Z');
  CHECK(s.sign_of_in_group(xx) == 1);
  CHECK(s.sign_of_in_group(zz) == 1);
  CHECK(s.bell_status(0, 1) == BellStatus::bell);
}

TEST_CASE("measurement of |0...0> is deterministically zero") {
  StabilizerState s(3);
  Rng rng(1);
  for (std::size_t q = 0; q < 3; ++q) {
    CHECK(s.deterministic_z(q) == 0);
    CHECK(s.measure_z(q, rng) == 0);
  }
}

TEST_CASE("Bell pair measurement correlations") {
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    StabilizerState s(2);
    Rng rng(seed);
    s.apply(Gate::H, 0);
    s.apply(Gate::CNOT, 0, 1);
    CHECK(!s.deterministic_z(0).has_value());
    int a = s.measure_z(0, rng);
    auto det = s.deterministic_z(1);
    REQUIRE(det.has_value());
    CHECK(*det == a);
    // Repeated measurement returns the same bit.
    CHECK(s.measure_z(0, rng) == a);
    CHECK(s.measure_z(1, rng) == a);
  }
}

TEST_CASE("Pauli frame on a Bell pair flips the ZZ sign") {
  StabilizerState s(2);
  s.apply(Gate::H, 0);
  s.apply(Gate::CNOT, 0, 1);
  s.apply(Gate::X, 0);
  PauliOperator zz(2);
  zz.set_letter(0, 'Z');
  zz.set_letter(1, 'Z');
  CHECK(s.sign_of_in_group(zz) == -1);
  CHECK(s.bell_status(0, 1) == BellStatus::not_bell);
  s.apply(Gate::X, 0);
  CHECK(s.bell_status(0, 1) == BellStatus::bell);
}

TEST_CASE("|00> is not a Bell pair; half-measured pair is mixed") {
  StabilizerState s(2);
  CHECK(s.bell_status(0, 1) == BellStatus::not_bell);
  StabilizerState e(3);
  e.apply(Gate::H, 0);
  e.apply(Gate::CNOT, 0, 1);
  e.apply(Gate::CNOT, 1, 2);
  // (0,1) reduced state is mixed: entangled with qubit 2.
  CHECK(e.bell_status(0, 1) == BellStatus::mixed);
}

TEST_CASE("random circuits match the dense oracle at n <= 4") {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t n = 2 + rng() % 3;
    StabilizerState tab(n);
    DenseSim dense(n);
    for (int g = 0; g < 20; ++g) {
      Gate gate = static_cast<Gate>(1 + rng() % 8);
      std::size_t q0 = rng() % n;
      if (gate_is_two_qubit(gate)) {
        std::size_t q1 = (q0 + 1 + rng() % (n - 1)) % n;
        tab.apply(gate, q0, q1);
        dense.apply(gate, q0, q1);
      } else {
        tab.apply(gate, q0);
        dense.apply(gate, q0);
      }
    }
    auto proj = stabilizer_projector(tab.canonical_stabilizers());
    CHECK(projector_vs_state(proj, dense.amp) < 1e-9);
  }
}

TEST_CASE("forced measurement branches match dense projection") {
  Rng rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    std::size_t n = 2 + rng() % 2;
    StabilizerState tab(n);
    DenseSim dense(n);
    for (int g = 0; g < 12; ++g) {
      int pick = int(rng() % 10);
      if (pick < 7) {
        Gate gate = static_cast<Gate>(1 + rng() % 8);
        std::size_t q0 = rng() % n;
        if (gate_is_two_qubit(gate)) {
          std::size_t q1 = (q0 + 1 + rng() % (n - 1)) % n;
          tab.apply(gate, q0, q1);
          dense.apply(gate, q0, q1);
        } else {
          tab.apply(gate, q0);
          dense.apply(gate, q0);
        }
      } else {
        std::size_t q = rng() % n;
        int want = int(rng() & 1);
        bool was_random = false;
        auto det = tab.deterministic_z(q);
        int got = tab.measure_z_forced(q, want, &was_random);
        CHECK(was_random == !det.has_value());
        if (det.has_value()) {
          // Deterministic outcome: probability 1 branch in dense sim too.
          CHECK(dense.prob(q, *det) == doctest::Approx(1.0));
          CHECK(dense.project(q, *det));
          CHECK(got == *det);
        } else {
          // Non-deterministic outcomes are exactly 1/2.
          CHECK(dense.prob(q, want) == doctest::Approx(0.5));
          CHECK(dense.project(q, want));
          CHECK(got == want);
        }
      }
    }
    auto proj = stabilizer_projector(tab.canonical_stabilizers());
    CHECK(projector_vs_state(proj, dense.amp) < 1e-9);
  }
}

TEST_CASE("apply_pauli flips anticommuting stabilizer signs") {
  Rng rng(5);
  StabilizerState s(3);
  s.apply(Gate::H, 0);
  s.apply(Gate::CNOT, 0, 1);
  DenseSim d(3);
  d.apply(Gate::H, 0);
  d.apply(Gate::CNOT, 0, 1);
  PauliOperator p(3);
  p.set_letter(0, 'Y');
  p.set_letter(2, 'X');
  s.apply_pauli(p);
  d.apply_pauli(p);
  auto proj = stabilizer_projector(s.canonical_stabilizers());
  CHECK(projector_vs_state(proj, d.amp) < 1e-9);
}
