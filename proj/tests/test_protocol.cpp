#include <cmath>

#include "doctest.h"
#include "qbell/protocol.hpp"
#include "qbell/verify.hpp"

using namespace qbell;

TEST_CASE("C^prep: depth 3, Bell output, 5 locations") {
  Circuit c = build_c_prep();
  CHECK(c.depth() == 3);
  CHECK(c.n == 2);
  // prep,prep | h,(wait) | cnot
  CHECK(c.locations() == 5);
  Rng rng(1);
  auto res = run(c, {}, rng);
  CHECK(res.state.bell_status(0, 1) == BellStatus::bell);
}

TEST_CASE("thermal mapping formula") {
  CHECK(thermal_noise_strength({0.5}) == doctest::Approx((1 - std::tanh(0.5)) / 2));
  CHECK(thermal_noise_strength({0.5}) == doctest::Approx(0.26894).epsilon(1e-3));
  CHECK(thermal_noise_strength({30.0}) < 1e-20);  // beta -> inf: p -> 0
  CHECK(thermal_noise_strength({6.0}) == doctest::Approx(3.07e-6).epsilon(0.02));
  CHECK_THROWS(thermal_noise_strength({0.0}));
}

TEST_CASE("L=0 pipeline: teleportation chain, constant lifespan, noiseless Bell") {
  ProtocolConfig cfg;
  cfg.distance = 4;
  cfg.level = 0;
  auto art = build_c_bell(cfg);
  CHECK(art.lifespan <= 30);
  // The 1D implementation itself is path-local (the prep corner attaches in
  // the plane, not on the path).
  Circuit chain;
  chain.n = 1;
  chain.inputs = {0};
  chain.outputs = {0};
  for (std::uint32_t t = 0; t < cfg.distance; ++t) {
    chain.add_layer();
    chain.push(Operation::unitary(Gate::I, 0));
  }
  auto pipe = build_c_1d_res(chain, 0);
  CHECK(validate_locality(pipe.circuit, InteractionGraph::path(pipe.circuit.n)).ok());
  for (std::uint64_t trial = 0; trial < 25; ++trial) {
    auto tr = run_protocol_trial(cfg, art, trial);
    CHECK(tr.success);
    CHECK(tr.fault_count == 0);
  }
}

TEST_CASE("L=0 square grid variant: noiseless Bell") {
  ProtocolConfig cfg;
  cfg.distance = 4;
  cfg.level = 0;
  cfg.variant = Variant::square_grid;
  auto art = build_c_bell(cfg);
  for (std::uint64_t trial = 0; trial < 25; ++trial)
    CHECK(run_protocol_trial(cfg, art, trial).success);
}

TEST_CASE("L=1 pipeline small R: noiseless Bell and structure") {
  ProtocolConfig cfg;
  cfg.distance = 3;
  cfg.level = 1;
  auto art = build_c_bell(cfg);
  // adaptivity only in the final layer
  for (std::size_t t = 0; t + 1 < art.exec.depth(); ++t)
    for (const auto& op : art.exec.layers[t].ops)
      CHECK(op.kind != OpKind::ControlledPauli);
  CHECK(art.lifespan <= 40);
  for (std::uint64_t trial = 0; trial < 8; ++trial) {
    auto tr = run_protocol_trial(cfg, art, trial);
    CHECK(tr.success);
  }
}

TEST_CASE("replayed faults reproduce the trial result") {
  ProtocolConfig cfg;
  cfg.distance = 4;
  cfg.level = 0;
  cfg.noise = NoiseSpec::depolarizing(0.02);
  auto art = build_c_bell(cfg);
  auto t1 = run_protocol_trial(cfg, art, 7);
  auto t2 = run_protocol_trial(cfg, art, 7);
  CHECK(t1.success == t2.success);
  CHECK(t1.digest == t2.digest);
  CHECK(t1.fault_count == t2.fault_count);
}

TEST_CASE("unfold: teleport chain becomes a constant-depth strip") {
  // identity chain at L=0, two distances: unfolded depth must coincide
  ProtocolConfig a;
  a.distance = 4;
  a.level = 0;
  ProtocolConfig b;
  b.distance = 12;
  b.level = 0;
  auto pa = build_c_1d_res(
      [&] {
        Circuit c;
        c.n = 1;
        c.inputs = {0};
        c.outputs = {0};
        for (std::uint32_t t = 0; t < a.distance; ++t) {
          c.add_layer();
          c.push(Operation::unitary(Gate::I, 0));
        }
        return c;
      }(),
      0);
  auto pb = build_c_1d_res(
      [&] {
        Circuit c;
        c.n = 1;
        c.inputs = {0};
        c.outputs = {0};
        for (std::uint32_t t = 0; t < b.distance; ++t) {
          c.add_layer();
          c.push(Operation::unitary(Gate::I, 0));
        }
        return c;
      }(),
      0);
  auto sa = unfold_stats(pa.circuit);
  auto sb = unfold_stats(pb.circuit);
  CHECK(sa.depth == sb.depth);         // constant depth
  CHECK(sa.depth <= 12);
  CHECK(sb.nodes > sa.nodes);          // but more qubits
  // Q1-Q2 distance (input corner to output) grows with R in the Bell strip
  ProtocolConfig ca;
  ca.distance = 4;
  ca.level = 0;
  ProtocolConfig cb;
  cb.distance = 12;
  cb.level = 0;
  auto arta = build_c_bell(ca);
  auto artb = build_c_bell(cb);
  CHECK(artb.stats.q1_q2_distance > arta.stats.q1_q2_distance);
}

TEST_CASE("unfolded circuit validates on its grid layout") {
  ProtocolConfig cfg;
  cfg.distance = 4;
  cfg.level = 0;
  Circuit c;
  c.n = 1;
  c.inputs = {0};
  c.outputs = {0};
  for (std::uint32_t t = 0; t < cfg.distance; ++t) {
    c.add_layer();
    c.push(Operation::unitary(Gate::I, 0));
  }
  auto pipe = build_c_1d_res(c, 0);
  auto unf = unfold_to_2d(pipe.circuit);
  REQUIRE_NOTHROW(unf.circuit.audit());
  // every 2q op joins unit-distance lattice points
  std::size_t checked = 0;
  for (const auto& layer : unf.circuit.layers)
    for (const auto& op : layer.ops)
      if (op.kind == OpKind::Unitary && op.qubits.size() == 2) {
        CHECK(unf.layout.manhattan(op.qubits[0], op.qubits[1]) == 1);
        ++checked;
      }
  CHECK(checked > 0);
  // unfolded instrument equals the 1D form (noiseless, sampled branches)
  Rng r1(3), r2(3);
  auto res1 = run(pipe.circuit, {}, r1);
  auto res2 = run(unf.circuit, {}, r2, {.streaming = true});
  auto s1 = res1.slot_of[pipe.circuit.outputs[0]];
  auto s2 = res2.slot_of[unf.circuit.outputs[0]];
  // both outputs carry half of the original identity channel: compare purity
  // structure via deterministic Z after forcing: just check both are defined
  CHECK(s1 != SIZE_MAX);
  CHECK(s2 != SIZE_MAX);
}

TEST_CASE("decoder serializes and matches executed corrections") {
  ProtocolConfig cfg;
  cfg.distance = 4;
  cfg.level = 0;
  cfg.noise = NoiseSpec::depolarizing(0.01);
  auto art = build_c_bell(cfg);
  std::string text = art.decoder.serialize();
  CHECK(text.find("cpauli") != std::string::npos);
  // executing the final layer equals applying the decoder by hand
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    Rng frng = make_rng(cfg.seed, trial, 0);
    FaultPattern f = sample_noise(art.exec, cfg.noise, frng);
    Rng o1 = make_rng(cfg.seed, trial, 1);
    Rng o2 = make_rng(cfg.seed, trial, 1);
    auto full = run(art.exec, f, o1, {});
    auto bare = run(art.exec, f, o2, {.skip_final_adaptive = true});
    auto [p1, p2] = art.decoder.eval(bare.record.bits);
    auto apply_letter = [&](StabilizerState& st, std::size_t slot, char l) {
      if (l == 'X' || l == 'Y') st.apply(Gate::X, slot);
      if (l == 'Z' || l == 'Y') st.apply(Gate::Z, slot);
    };
    apply_letter(bare.state, bare.slot_of[art.q1], p1);
    apply_letter(bare.state, bare.slot_of[art.q2], p2);
    CHECK(full.state.same_state_as(bare.state));
  }
}

TEST_CASE("quick verification pass: all lemma groups green") {
  VerifyOptions opts;
  opts.quick = true;
  opts.seeds = 1;
  auto rep = run_verify(opts);
  INFO(format_report(rep));
  CHECK(rep.ok());
}

TEST_CASE("mutated EC gadget fails the Fig. 3 group") {
  Circuit ec = build_gadget(GadgetRole::ec).circuit;
  // drop one correction entry from the 64-entry default table
  bool mutated = false;
  for (auto& layer : ec.layers)
    for (auto& op : layer.ops)
      if (op.kind == OpKind::ControlledPauli) {
        op.cascade = std::make_shared<CorrectionCascade>(*op.cascade);
        for (auto& st : op.cascade->stages)
          for (auto& term : st.fn.terms)
            if (term.table.size() == 64 && !mutated) {
              term.table[1] = PauliMask(7);  // forget the syndrome-1 fix
              mutated = true;
            }
      }
  REQUIRE(mutated);
  VerifyOptions opts;
  opts.quick = true;
  opts.seeds = 1;
  auto rep = verify_ec_contract(ec, opts);
  CHECK(rep.failed > 0);
}
