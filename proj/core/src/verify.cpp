#include "qbell/verify.hpp"

#include <optional>
#include <sstream>

#include "qbell/engine.hpp"
#include "qbell/noise.hpp"
#include "qbell/protocol.hpp"

namespace qbell {

namespace {

Circuit stabilizer_prep(int which) {
  Circuit c;
  c.n = 1;
  c.outputs = {0};
  c.add_layer();
  c.push(Operation::prep0(0));
  auto add = [&](Gate g) {
    c.add_layer();
    c.push(Operation::unitary(g, 0));
  };
  switch (which) {
    case 0: break;
    case 1: add(Gate::X); break;
    case 2: add(Gate::H); break;
    case 3: add(Gate::X); add(Gate::H); break;
    case 4: add(Gate::H); add(Gate::S); break;
    case 5: add(Gate::H); add(Gate::SDG); break;
  }
  return c;
}

Circuit attach_choi_refs(const Circuit& c) {
  Circuit aug;
  aug.n = c.n + std::uint32_t(c.inputs.size());
  aug.num_cbits = c.num_cbits;
  aug.outputs = c.outputs;
  for (std::size_t j = 0; j < c.inputs.size(); ++j)
    aug.outputs.push_back(c.n + std::uint32_t(j));
  aug.add_layer();
  for (std::size_t j = 0; j < c.inputs.size(); ++j)
    aug.layers[0].ops.push_back(Operation::unitary(Gate::H, c.n + std::uint32_t(j)));
  aug.add_layer();
  for (std::size_t j = 0; j < c.inputs.size(); ++j)
    aug.layers[1].ops.push_back(
        Operation::unitary(Gate::CNOT, c.n + std::uint32_t(j), c.inputs[j]));
  for (const auto& layer : c.layers) aug.layers.push_back(layer);
  return aug;
}

std::optional<std::vector<PauliOperator>> choi_reduced(const Circuit& c,
                                                       const FaultPattern& f,
                                                       std::uint64_t seed) {
  Circuit aug = attach_choi_refs(c);
  FaultPattern g;
  for (const auto& [w, l] : f.entries) g.set({w.t + 2, w.q}, l);
  Rng rng = make_rng(seed, 0, 7);
  auto res = run(aug, g, rng);
  std::vector<std::size_t> keep(aug.outputs.begin(), aug.outputs.end());
  return res.state.reduced_canonical(keep);
}

// Precomputed left side of a sweep: the augmented circuit plus the clean
// reference state it must reproduce.
struct ChoiHarness {
  Circuit aug;
  std::vector<std::size_t> keep;
  std::vector<PauliOperator> want;

  ChoiHarness(const Circuit& a, const Circuit& reference) {
    aug = attach_choi_refs(a);
    keep.assign(aug.outputs.begin(), aug.outputs.end());
    auto w = choi_reduced(reference, {}, 1);
    if (!w) throw std::runtime_error("choi harness: reference not pure on outputs");
    want = std::move(*w);
  }

  bool match(const FaultPattern& f, int seeds, std::string* why) const {
    FaultPattern g;
    for (const auto& [w, l] : f.entries) g.set({w.t + 2, w.q}, l);
    for (int s = 0; s < seeds; ++s) {
      Rng rng = make_rng(2000 + std::uint64_t(s), 0, 7);
      auto res = run(aug, g, rng);
      auto got = res.state.reduced_canonical(keep);
      if (!got || *got != want) {
        if (why) *why = "mismatch at seed " + std::to_string(s);
        return false;
      }
    }
    return true;
  }
};

bool choi_match(const Circuit& a, const FaultPattern& fa, const Circuit& b,
                int seeds, std::string* why) {
  try {
    ChoiHarness h(a, b);
    return h.match(fa, seeds, why);
  } catch (const std::exception& e) {
    if (why) *why = e.what();
    return false;
  }
}

Circuit ideal_decode_circuit() {
  return compose(build_gadget(GadgetRole::ec).circuit,
                 build_gadget(GadgetRole::dec).circuit);
}

Circuit identity_direct(std::uint32_t n) {
  Circuit d;
  d.n = n;
  for (std::uint32_t q = 0; q < n; ++q) {
    d.inputs.push_back(q);
    d.outputs.push_back(q);
  }
  d.add_layer();
  return d;
}

void sweep_region(VerifyReport::Group& g, const Circuit& whole, const Circuit& direct,
                  std::size_t first_layer, std::size_t last_layer,
                  std::int64_t input_row, const std::vector<std::uint32_t>& data_qubits,
                  int seeds, std::size_t stride = 1) {
  ChoiHarness h(whole, direct);
  for (std::size_t t = first_layer; t < last_layer; t += stride) {
    for (std::uint32_t q = 0; q < whole.n; ++q) {
      for (char l : {'X', 'Y', 'Z'}) {
        FaultPattern f;
        f.set({std::uint32_t(t), q}, l);
        ++g.checked;
        std::string why;
        if (!h.match(f, seeds, &why)) {
          std::ostringstream os;
          os << "fault " << l << " at (" << t << "," << q << "): " << why;
          g.fail(os.str());
        }
      }
    }
  }
  if (input_row >= 0) {
    for (auto q : data_qubits) {
      for (char l : {'X', 'Y', 'Z'}) {
        FaultPattern f;
        f.set({std::uint32_t(input_row), q}, l);
        ++g.checked;
        std::string why;
        if (!h.match(f, seeds, &why)) {
          std::ostringstream os;
          os << "input error " << l << " on q" << q << ": " << why;
          g.fail(os.str());
        }
      }
    }
  }
}

}  // namespace

VerifyReport::Group verify_ec_contract(const Circuit& ec, const VerifyOptions& opts) {
  VerifyReport::Group g{"fig3-ec", 0, 0, {}};
  auto [enc, dec] = enc_dec_circuits();
  BlockLayout lay{1};
  Circuit idec = ideal_decode_circuit();
  Circuit whole = compose(compose(enc.circuit, ec), idec);
  Circuit direct = identity_direct(1);
  std::size_t enc_d = enc.circuit.depth();
  std::vector<std::uint32_t> data;
  for (std::uint32_t i = 0; i < 7; ++i) data.push_back(lay.data(0, i));
  std::size_t stride = opts.quick ? 7 : 1;
  sweep_region(g, whole, direct, enc_d, enc_d + ec.depth(),
               std::int64_t(enc_d) - 1, data, opts.seeds, stride);
  // A fault-free EC must return (r<=1)-corrupted codewords to the code space
  // exactly: compare against the clean encoded state without any trailing
  // decode.
  Circuit enc_ec = compose(enc.circuit, ec);
  ChoiHarness hx(enc_ec, enc.circuit);
  for (auto q : data) {
    for (char l : {'X', 'Y', 'Z'}) {
      ++g.checked;
      FaultPattern f;
      f.set({std::uint32_t(enc_d - 1), q}, l);
      std::string why;
      if (!hx.match(f, opts.seeds, &why))
        g.fail(std::string("codespace exactness: ") + l + std::to_string(q) + ": " +
               why);
    }
  }
  return g;
}

VerifyReport run_verify(const VerifyOptions& opts) {
  VerifyReport rep;
  auto [enc, dec] = enc_dec_circuits();
  BlockLayout lay{1};
  Circuit idec = ideal_decode_circuit();
  std::vector<std::uint32_t> data;
  for (std::uint32_t i = 0; i < 7; ++i) data.push_back(lay.data(0, i));
  std::size_t stride = opts.quick ? 7 : 1;

  {
    auto& g = rep.add("fig3-prep");
    Circuit prep = build_gadget(GadgetRole::prep0).circuit;
    Circuit whole = compose(prep, idec);
    Circuit direct = stabilizer_prep(0);
    sweep_region(g, whole, direct, 0, prep.depth(), -1, {}, opts.seeds, stride);
  }
  rep.groups.push_back(verify_ec_contract(build_gadget(GadgetRole::ec).circuit, opts));
  {
    auto& g = rep.add("fig3-gate");
    for (Gate gate : {Gate::X, Gate::Z, Gate::H, Gate::S}) {
      Circuit ga = build_gadget(GadgetRole::gate, gate).circuit;
      Circuit whole = compose(compose(enc.circuit, ga), idec);
      Circuit direct;
      direct.n = 1;
      direct.inputs = {0};
      direct.outputs = {0};
      direct.add_layer();
      direct.push(Operation::unitary(gate, 0));
      std::size_t enc_d = enc.circuit.depth();
      sweep_region(g, whole, direct, enc_d, enc_d + ga.depth(),
                   std::int64_t(enc_d) - 1, data, opts.seeds, 1);
    }
    Circuit ga = build_gadget(GadgetRole::gate, Gate::CNOT).circuit;
    Circuit enc2 = tensor(enc.circuit, enc.circuit);
    Circuit idec2 = tensor(idec, idec);
    Circuit whole = compose(compose(enc2, ga), idec2);
    Circuit direct;
    direct.n = 2;
    direct.inputs = {0, 1};
    direct.outputs = {0, 1};
    direct.add_layer();
    direct.push(Operation::unitary(Gate::CNOT, 0, 1));
    std::size_t enc_d = enc2.depth();
    BlockLayout lay2{2};
    std::vector<std::uint32_t> data2 = data;
    for (std::uint32_t i = 0; i < 7; ++i) data2.push_back(lay2.data(1, i));
    sweep_region(g, whole, direct, enc_d, enc_d + ga.depth(),
                 std::int64_t(enc_d) - 1, data2, opts.seeds, opts.quick ? 5 : 1);
  }
  {
    auto& g = rep.add("fig3-meas");
    Circuit meas = build_gadget(GadgetRole::meas).circuit;
    for (int which : {0, 1}) {
      Circuit whole = compose(compose(stabilizer_prep(which), enc.circuit), meas);
      std::size_t meas_start = stabilizer_prep(which).depth() + enc.circuit.depth();
      std::vector<FaultPattern> cases;
      cases.push_back({});
      for (std::size_t t = meas_start; t < whole.depth(); ++t)
        for (std::uint32_t q = 0; q < whole.n; ++q)
          for (char l : {'X', 'Y', 'Z'}) {
            FaultPattern f;
            f.set({std::uint32_t(t), q}, l);
            cases.push_back(f);
          }
      for (auto q : data)
        for (char l : {'X', 'Y', 'Z'}) {
          FaultPattern f;
          f.set({std::uint32_t(meas_start - 1), q}, l);
          cases.push_back(f);
        }
      for (const auto& f : cases) {
        ++g.checked;
        Rng rng = make_rng(11, g.checked, 0);
        auto res = run(whole, f, rng);
        if (res.record.bits[0] != which)
          g.fail("logical readout flipped (input " + std::to_string(which) + ")");
      }
    }
  }
  {
    auto& g = rep.add("enc-dec");
    Circuit round = compose(enc.circuit, dec.circuit);
    for (int which = 0; which < 6; ++which) {
      ++g.checked;
      std::string why;
      if (!choi_match(compose(stabilizer_prep(which), round), {},
                      stabilizer_prep(which), opts.seeds, &why))
        g.fail("round trip state " + std::to_string(which));
    }
    std::size_t enc_d = enc.circuit.depth();
    for (auto q : data)
      for (char l : {'X', 'Y', 'Z'}) {
        ++g.checked;
        FaultPattern f;
        f.set({std::uint32_t(stabilizer_prep(2).depth() + enc_d - 1), q}, l);
        std::string why;
        if (!choi_match(compose(stabilizer_prep(2), round), f, stabilizer_prep(2),
                        opts.seeds, &why))
          g.fail("weight-1 recovery on q" + std::to_string(q));
      }
  }
  {
    auto& g = rep.add("routing");
    for (std::uint32_t r : {2u, 4u, 6u}) {
      ++g.checked;
      try {
        path_bilinear_routing(r);
      } catch (const std::exception& e) {
        g.fail(std::string("r=") + std::to_string(r) + ": " + e.what());
      }
    }
  }
  {
    auto& g = rep.add("level-reduction");
    Circuit cprep = build_c_prep();
    Circuit c1 = level_simulate(cprep, {1});
    Circuit idec2 = tensor(idec, idec);
    Circuit whole = compose(c1, idec2);
    std::size_t stride2 = opts.quick ? 23 : 1;
    for (std::size_t t = 0; t < c1.depth(); t += stride2) {
      for (std::uint32_t q = 0; q < c1.n; ++q) {
        for (char l : {'X', 'Y', 'Z'}) {
          ++g.checked;
          FaultPattern f;
          f.set({std::uint32_t(t), q}, l);
          Rng rng = make_rng(13, g.checked, 1);
          auto res = run(whole, f, rng);
          auto s1 = res.slot_of[whole.outputs[0]];
          auto s2 = res.slot_of[whole.outputs[1]];
          if (res.state.bell_status(s1, s2) != BellStatus::bell) {
            std::ostringstream os;
            os << "fault " << l << " at (" << t << "," << q << ")";
            g.fail(os.str());
          }
        }
      }
    }
  }
  return rep;
}

std::string format_report(const VerifyReport& rep) {
  std::ostringstream os;
  for (const auto& g : rep.groups) {
    os << (g.failed ? "FAIL" : "pass") << "  " << g.name << "  checked=" << g.checked
       << " failed=" << g.failed << "\n";
    for (const auto& f : g.failures) os << "      " << f << "\n";
  }
  return os.str();
}

}  // namespace qbell
