#include "qbell/noise.hpp"

#include "qbell/circuit_io.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qbell {

namespace {

int letter_x(char l) { return l == 'X' || l == 'Y'; }
int letter_z(char l) { return l == 'Z' || l == 'Y'; }
char make_letter(int x, int z) {
  if (x && z) return 'Y';
  if (x) return 'X';
  if (z) return 'Z';
  return 'I';
}

}  // namespace

void FaultPattern::set(WireCoord w, char letter) {
  if (letter == 'I')
    entries.erase(w);
  else
    entries[w] = letter;
}

char FaultPattern::at(WireCoord w) const {
  auto it = entries.find(w);
  return it == entries.end() ? 'I' : it->second;
}

void FaultPattern::mul(WireCoord w, char letter) {
  int x = letter_x(letter), z = letter_z(letter);
  auto it = entries.find(w);
  if (it != entries.end()) {
    x ^= letter_x(it->second);
    z ^= letter_z(it->second);
  }
  char out = make_letter(x, z);
  if (out == 'I')
    entries.erase(w);
  else
    entries[w] = out;
}

double NoiseSpec::wire_rate() const {
  switch (kind) {
    case Kind::none: return 0.0;
    case Kind::iid_depolarizing: return p;
    case Kind::iid_xz: return 1.0 - (1.0 - px) * (1.0 - pz);
  }
  return 0.0;
}

double cert_multiply(std::size_t r, double pmax) {
  return std::min(1.0, double(r) * std::pow(pmax, 1.0 / double(r)));
}

double cert_propagate(std::size_t depth, double p) {
  double d = double(depth);
  if (depth == 0) return p;
  return std::min(1.0, d * std::pow(2.0 * std::pow(p, std::exp2(-(d - 1.0))), 1.0 / d));
}

double cert_clean_unitary(std::size_t delta, double p) {
  double d = double(delta);
  if (delta == 0) return p;
  return std::min(1.0, 2.0 * std::sqrt(d) *
                           std::pow(2.0 * std::pow(p, std::exp2(-(d - 1.0))),
                                    1.0 / (2.0 * d)));
}

double cert_clean_adaptive(std::size_t u, std::size_t v, double p) {
  return std::min(1.0, 5.0 * std::pow(double(u) * p, 1.0 / (5.0 * double(v))));
}

double cert_inflate(std::size_t m, double p) {
  double m1 = double(m) + 1.0;
  return std::min(1.0, 2.0 * std::sqrt(m1) * std::pow(p, 1.0 / (2.0 * m1)));
}

double cert_alternating(double p) {
  return std::min(1.0, 8.0 * std::pow(2.0, 7.0 / 32.0) * std::pow(p, 1.0 / 64.0));
}

StrengthCertificate certificate_chain(const std::vector<std::string>& steps, double p0) {
  StrengthCertificate cert;
  cert.p = p0;
  for (const auto& step : steps) {
    auto colon = step.find(':');
    std::string name = step.substr(0, colon);
    std::vector<std::size_t> args;
    if (colon != std::string::npos) {
      std::istringstream as(step.substr(colon + 1));
      std::string a;
      while (std::getline(as, a, ',')) args.push_back(std::stoul(a));
    }
    double p = cert.p;
    if (name == "multiply" && args.size() == 1)
      cert.step(step, cert_multiply(args[0], p));
    else if (name == "propagate" && args.size() == 1)
      cert.step(step, cert_propagate(args[0], p));
    else if (name == "clean_unitary" && args.size() == 1)
      cert.step(step, cert_clean_unitary(args[0], p));
    else if (name == "clean_adaptive" && args.size() == 2)
      cert.step(step, cert_clean_adaptive(args[0], args[1], p));
    else if (name == "inflate" && args.size() == 1)
      cert.step(step, cert_inflate(args[0], p));
    else if (name == "alternating" && args.empty())
      cert.step(step, cert_alternating(p));
    else if (name == "postpone" && args.empty())
      cert.step(step, p);
    else
      throw std::invalid_argument("certificate_chain: unknown step " + step);
  }
  return cert;
}

namespace {

// Streams Bernoulli(prob) hits over positions [0, total) via geometric skips;
// calls hit(i) for each sampled position in increasing order.
template <typename F>
void stream_hits(std::size_t total, double prob, Rng& rng, F&& hit) {
  if (prob <= 0.0 || total == 0) return;
  if (prob >= 1.0) {
    for (std::size_t i = 0; i < total; ++i) hit(i);
    return;
  }
  double log1mp = std::log1p(-prob);
  std::size_t i = 0;
  while (i < total) {
    double u = double(rng() >> 11) * 0x1.0p-53;
    double jump = std::floor(std::log1p(-u) / log1mp);
    if (jump >= double(total - i)) return;
    i += std::size_t(jump);
    hit(i);
    ++i;
  }
}

}  // namespace

FaultPattern sample_noise_on_wires(const std::vector<WireCoord>& wires,
                                   const NoiseSpec& spec, Rng& rng) {
  FaultPattern f;
  switch (spec.kind) {
    case NoiseSpec::Kind::none:
      break;
    case NoiseSpec::Kind::iid_depolarizing:
      stream_hits(wires.size(), spec.p, rng, [&](std::size_t i) {
        static const char letters[3] = {'X', 'Y', 'Z'};
        f.mul(wires[i], letters[rng() % 3]);
      });
      break;
    case NoiseSpec::Kind::iid_xz:
      stream_hits(wires.size(), spec.px, rng,
                  [&](std::size_t i) { f.mul(wires[i], 'X'); });
      stream_hits(wires.size(), spec.pz, rng,
                  [&](std::size_t i) { f.mul(wires[i], 'Z'); });
      break;
  }
  return f;
}

FaultPattern sample_noise(const Circuit& c, const NoiseSpec& spec, Rng& rng) {
  // Implicit t-major wire grid; avoids materializing depth*n coordinates.
  FaultPattern f;
  std::size_t total = c.depth() * c.n;
  std::uint32_t n = c.n;
  auto wire = [n](std::size_t i) {
    return WireCoord{std::uint32_t(i / n), std::uint32_t(i % n)};
  };
  switch (spec.kind) {
    case NoiseSpec::Kind::none:
      break;
    case NoiseSpec::Kind::iid_depolarizing:
      stream_hits(total, spec.p, rng, [&](std::size_t i) {
        static const char letters[3] = {'X', 'Y', 'Z'};
        f.mul(wire(i), letters[rng() % 3]);
      });
      break;
    case NoiseSpec::Kind::iid_xz:
      stream_hits(total, spec.px, rng, [&](std::size_t i) { f.mul(wire(i), 'X'); });
      stream_hits(total, spec.pz, rng, [&](std::size_t i) { f.mul(wire(i), 'Z'); });
      break;
  }
  return f;
}

MultiplyResult multiply(const FaultPattern& f1, double p1, const FaultPattern& f2,
                        double p2) {
  MultiplyResult out;
  out.pattern = f1;
  for (const auto& [w, l] : f2.entries) out.pattern.mul(w, l);
  out.cert.p = std::max(p1, p2);
  out.cert.step("multiply:2", cert_multiply(2, std::max(p1, p2)));
  return out;
}

void conjugate_masks_through_layer(const Layer& layer, PauliOperator& p) {
  for (const auto& op : layer.ops) {
    if (op.kind != OpKind::Unitary) continue;
    std::uint32_t a = op.qubits[0];
    std::uint32_t b = op.qubits.size() > 1 ? op.qubits[1] : 0;
    bool xa = p.x_bit(a), za = p.z_bit(a);
    switch (op.gate) {
      case Gate::I:
      case Gate::X:
      case Gate::Y:
      case Gate::Z:
        break;  // phase only
      case Gate::H:
        p.set_x(a, za);
        p.set_z(a, xa);
        break;
      case Gate::S:
      case Gate::SDG:
        p.set_z(a, za ^ xa);
        break;
      case Gate::CNOT:
        p.set_x(b, p.x_bit(b) ^ xa);
        p.set_z(a, za ^ p.z_bit(b));
        break;
      case Gate::SWAP: {
        bool xb = p.x_bit(b), zb = p.z_bit(b);
        p.set_x(a, xb);
        p.set_z(a, zb);
        p.set_x(b, xa);
        p.set_z(b, za);
        break;
      }
    }
  }
}

PropagateResult propagate_to_end(const Circuit& c, const FaultPattern& f) {
  for (const auto& layer : c.layers)
    for (const auto& op : layer.ops)
      if (op.kind != OpKind::Unitary && op.kind != OpKind::Wait)
        throw std::invalid_argument("propagate_to_end: non-unitary operation");
  for (const auto& [w, l] : f.entries)
    if (w.t >= c.depth() || w.q >= c.n)
      throw std::invalid_argument("propagate_to_end: fault outside circuit");
  PropagateResult out;
  PauliOperator acc(c.n);
  std::uint32_t last = c.depth() - 1;
  for (std::uint32_t t = 0; t < c.depth(); ++t) {
    if (t > 0) conjugate_masks_through_layer(c.layers[t], acc);
    for (std::uint32_t q = 0; q < c.n; ++q) {
      char l = f.at({t, q});
      if (l == 'I') continue;
      if (letter_x(l)) acc.set_x(q, !acc.x_bit(q));
      if (letter_z(l)) acc.set_z(q, !acc.z_bit(q));
    }
  }
  for (std::uint32_t q = 0; q < c.n; ++q) {
    char l = make_letter(acc.x_bit(q), acc.z_bit(q));
    if (l != 'I') out.pattern.set({last, q}, l);
  }
  out.cert.step("propagate:" + std::to_string(c.depth()), cert_propagate(c.depth(), 1.0));
  return out;
}

PropagateResult clean_unitary_rects(const Circuit& c, const FaultPattern& f,
                                    const std::vector<Rectangle>& rects) {
  std::size_t max_delta = 0;
  for (const auto& r : rects) {
    std::string why;
    if (r.flavor != RectFlavor::unitary || !rectangle_valid(c, r, &why))
      throw std::invalid_argument("clean_unitary_rects: invalid rectangle: " + why);
    max_delta = std::max(max_delta, r.delta);
  }
  PropagateResult out;
  out.pattern = f;
  for (const auto& r : rects) {
    PauliOperator acc(c.n);
    for (std::size_t tau = r.t; tau < r.t + r.delta; ++tau) {
      if (tau > r.t) conjugate_masks_through_layer(c.layers[tau], acc);
      for (auto q : r.qubits) {
        WireCoord w{std::uint32_t(tau), q};
        char l = out.pattern.at(w);
        if (l == 'I') continue;
        out.pattern.set(w, 'I');
        if (letter_x(l)) acc.set_x(q, !acc.x_bit(q));
        if (letter_z(l)) acc.set_z(q, !acc.z_bit(q));
      }
    }
    conjugate_masks_through_layer(c.layers[r.t + r.delta], acc);
    for (auto q : r.qubits) {
      char l = make_letter(acc.x_bit(q), acc.z_bit(q));
      if (l != 'I') out.pattern.mul({std::uint32_t(r.t + r.delta), q}, l);
    }
  }
  out.cert.step("clean_unitary:" + std::to_string(max_delta),
                cert_clean_unitary(max_delta, 1.0));
  return out;
}

PropagateResult clean_adaptive_rects(const Circuit& c, const FaultPattern& f,
                                     const std::vector<Rectangle>& rects) {
  PropagateResult out;
  out.pattern = f;
  std::size_t umax = 0, vmax = 0;
  for (const auto& r : rects) {
    if (r.flavor != RectFlavor::adaptive || r.delta != 2)
      throw std::invalid_argument("clean_adaptive_rects: not an adaptive rectangle");
    // Locate the correction op in layer t+2 and validate linear + read-once.
    const Layer& meas_layer = c.layers[r.t + 1];
    const Layer& corr_layer = c.layers[r.t + 2];
    std::vector<std::uint32_t> meas_bits;
    std::map<std::uint32_t, std::uint32_t> bit_of_qubit;
    for (const auto& op : meas_layer.ops) {
      if (op.kind == OpKind::MeasureZ) {
        for (auto q : r.omega1)
          if (op.qubits[0] == q) {
            meas_bits.push_back(op.out_bit);
            bit_of_qubit[q] = op.out_bit;
          }
      }
    }
    if (meas_bits.size() != r.omega1.size())
      throw std::invalid_argument("clean_adaptive_rects: omega1 not fully measured");
    const Operation* corr = nullptr;
    for (const auto& op : corr_layer.ops)
      if (op.kind == OpKind::ControlledPauli && op.qubits == r.omega2) corr = &op;
    if (!corr || corr->cascade->stages.size() != 1 ||
        !corr->cascade->stages[0].fn.is_linear() ||
        corr->cascade->stages[0].fn.affine.any())
      throw std::invalid_argument("clean_adaptive_rects: correction not linear");
    const ClassicalFunction& fn = corr->cascade->stages[0].fn;
    // Read-once: the measured bits appear only in this correction.
    for (std::size_t t = 0; t < c.layers.size(); ++t) {
      for (const auto& op : c.layers[t].ops) {
        auto uses = [&](const std::vector<std::uint32_t>& srcs) {
          for (auto s : srcs)
            for (auto b : meas_bits)
              if (s == b && &op != corr)
                throw std::invalid_argument("clean_adaptive_rects: not read-once");
        };
        if (op.kind == OpKind::ControlledPauli)
          for (const auto& st : op.cascade->stages) uses(st.fn.sources);
        if (op.kind == OpKind::ClassicalDecode) uses(op.decode->sources);
      }
    }
    umax = std::max(umax, r.omega1.size());
    vmax = std::max(vmax, r.omega2.size());

    // Flip vector e from X/Y components on the measured qubits' left wires.
    std::vector<std::uint8_t> e_by_bit(c.num_cbits, 0);
    for (auto q : r.omega1) {
      WireCoord w{std::uint32_t(r.t), q};
      char l = out.pattern.at(w);
      if (letter_x(l)) e_by_bit[bit_of_qubit[q]] = 1;
      out.pattern.set(w, 'I');
      // Interior wire on a measured qubit precedes repreparation: dropped.
      out.pattern.set({std::uint32_t(r.t + 1), q}, 'I');
    }
    // Compensating Pauli P(e) on omega2, composed with the pushed-through
    // left/interior errors.
    PauliMask pe = fn.eval(e_by_bit);
    for (std::size_t i = 0; i < r.omega2.size(); ++i) {
      std::uint32_t q = r.omega2[i];
      int x = pe.x.get(i), z = pe.z.get(i);
      for (std::uint32_t tau : {std::uint32_t(r.t), std::uint32_t(r.t + 1)}) {
        char l = out.pattern.at({tau, q});
        if (l == 'I') continue;
        out.pattern.set({tau, q}, 'I');
        x ^= letter_x(l);
        z ^= letter_z(l);
      }
      char l = make_letter(x, z);
      if (l != 'I') out.pattern.mul({std::uint32_t(r.t + 2), q}, l);
    }
  }
  out.cert.step("clean_adaptive:" + std::to_string(umax) + "," + std::to_string(vmax),
                cert_clean_adaptive(umax, vmax, 1.0));
  return out;
}

std::string serialize_faults(const FaultPattern& f) {
  std::ostringstream os;
  for (const auto& [w, l] : f.entries)
    os << "fault t=" << w.t << " q=" << w.q << " p=" << l << "\n";
  return os.str();
}

FaultPattern parse_faults(const std::string& text) {
  FaultPattern f;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok != "fault") throw ParseError(lineno, "bad fault line");
    WireCoord w{0, 0};
    char letter = 'I';
    while (ls >> tok) {
      if (tok.rfind("t=", 0) == 0)
        w.t = std::stoul(tok.substr(2));
      else if (tok.rfind("q=", 0) == 0)
        w.q = std::stoul(tok.substr(2));
      else if (tok.rfind("p=", 0) == 0)
        letter = tok[2];
      else
        throw ParseError(lineno, "bad fault line");
    }
    if (letter != 'X' && letter != 'Y' && letter != 'Z') throw ParseError(lineno, "bad fault line");
    f.set(w, letter);
  }
  return f;
}

}  // namespace qbell
