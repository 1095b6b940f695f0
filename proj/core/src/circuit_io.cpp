#include "qbell/circuit_io.hpp"

#include <algorithm>
#include <sstream>

namespace qbell {

std::string bits_to_hex(const Bits& b) {
  if (b.n == 0) return "0";
  std::size_t nibbles = (b.n + 3) / 4;
  std::string out(nibbles, '0');
  for (std::size_t i = 0; i < nibbles; ++i) {
    unsigned v = 0;
    for (unsigned j = 0; j < 4; ++j) {
      std::size_t bit = 4 * i + j;
      if (bit < b.n && b.get(bit)) v |= 1u << j;
    }
    out[nibbles - 1 - i] = "0123456789abcdef"[v];
  }
  // Trim leading zeros but keep at least one digit.
  std::size_t first = out.find_first_not_of('0');
  return first == std::string::npos ? "0" : out.substr(first);
}

Bits hex_to_bits(const std::string& s, std::size_t n) {
  Bits b(n);
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[s.size() - 1 - i];
    unsigned v;
    if (c >= '0' && c <= '9')
      v = c - '0';
    else if (c >= 'a' && c <= 'f')
      v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F')
      v = c - 'A' + 10;
    else
      throw std::invalid_argument("bad hex digit");
    for (unsigned j = 0; j < 4; ++j)
      if ((v >> j) & 1) {
        std::size_t bit = 4 * i + j;
        if (bit >= n) throw std::invalid_argument("hex value exceeds width");
        b.set(bit, true);
      }
  }
  return b;
}

namespace {

std::string join_hex_rows(const std::vector<Bits>& rows) {
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) out += ";";
    out += bits_to_hex(rows[i]);
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Serializes the function masks. Internal storage is per-source columns over
// targets; the text format uses per-target rows over sources (the A, B
// matrices of P(z) = X(Az)Z(Bz)).
void emit_fn(std::ostringstream& os, const ClassicalFunction& fn) {
  os << " src=";
  if (fn.sources.empty()) os << "-";
  for (std::size_t i = 0; i < fn.sources.size(); ++i)
    os << (i ? "," : "") << "c" << fn.sources[i];
  std::size_t nt = fn.num_targets();
  std::vector<Bits> arows(nt, Bits(fn.sources.size()));
  std::vector<Bits> brows(nt, Bits(fn.sources.size()));
  for (std::size_t j = 0; j < fn.sources.size(); ++j) {
    for (std::size_t t = 0; t < nt; ++t) {
      if (fn.columns[j].x.get(t)) arows[t].set(j, true);
      if (fn.columns[j].z.get(t)) brows[t].set(j, true);
    }
  }
  os << " A=" << join_hex_rows(arows) << " B=" << join_hex_rows(brows);
  os << " a0=" << bits_to_hex(fn.affine.x) << " b0=" << bits_to_hex(fn.affine.z);
  for (const auto& term : fn.terms) {
    os << " lutK=" << join_hex_rows(term.key_rows) << " lutTX=";
    for (std::size_t e = 0; e < term.table.size(); ++e)
      os << (e ? "," : "") << bits_to_hex(term.table[e].x);
    os << " lutTZ=";
    for (std::size_t e = 0; e < term.table.size(); ++e)
      os << (e ? "," : "") << bits_to_hex(term.table[e].z);
  }
}

void emit_bitfn(std::ostringstream& os, const BitFn& fn) {
  os << " src=";
  if (fn.sources.empty()) os << "-";
  for (std::size_t i = 0; i < fn.sources.size(); ++i)
    os << (i ? "," : "") << "c" << fn.sources[i];
  os << " L=" << bits_to_hex(fn.lin) << " k=" << int(fn.affine);
  for (const auto& term : fn.terms) {
    os << " lutK=" << join_hex_rows(term.key_rows) << " lutT=";
    for (std::size_t e = 0; e < term.table.size(); ++e) os << int(term.table[e]);
  }
}

struct TokenCursor {
  std::vector<std::string> toks;
  std::size_t i = 0;
  std::size_t line;
  explicit TokenCursor(std::size_t l) : line(l) {}
  bool done() const { return i >= toks.size(); }
  const std::string& peek() const { return toks[i]; }
  std::string next() { return toks[i++]; }
};

std::uint32_t parse_qubit(const std::string& s, std::size_t line) {
  if (s.size() < 2 || s[0] != 'q') throw ParseError(line, "expected qubit, got " + s);
  return std::stoul(s.substr(1));
}

std::uint32_t parse_cbit(const std::string& s, std::size_t line) {
  if (s.size() < 2 || s[0] != 'c') throw ParseError(line, "expected cbit, got " + s);
  return std::stoul(s.substr(1));
}

std::vector<std::uint32_t> parse_cbit_list(const std::string& s, std::size_t line) {
  std::vector<std::uint32_t> out;
  if (s == "-") return out;
  for (const auto& p : split(s, ',')) out.push_back(parse_cbit(p, line));
  return out;
}

}  // namespace

std::string serialize(const Circuit& c) {
  std::ostringstream os;
  os << "circuit n=" << c.n << " in=";
  if (c.inputs.empty()) os << "-";
  for (std::size_t i = 0; i < c.inputs.size(); ++i)
    os << (i ? "," : "") << c.inputs[i];
  os << " out=";
  if (c.outputs.empty()) os << "-";
  for (std::size_t i = 0; i < c.outputs.size(); ++i)
    os << (i ? "," : "") << c.outputs[i];
  os << " cbits=" << c.num_cbits << "\n";
  if (!c.graph_tag.empty()) os << "tag " << c.graph_tag << "\n";
  for (std::size_t t = 0; t < c.layers.size(); ++t) {
    os << "layer " << t << ":\n";
    for (const auto& op : c.layers[t].ops) {
      switch (op.kind) {
        case OpKind::Prep0:
          os << "prep0 q" << op.qubits[0] << "\n";
          break;
        case OpKind::MeasureZ:
          os << "measz q" << op.qubits[0] << " -> c" << op.out_bit << "\n";
          break;
        case OpKind::Discard:
          os << "discard q" << op.qubits[0] << "\n";
          break;
        case OpKind::Wait:
          os << "wait q" << op.qubits[0] << "\n";
          break;
        case OpKind::Unitary:
          os << gate_name(op.gate);
          for (auto q : op.qubits) os << " q" << q;
          os << "\n";
          break;
        case OpKind::ControlledPauli: {
          std::ostringstream line;
          line << "cpauli tgt=";
          for (std::size_t i = 0; i < op.qubits.size(); ++i)
            line << (i ? "," : "") << "q" << op.qubits[i];
          for (std::size_t s = 0; s < op.cascade->stages.size(); ++s) {
            const auto& st = op.cascade->stages[s];
            if (s) line << " |";
            if (st.is_decode) {
              line << " dec=c" << st.decode_bit;
              emit_bitfn(line, st.decode);
              continue;
            }
            emit_fn(line, st.fn);
            for (const auto& f : st.flips) {
              line << " flip=c" << f.bit;
              emit_bitfn(line, f.indicator);
            }
          }
          os << line.str() << "\n";
          break;
        }
        case OpKind::ClassicalDecode: {
          std::ostringstream line;
          line << "cdec c" << op.out_bit;
          emit_bitfn(line, *op.decode);
          os << line.str() << "\n";
          break;
        }
      }
    }
  }
  return os.str();
}

namespace {

struct KV {
  std::string key, val;
};

std::optional<KV> as_kv(const std::string& tok) {
  auto eq = tok.find('=');
  if (eq == std::string::npos) return std::nullopt;
  return KV{tok.substr(0, eq), tok.substr(eq + 1)};
}

std::vector<Bits> parse_hex_rows(const std::string& s, std::size_t width) {
  std::vector<Bits> rows;
  for (const auto& part : split(s, ';')) rows.push_back(hex_to_bits(part, width));
  return rows;
}

// Parses "src=... A=... B=... a0=... b0=... [lutK= lutTX= lutTZ=]*" tokens.
ClassicalFunction parse_fn(TokenCursor& cur, std::size_t num_targets) {
  std::size_t line = cur.line;
  auto kv0 = as_kv(cur.next());
  if (!kv0 || kv0->key != "src") throw ParseError(line, "cpauli: expected src=");
  ClassicalFunction fn(parse_cbit_list(kv0->val, line), num_targets);
  std::size_t ns = fn.sources.size();
  std::vector<Bits> arows, brows;
  while (!cur.done()) {
    auto kv = as_kv(cur.peek());
    if (!kv) break;
    if (kv->key == "A") {
      arows = parse_hex_rows(kv->val, ns);
      cur.next();
    } else if (kv->key == "B") {
      brows = parse_hex_rows(kv->val, ns);
      cur.next();
    } else if (kv->key == "a0") {
      fn.affine.x = hex_to_bits(kv->val, num_targets);
      cur.next();
    } else if (kv->key == "b0") {
      fn.affine.z = hex_to_bits(kv->val, num_targets);
      cur.next();
    } else if (kv->key == "lutK") {
      ClassicalFunction::Term term;
      term.key_rows = parse_hex_rows(kv->val, ns);
      cur.next();
      auto tx = as_kv(cur.next());
      auto tz = as_kv(cur.next());
      if (!tx || tx->key != "lutTX" || !tz || tz->key != "lutTZ")
        throw ParseError(line, "cpauli: expected lutTX/lutTZ after lutK");
      auto xs = split(tx->val, ',');
      auto zs = split(tz->val, ',');
      if (xs.size() != zs.size() || xs.size() != (std::size_t(1) << term.key_rows.size()))
        throw ParseError(line, "cpauli: lut table size mismatch");
      for (std::size_t e = 0; e < xs.size(); ++e) {
        PauliMask pm(num_targets);
        pm.x = hex_to_bits(xs[e], num_targets);
        pm.z = hex_to_bits(zs[e], num_targets);
        term.table.push_back(std::move(pm));
      }
      fn.terms.push_back(std::move(term));
    } else {
      break;
    }
  }
  if (arows.size() != num_targets && !(num_targets == 0 && arows.empty()))
    throw ParseError(line, "cpauli: A row count mismatch");
  if (brows.size() != num_targets && !(num_targets == 0 && brows.empty()))
    throw ParseError(line, "cpauli: B row count mismatch");
  for (std::size_t t = 0; t < num_targets; ++t) {
    for (std::size_t j = 0; j < ns; ++j) {
      if (arows[t].get(j)) fn.columns[j].x.set(t, true);
      if (brows[t].get(j)) fn.columns[j].z.set(t, true);
    }
  }
  return fn;
}

BitFn parse_bitfn(TokenCursor& cur) {
  std::size_t line = cur.line;
  auto kv0 = as_kv(cur.next());
  if (!kv0 || kv0->key != "src") throw ParseError(line, "expected src=");
  BitFn fn(parse_cbit_list(kv0->val, line));
  std::size_t ns = fn.sources.size();
  while (!cur.done()) {
    auto kv = as_kv(cur.peek());
    if (!kv) break;
    if (kv->key == "L") {
      fn.lin = hex_to_bits(kv->val, ns);
      cur.next();
    } else if (kv->key == "k") {
      fn.affine = std::stoi(kv->val) & 1;
      cur.next();
    } else if (kv->key == "lutK") {
      BitFn::Term term;
      term.key_rows = parse_hex_rows(kv->val, ns);
      cur.next();
      auto tt = as_kv(cur.next());
      if (!tt || tt->key != "lutT") throw ParseError(line, "expected lutT after lutK");
      if (tt->val.size() != (std::size_t(1) << term.key_rows.size()))
        throw ParseError(line, "lutT size mismatch");
      for (char ch : tt->val) term.table.push_back(ch == '1');
      fn.terms.push_back(std::move(term));
    } else {
      break;
    }
  }
  return fn;
}

std::vector<std::uint32_t> parse_id_list(const std::string& s, std::size_t line) {
  std::vector<std::uint32_t> out;
  if (s == "-") return out;
  for (const auto& p : split(s, ',')) {
    try {
      out.push_back(std::stoul(p));
    } catch (...) {
      throw ParseError(line, "bad id list: " + s);
    }
  }
  return out;
}

}  // namespace

Circuit parse_circuit(const std::string& text) {
  Circuit c;
  bool have_header = false;
  std::istringstream is(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    std::istringstream ls(raw);
    std::vector<std::string> toks;
    std::string tok;
    while (ls >> tok) toks.push_back(tok);
    if (toks.empty()) continue;
    const std::string& head = toks[0];
    if (head == "circuit") {
      for (std::size_t i = 1; i < toks.size(); ++i) {
        auto kv = as_kv(toks[i]);
        if (!kv) throw ParseError(lineno, "bad header token " + toks[i]);
        if (kv->key == "n")
          c.n = std::stoul(kv->val);
        else if (kv->key == "in")
          c.inputs = parse_id_list(kv->val, lineno);
        else if (kv->key == "out")
          c.outputs = parse_id_list(kv->val, lineno);
        else if (kv->key == "cbits")
          c.num_cbits = std::stoul(kv->val);
        else
          throw ParseError(lineno, "unknown header key " + kv->key);
      }
      have_header = true;
      continue;
    }
    if (!have_header) throw ParseError(lineno, "missing circuit header");
    if (head == "tag") {
      c.graph_tag = toks.size() > 1 ? toks[1] : "";
      continue;
    }
    if (head == "layer") {
      c.add_layer();
      continue;
    }
    if (c.layers.empty()) throw ParseError(lineno, "operation before first layer");
    if (head == "prep0") {
      c.push(Operation::prep0(parse_qubit(toks.at(1), lineno)));
    } else if (head == "measz") {
      if (toks.size() < 4 || toks[2] != "->")
        throw ParseError(lineno, "measz syntax: measz q<i> -> c<j>");
      c.push(Operation::measure_z(parse_qubit(toks[1], lineno),
                                  parse_cbit(toks[3], lineno)));
    } else if (head == "wait") {
      // Waits are implicit internally; accept and drop.
      parse_qubit(toks.at(1), lineno);
    } else if (head == "discard") {
      c.push(Operation::discard(parse_qubit(toks.at(1), lineno)));
    } else if (head == "cpauli") {
      TokenCursor cur(lineno);
      cur.toks.assign(toks.begin() + 1, toks.end());
      auto kvt = as_kv(cur.next());
      std::vector<std::uint32_t> targets;
      if (kvt && kvt->key == "tgt") {
        for (const auto& p : split(kvt->val, ','))
          targets.push_back(parse_qubit(p, lineno));
      } else if (kvt && (kvt->key == "lin" || kvt->key == "src")) {
        throw ParseError(lineno, "cpauli: expected tgt= first");
      } else {
        throw ParseError(lineno, "cpauli: expected tgt=");
      }
      // Accept the compact legacy form `cpauli lin A=.. B=.. src=.. tgt=..`
      // only via the canonical ordering above.
      Operation op;
      op.kind = OpKind::ControlledPauli;
      op.qubits = targets;
      op.cascade = std::make_shared<CorrectionCascade>();
      while (!cur.done()) {
        if (cur.peek() == "|") {
          cur.next();
          continue;
        }
        CorrectionStage st;
        auto kvd = as_kv(cur.peek());
        if (kvd && kvd->key == "dec") {
          cur.next();
          st.is_decode = true;
          st.decode_bit = parse_cbit(kvd->val, lineno);
          st.decode = parse_bitfn(cur);
          op.cascade->stages.push_back(std::move(st));
          continue;
        }
        st.fn = parse_fn(cur, targets.size());
        while (!cur.done()) {
          auto kv = as_kv(cur.peek());
          if (!kv || kv->key != "flip") break;
          cur.next();
          CorrectionStage::Flip f;
          f.bit = parse_cbit(kv->val, lineno);
          f.indicator = parse_bitfn(cur);
          st.flips.push_back(std::move(f));
        }
        op.cascade->stages.push_back(std::move(st));
      }
      if (op.cascade->stages.empty())
        throw ParseError(lineno, "cpauli: missing stage");
      c.push(std::move(op));
    } else if (head == "cdec") {
      TokenCursor cur(lineno);
      cur.toks.assign(toks.begin() + 1, toks.end());
      std::uint32_t bit = parse_cbit(cur.next(), lineno);
      BitFn fn = parse_bitfn(cur);
      c.push(Operation::classical_decode(std::move(fn), bit));
    } else {
      auto g = gate_from_name(head);
      if (!g) throw ParseError(lineno, "unknown operation " + head);
      if (gate_is_two_qubit(*g)) {
        c.push(Operation::unitary(*g, parse_qubit(toks.at(1), lineno),
                                  parse_qubit(toks.at(2), lineno)));
      } else {
        c.push(Operation::unitary(*g, parse_qubit(toks.at(1), lineno)));
      }
    }
  }
  if (!have_header) throw ParseError(0, "empty circuit text");
  return c;
}

}  // namespace qbell
