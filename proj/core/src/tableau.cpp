#include "qbell/tableau.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <stdexcept>

namespace qbell {

StabilizerState::StabilizerState(std::size_t n)
    : n_(n), w_(words_for(n)), xs_(2 * n * w_, 0), zs_(2 * n * w_, 0), ph_(2 * n, 0) {
  for (std::size_t j = 0; j < n; ++j) {
    xrow(j)[j >> 6] |= Word(1) << (j & 63);          // destabilizer X_j
    zrow(n + j)[j >> 6] |= Word(1) << (j & 63);      // stabilizer Z_j
  }
}

void StabilizerState::rmul(std::size_t i, std::size_t j) {
  std::size_t anti = 0;
  Word* xi = xrow(i);
  Word* zi = zrow(i);
  const Word* xj = xrow(j);
  const Word* zj = zrow(j);
  for (std::size_t k = 0; k < w_; ++k) {
    anti += std::popcount(zi[k] & xj[k]);
    xi[k] ^= xj[k];
    zi[k] ^= zj[k];
  }
  ph_[i] = (ph_[i] + ph_[j] + 2 * (anti & 1)) & 3;
}

PauliOperator StabilizerState::row_pauli(std::size_t r) const {
  PauliOperator p(n_);
  std::copy(xrow(r), xrow(r) + w_, p.x_words().begin());
  std::copy(zrow(r), zrow(r) + w_, p.z_words().begin());
  p.set_phase(ph_[r]);
  return p;
}

PauliOperator StabilizerState::stabilizer_row(std::size_t j) const {
  return row_pauli(n_ + j);
}
PauliOperator StabilizerState::destabilizer_row(std::size_t j) const {
  return row_pauli(j);
}

void StabilizerState::apply(Gate g, std::size_t q0, std::size_t q1) {
  if (q0 >= n_ || (gate_is_two_qubit(g) && q1 >= n_))
    throw std::out_of_range("tableau_apply: qubit out of range");
  if (g == Gate::I) return;
  Word m0 = Word(1) << (q0 & 63);
  std::size_t w0 = q0 >> 6;
  Word m1 = 0;
  std::size_t w1 = 0;
  if (gate_is_two_qubit(g)) {
    m1 = Word(1) << (q1 & 63);
    w1 = q1 >> 6;
  }
  for (std::size_t r = 0; r < 2 * n_; ++r) {
    Word* x = xrow(r);
    Word* z = zrow(r);
    bool xb = x[w0] & m0, zb = z[w0] & m0;
    switch (g) {
      case Gate::I: break;
      case Gate::X:
        if (zb) ph_[r] = (ph_[r] + 2) & 3;
        break;
      case Gate::Y:
        if (xb != zb) ph_[r] = (ph_[r] + 2) & 3;
        break;
      case Gate::Z:
        if (xb) ph_[r] = (ph_[r] + 2) & 3;
        break;
      case Gate::H:
        if (xb && zb) ph_[r] = (ph_[r] + 2) & 3;
        x[w0] = (x[w0] & ~m0) | (zb ? m0 : 0);
        z[w0] = (z[w0] & ~m0) | (xb ? m0 : 0);
        break;
      case Gate::S:
        if (xb) {
          ph_[r] = (ph_[r] + 1) & 3;
          z[w0] ^= m0;
        }
        break;
      case Gate::SDG:
        if (xb) {
          ph_[r] = (ph_[r] + 3) & 3;
          z[w0] ^= m0;
        }
        break;
      case Gate::CNOT:
        // No phase change in the i^a X(x)Z(z) convention.
        if (xb) x[w1] ^= m1;
        if (z[w1] & m1) z[w0] ^= m0;
        break;
      case Gate::SWAP: {
        bool xb1 = x[w1] & m1, zb1 = z[w1] & m1;
        x[w0] = (x[w0] & ~m0) | (xb1 ? m0 : 0);
        z[w0] = (z[w0] & ~m0) | (zb1 ? m0 : 0);
        x[w1] = (x[w1] & ~m1) | (xb ? m1 : 0);
        z[w1] = (z[w1] & ~m1) | (zb ? m1 : 0);
        break;
      }
    }
  }
}

void StabilizerState::apply_pauli(const PauliOperator& p) {
  assert(p.num_qubits() == n_);
  const auto& px = p.x_words();
  const auto& pz = p.z_words();
  for (std::size_t r = 0; r < 2 * n_; ++r) {
    const Word* x = xrow(r);
    const Word* z = zrow(r);
    std::size_t s = 0;
    for (std::size_t k = 0; k < w_; ++k)
      s += std::popcount(x[k] & pz[k]) + std::popcount(z[k] & px[k]);
    if (s & 1) ph_[r] = (ph_[r] + 2) & 3;
  }
}

int StabilizerState::do_measure(std::size_t q, const std::function<int()>& sample_bit) {
  std::size_t w0 = q >> 6;
  Word m0 = Word(1) << (q & 63);
  std::size_t p = 2 * n_;
  for (std::size_t r = n_; r < 2 * n_; ++r) {
    if (xrow(r)[w0] & m0) {
      p = r;
      break;
    }
  }
  if (p < 2 * n_) {
    // Random outcome.
    for (std::size_t r = 0; r < 2 * n_; ++r)
      if (r != p && (xrow(r)[w0] & m0)) rmul(r, p);
    // Destabilizer partner takes the old stabilizer row.
    std::size_t d = p - n_;
    std::copy(xrow(p), xrow(p) + w_, xrow(d));
    std::copy(zrow(p), zrow(p) + w_, zrow(d));
    ph_[d] = ph_[p];
    int bit = sample_bit();
    std::fill(xrow(p), xrow(p) + w_, 0);
    std::fill(zrow(p), zrow(p) + w_, 0);
    zrow(p)[w0] |= m0;
    ph_[p] = bit ? 2 : 0;
    return bit;
  }
  // Deterministic: accumulate stabilizer rows indicated by destabilizer X bits.
  PauliOperator scratch(n_);
  std::size_t anti_acc = 0;
  std::uint8_t phase_acc = 0;
  auto& sx = scratch.x_words();
  auto& sz = scratch.z_words();
  for (std::size_t j = 0; j < n_; ++j) {
    if (xrow(j)[w0] & m0) {
      const Word* xj = xrow(n_ + j);
      const Word* zj = zrow(n_ + j);
      std::size_t anti = 0;
      for (std::size_t k = 0; k < w_; ++k) {
        anti += std::popcount(sz[k] & xj[k]);
        sx[k] ^= xj[k];
        sz[k] ^= zj[k];
      }
      anti_acc += anti & 1;
      phase_acc = (phase_acc + ph_[n_ + j] + 2 * (anti & 1)) & 3;
    }
  }
  (void)anti_acc;
  // scratch must now be +-Z_q.
  return phase_acc == 2 ? 1 : 0;
}

int StabilizerState::measure_z(std::size_t q, Rng& rng) {
  return do_measure(q, [&rng]() { return int(rng() & 1); });
}

std::optional<int> StabilizerState::deterministic_z(std::size_t q) const {
  std::size_t w0 = q >> 6;
  Word m0 = Word(1) << (q & 63);
  for (std::size_t r = n_; r < 2 * n_; ++r)
    if (xrow(r)[w0] & m0) return std::nullopt;
  // Safe: the deterministic branch of do_measure does not mutate state.
  return const_cast<StabilizerState*>(this)->do_measure(q, []() { return 0; });
}

int StabilizerState::measure_z_forced(std::size_t q, int forced, bool* was_random) {
  bool random = false;
  int out = do_measure(q, [&]() {
    random = true;
    return forced;
  });
  if (was_random) *was_random = random;
  return out;
}

void StabilizerState::reset_to_zero(std::size_t q, Rng& rng) {
  if (measure_z(q, rng)) apply(Gate::X, q);
}

std::vector<PauliOperator> StabilizerState::canonical_stabilizers() const {
  std::vector<PauliOperator> rows;
  rows.reserve(n_);
  for (std::size_t j = 0; j < n_; ++j) rows.push_back(stabilizer_row(j));
  std::size_t r = 0;
  // X-block pivots first; rows below the X rank are then pure Z, and their
  // pivots clear z-bits from every row (including the mixed X rows) so equal
  // groups canonicalize identically.
  for (std::size_t q = 0; q < n_ && r < n_; ++q) {
    std::size_t piv = r;
    while (piv < n_ && !rows[piv].x_bit(q)) ++piv;
    if (piv == n_) continue;
    std::swap(rows[r], rows[piv]);
    for (std::size_t i = 0; i < n_; ++i)
      if (i != r && rows[i].x_bit(q)) rows[i] *= rows[r];
    ++r;
  }
  for (std::size_t q = 0; q < n_ && r < n_; ++q) {
    std::size_t piv = r;
    while (piv < n_ && !rows[piv].z_bit(q)) ++piv;
    if (piv == n_) continue;
    std::swap(rows[r], rows[piv]);
    for (std::size_t i = 0; i < n_; ++i)
      if (i != r && rows[i].z_bit(q)) rows[i] *= rows[r];
    ++r;
  }
  // Rows past r are identity only if the generating set was redundant, which
  // cannot happen for a valid tableau.
  return rows;
}

bool StabilizerState::same_state_as(const StabilizerState& other) const {
  if (n_ != other.n_) return false;
  return canonical_stabilizers() == other.canonical_stabilizers();
}

std::optional<int> StabilizerState::sign_of_in_group(const PauliOperator& p) const {
  assert(p.num_qubits() == n_);
  auto rows = canonical_stabilizers();
  PauliOperator acc = p;
  for (const auto& row : rows) {
    // Pivot of this row: first X bit, else first Z bit.
    std::size_t q = 0;
    bool isx = false;
    bool found = false;
    for (std::size_t k = 0; k < n_ && !found; ++k) {
      if (row.x_bit(k)) {
        q = k;
        isx = true;
        found = true;
      }
    }
    for (std::size_t k = 0; k < n_ && !found; ++k) {
      if (row.z_bit(k)) {
        q = k;
        isx = false;
        found = true;
      }
    }
    if (!found) continue;
    bool hit = isx ? acc.x_bit(q) : (!acc.x_bit(q) && acc.z_bit(q));
    if (hit) acc *= row;
  }
  if (!acc.masks_zero()) return std::nullopt;
  if (acc.phase() == 0) return 1;
  if (acc.phase() == 2) return -1;
  return std::nullopt;  // would require non-Hermitian group element
}

BellStatus StabilizerState::bell_status(std::size_t q1, std::size_t q2) const {
  PauliOperator xx(n_), zz(n_);
  xx.set_letter(q1, 'X');
  xx.set_letter(q2, 'X');
  zz.set_letter(q1, 'Z');
  zz.set_letter(q2, 'Z');
  auto sx = sign_of_in_group(xx);
  auto sz = sign_of_in_group(zz);
  if (sx && sz) return (*sx == 1 && *sz == 1) ? BellStatus::bell : BellStatus::not_bell;
  // Pure reduced state without both XX and ZZ present is a non-Bell pure
  // state; mixed when fewer than two canonical rows live on {q1,q2}.
  auto rows = canonical_stabilizers();
  std::size_t local = 0;
  for (const auto& row : rows) {
    bool outside = false;
    for (std::size_t q = 0; q < n_; ++q) {
      if (q == q1 || q == q2) continue;
      if (row.x_bit(q) || row.z_bit(q)) {
        outside = true;
        break;
      }
    }
    if (!outside && !row.masks_zero()) ++local;
  }
  return local >= 2 ? BellStatus::not_bell : BellStatus::mixed;
}

std::optional<std::vector<PauliOperator>> StabilizerState::reduced_canonical(
    const std::vector<std::size_t>& keep) const {
  std::vector<bool> keep_mask(n_, false);
  for (auto q : keep) keep_mask[q] = true;
  auto rows = canonical_stabilizers();
  // Eliminate support on dropped qubits: re-run elimination with dropped
  // qubits ordered first so rows with support there get pivoted away.
  std::vector<std::size_t> order;
  for (std::size_t q = 0; q < n_; ++q)
    if (!keep_mask[q]) order.push_back(q);
  for (auto q : keep) order.push_back(q);
  std::size_t r = 0;
  auto eliminate = [&](bool xblock) {
    for (std::size_t oi = 0; oi < order.size() && r < rows.size(); ++oi) {
      std::size_t q = order[oi];
      auto bit_of = [&](const PauliOperator& p) {
        return xblock ? p.x_bit(q) : p.z_bit(q);
      };
      std::size_t piv = r;
      while (piv < rows.size() &&
             (!bit_of(rows[piv]) || (!xblock && rows[piv].x_bit(q)))) {
        // Z-phase pivots must be free of an X component at the pivot column.
        ++piv;
      }
      if (piv == rows.size()) continue;
      std::swap(rows[r], rows[piv]);
      for (std::size_t i = 0; i < rows.size(); ++i)
        if (i != r && bit_of(rows[i])) rows[i] *= rows[r];
      ++r;
    }
  };
  eliminate(true);
  eliminate(false);
  // Collect rows entirely supported on `keep`, mapped down to keep-indices.
  std::vector<std::size_t> down(n_, SIZE_MAX);
  for (std::size_t i = 0; i < keep.size(); ++i) down[keep[i]] = i;
  std::vector<PauliOperator> out;
  std::size_t expect = keep.size();
  for (const auto& row : rows) {
    bool outside = false;
    for (std::size_t q = 0; q < n_; ++q) {
      if (keep_mask[q]) continue;
      if (row.x_bit(q) || row.z_bit(q)) {
        outside = true;
        break;
      }
    }
    if (outside) continue;
    PauliOperator small(keep.size());
    small.set_phase(row.phase());
    for (std::size_t q = 0; q < n_; ++q) {
      if (!keep_mask[q]) continue;
      if (row.x_bit(q)) small.set_x(down[q], true);
      if (row.z_bit(q)) small.set_z(down[q], true);
    }
    out.push_back(small);
  }
  if (out.size() != expect) return std::nullopt;
  return out;
}

}  // namespace qbell
