#include "support/dense_sim.hpp"

#include <bit>
#include <cassert>
#include <cmath>

namespace qbell::testing {

DenseSim::DenseSim(std::size_t n_) : n(n_), amp(std::size_t(1) << n_, cd(0, 0)) {
  amp[0] = 1.0;
}

void DenseSim::apply(Gate g, std::size_t q0, std::size_t q1) {
  std::size_t dim = amp.size();
  std::size_t m0 = std::size_t(1) << q0;
  const cd i(0, 1);
  switch (g) {
    case Gate::I:
      break;
    case Gate::X:
      for (std::size_t b = 0; b < dim; ++b)
        if (!(b & m0)) std::swap(amp[b], amp[b | m0]);
      break;
    case Gate::Y:
      for (std::size_t b = 0; b < dim; ++b)
        if (!(b & m0)) {
          cd a0 = amp[b], a1 = amp[b | m0];
          amp[b] = -i * a1;
          amp[b | m0] = i * a0;
        }
      break;
    case Gate::Z:
      for (std::size_t b = 0; b < dim; ++b)
        if (b & m0) amp[b] = -amp[b];
      break;
    case Gate::H:
      for (std::size_t b = 0; b < dim; ++b)
        if (!(b & m0)) {
          cd a0 = amp[b], a1 = amp[b | m0];
          amp[b] = (a0 + a1) / std::sqrt(2.0);
          amp[b | m0] = (a0 - a1) / std::sqrt(2.0);
        }
      break;
    case Gate::S:
      for (std::size_t b = 0; b < dim; ++b)
        if (b & m0) amp[b] *= i;
      break;
    case Gate::SDG:
      for (std::size_t b = 0; b < dim; ++b)
        if (b & m0) amp[b] *= -i;
      break;
    case Gate::CNOT: {
      std::size_t m1 = std::size_t(1) << q1;
      for (std::size_t b = 0; b < dim; ++b)
        if ((b & m0) && !(b & m1)) std::swap(amp[b], amp[b | m1]);
      break;
    }
    case Gate::SWAP: {
      std::size_t m1 = std::size_t(1) << q1;
      for (std::size_t b = 0; b < dim; ++b)
        if ((b & m0) && !(b & m1)) std::swap(amp[b ^ m0 ^ m1], amp[b]);
      break;
    }
  }
}

void DenseSim::apply_pauli(const PauliOperator& p) {
  std::size_t dim = amp.size();
  std::size_t x = 0, z = 0;
  for (std::size_t q = 0; q < n; ++q) {
    if (p.x_bit(q)) x |= std::size_t(1) << q;
    if (p.z_bit(q)) z |= std::size_t(1) << q;
  }
  const cd iunit(0, 1);
  cd ph = 1.0;
  for (int k = 0; k < (p.phase() & 3); ++k) ph *= iunit;
  std::vector<cd> out(dim, cd(0, 0));
  for (std::size_t b = 0; b < dim; ++b) {
    cd v = amp[b] * ph;
    if (std::popcount(b & z) & 1) v = -v;
    out[b ^ x] += v;
  }
  amp = std::move(out);
}

double DenseSim::prob(std::size_t q, int bit) const {
  double p = 0;
  std::size_t m = std::size_t(1) << q;
  for (std::size_t b = 0; b < amp.size(); ++b)
    if (((b & m) != 0) == (bit != 0)) p += std::norm(amp[b]);
  return p;
}

bool DenseSim::project(std::size_t q, int bit) {
  double p = prob(q, bit);
  if (p < 1e-12) return false;
  std::size_t m = std::size_t(1) << q;
  double s = 1.0 / std::sqrt(p);
  for (std::size_t b = 0; b < amp.size(); ++b) {
    if (((b & m) != 0) == (bit != 0))
      amp[b] *= s;
    else
      amp[b] = 0;
  }
  return true;
}

std::vector<std::vector<cd>> pauli_matrix(const PauliOperator& p) {
  std::size_t n = p.num_qubits();
  std::size_t dim = std::size_t(1) << n;
  std::size_t x = 0, z = 0;
  for (std::size_t q = 0; q < n; ++q) {
    if (p.x_bit(q)) x |= std::size_t(1) << q;
    if (p.z_bit(q)) z |= std::size_t(1) << q;
  }
  const cd iunit(0, 1);
  cd ph = 1.0;
  for (int k = 0; k < (p.phase() & 3); ++k) ph *= iunit;
  std::vector<std::vector<cd>> m(dim, std::vector<cd>(dim, cd(0, 0)));
  for (std::size_t b = 0; b < dim; ++b) {
    cd v = ph;
    if (std::popcount(b & z) & 1) v = -v;
    m[b ^ x][b] = v;
  }
  return m;
}

std::vector<std::vector<cd>> stabilizer_projector(
    const std::vector<PauliOperator>& gens) {
  std::size_t n = gens.empty() ? 0 : gens[0].num_qubits();
  std::size_t dim = std::size_t(1) << n;
  std::vector<std::vector<cd>> proj(dim, std::vector<cd>(dim, cd(0, 0)));
  for (std::size_t b = 0; b < dim; ++b) proj[b][b] = 1.0;
  for (const auto& g : gens) {
    auto gm = pauli_matrix(g);
    std::vector<std::vector<cd>> out(dim, std::vector<cd>(dim, cd(0, 0)));
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t k = 0; k < dim; ++k) {
        if (proj[r][k] == cd(0, 0)) continue;
        for (std::size_t c2 = 0; c2 < dim; ++c2)
          out[r][c2] += proj[r][k] * (cd(k == c2 ? 1.0 : 0.0) + gm[k][c2]) * 0.5;
      }
    proj = std::move(out);
  }
  return proj;
}

double projector_vs_state(const std::vector<std::vector<cd>>& proj,
                          const std::vector<cd>& psi) {
  double worst = 0;
  std::size_t dim = psi.size();
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) {
      cd want = psi[r] * std::conj(psi[c]);
      worst = std::max(worst, std::abs(proj[r][c] - want));
    }
  return worst;
}

}  // namespace qbell::testing
