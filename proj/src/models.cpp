#include "teleqcp/models.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace teleqcp {

ModelSpec ModelSpec::xxz(int length, double delta, double field) {
  ModelSpec s;
  s.family = ModelFamily::XXZ;
  s.length = length;
  s.delta = delta;
  s.field = field;
  return s;
}

ModelSpec ModelSpec::xy(int length, double lambda, double gamma) {
  ModelSpec s;
  s.family = ModelFamily::XYTransverse;
  s.length = length;
  s.lambda = lambda;
  s.gamma = gamma;
  return s;
}

void ModelSpec::validate() const {
  if (length < 2 || length > kMaxSites)
    throw std::invalid_argument("ModelSpec: chain length " + std::to_string(length) +
                                " outside [2, " + std::to_string(kMaxSites) + "]");
  for (double v : {delta, field, lambda, gamma})
    if (!std::isfinite(v)) throw std::invalid_argument("ModelSpec: couplings must be finite");
}

std::string ModelSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (family == ModelFamily::XXZ)
    os << "XXZ(L=" << length << ", delta=" << delta << ", h=" << field << ")";
  else
    os << "XY(L=" << length << ", lambda=" << lambda << ", gamma=" << gamma << ")";
  return os.str();
}

std::string family_name(ModelFamily f) { return f == ModelFamily::XXZ ? "xxz" : "xy"; }

std::vector<PauliTerm> hamiltonian_terms(const ModelSpec& spec) {
  spec.validate();
  const int L = spec.length;
  std::vector<PauliTerm> terms;
  double cx, cy, cz, cfield;
  if (spec.family == ModelFamily::XXZ) {
    cx = 1.0;
    cy = 1.0;
    cz = spec.delta;
    cfield = -spec.field / 2.0;
  } else {
    cx = -spec.lambda / 4.0 * (1.0 + spec.gamma);
    cy = -spec.lambda / 4.0 * (1.0 - spec.gamma);
    cz = 0.0;
    cfield = -0.5;
  }
  for (int j = 1; j <= L; ++j) {
    const int k = SiteIndex(j, L).next().value();
    // Literal periodic sum: for L = 2 the bond (2,1) repeats (1,2).
    auto bond = [&](Axis a) { return PauliString(L, {{j, a}, {k, a}}); };
    if (cx != 0.0) terms.push_back({cx, bond(Axis::X)});
    if (cy != 0.0) terms.push_back({cy, bond(Axis::Y)});
    if (cz != 0.0) terms.push_back({cz, bond(Axis::Z)});
  }
  if (cfield != 0.0)
    for (int j = 1; j <= L; ++j) terms.push_back({cfield, site_operator(Axis::Z, j, L)});
  return terms;
}

namespace {

double real_element(const PauliString& op, std::uint64_t col) {
  const Complex p = op.phase(col);
  if (p.imag() != 0.0) throw std::logic_error("Hamiltonian term with imaginary matrix element");
  return p.real();
}

}  // namespace

HermitianOperator build_hamiltonian(const ModelSpec& spec) {
  const auto terms = hamiltonian_terms(spec);
  const Index dim = Index{1} << spec.length;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(dim) * (terms.size() / 2 + 1));
  for (const auto& t : terms) {
    for (Index c = 0; c < dim; ++c) {
      const auto uc = static_cast<std::uint64_t>(c);
      entries.emplace_back(static_cast<Index>(uc ^ t.op.flip_mask()), c,
                           t.coefficient * real_element(t.op, uc));
    }
  }
  HermitianOperator h(dim, dim);
  h.setFromTriplets(entries.begin(), entries.end());
  h.prune(0.0);
  return h;
}

int magnetization(std::uint32_t state, int length) {
  return length - 2 * std::popcount(state);
}

std::size_t SymmetrySectorPlan::total_size() const {
  std::size_t n = 0;
  for (const auto& s : sectors) n += s.states.size();
  return n;
}

SymmetrySectorPlan symmetry_sectors(const ModelSpec& spec) {
  spec.validate();
  const int L = spec.length;
  const std::uint32_t dim = std::uint32_t{1} << L;
  SymmetrySectorPlan plan;
  plan.length = L;
  const bool conserves_magnetization = spec.family == ModelFamily::XXZ || spec.gamma == 0.0;
  if (conserves_magnetization) {
    plan.kind = SectorKind::Magnetization;
    for (int m = -L; m <= L; m += 2) plan.sectors.push_back({m, {}});
    for (std::uint32_t s = 0; s < dim; ++s)
      plan.sectors[static_cast<std::size_t>((magnetization(s, L) + L) / 2)].states.push_back(s);
  } else {
    plan.kind = SectorKind::SpinFlipParity;
    plan.sectors.push_back({+1, {}});
    plan.sectors.push_back({-1, {}});
    for (std::uint32_t s = 0; s < dim; ++s)
      plan.sectors[std::popcount(s) & 1].states.push_back(s);
  }
  return plan;
}

std::string blocking_name(Blocking b) {
  switch (b) {
    case Blocking::None: return "none";
    case Blocking::Conserved: return "conserved";
    case Blocking::Translation: return "translation";
  }
  return "?";
}

std::uint32_t translate(std::uint32_t state, int length) {
  // Site L sits at bit 0 and moves to site 1 (bit L-1).
  return (state >> 1) | ((state & 1u) << (length - 1));
}

namespace {

BlockBasis plain_block(int label, const std::vector<std::uint32_t>& states) {
  BlockBasis b;
  b.sector_label = label;
  b.offsets.reserve(states.size() + 1);
  b.offsets.push_back(0);
  for (auto s : states) {
    b.index.push_back(s);
    b.amplitude.emplace_back(1.0, 0.0);
    b.offsets.push_back(static_cast<std::uint32_t>(b.index.size()));
  }
  return b;
}

struct Orbit {
  std::uint32_t representative;
  int period;
};

std::vector<Orbit> orbits(const std::vector<std::uint32_t>& states, int L) {
  std::vector<Orbit> out;
  for (auto s : states) {
    std::uint32_t t = s;
    bool is_rep = true;
    int period = 0;
    do {
      t = translate(t, L);
      ++period;
      if (t < s) {
        is_rep = false;
        break;
      }
    } while (t != s);
    if (is_rep) out.push_back({s, period});
  }
  return out;
}

}  // namespace

std::vector<BlockBasis> diagonalization_blocks(const ModelSpec& spec, Blocking blocking) {
  spec.validate();
  const int L = spec.length;
  std::vector<BlockBasis> blocks;
  if (blocking == Blocking::None) {
    std::vector<std::uint32_t> all(std::size_t{1} << L);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
    blocks.push_back(plain_block(0, all));
    return blocks;
  }
  const auto plan = symmetry_sectors(spec);
  for (const auto& sector : plan.sectors) {
    if (sector.states.empty()) continue;
    if (blocking == Blocking::Conserved) {
      blocks.push_back(plain_block(sector.label, sector.states));
      continue;
    }
    const auto orb = orbits(sector.states, L);
    for (int m = 0; m < L; ++m) {
      const double k = 2.0 * std::numbers::pi * m / L;
      BlockBasis b;
      b.sector_label = sector.label;
      b.momentum = m;
      b.offsets.push_back(0);
      for (const auto& o : orb) {
        if ((m * o.period) % L != 0) continue;
        const double norm = 1.0 / std::sqrt(static_cast<double>(o.period));
        std::uint32_t t = o.representative;
        for (int d = 0; d < o.period; ++d) {
          b.index.push_back(t);
          b.amplitude.push_back(norm * std::polar(1.0, -k * d));
          t = translate(t, L);
        }
        b.offsets.push_back(static_cast<std::uint32_t>(b.index.size()));
      }
      if (b.size() > 0) blocks.push_back(std::move(b));
    }
  }
  return blocks;
}

Eigen::MatrixXcd block_hamiltonian(const std::vector<PauliTerm>& terms, const BlockBasis& block,
                                   int length) {
  const Index n = block.size();
  // Owner lookup: full basis index -> component position inside this block.
  std::vector<std::int32_t> owner(std::size_t{1} << length, -1);
  std::vector<std::int32_t> element(block.index.size());
  for (Index e = 0; e < n; ++e)
    for (auto c = block.offsets[e]; c < block.offsets[e + 1]; ++c) {
      owner[block.index[c]] = static_cast<std::int32_t>(c);
      element[c] = static_cast<std::int32_t>(e);
    }

  // Translation symmetry gives <b'|H|b> = sqrt(R_b) <b'|H|r_b>, where r_b is
  // the representative (first component, amplitude 1/sqrt(R_b)).
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (Index e = 0; e < n; ++e) {
    const auto first = block.offsets[e];
    const std::uint32_t rep = block.index[first];
    const double scale = 1.0 / std::abs(block.amplitude[first]);
    for (const auto& t : terms) {
      const std::uint32_t target = rep ^ static_cast<std::uint32_t>(t.op.flip_mask());
      const auto c = owner[target];
      // Single terms may leave the sector (xx and yy flip magnetization by 2);
      // those pieces cancel in H. Orbits whose period is incompatible with the
      // block momentum have no component here either.
      if (c < 0) continue;
      h(element[c], e) += scale * t.coefficient * t.op.phase(rep) * std::conj(block.amplitude[c]);
    }
  }
  return h;
}

}  // namespace teleqcp
