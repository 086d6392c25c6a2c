#include "polq/perturbation.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace polq::perturbation {

namespace {

constexpr double kRelEps = 1e-18;
constexpr int kMaxOrder = 300;

void require_coupling_in_range(double g, const char* who) {
  if (!std::isfinite(g) || g < 0.0)
    throw std::invalid_argument(std::string(who) + ": g must be finite and non-negative");
  if (g > 10.0)
    throw std::overflow_error(std::string(who) + ": series evaluation limited to g <= 10");
}

}  // namespace

SeriesValue f1_series(double g) {
  require_coupling_in_range(g, "f1_series");
  const double x = g * g;
  SeriesValue out;
  if (x == 0.0) return out;
  double power = 1.0;  // x^n / n!
  for (int n = 1; n <= kMaxOrder; ++n) {
    power *= x / n;
    out.value += power / n;
    out.max_order = n;
    if (n > x && power / n < kRelEps * out.value) {
      const double r = x / (n + 1);
      out.tail_bound = (power / n) * r / (1.0 - r);
      break;
    }
  }
  return out;
}

SeriesValue f2_series(double g) {
  require_coupling_in_range(g, "f2_series");
  const double x = g * g;
  SeriesValue out;
  if (x == 0.0) return out;
  double power_n = 1.0;
  double row_tail_ratio = 0.0;
  for (int n = 1; n <= kMaxOrder; ++n) {
    power_n *= x / n;
    double row_sum = 0.0;
    double power_m = 1.0;
    for (int m = 1; m <= kMaxOrder; ++m) {
      power_m *= x / m;
      const double term = power_n * power_m / (n + m);
      row_sum += term;
      if (m > x && term < kRelEps * (out.value + row_sum)) {
        row_tail_ratio = x / (m + 1);
        break;
      }
    }
    out.value += row_sum;
    out.max_order = n;
    if (n > x && row_sum < kRelEps * out.value) {
      const double r = x / (n + 1);
      out.tail_bound = row_sum * r / (1.0 - r) +
                       out.value * row_tail_ratio / (1.0 - row_tail_ratio) * kRelEps;
      break;
    }
  }
  return out;
}

double f1_partial(double g, int max_order) {
  require_coupling_in_range(g, "f1_partial");
  if (max_order < 0) throw std::invalid_argument("f1_partial: max_order must be non-negative");
  const double x = g * g;
  double sum = 0.0;
  double power = 1.0;
  for (int n = 1; n <= max_order; ++n) {
    power *= x / n;
    sum += power / n;
  }
  return sum;
}

double f2_partial(double g, int max_order) {
  require_coupling_in_range(g, "f2_partial");
  if (max_order < 0) throw std::invalid_argument("f2_partial: max_order must be non-negative");
  const double x = g * g;
  double sum = 0.0;
  double power_n = 1.0;
  for (int n = 1; n <= max_order; ++n) {
    power_n *= x / n;
    double power_m = 1.0;
    for (int m = 1; m <= max_order; ++m) {
      power_m *= x / m;
      sum += power_n * power_m / (n + m);
    }
  }
  return sum;
}

EffectiveCouplings second_order_couplings(const models::ModelParams& p) {
  p.validate();
  const double j = p.j();
  const double prefactor = j * j * std::exp(-2.0 * p.g * p.g) / (2.0 * p.omega);
  const double f1v = f1_series(p.g).value;
  const double f2v = f2_series(p.g).value;

  EffectiveCouplings c;
  c.j_perp = -(p.n_sites - 2) * f1v * prefactor;
  c.j_par = (2.0 * f1v + f2v) * prefactor;
  if (p.g > 0.0) {
    const double gg = p.g * p.g;
    c.j_perp_asymptotic = -(p.n_sites - 2) * prefactor * std::exp(gg) / gg;
    c.j_par_asymptotic = prefactor * std::exp(2.0 * gg) / (2.0 * gg);
  } else {
    c.j_perp_asymptotic = std::numeric_limits<double>::quiet_NaN();
    c.j_par_asymptotic = std::numeric_limits<double>::quiet_NaN();
  }
  return c;
}

namespace {

Matrix hop_op(const hilbert::CompositeSpace& spin, int create, int annihilate) {
  return hilbert::hcb_lowering(spin, create).mat.adjoint() *
         hilbert::hcb_lowering(spin, annihilate).mat;
}

hilbert::OperatorMatrix h2_from_couplings(const models::ModelParams& p, double f1v, double f2v) {
  const hilbert::CompositeSpace spin = p.spin_space();
  const double j = p.j();
  const double prefactor = j * j * std::exp(-2.0 * p.g * p.g) / (2.0 * p.omega);
  const double j_perp = -(p.n_sites - 2) * f1v * prefactor;
  const double j_par = (2.0 * f1v + f2v) * prefactor;
  const Eigen::Index d = spin.dim_total();
  const Matrix id = Matrix::Identity(d, d);

  Matrix h = Matrix::Zero(d, d);
  for (int i = 0; i < p.n_sites; ++i) {
    for (int k = i + 1; k < p.n_sites; ++k) {
      const Matrix hop = hop_op(spin, i, k);
      const Matrix ni = hilbert::hcb_number(spin, i).mat;
      const Matrix nk = hilbert::hcb_number(spin, k).mat;
      h += 0.5 * j_perp * (hop + hop.adjoint());
      h += -0.5 * j_par * (ni * (id - nk) + nk * (id - ni));
    }
  }
  return {.mat = std::move(h), .hermitian = true, .unitary = false};
}

}  // namespace

hilbert::OperatorMatrix build_h2_closed(const models::ModelParams& p) {
  p.validate();
  return h2_from_couplings(p, f1_series(p.g).value, f2_series(p.g).value);
}

hilbert::OperatorMatrix build_h2_closed_partial(const models::ModelParams& p, int max_order) {
  p.validate();
  return h2_from_couplings(p, f1_partial(p.g, max_order), f2_partial(p.g, max_order));
}

hilbert::OperatorMatrix build_h2_sw(const models::ModelParams& p) {
  p.validate();
  if (p.phonon_cutoff < 1)
    throw std::invalid_argument("build_h2_sw: phonon_cutoff must be at least 1");
  const models::InteractionBlocks blocks(p);
  const hilbert::CompositeSpace& space = blocks.space();
  const Eigen::Index ds = space.dim_spin();

  Matrix h2 = Matrix::Zero(ds, ds);
  for (Eigen::Index m : blocks.coupled_to_vacuum()) {
    const Matrix a = blocks.system_block(0, m);
    const double energy = p.omega * space.phonon_total_occupation(m);
    h2 -= a * a.adjoint() / energy;
  }
  return {.mat = std::move(h2), .hermitian = true, .unitary = false};
}

hilbert::OperatorMatrix build_h3_sw(const models::ModelParams& p) {
  p.validate();
  if (p.phonon_cutoff < 1)
    throw std::invalid_argument("build_h3_sw: phonon_cutoff must be at least 1");
  const models::InteractionBlocks blocks(p);
  const hilbert::CompositeSpace& space = blocks.space();
  const Eigen::Index ds = space.dim_spin();

  const std::vector<Eigen::Index> support = blocks.coupled_to_vacuum();
  std::vector<Matrix> vacuum_blocks;
  std::vector<double> energies;
  vacuum_blocks.reserve(support.size());
  energies.reserve(support.size());
  for (Eigen::Index m : support) {
    vacuum_blocks.push_back(blocks.system_block(0, m));
    energies.push_back(p.omega * space.phonon_total_occupation(m));
  }

  Matrix h3 = Matrix::Zero(ds, ds);
  for (std::size_t a = 0; a < support.size(); ++a) {
    for (std::size_t b = 0; b < support.size(); ++b) {
      const Matrix mid = blocks.system_block(support[a], support[b]);
      if (mid.cwiseAbs().maxCoeff() == 0.0) continue;
      h3 += vacuum_blocks[a] * mid * vacuum_blocks[b].adjoint() / (energies[a] * energies[b]);
    }
  }
  return {.mat = std::move(h3), .hermitian = true, .unitary = false};
}

CoefficientScales coefficient_scales(const models::ModelParams& p) {
  p.validate();
  if (p.g <= 0.0)
    throw std::invalid_argument("coefficient_scales: scales are defined only for g > 0");
  const double j = p.j();
  const double j3 = j * j * j;
  const double gg = p.g * p.g;
  CoefficientScales s;
  s.t_n = j3 * std::exp(-gg) / ((gg * p.omega) * (gg * p.omega));
  s.v_n = j3 / ((gg * p.omega) * (gg * p.omega));
  s.t_cn = j3 * std::exp(-gg) / ((p.g * p.omega) * (p.g * p.omega));
  return s;
}

namespace {

// Raw operator strings behind each identity. Pairwise names act between fixed
// sites (l, i); V names act at the single site i (l is ignored). Summation
// constraints follow the defining hopping processes.
Matrix raw_string(const std::string& name, const hilbert::CompositeSpace& spin, int n_sites,
                  int l, int i) {
  const Eigen::Index d = spin.dim_total();
  Matrix sum = Matrix::Zero(d, d);
  auto hop = [&](int c, int a) { return hop_op(spin, c, a); };

  if (name == "T1" || name == "T2" || name == "T3" || name == "T6") {
    for (int j = 0; j < n_sites; ++j) {
      if (j == i || j == l) continue;
      for (int k = 0; k < n_sites; ++k) {
        if (k == i || k == l || k == j) continue;
        if (name == "T1") sum += hop(l, k) * hop(k, j) * hop(j, i);
        if (name == "T2") sum += hop(j, i) * hop(l, k) * hop(k, j);
        if (name == "T3") sum += hop(l, k) * hop(j, i) * hop(k, j);
        if (name == "T6") sum += hop(j, i) * hop(k, j) * hop(l, k);
      }
    }
    return sum;
  }
  if (name == "T4" || name == "T5") {
    for (int k = 0; k < n_sites; ++k) {
      if (k == i || k == l) continue;
      for (int j = 0; j < n_sites; ++j) {
        if (j == i || j == l || j == k) continue;
        if (name == "T4") sum += hop(k, j) * hop(j, i) * hop(l, k);
        if (name == "T5") sum += hop(k, j) * hop(l, k) * hop(j, i);
      }
    }
    return sum;
  }
  if (name == "V1" || name == "V2") {
    for (int j = 0; j < n_sites; ++j) {
      if (j == i) continue;
      for (int k = 0; k < n_sites; ++k) {
        if (k == i || k == j) continue;
        if (name == "V1") sum += hop(i, k) * hop(k, j) * hop(j, i);
        if (name == "V2") sum += hop(i, k) * hop(j, i) * hop(k, j);
      }
    }
    return sum;
  }
  if (name == "V3") {
    for (int k = 0; k < n_sites; ++k) {
      if (k == i) continue;
      for (int j = 0; j < n_sites; ++j) {
        if (j == i || j == k) continue;
        sum += hop(k, j) * hop(i, k) * hop(j, i);
      }
    }
    return sum;
  }
  if (name == "TC1") {
    for (int j = 0; j < n_sites; ++j) {
      if (j == i || j == l) continue;
      sum += hop(l, i) * hop(i, j) * hop(j, i);
    }
    return sum;
  }
  if (name == "TC2") {
    for (int k = 0; k < n_sites; ++k) {
      if (k == i || k == l) continue;
      sum += hop(l, k) * hop(k, l) * hop(l, i);
    }
    return sum;
  }
  if (name == "TC3") return hop(l, i) * hop(i, l) * hop(l, i);

  throw std::invalid_argument("check_reduction_identity: unknown identity name '" + name + "'");
}

// Closed forms: polynomials in the total occupation times a single hop or a
// local number operator.
Matrix closed_form(const std::string& name, const hilbert::CompositeSpace& spin, int n_sites,
                   int l, int i) {
  const Eigen::Index d = spin.dim_total();
  const Matrix id = Matrix::Identity(d, d);
  const Matrix nt = hilbert::total_hcb_number(spin).mat;
  auto minus_nt = [&](double a) { return Matrix(a * id - nt); };

  if (name == "T1") return minus_nt(n_sites - 1) * minus_nt(n_sites - 2) * hop_op(spin, l, i);
  if (name == "T2" || name == "T3" || name == "T4" || name == "T5")
    return (nt - id) * minus_nt(n_sites - 1) * hop_op(spin, l, i);
  if (name == "T6") return (nt - id) * (nt - 2.0 * id) * hop_op(spin, l, i);
  if (name == "V1")
    return minus_nt(n_sites) * minus_nt(n_sites - 1) * hilbert::hcb_number(spin, i).mat;
  if (name == "V2" || name == "V3")
    return (nt - id) * minus_nt(n_sites) * hilbert::hcb_number(spin, i).mat;
  if (name == "TC1" || name == "TC2") return minus_nt(n_sites - 1) * hop_op(spin, l, i);
  if (name == "TC3") return hop_op(spin, l, i);

  throw std::invalid_argument("check_reduction_identity: unknown identity name '" + name + "'");
}

bool is_single_site(const std::string& name) { return !name.empty() && name[0] == 'V'; }

// Accumulates per-sector and whole-space max deviations of `diff`, with `ref`
// providing the scale column. Sector q owns the principal block of states with
// total occupation q; the whole-space report (sector -1) covers every entry.
void accumulate(std::vector<IdentityReport>& reports, const Matrix& diff, const Matrix& ref) {
  const Eigen::Index d = diff.rows();
  for (Eigen::Index r = 0; r < d; ++r) {
    const int pr = std::popcount(static_cast<unsigned>(r));
    for (Eigen::Index c = 0; c < d; ++c) {
      const int pc = std::popcount(static_cast<unsigned>(c));
      const double dev = std::abs(diff(r, c));
      const double mag = std::abs(ref(r, c));
      auto& whole = reports.back();
      whole.deviation = std::max(whole.deviation, dev);
      whole.scale = std::max(whole.scale, mag);
      if (pr == pc) {
        auto& sector = reports[pr];
        sector.deviation = std::max(sector.deviation, dev);
        sector.scale = std::max(sector.scale, mag);
      }
    }
  }
}

}  // namespace

std::vector<std::string> reduction_identity_names() {
  return {"T1", "T2", "T3", "T4", "T5", "T6", "V1", "V2", "V3", "TC1", "TC2", "TC3"};
}

std::vector<IdentityReport> check_reduction_identity(const std::string& name, int n_sites) {
  if (n_sites < 2 || n_sites > 12)
    throw std::invalid_argument("check_reduction_identity: n_sites must lie in [2, 12]");
  const hilbert::CompositeSpace spin(n_sites, 0);

  std::vector<IdentityReport> reports;
  for (int q = 0; q <= n_sites; ++q) reports.push_back({name, n_sites, q, 0.0, 0.0});
  reports.push_back({name, n_sites, -1, 0.0, 0.0});

  if (is_single_site(name)) {
    for (int i = 0; i < n_sites; ++i) {
      const Matrix lhs = raw_string(name, spin, n_sites, -1, i);
      const Matrix rhs = closed_form(name, spin, n_sites, -1, i);
      accumulate(reports, lhs - rhs, rhs);
    }
  } else {
    for (int l = 0; l < n_sites; ++l) {
      for (int i = 0; i < n_sites; ++i) {
        if (l == i) continue;
        const Matrix lhs = raw_string(name, spin, n_sites, l, i);
        const Matrix rhs = closed_form(name, spin, n_sites, l, i);
        accumulate(reports, lhs - rhs, rhs);
      }
    }
  }
  return reports;
}

std::vector<IdentityReport> check_reduction_equalities(int n_sites) {
  if (n_sites < 2 || n_sites > 12)
    throw std::invalid_argument("check_reduction_equalities: n_sites must lie in [2, 12]");
  const hilbert::CompositeSpace spin(n_sites, 0);
  const std::vector<std::pair<std::string, std::string>> equal_pairs = {
      {"T3", "T2"}, {"T4", "T2"}, {"T5", "T4"}, {"V3", "V2"}, {"TC2", "TC1"}};

  std::vector<IdentityReport> reports;
  for (const auto& [a, b] : equal_pairs) {
    IdentityReport rep{a + "=" + b, n_sites, -1, 0.0, 0.0};
    if (is_single_site(a)) {
      for (int i = 0; i < n_sites; ++i) {
        const Matrix lhs = raw_string(a, spin, n_sites, -1, i);
        const Matrix rhs = raw_string(b, spin, n_sites, -1, i);
        rep.deviation = std::max(rep.deviation, (lhs - rhs).cwiseAbs().maxCoeff());
        rep.scale = std::max(rep.scale, rhs.cwiseAbs().maxCoeff());
      }
    } else {
      for (int l = 0; l < n_sites; ++l) {
        for (int i = 0; i < n_sites; ++i) {
          if (l == i) continue;
          const Matrix lhs = raw_string(a, spin, n_sites, l, i);
          const Matrix rhs = raw_string(b, spin, n_sites, l, i);
          rep.deviation = std::max(rep.deviation, (lhs - rhs).cwiseAbs().maxCoeff());
          rep.scale = std::max(rep.scale, rhs.cwiseAbs().maxCoeff());
        }
      }
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

}  // namespace polq::perturbation
