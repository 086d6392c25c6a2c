#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "polq/hilbert.hpp"

using namespace polq;
using hilbert::CompositeSpace;

TEST_CASE("basis index encode/decode is a bijection") {
  CompositeSpace space(3, 2);
  CHECK(space.dim_spin() == 8);
  CHECK(space.dim_phonon() == 27);
  CHECK(space.dim_total() == 216);

  for (Eigen::Index flat = 0; flat < space.dim_total(); ++flat) {
    hilbert::BasisIndex b = space.decode(flat);
    CHECK(space.encode(b) == flat);
    CHECK(space.spin_part(flat) == b.spin_bits);
    Eigen::Index ph = space.phonon_part(flat);
    for (int site = 0; site < space.n_sites(); ++site) {
      CHECK(space.phonon_digit(ph, site) == b.phonon_occ[std::size_t(site)]);
    }
  }
}

TEST_CASE("phonon digits recover per-site occupations") {
  CompositeSpace space(3, 3);
  for (Eigen::Index ph = 0; ph < space.dim_phonon(); ++ph) {
    int total = 0;
    Eigen::Index rebuilt = 0;
    Eigen::Index stride = 1;
    for (int site = 0; site < space.n_sites(); ++site) {
      int digit = space.phonon_digit(ph, site);
      CHECK(digit >= 0);
      CHECK(digit <= space.phonon_cutoff());
      total += digit;
      rebuilt += digit * stride;
      stride *= space.phonon_cutoff() + 1;
    }
    CHECK(rebuilt == ph);
    CHECK(space.phonon_total_occupation(ph) == total);
  }
}

TEST_CASE("hard-core operators satisfy the on-site algebra") {
  CompositeSpace space(3, 0);
  for (int site = 0; site < 3; ++site) {
    Matrix b = hilbert::hcb_lowering(space, site).mat;
    Matrix bdag = b.adjoint();
    Matrix n = hilbert::hcb_number(space, site).mat;
    Matrix id = Matrix::Identity(space.dim_total(), space.dim_total());

    CHECK(hilbert::max_abs(b * b) == 0.0);
    CHECK(hilbert::max_abs(bdag * bdag) == 0.0);
    CHECK(hilbert::max_abs(b * bdag + bdag * b - id) == 0.0);
    CHECK(hilbert::max_abs(bdag * b - n) == 0.0);
  }
}

TEST_CASE("hard-core operators on different sites commute") {
  CompositeSpace space(3, 0);
  Matrix b0 = hilbert::hcb_lowering(space, 0).mat;
  Matrix b1dag = hilbert::hcb_lowering(space, 1).mat.adjoint();
  CHECK(hilbert::commutator_norm(b0, b1dag) == 0.0);
}

TEST_CASE("phonon lowering has exact square-root matrix elements") {
  const int cutoff = 5;
  Matrix a = hilbert::single_mode_lowering(cutoff);
  double expected_sum = 0.0;
  for (int m = 1; m <= cutoff; ++m) {
    CHECK(a(m - 1, m).real() == doctest::Approx(std::sqrt(double(m))).epsilon(1e-15));
    expected_sum += std::sqrt(double(m));
  }
  CHECK(a.cwiseAbs().sum() == doctest::Approx(expected_sum).epsilon(1e-14));
  Matrix comm = a * a.adjoint() - a.adjoint() * a;
  // [a, a†] = 1 except on the top rung, where truncation bites.
  for (int m = 0; m < cutoff; ++m) {
    CHECK(comm(m, m).real() == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(hilbert::single_mode_lowering(0), std::invalid_argument);
}

TEST_CASE("embedded phonon operators act on their own site only") {
  CompositeSpace space(2, 2);
  Matrix a0 = hilbert::phonon_lowering(space, 0).mat;
  Matrix a1 = hilbert::phonon_lowering(space, 1).mat;
  CHECK(hilbert::commutator_norm(a0, a1.adjoint()) == 0.0);

  Matrix n0 = hilbert::phonon_number(space, 0).mat;
  CHECK(hilbert::max_abs(a0.adjoint() * a0 - n0) < 1e-14);

  // |m0=1, m1=2⟩ in the spin-0 block: digits read off the composite index.
  Eigen::Index ph = 1 + 2 * 3;
  Vector v = Vector::Zero(space.dim_total());
  v(ph) = 1.0;
  Vector w = a0 * v;
  Eigen::Index ph_down = 0 + 2 * 3;
  CHECK(std::abs(w(ph_down) - cplx(1.0, 0.0)) < 1e-15);
}

TEST_CASE("spin-half components obey su(2) on each site") {
  CompositeSpace space(2, 0);
  for (int site = 0; site < 2; ++site) {
    Matrix sx = hilbert::spin_half(space, site, 'x').mat;
    Matrix sy = hilbert::spin_half(space, site, 'y').mat;
    Matrix sz = hilbert::spin_half(space, site, 'z').mat;
    Matrix comm = sx * sy - sy * sx - cplx(0.0, 1.0) * sz;
    CHECK(hilbert::max_abs(comm) < 1e-15);
  }
  CHECK_THROWS_AS(hilbert::spin_half(space, 0, 'q'), std::invalid_argument);
}

TEST_CASE("total spin operators carry the expected spectra") {
  CompositeSpace space(2, 0);
  Matrix s2 = hilbert::total_s_squared(space).mat;
  Matrix sz = hilbert::total_sz(space).mat;
  CHECK(hilbert::commutator_norm(s2, sz) < 1e-14);

  Eigen::SelfAdjointEigenSolver<Matrix> es(s2);
  std::vector<double> expected = {0.0, 2.0, 2.0, 2.0};  // singlet + triplet
  for (int k = 0; k < 4; ++k) {
    CHECK(es.eigenvalues()(k) == doctest::Approx(expected[k]).epsilon(1e-12));
  }
}

TEST_CASE("embed_product composes factors across sites") {
  CompositeSpace space(2, 2);
  Matrix n0 = hilbert::hcb_number(space, 0).mat;
  Matrix a1 = hilbert::phonon_lowering(space, 1).mat;

  Matrix single = hilbert::single_mode_lowering(space.phonon_cutoff());
  Matrix n_half(2, 2);
  n_half.setZero();
  n_half(1, 1) = 1.0;
  Matrix joint = hilbert::embed_product(
      space, {{hilbert::LocalOp::Factor::spin, 0, n_half},
              {hilbert::LocalOp::Factor::phonon, 1, single}}).mat;
  CHECK(hilbert::max_abs(joint - n0 * a1) < 1e-15);
}

TEST_CASE("coherent bath state has unit norm and the right displacement") {
  CompositeSpace space(2, 14);
  std::vector<cplx> alphas = {cplx(0.4, 0.0), cplx(0.0, -0.3)};
  Vector chi = hilbert::coherent_bath_state(space, alphas);
  CHECK(chi.norm() == doctest::Approx(1.0).epsilon(1e-12));

  // ⟨χ|a_i|χ⟩ = α_i within truncation error at this cutoff.
  for (int site = 0; site < 2; ++site) {
    Matrix a_site = hilbert::single_mode_lowering(space.phonon_cutoff());
    Matrix embedded = hilbert::embed_product(
        space, {{hilbert::LocalOp::Factor::phonon, site, a_site}}).mat;
    // chi lives on the phonon factor; lift to the composite spin-0 block.
    Vector lifted = Vector::Zero(space.dim_total());
    for (Eigen::Index m = 0; m < space.dim_phonon(); ++m) {
      lifted(m) = chi(m);
    }
    cplx mean = lifted.dot(embedded * lifted);
    CHECK(std::abs(mean - alphas[site]) < 1e-8);
  }
}

TEST_CASE("phonon window indices agree with a brute-force scan") {
  CompositeSpace space(2, 4);
  const int cap = 2;
  auto window = hilbert::phonon_window_indices(space, cap);

  std::vector<Eigen::Index> expected;
  for (Eigen::Index flat = 0; flat < space.dim_total(); ++flat) {
    Eigen::Index ph = space.phonon_part(flat);
    bool inside = true;
    for (int site = 0; site < space.n_sites(); ++site) {
      if (space.phonon_digit(ph, site) > cap) {
        inside = false;
      }
    }
    if (inside) {
      expected.push_back(flat);
    }
  }
  REQUIRE(window.size() == expected.size());
  for (std::size_t k = 0; k < window.size(); ++k) {
    CHECK(window[k] == expected[k]);
  }
}

TEST_CASE("matrix exponential reproduces closed forms") {
  Matrix zero = Matrix::Zero(3, 3);
  CHECK(hilbert::max_abs(hilbert::expm(zero) - Matrix::Identity(3, 3)) < 1e-15);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = std::log(2.0);
  d(1, 1) = cplx(0.0, M_PI);
  Matrix e = hilbert::expm(d);
  CHECK(std::abs(e(0, 0) - cplx(2.0, 0.0)) < 1e-14);
  CHECK(std::abs(e(1, 1) - cplx(-1.0, 0.0)) < 1e-14);
}

TEST_CASE("operator flag verification catches false promises") {
  CompositeSpace space(2, 0);
  hilbert::OperatorMatrix op = hilbert::hcb_number(space, 0);
  CHECK(hilbert::verify_flags(op));

  hilbert::OperatorMatrix lying{hilbert::hcb_lowering(space, 0).mat, true, false};
  CHECK_FALSE(hilbert::verify_flags(lying));
}

TEST_CASE("space construction rejects invalid shapes") {
  CHECK_THROWS_AS(CompositeSpace(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(CompositeSpace(2, -1), std::invalid_argument);
  CHECK_THROWS_AS(CompositeSpace(10, 8), std::invalid_argument);  // 2^10·9^10 blows the cap
}
