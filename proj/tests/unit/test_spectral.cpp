// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tamedch/errors.hpp"
#include "tamedch/serialize.hpp"
#include "tamedch/spectral.hpp"

using namespace tamedch;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using std::numbers::pi;

namespace {

SpectralField random_field(const BasisSpec& basis, std::mt19937_64& rng, double mean = 0.0) {
  std::normal_distribution<double> g;
  std::vector<double> c(basis.mode_count());
  for (auto& x : c) x = g(rng);
  return SpectralField(basis, mean, std::move(c));
}

// Eigenvalues of the cell-centered second-difference Neumann Laplacian on n cells.
std::vector<double> fd_neumann_eigenvalues(int n) {
  const double h2 = 1.0 / (static_cast<double>(n) * n);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (i > 0) {
      L(i, i - 1) = -1.0 / h2;
      L(i, i) += 1.0 / h2;
    }
    if (i + 1 < n) {
      L(i, i + 1) = -1.0 / h2;
      L(i, i) += 1.0 / h2;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

// sup over x > 0 of (1 - e^{-x}) / x^a by golden-section search on ln x.
double sup_phi_ratio(double a) {
  if (a >= 1.0) return 1.0;
  auto f = [a](double s) {
    const double x = std::exp(s);
    return -std::expm1(-x) / std::pow(x, a);
  };
  double lo = -30.0, hi = 30.0;
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double m1 = hi - r * (hi - lo);
    const double m2 = lo + r * (hi - lo);
    if (f(m1) < f(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  return f(0.5 * (lo + hi));
}

}  // namespace

TEST_CASE("eigenvalue examples", "[spectral]") {
  const BasisSpec b1(1, 8);
  CHECK_THAT(eigenvalue(1, b1), WithinRel(pi * pi, 1e-15));
  CHECK_THAT(eigenvalue(1, b1), WithinAbs(9.8696044, 1e-7));
  CHECK_THROWS_AS(eigenvalue(0, b1), IndexError);
  CHECK_THROWS_AS(eigenvalue(9, b1), IndexError);

  const BasisSpec b2(2, 8);
  CHECK_THAT(eigenvalue(ModeIndex{1, 2}, b2), WithinRel(5.0 * pi * pi, 1e-15));
  CHECK_THROWS_AS(eigenvalue(ModeIndex{0, 0}, b2), IndexError);
}

TEST_CASE("2D eigenvalue agrees with a finite-difference eigensolve", "[spectral]") {
  // The 2D five-point Neumann Laplacian is the Kronecker sum of the 1D one,
  // so its spectrum is the set of pairwise sums of 1D eigenvalues.
  const auto ev = fd_neumann_eigenvalues(256);
  REQUIRE(std::abs(ev[0]) < 1e-8);
  const double fd = ev[1] + ev[2];  // modes (1,0)+(0,2) in sorted order
  const double exact = eigenvalue(ModeIndex{1, 2}, BasisSpec(2, 8));
  CHECK_THAT(fd, WithinRel(exact, 1e-3));
  CHECK_THAT(exact, WithinAbs(49.348, 1e-3));
}

TEST_CASE("eigenfunction point values and normalization", "[spectral]") {
  const BasisSpec b(1, 8);
  const double x0[] = {0.0};
  const double xh[] = {0.5};
  CHECK_THAT(eigenfunction_eval({1, 0}, x0, b), WithinRel(std::sqrt(2.0), 1e-15));
  CHECK_THAT(eigenfunction_eval({2, 0}, xh, b), WithinRel(-std::sqrt(2.0), 1e-15));
  for (int j = 1; j <= 8; ++j) {
    const double integral = oracle::midpoint(
        [&](double x) {
          const double p[] = {x};
          const double v = eigenfunction_eval({j, 0}, p, b);
          return v * v;
        },
        1024);
    CHECK_THAT(integral, WithinAbs(1.0, 1e-12));
  }
  CHECK_THROWS_AS(eigenfunction_eval({9, 0}, x0, b), IndexError);
}

TEST_CASE("2D eigenfunctions are orthonormal under quadrature", "[spectral]") {
  const BasisSpec b(2, 3);
  const int n = 16;
  for (std::size_t p = 0; p < b.mode_count(); ++p) {
    for (std::size_t q = p; q < b.mode_count(); ++q) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double x[] = {(i + 0.5) / n, (j + 0.5) / n};
          s += eigenfunction_eval(b.mode(p), x, b) * eigenfunction_eval(b.mode(q), x, b);
        }
      }
      CHECK_THAT(s / (n * n), WithinAbs(p == q ? 1.0 : 0.0, 1e-12));
    }
  }
}

TEST_CASE("basis indexing", "[spectral]") {
  const BasisSpec b(2, 3);
  CHECK(b.mode_count() == 15);
  CHECK(b.mode(0) == ModeIndex{0, 1});
  CHECK(b.mode(3) == ModeIndex{1, 0});
  for (std::size_t i = 0; i < b.mode_count(); ++i) CHECK(b.flat_index(b.mode(i)) == i);
  CHECK_THROWS_AS(BasisSpec(3, 4), ArgumentError);
  CHECK_THROWS_AS(BasisSpec(1, 0), ArgumentError);
}

TEST_CASE("semigroup examples", "[spectral]") {
  std::mt19937_64 rng(1);
  const BasisSpec b(1, 16);
  const auto v = random_field(b, rng, 0.7);
  CHECK(apply_semigroup(v, 0.0) == v);

  const auto e1 = SpectralField::mode(b, {1, 0});
  const auto out = apply_semigroup(e1, 1.0);
  CHECK_THAT(out[0], WithinRel(std::exp(-std::pow(pi, 4)), 1e-12));
  CHECK_THAT(out[0], WithinRel(4.96e-43, 1e-2));

  const auto c = SpectralField::constant(b, 2.5);
  const auto cs = apply_semigroup(c, 0.3);
  CHECK(cs.mean() == 2.5);
  for (double x : cs.coeffs()) CHECK(x == 0.0);

  CHECK_THROWS_AS(apply_semigroup(v, -1e-3), ArgumentError);
}

TEST_CASE("semigroup composition", "[spectral]") {
  std::mt19937_64 rng(2);
  for (int dim : {1, 2}) {
    const BasisSpec b(dim, 6);
    const auto v = random_field(b, rng, -0.4);
    for (double s : {1e-4, 3e-3}) {
      for (double t : {2e-4, 1e-3}) {
        const auto lhs = apply_semigroup(apply_semigroup(v, s), t);
        const auto rhs = apply_semigroup(v, s + t);
        CHECK(lhs.mean() == v.mean());
        for (std::size_t i = 0; i < v.size(); ++i) {
          CHECK(std::abs(lhs[i] - rhs[i]) <= 1e-13 * std::abs(rhs[i]) + 1e-300);
        }
      }
    }
  }
}

TEST_CASE("phi weight and alternative formula", "[spectral]") {
  const BasisSpec b(1, 8);
  const double tau = 0x1p-9;
  const double lambda = pi * pi;
  const auto out = apply_phi(SpectralField::mode(b, {1, 0}), tau);
  const double expected = (1.0 - std::exp(-std::pow(pi, 4) / 512.0)) / (pi * pi);
  CHECK_THAT(out[0], WithinRel(expected, 1e-14));
  CHECK_THAT(out[0], WithinAbs(0.01755, 5e-5));

  // Midpoint Riemann sum of int_0^tau lambda exp(-(tau - s) lambda^2) ds.
  const long n = 1000000;
  double riemann = 0.0;
  for (long i = 0; i < n; ++i) {
    const double s = (static_cast<double>(i) + 0.5) * tau / static_cast<double>(n);
    riemann += lambda * std::exp(-(tau - s) * lambda * lambda);
  }
  riemann *= tau / static_cast<double>(n);
  CHECK_THAT(out[0], WithinRel(riemann, 1e-9));

  const auto zero = apply_phi(SpectralField(b), tau);
  for (double x : zero.coeffs()) CHECK(x == 0.0);

  CHECK_THROWS_AS(apply_phi(SpectralField::constant(b, 1.0), tau), ContractError);

  std::mt19937_64 rng(3);
  for (int dim : {1, 2}) {
    const BasisSpec bb(dim, 10);
    const auto v = random_field(bb, rng);
    for (double t : {1e-6, 0x1p-9, 0.5}) {
      const auto direct = apply_phi(v, t);
      const auto via = apply_A_power(v - apply_semigroup(v, t), -1.0);
      CHECK(distance(direct, via) <= 1e-13 * v.norm());
      // 0 <= weight <= min(tau lambda, 1/lambda)
      const auto lam = bb.eigenvalues();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double w = direct[i] / v[i];
        CHECK(w >= 0.0);
        CHECK(w <= std::min(t * lam[i], 1.0 / lam[i]) * (1.0 + 1e-14));
      }
    }
  }
}

TEST_CASE("semigroup smoothing bounds", "[spectral]") {
  const BasisSpec b(1, 256);
  const auto lambda = b.eigenvalues();
  for (int mu = 1; mu <= 4; ++mu) {
    const double a = mu / 4.0;
    const double bound = std::pow(a, a) * std::exp(-a);
    const double sup_phi = sup_phi_ratio(a);
    double worst_I = 0.0;
    double worst_II = 0.0;
    for (int e = -400; e <= 0; ++e) {
      const double t = std::pow(10.0, e / 50.0);
      for (double lam : lambda) {
        worst_I = std::max(worst_I, std::pow(lam, mu / 2.0) * std::exp(-t * lam * lam) * std::pow(t, a) / bound);
        worst_II = std::max(worst_II, std::pow(lam, -mu / 2.0) * -std::expm1(-t * lam * lam) /
                                          (std::pow(t, a) * sup_phi));
      }
    }
    INFO("mu = " << mu);
    CHECK(worst_I <= 1.0 + 1e-12);
    CHECK(worst_II <= 1.0 + 1e-12);
    // The constants are sharp: the grid gets close to them.
    CHECK(worst_I > 0.9);
  }
}

TEST_CASE("projection", "[spectral]") {
  const BasisSpec b(1, 8);
  std::mt19937_64 rng(4);
  const auto v = random_field(b, rng, 1.25);
  CHECK(project(v, 8) == v);

  const auto e15 = SpectralField::mode(b, {1, 0}) + SpectralField::mode(b, {5, 0});
  CHECK(project(e15, 3) == SpectralField::mode(b, {1, 0}));
  CHECK_THROWS_AS(project(v, 9), ArgumentError);

  for (int Np : {1, 3, 6}) {
    const auto p = project(v, Np);
    CHECK(p.mean() == v.mean());
    double tail = 0.0;
    for (int j = Np + 1; j <= 8; ++j) tail += v[j - 1] * v[j - 1];
    CHECK_THAT(distance(v, p), WithinAbs(std::sqrt(tail), 1e-14));
    CHECK_THAT(v.norm() * v.norm() - p.norm() * p.norm(), WithinAbs(tail, 1e-13));
  }

  const BasisSpec b2(2, 4);
  const auto w = random_field(b2, rng);
  const auto pw = project(w, 2);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto k = b2.mode(i);
    CHECK(pw[i] == ((k.k1 <= 2 && k.k2 <= 2) ? w[i] : 0.0));
  }
}

TEST_CASE("embedding between truncation levels", "[spectral]") {
  std::mt19937_64 rng(5);
  const BasisSpec coarse(2, 3), fine(2, 6);
  const auto v = random_field(coarse, rng, 0.3);
  const auto up = embed(v, fine);
  CHECK(up.norm() == Catch::Approx(v.norm()).epsilon(1e-15));
  CHECK(embed(up, coarse) == v);
}

TEST_CASE("grid round trips", "[spectral]") {
  const BasisSpec b(1, 4);
  const auto e2 = SpectralField::mode(b, {2, 0});
  const auto g = to_grid(e2, 8);
  REQUIRE(g.values.size() == 8);
  const auto back = to_spectral(g, 4);
  CHECK(distance(back, e2) <= 1e-13);
  for (int i = 0; i < 8; ++i) {
    CHECK_THAT(g.values[i], WithinAbs(std::sqrt(2.0) * std::cos(2.0 * pi * (i + 0.5) / 8.0), 1e-14));
  }

  const auto gc = to_grid(SpectralField::constant(b, 3.5), 8);
  for (double x : gc.values) CHECK_THAT(x, WithinAbs(3.5, 1e-14));

  CHECK_THROWS_AS(to_grid(e2, 4), ArgumentError);
  CHECK_NOTHROW(to_grid(e2, 5));

  std::mt19937_64 rng(6);
  for (int dim : {1, 2}) {
    const BasisSpec bb(dim, 16);
    const auto v = random_field(bb, rng, 0.9);
    for (int n : {17, 33, 64}) {
      const auto vv = to_spectral(to_grid(v, n), 16);
      CHECK(distance(vv, v) <= 1e-12 * v.norm());
    }
  }
}

TEST_CASE("grid values match pointwise eigenfunction sums", "[spectral]") {
  std::mt19937_64 rng(7);
  const BasisSpec b(2, 5);
  const auto v = random_field(b, rng, -0.2);
  const int n = 11;
  const auto g = to_grid(v, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x[] = {(i + 0.5) / n, (j + 0.5) / n};
      double s = v.mean();
      for (std::size_t k = 0; k < v.size(); ++k) s += v[k] * eigenfunction_eval(b.mode(k), x, b);
      CHECK_THAT(g.values[static_cast<std::size_t>(i) * n + j], WithinAbs(s, 1e-12));
    }
  }
}

TEST_CASE("Parseval against grid quadrature", "[spectral]") {
  std::mt19937_64 rng(8);
  const BasisSpec b(1, 16);
  for (int trial = 0; trial < 10; ++trial) {
    const auto v = random_field(b, rng, 0.5);
    const auto g = to_grid(v, 64);
    double q = 0.0;
    for (double x : g.values) q += x * x;
    q /= 64.0;
    CHECK_THAT(q, WithinRel(v.norm() * v.norm(), 1e-10));
  }
}

TEST_CASE("field serialization round trips", "[spectral]") {
  std::mt19937_64 rng(9);
  for (int dim : {1, 2}) {
    auto v = random_field(BasisSpec(dim, 5), rng, 1.0 / 3.0);
    v[0] = 1e-310;
    std::stringstream csv;
    write_field_csv(csv, v);
    CHECK(read_field_csv(csv) == v);
    std::stringstream bin;
    write_field_binary(bin, v);
    CHECK(read_field_binary(bin) == v);
  }
  std::stringstream bad("dim,N\n1,2\n0.5\n");
  CHECK_THROWS(read_field_csv(bad));
  std::stringstream overflow("dim,N\n1,1\n0\n1e400\n");
  CHECK_THROWS(read_field_csv(overflow));
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "Inf");
  CHECK(format_double(std::nan("")) == "NaN");
}
