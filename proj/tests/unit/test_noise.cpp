// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tamedch/errors.hpp"
#include "tamedch/noise.hpp"

using namespace tamedch;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using std::numbers::pi;

namespace {

// Per-mode sample variance of the fine increments, known zero mean.
std::vector<double> empirical_variances(const NoisePath& path) {
  std::vector<double> v(path.modes(), 0.0);
  for (long m = 0; m < path.M_fine(); ++m) {
    const auto row = path.fine(m);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += row[k] * row[k];
  }
  for (auto& x : v) x /= static_cast<double>(path.M_fine());
  return v;
}

std::vector<double> total(std::span<const SpectralField> incs) {
  std::vector<double> rows;
  const std::size_t width = incs.front().size();
  for (const auto& f : incs) rows.insert(rows.end(), f.coeffs().begin(), f.coeffs().end());
  std::vector<double> out(width), scratch;
  pairwise_row_sum(rows, width, out, scratch);
  return out;
}

}  // namespace

TEST_CASE("spectrum values", "[noise]") {
  CHECK_THAT(log_spectrum_value(NoiseKind::TraceClassLog, 2), WithinRel(1.0 / (2.0 * std::log(2.0) * std::log(2.0)), 1e-15));
  CHECK_THAT(log_spectrum_value(NoiseKind::TraceClassLog, 2), WithinAbs(1.04068, 1e-5));
  CHECK(log_spectrum_value(NoiseKind::TraceClassLog, 1) == 0.0);
  CHECK(log_spectrum_value(NoiseKind::SmoothLog, 1) == 0.0);
  CHECK_THAT(log_spectrum_value(NoiseKind::SmoothLog, 3), WithinRel(1.0 / (243.0 * std::log(3.0) * std::log(3.0)), 1e-15));

  const NoiseSpec white(NoiseKind::White, BasisSpec(1, 5));
  for (double q : white.driver_variances()) CHECK(q == 1.0);
  const NoiseSpec tc(NoiseKind::TraceClassLog, BasisSpec(1, 5));
  CHECK(tc.driver_variances()[0] == 0.0);
  CHECK(tc.driver_variances()[1] == log_spectrum_value(NoiseKind::TraceClassLog, 2));
}

TEST_CASE("2D spectra follow eigenvalue rank", "[noise]") {
  const BasisSpec b(2, 3);
  const NoiseSpec tc(NoiseKind::TraceClassLog, b);
  const auto& q = tc.driver_variances();
  // (0,1) and (1,0) tie at pi^2; row-major order puts (0,1) first.
  CHECK(q[b.flat_index({0, 1})] == 0.0);
  CHECK(q[b.flat_index({1, 0})] == log_spectrum_value(NoiseKind::TraceClassLog, 2));
  CHECK(q[b.flat_index({1, 1})] == log_spectrum_value(NoiseKind::TraceClassLog, 3));
  CHECK(q[b.flat_index({0, 2})] == log_spectrum_value(NoiseKind::TraceClassLog, 4));
  CHECK(q[b.flat_index({3, 3})] == log_spectrum_value(NoiseKind::TraceClassLog, 15));
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (i == b.flat_index({0, 1})) continue;  // rank 1, q = 0 by definition
      if (eigenvalue(b.mode(i), b) < eigenvalue(b.mode(j), b)) CHECK(q[i] >= q[j]);
    }
  }
}

TEST_CASE("spec construction errors", "[noise]") {
  CHECK_THROWS_AS(NoiseSpec(NoiseKind::NonCommutingSine, BasisSpec(2, 4)), ArgumentError);
  CHECK_THROWS_AS(NoiseSpec(NoiseKind::Custom, BasisSpec(1, 4)), ArgumentError);
  CHECK_THROWS_AS(NoiseSpec(NoiseKind::Custom, BasisSpec(1, 4), [](ModeIndex) { return -1.0; }), ArgumentError);
  CHECK_THROWS_AS(noise_kind_from_string("pink"), ArgumentError);
  CHECK(noise_kind_from_string("smooth_log") == NoiseKind::SmoothLog);
}

TEST_CASE("white single-mode increment variance", "[noise]") {
  const long n = 100000;
  const double tau = 0x1p-10;
  const NoiseSpec spec(NoiseKind::White, BasisSpec(1, 1));
  const auto path = sample_path(spec, tau * static_cast<double>(n), n, 2024);
  const double var = empirical_variances(path)[0];
  const double se = tau * std::sqrt(2.0 / static_cast<double>(n));
  CHECK(std::abs(var - tau) < 3.0 * se);
}

TEST_CASE("mode one carries no noise for the log spectra", "[noise]") {
  for (auto kind : {NoiseKind::TraceClassLog, NoiseKind::SmoothLog}) {
    const auto path = sample_path(NoiseSpec(kind, BasisSpec(1, 8)), 1.0, 256, 5);
    for (long m = 0; m < path.M_fine(); ++m) CHECK(path.fine(m)[0] == 0.0);
  }
}

TEST_CASE("per-mode variances for every kind", "[noise]") {
  const long M = 20000;
  const double T = 2.0;
  const double tau = T / M;
  const std::vector<NoiseSpec> specs{
      NoiseSpec(NoiseKind::White, BasisSpec(1, 8)),
      NoiseSpec(NoiseKind::TraceClassLog, BasisSpec(1, 8)),
      NoiseSpec(NoiseKind::SmoothLog, BasisSpec(1, 8)),
      NoiseSpec(NoiseKind::NonCommutingSine, BasisSpec(1, 8)),
      NoiseSpec(NoiseKind::TraceClassLog, BasisSpec(2, 3)),
      NoiseSpec(NoiseKind::Custom, BasisSpec(1, 4), [](ModeIndex k) { return 0.5 * k.k1; }),
  };
  for (const auto& spec : specs) {
    const auto path = sample_path(spec, T, M, 77, 3);
    const auto emp = empirical_variances(path);
    const auto q = spec.cosine_variances();
    for (std::size_t k = 0; k < emp.size(); ++k) {
      INFO(spec.label() << " mode " << k);
      const double expected = q[k] * tau;
      const double se = expected * std::sqrt(2.0 / M);
      CHECK(std::abs(emp[k] - expected) <= 4.0 * se);
    }
  }
}

TEST_CASE("sine to cosine inner products", "[noise]") {
  for (int i = 1; i <= 6; ++i) {
    for (int k = 0; k <= 6; ++k) {
      const double q = oracle::midpoint(
          [&](double x) {
            const double ck = k == 0 ? 1.0 : std::sqrt(2.0) * std::cos(k * pi * x);
            return std::sqrt(2.0) * std::sin(i * pi * x) * ck;
          },
          1 << 16);
      CHECK_THAT(sine_cosine_inner(i, k), WithinAbs(q, 1e-9));
    }
  }
  CHECK_THROWS_AS(sine_cosine_inner(0, 1), IndexError);
}

TEST_CASE("non-commuting noise covariance in the cosine basis", "[noise]") {
  const BasisSpec b(1, 6);
  const NoiseSpec spec(NoiseKind::NonCommutingSine, b);
  const long M = 40000;
  const auto path = sample_path(spec, 1.0, M, 11);
  const auto& S = spec.sine_to_cosine();
  const auto& c = spec.driver_variances();
  const std::size_t n = b.mode_count();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t d = a + 1; d < n; ++d) {
      double expected = 0.0;
      for (std::size_t i = 0; i < n; ++i) expected += S[a * n + i] * S[d * n + i] * c[i];
      expected /= static_cast<double>(M);
      double emp = 0.0;
      for (long m = 0; m < M; ++m) emp += path.fine(m)[a] * path.fine(m)[d];
      emp /= static_cast<double>(M);
      const auto va = spec.cosine_variances();
      const double se = std::sqrt((va[a] * va[d] + expected * expected * M * M) / M) / M;
      CHECK(std::abs(emp - expected) <= 4.0 * se + 1e-15);
    }
  }
}

TEST_CASE("increments have exactly zero mean", "[noise]") {
  const auto path = sample_path(NoiseSpec(NoiseKind::NonCommutingSine, BasisSpec(1, 6)), 1.0, 64, 3);
  for (const auto& inc : increments_on_grid(path, 8)) CHECK(inc.mean() == 0.0);
}

TEST_CASE("coarsening", "[noise]") {
  const auto path = sample_path(NoiseSpec(NoiseKind::White, BasisSpec(1, 5)), 1.0, 64, 99);

  const auto same = increments_on_grid(path, 64);
  for (long m = 0; m < 64; ++m) {
    const auto row = path.fine(m);
    for (std::size_t k = 0; k < 5; ++k) CHECK(same[m][k] == row[k]);
  }

  const auto one = increments_on_grid(path, 1);
  REQUIRE(one.size() == 1);
  for (std::size_t k = 0; k < 5; ++k) {
    double seq = 0.0;
    for (long m = 0; m < 64; ++m) seq += path.fine(m)[k];
    CHECK_THAT(one[0][k], WithinAbs(seq, 1e-13));
  }
  CHECK(total(same) == std::vector<double>(one[0].coeffs().begin(), one[0].coeffs().end()));

  // Dyadic levels telescope bit-exactly.
  const auto four = increments_on_grid(path, 4);
  const auto sixteen = increments_on_grid(path, 16);
  CHECK(total(four) == total(sixteen));
  for (long m = 0; m < 4; ++m) {
    const auto block = std::span<const SpectralField>(sixteen).subspan(static_cast<std::size_t>(4 * m), 4);
    CHECK(total(block) == std::vector<double>(four[m].coeffs().begin(), four[m].coeffs().end()));
  }

  CHECK_THROWS_AS(increments_on_grid(path, 3), ArgumentError);
  CHECK_THROWS_AS(increments_on_grid(path, 0), ArgumentError);
}

TEST_CASE("paths are reproducible and independent of threads", "[noise]") {
  const NoiseSpec spec(NoiseKind::TraceClassLog, BasisSpec(2, 4));
  const auto a = sample_path(spec, 1.0, 128, 123, 5);
  const auto b = sample_path(spec, 1.0, 128, 123, 5);
  CHECK(a.fine_increments() == b.fine_increments());
  CHECK(sample_path(spec, 1.0, 128, 123, 6).fine_increments() != a.fine_increments());
  CHECK(sample_path(spec, 1.0, 128, 124, 5).fine_increments() != a.fine_increments());

  std::vector<std::vector<double>> results(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] { results[t] = sample_path(spec, 1.0, 128, 123, 5).fine_increments(); });
  }
  for (auto& t : threads) t.join();
  for (const auto& r : results) CHECK(r == a.fine_increments());
}

TEST_CASE("path cache round trip", "[noise]") {
  const NoiseSpec spec(NoiseKind::SmoothLog, BasisSpec(1, 7));
  const auto path = sample_path(spec, 0.5, 32, 8, 2);
  std::stringstream ss;
  write_path_binary(ss, path);
  const auto back = read_path_binary(ss, spec);
  CHECK(back.fine_increments() == path.fine_increments());
  CHECK(back.M_fine() == 32);
  CHECK(back.T() == 0.5);
  CHECK(back.stream() == 2);

  std::stringstream again;
  write_path_binary(again, path);
  CHECK_THROWS_AS(read_path_binary(again, NoiseSpec(NoiseKind::SmoothLog, BasisSpec(1, 8))), IoError);
  std::stringstream truncated(again.str().substr(0, 40));
  CHECK_THROWS_AS(read_path_binary(truncated, spec), IoError);
}

TEST_CASE("regularity diagnostic", "[noise]") {
  const long probe = 1L << 20;
  const auto white = regularity_exponent(NoiseSpec(NoiseKind::White, BasisSpec(1, 8)), probe);
  CHECK(white.gamma_boundary == 1.5);
  CHECK(white.gamma_admitted == 1.375);
  REQUIRE(white.partial_sums.size() == white.gammas.size());
  CHECK(white.probe_points == std::vector<long>{probe / 4, probe / 2, probe});

  const auto tc = regularity_exponent(NoiseSpec(NoiseKind::TraceClassLog, BasisSpec(1, 8)), probe);
  CHECK(tc.gamma_admitted == 2.0);
  CHECK(tc.gamma_boundary == 2.125);

  const auto smooth = regularity_exponent(NoiseSpec(NoiseKind::SmoothLog, BasisSpec(1, 8)), probe);
  CHECK(smooth.gamma_admitted == 4.0);

  // In d=2 lambda grows only linearly in the rank, so just above gamma = 2 the
  // terms decay like r^{-1 + (gamma - 2)} / ln(r)^2 and the tail test is marginal.
  const auto tc2 = regularity_exponent(NoiseSpec(NoiseKind::TraceClassLog, BasisSpec(2, 8)), probe);
  CHECK(tc2.gamma_admitted >= 2.0);
  CHECK(tc2.gamma_boundary <= 2.5);

  const auto zero = regularity_exponent(NoiseSpec::zero(BasisSpec(1, 8)), 64);
  CHECK(zero.gamma_admitted == 4.0);

  CHECK_THROWS_AS(regularity_exponent(NoiseSpec(NoiseKind::White, BasisSpec(1, 8)), 8), ArgumentError);
}
