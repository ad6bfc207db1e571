#include <doctest.h>

#include "igs/numerics.hpp"
#include "oracles.hpp"

using namespace igs;

TEST_SUITE_BEGIN("numerics");

TEST_CASE("eig_sym diagonal ordering and sign canonicalization") {
  Mat m = oracle::vec3(1.0, 3.0, 2.0).asDiagonal();
  const EigenSystem es = eig_sym(m);
  CHECK(es.values[0] == doctest::Approx(3.0));
  CHECK(es.values[1] == doctest::Approx(2.0));
  CHECK(es.values[2] == doctest::Approx(1.0));
  CHECK(es.vectors.col(0).isApprox(oracle::vec3(0, 1, 0), 1e-12));
  CHECK(es.vectors.col(1).isApprox(oracle::vec3(0, 0, 1), 1e-12));
  CHECK(es.vectors.col(2).isApprox(oracle::vec3(1, 0, 0), 1e-12));
}

TEST_CASE("eig_sym identity") {
  const EigenSystem es = eig_sym(Mat::Identity(2, 2));
  CHECK(es.values[0] == doctest::Approx(1.0));
  CHECK(es.values[1] == doctest::Approx(1.0));
  CHECK((es.vectors.transpose() * es.vectors).isIdentity(1e-10));
}

TEST_CASE("eig_sym reconstruction residual on random PSD") {
  Rng rng(42);
  for (int rep = 0; rep < 20; ++rep) {
    const Mat m = oracle::random_psd(6, 6, rng);
    const EigenSystem es = eig_sym(m);
    const Mat rec = es.vectors * es.values.asDiagonal() * es.vectors.transpose();
    CHECK((rec - m).norm() <= 1e-9 * std::max(1.0, m.norm()));
    CHECK((es.vectors.transpose() * es.vectors).isIdentity(1e-10));
    // descending + PSD floor
    for (int i = 1; i < 6; ++i) CHECK(es.values[i] <= es.values[i - 1] + 1e-12);
    CHECK(es.values.minCoeff() >= -1e-9 * m.norm());
  }
}

TEST_CASE("eig_sym rejects bad input") {
  Mat nonsym(2, 2);
  nonsym << 1, 2, 3, 4;
  CHECK_THROWS_AS(eig_sym(nonsym), InvalidMatrix);
  Mat nan = Mat::Identity(2, 2);
  nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(eig_sym(nan), InvalidMatrix);
}

TEST_CASE("chi2 quantile closed forms and frozen oracle values") {
  // 2 dof: exponential, q = -2 ln(1-p)
  CHECK(chi2_quantile(0.5, 2) == doctest::Approx(1.3862943611198906).epsilon(1e-12));
  // frozen from a 40-digit independent inversion
  CHECK(chi2_quantile(0.95, 1) == doctest::Approx(3.8414588206941245).epsilon(1e-10));
  CHECK(chi2_quantile(0.95, 100) == doctest::Approx(124.34211340400407).epsilon(1e-10));
  CHECK(chi2_quantile(0.9, 20) == doctest::Approx(28.411980584305634).epsilon(1e-10));
  CHECK(chi2_quantile(0.95, 8) == doctest::Approx(15.507313055865451).epsilon(1e-10));
}

TEST_CASE("chi2 quantile satisfies its defining equation") {
  for (const int n : {1, 2, 3, 7, 16, 100, 311}) {
    for (const double p : {0.01, 0.1, 0.5, 0.9, 0.95, 0.999}) {
      const double q = chi2_quantile(p, n);
      const long double pp = oracle::gamma_p_series_ld(0.5L * n, 0.5L * q);
      CHECK(std::abs(static_cast<double>(pp) - p) <= 1e-10);
    }
  }
}

TEST_CASE("chi2 quantile strictly increasing in p and n") {
  for (const int n : {1, 4, 30}) {
    double prev = 0.0;
    for (double p = 0.05; p < 1.0; p += 0.05) {
      const double q = chi2_quantile(p, n);
      CHECK(q > prev);
      prev = q;
    }
  }
  for (const double p : {0.1, 0.5, 0.9}) {
    double prev = 0.0;
    for (const int n : {1, 2, 3, 5, 8, 13, 21, 55}) {
      const double q = chi2_quantile(p, n);
      CHECK(q > prev);
      prev = q;
    }
  }
}

TEST_CASE("chi2 quantile rejects bad probabilities") {
  CHECK_THROWS_AS(chi2_quantile(0.0, 3), InvalidProbability);
  CHECK_THROWS_AS(chi2_quantile(1.0, 3), InvalidProbability);
  CHECK_THROWS_AS(chi2_quantile(-0.2, 3), InvalidProbability);
  CHECK_THROWS_AS(chi2_quantile(0.5, 0), InvalidProbability);
}

TEST_CASE("chi_npe values and scaling law") {
  CHECK(chi_npe(0.1, 0.95, 100) == doctest::Approx(8.0423171789975458e-05).epsilon(1e-10));
  CHECK(chi_npe(1.0, 0.5, 2) == doctest::Approx(0.72134752044448170).epsilon(1e-12));
  const double base = chi_npe(0.3, 0.9, 7);
  CHECK(chi_npe(0.6, 0.9, 7) == doctest::Approx(4.0 * base).epsilon(1e-12));
  CHECK_THROWS_AS(chi_npe(0.0, 0.9, 7), InvalidProbability);
}

TEST_CASE("project_psd clips eigenvalues") {
  Mat m = oracle::vec2(2.0, -1.0).asDiagonal();
  CHECK(project_psd(m).isApprox(Mat(oracle::vec2(2.0, 0.0).asDiagonal()), 1e-12));
}

TEST_CASE("project_psd fixed point and idempotence") {
  Rng rng(7);
  const Mat psd = oracle::random_psd(5, 5, rng);
  CHECK(project_psd(psd).isApprox(psd, 1e-10));
  Mat sym = oracle::random_psd(5, 2, rng) - oracle::random_psd(5, 2, rng);
  const Mat once = project_psd(sym);
  CHECK(project_psd(once).isApprox(once, 1e-10));
}

TEST_CASE("project_psd optimality against random PSD probes") {
  Rng rng(11);
  Mat m = symmetrize(oracle::random_psd(5, 3, rng) - oracle::random_psd(5, 3, rng));
  const Mat p = project_psd(m);
  const double d_star = (p - m).norm();
  for (int rep = 0; rep < 100; ++rep) {
    const Mat q = oracle::random_psd(5, 5, rng);
    CHECK(d_star <= (q - m).norm() + 1e-12);
  }
}

TEST_CASE("project_l1_ball matches boundary grid search") {
  const Vec v = oracle::vec2(3.0, 1.0);
  const Vec w = project_l1_ball(v, 2.0);
  CHECK(w.isApprox(oracle::vec2(2.0, 0.0), 1e-9));
  const Vec grid = oracle::l1_project_grid_2d(v, 2.0);
  CHECK((w - grid).norm() <= 2e-3);
}

TEST_CASE("project_l1_ball feasible input and degenerate ball") {
  const Vec v = oracle::vec2(0.5, -0.5);
  CHECK(project_l1_ball(v, 2.0).isApprox(v, 1e-15));
  CHECK(project_l1_ball(v, 0.0).isZero(0.0));
}

TEST_CASE("project_l1_ball output within radius on random inputs") {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const Vec v = 3.0 * oracle::random_vec(9, rng);
    const double tau = std::abs(rng.normal()) + 0.01;
    const Vec w = project_l1_ball(v, tau);
    CHECK(w.cwiseAbs().sum() <= tau * (1.0 + 1e-12));
    // projection never moves a kept coordinate past v
    for (int i = 0; i < 9; ++i) CHECK(std::abs(w[i]) <= std::abs(v[i]) + 1e-15);
  }
}

TEST_CASE("psd_norm_at_most agrees with the exact spectral norm") {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const Mat m = oracle::random_psd(6, 3, rng);
    const double nrm = spectral_norm_sym(m);
    CHECK(psd_norm_at_most(m, nrm * 1.0000001));
    CHECK_FALSE(psd_norm_at_most(m, nrm * 0.9999999));
  }
}

TEST_SUITE_END();
