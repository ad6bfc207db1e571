#include <doctest.h>

#include "igs/belief.hpp"
#include "oracles.hpp"

using namespace igs;
using oracle::vec2;
using oracle::vec3;

TEST_SUITE_BEGIN("belief");

namespace {

GaussianBelief random_belief(int n, int rank, Rng& rng) {
  return make_gaussian_belief(oracle::random_vec(n, rng),
                              oracle::random_psd(n, rank, rng));
}

}  // namespace

TEST_CASE("precision spec caches chi") {
  const PrecisionSpec s = make_precision_spec(0.1, 0.95, 1e-4, 100);
  CHECK(s.chi ==
        doctest::Approx(0.01 / chi2_quantile(0.95, 100)).epsilon(1e-12));
  CHECK_THROWS_AS(make_precision_spec(0.1, 1.2, 1e-4, 100), InvalidProbability);
  CHECK_THROWS(make_precision_spec(-1.0, 0.9, 1e-4, 100));
}

TEST_CASE("scalar conditioning example") {
  const GaussianBelief b = make_gaussian_belief(Vec::Zero(2), Mat::Identity(2, 2));
  const GaussianBelief post = posterior_update_gaussian(b, vec2(1, 0), 1.0, 1.0);
  CHECK(post.mean.isApprox(vec2(0.5, 0.0), 1e-12));
  CHECK(post.cov.isApprox(Mat(vec2(0.5, 1.0).asDiagonal()), 1e-12));
}

TEST_CASE("measured eigenvalue moves to lambda s2/(beta lambda + s2)") {
  const GaussianBelief b = make_gaussian_belief(Vec::Zero(2), vec2(2.0, 1.0).asDiagonal());
  const Vec a = std::sqrt(1.5) * vec2(1, 0);
  const GaussianBelief post = posterior_update_gaussian(b, a, 0.37, 1.0);
  const EigenSystem es = eig_sym(post.cov);
  CHECK(es.values[0] == doctest::Approx(1.0));          // untouched eigenvalue
  CHECK(es.values[1] == doctest::Approx(0.5));          // 2*1/(1.5*2+1)
}

TEST_CASE("posterior update matches information-form conditioning") {
  Rng rng(101);
  for (int rep = 0; rep < 25; ++rep) {
    // full-rank so the precision form exists
    const Mat cov = oracle::random_psd(8, 8, rng) + 0.1 * Mat::Identity(8, 8);
    const GaussianBelief b = make_gaussian_belief(oracle::random_vec(8, rng), cov);
    const Vec a = oracle::random_vec(8, rng);
    const double y = rng.normal();
    const double sigma2 = 0.3;
    const GaussianBelief post = posterior_update_gaussian(b, a, y, sigma2);
    const auto ref = oracle::condition_information_form(b.mean, b.cov, a, y, sigma2);
    CHECK((post.mean - ref.mean).norm() <= 1e-9 * std::max(1.0, ref.mean.norm()));
    CHECK((post.cov - ref.cov).norm() <= 1e-9 * std::max(1.0, ref.cov.norm()));
  }
}

TEST_CASE("posterior update dimension error") {
  const GaussianBelief b = make_gaussian_belief(Vec::Zero(3), Mat::Identity(3, 3));
  CHECK_THROWS_AS(posterior_update_gaussian(b, vec2(1, 0), 0.0, 1.0), DimError);
}

TEST_CASE("rank preservation on random low-rank inputs") {
  Rng rng(202);
  for (int rep = 0; rep < 20; ++rep) {
    const int rank = 1 + static_cast<int>(rng.uniform_index(5));
    GaussianBelief b =
        make_gaussian_belief(Vec::Zero(7), oracle::random_psd(7, rank, rng));
    const auto count_rank = [](const Mat& m) {
      const EigenSystem es = eig_sym(m);
      const double lmax = es.values[0];
      int s = 0;
      for (Eigen::Index i = 0; i < es.values.size(); ++i)
        if (es.values[i] > 1e-10 * lmax) ++s;
      return s;
    };
    const int before = count_rank(b.cov);
    for (int k = 0; k < 3; ++k)
      b = posterior_update_gaussian(b, oracle::random_vec(7, rng), rng.normal(), 0.5);
    CHECK(count_rank(b.cov) == before);
  }
}

TEST_CASE("trace identity along an eigenvector direction") {
  Rng rng(303);
  for (int rep = 0; rep < 20; ++rep) {
    const Mat cov = oracle::random_psd(6, 4, rng);
    const EigenSystem es = eig_sym(cov);
    const int pick = static_cast<int>(rng.uniform_index(4));
    const double lambda = es.values[pick];
    const double beta = 0.1 + std::abs(rng.normal());
    const double sigma2 = 0.7;
    const Vec a = std::sqrt(beta) * es.vectors.col(pick);
    const GaussianBelief post = posterior_update_gaussian(
        make_gaussian_belief(Vec::Zero(6), cov), a, rng.normal(), sigma2);
    const double expected =
        cov.trace() - beta * lambda * lambda / (beta * lambda + sigma2);
    CHECK(post.cov.trace() == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("eigen-update locality: orthogonal eigenpairs untouched") {
  Rng rng(404);
  const Mat cov = oracle::random_psd(6, 6, rng);
  const EigenSystem es = eig_sym(cov);
  const double beta = 2.0, sigma2 = 0.4;
  const Vec a = std::sqrt(beta) * es.vectors.col(0);
  const GaussianBelief post = posterior_update_gaussian(
      make_gaussian_belief(Vec::Zero(6), cov), a, 0.1, sigma2);
  const double lambda = es.values[0];
  const double moved = lambda * sigma2 / (beta * lambda + sigma2);
  CHECK(es.vectors.col(0).dot(post.cov * es.vectors.col(0)) ==
        doctest::Approx(moved).epsilon(1e-9));
  for (int i = 1; i < 6; ++i) {
    const Vec u = es.vectors.col(i);
    CHECK((post.cov * u - es.values[i] * u).norm() <= 1e-9 * std::max(1.0, es.values[0]));
  }
}

TEST_CASE("information additivity along a fixed eigenvector direction") {
  Rng rng(505);
  for (int rep = 0; rep < 10; ++rep) {
    const Mat cov = oracle::random_psd(5, 5, rng);
    const EigenSystem es = eig_sym(cov);
    const Vec u = es.vectors.col(1);
    const double b1 = 0.3 + std::abs(rng.normal());
    const double b2 = 0.2 + std::abs(rng.normal());
    const double sigma2 = 0.9;
    const GaussianBelief start = make_gaussian_belief(Vec::Zero(5), cov);
    // covariance path does not depend on the observations
    GaussianBelief two =
        posterior_update_gaussian(start, std::sqrt(b1) * u, rng.normal(), sigma2);
    two = posterior_update_gaussian(two, std::sqrt(b2) * u, rng.normal(), sigma2);
    const GaussianBelief one = posterior_update_gaussian(
        start, std::sqrt(b1 + b2) * u, rng.normal(), sigma2);
    CHECK((two.cov - one.cov).norm() <= 1e-8 * std::max(1.0, one.cov.norm()));
  }
}

TEST_CASE("gmm update: identical components keep symmetric weights") {
  const GaussianBelief comp = make_gaussian_belief(Vec::Zero(2), Mat::Identity(2, 2));
  const GmmBelief b = make_gmm_belief({comp, comp}, vec2(0.5, 0.5));
  const GmmBelief post =
      posterior_update_gmm(b, vec2(1, 0), 0.7, 0.5, WeightUpdateMode::PaperLiteral);
  CHECK(post.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(post.weights[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("gmm update: single component reduces to the gaussian update") {
  Rng rng(606);
  const GaussianBelief comp = random_belief(4, 3, rng);
  const GmmBelief b = make_gmm_belief({comp}, Vec::Ones(1));
  const Vec a = oracle::random_vec(4, rng);
  const GmmBelief post = posterior_update_gmm(b, a, 0.3, 0.2, WeightUpdateMode::ExactBayes);
  const GaussianBelief ref = posterior_update_gaussian(comp, a, 0.3, 0.2);
  CHECK(post.weights[0] == doctest::Approx(1.0));
  CHECK(post.components[0].mean.isApprox(ref.mean, 1e-12));
  CHECK(post.components[0].cov.isApprox(ref.cov, 1e-12));
}

TEST_CASE("gmm exact-bayes weights equal normalized likelihoods") {
  Rng rng(707);
  const GaussianBelief c1 = random_belief(3, 3, rng);
  const GaussianBelief c2 = random_belief(3, 2, rng);
  const Vec pi = vec2(0.3, 0.7);
  const GmmBelief b = make_gmm_belief({c1, c2}, pi);
  const Vec a = oracle::random_vec(3, rng);
  const double y = rng.normal();
  const double sigma2 = 0.6;
  const GmmBelief post = posterior_update_gmm(b, a, y, sigma2, WeightUpdateMode::ExactBayes);

  // direct density evaluation
  auto phi = [](double x, double mean, double var) {
    return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * M_PI * var);
  };
  const double l1 = pi[0] * phi(y, a.dot(c1.mean), a.dot(c1.cov * a) + sigma2);
  const double l2 = pi[1] * phi(y, a.dot(c2.mean), a.dot(c2.cov * a) + sigma2);
  CHECK(post.weights[0] == doctest::Approx(l1 / (l1 + l2)).epsilon(1e-10));
  CHECK(post.weights[1] == doctest::Approx(l2 / (l1 + l2)).epsilon(1e-10));
}

TEST_CASE("gmm weights stay on the simplex through unlikely observations") {
  Rng rng(808);
  GmmBelief b = make_gmm_belief({random_belief(3, 1, rng), random_belief(3, 1, rng),
                                 random_belief(3, 1, rng)},
                                vec3(0.2, 0.5, 0.3));
  for (int k = 0; k < 40; ++k) {
    const Vec a = oracle::random_vec(3, rng);
    // extreme observations stress the log-space path
    b = posterior_update_gmm(b, a, 50.0 + k, 1e-6, WeightUpdateMode::PaperLiteral);
    CHECK(b.weights.minCoeff() >= 0.0);
    CHECK(b.weights.sum() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("posterior entropy closed forms") {
  const double ln2pie = 2.8378770664093454836;
  const GaussianBelief unit = make_gaussian_belief(
      Vec::Zero(1), Mat::Constant(1, 1, 1.0 / (2.0 * M_PI * M_E)));
  CHECK(posterior_entropy(unit) == doctest::Approx(0.0).epsilon(1e-12));
  const GaussianBelief id2 = make_gaussian_belief(Vec::Zero(2), Mat::Identity(2, 2));
  CHECK(posterior_entropy(id2) == doctest::Approx(ln2pie).epsilon(1e-12));
  const GaussianBelief lr = make_gaussian_belief(
      Vec::Zero(3), Mat(vec3(4.0, 1.0, 0.0).asDiagonal()));
  CHECK(posterior_entropy(lr, 1e-8) ==
        doctest::Approx(ln2pie + 0.5 * std::log(4.0)).epsilon(1e-12));
  const GaussianBelief zero = make_gaussian_belief(Vec::Zero(2), Mat::Zero(2, 2));
  CHECK(posterior_entropy(zero) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("map estimates and tie-breaking") {
  const GaussianBelief g = make_gaussian_belief(vec2(1, 2), Mat::Identity(2, 2));
  CHECK(map_estimate(g).isApprox(vec2(1, 2)));
  const GaussianBelief c = make_gaussian_belief(Vec::Zero(2), Mat::Identity(2, 2));
  const GmmBelief m3 = make_gmm_belief({c, c, c}, vec3(0.2, 0.5, 0.3));
  CHECK(map_estimate(m3).first == 1);
  const GmmBelief tie = make_gmm_belief({c, c}, vec2(0.5, 0.5));
  CHECK(map_estimate(tie).first == 0);  // lowest index wins ties
}

TEST_SUITE_END();
