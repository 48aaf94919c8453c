#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "pfmap/net.hpp"
#include "pfmap/nngp.hpp"

using namespace pfmap;

TEST_SUITE_BEGIN("nngp");

TEST_CASE("kernel entry symmetry and the orthogonal-input value") {
  Eigen::VectorXd x(2), y(2);
  x << 1.0, 0.0;
  y << 0.0, 1.0;
  const double sw = std::sqrt(2.0);
  // K0 diagonal is 1, K0 cross is 0: depth-1 value is 1/pi
  CHECK(kernel_entry(x, y, 1, sw, 0.0) ==
        doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
  CHECK(kernel_entry(x, y, 3, sw, 0.0) ==
        doctest::Approx(kernel_entry(y, x, 3, sw, 0.0)).epsilon(1e-14));

  // variance-preserving fixed point on the diagonal
  double prev = kernel_entry(x, x, 1, sw, 0.0);
  for (int depth = 2; depth <= 6; ++depth) {
    const double cur = kernel_entry(x, x, depth, sw, 0.0);
    CHECK(cur == doctest::Approx(prev).epsilon(1e-12));
    prev = cur;
  }
  CHECK(prev == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(kernel_entry(x, y, 0, 1.0, 0.0), std::invalid_argument);
  Eigen::VectorXd bad(3);
  bad.setZero();
  CHECK_THROWS_AS(kernel_entry(x, bad, 1, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("kernel entry is invariant under coordinate permutation") {
  Eigen::VectorXd x(4), y(4), xp(4), yp(4);
  x << 0.2, 0.8, 0.0, 1.0;
  y << 1.0, 0.1, 0.5, 0.0;
  xp << 1.0, 0.0, 0.8, 0.2;  // same permutation applied to both
  yp << 0.0, 0.5, 0.1, 1.0;
  CHECK(kernel_entry(x, y, 2, 1.3, 0.4) ==
        doctest::Approx(kernel_entry(xp, yp, 2, 1.3, 0.4)).epsilon(1e-14));
}

TEST_CASE("zero-input branch stays finite with sigma_b = 0") {
  Eigen::VectorXd zero(3), other(3);
  zero.setZero();
  other << 1.0, 0.0, 1.0;
  const double v = kernel_entry(zero, other, 2, 1.0, 0.0);
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(0.0));
  CHECK(kernel_entry(zero, zero, 2, 1.0, 0.0) == doctest::Approx(0.0));
  // with bias variance the branch never triggers
  CHECK(kernel_entry(zero, other, 2, 1.0, 0.5) > 0.0);
}

TEST_CASE("kernel matches the Monte-Carlo covariance of single-layer nets") {
  // width does not bias the depth-1 expectation, only the MC error
  NetworkSpec spec;
  spec.layer_sizes = {2, 16, 1};
  const ParamDistribution dist{DistKind::gaussian, std::sqrt(2.0), 0.0};
  Eigen::MatrixXd X(2, 2);
  X << 1.0, 0.0, 0.0, 1.0;
  BatchedForward bf(spec, X);
  Rng rng(321);
  std::vector<double> params;
  const int draws = 200000;
  double sxy = 0.0;
  for (int i = 0; i < draws; ++i) {
    sample_params_into(spec, dist, rng, params);
    const Eigen::VectorXd& out = bf.eval(params.data());
    sxy += out[0] * out[1];
  }
  const double mc = sxy / draws;
  // 3 standard errors of the product mean (empirically ~1.5/sqrt(N))
  CHECK(std::abs(mc - 1.0 / std::numbers::pi) < 3.0 * 1.5 / std::sqrt(draws));
}

TEST_CASE("kernel matrix is PSD and survives duplicated rows") {
  Eigen::MatrixXd X(5, 3);
  X << 1, 0, 1, 0, 1, 1, 1, 1, 0, 0.5, 0.25, 0.75, 1, 0, 1;  // row 4 == row 0
  const KernelMatrix km = kernel_matrix(X, 2, 1.0, 1.0);
  CHECK(km.size() == 5);
  CHECK(km.jitter > 0.0);
  CHECK(km.K(0, 1) == doctest::Approx(km.K(1, 0)));

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(km.K);
  const double floor = -1e-8 * km.K.trace() / km.size();
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(es.eigenvalues()[i] >= floor);

  CHECK_NOTHROW(cholesky_lower(km));

  const KernelMatrix one = kernel_matrix(X.topRows(1), 2, 1.0, 1.0);
  CHECK(one.size() == 1);
  CHECK(one.K(0, 0) > 0.0);
}

TEST_CASE("gp label sampling: determinism, marginals, perfect correlation") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 0, 0, 1, 1, 1, 0.3, 0.7;
  const KernelMatrix km = kernel_matrix(X, 1, 1.0, 0.5);
  CHECK(sample_gp_labels(km, 99) == sample_gp_labels(km, 99));

  // identity covariance: independent fair bits
  KernelMatrix id;
  id.K = Eigen::MatrixXd::Identity(5, 5);
  id.jitter = 0.0;
  GpLabelSampler sampler(id);
  Rng rng(4);
  const int draws = 100000;
  std::array<int, 5> ones{};
  for (int i = 0; i < draws; ++i) {
    const BitVec l = sampler.draw(rng);
    for (int j = 0; j < 5; ++j) ones[j] += l.get(j);
  }
  for (int j = 0; j < 5; ++j)
    CHECK(static_cast<double>(ones[j]) / draws ==
          doctest::Approx(0.5).epsilon(0.02));

  // all-ones covariance: labels all agree for every seed
  KernelMatrix ones_k;
  ones_k.K = Eigen::MatrixXd::Ones(4, 4);
  ones_k.K.diagonal().array() += 1e-8;
  ones_k.jitter = 1e-8;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const BitVec l = sample_gp_labels(ones_k, seed);
    const std::size_t c = l.count_ones();
    CHECK((c == 0 || c == 4));
  }
}

TEST_CASE("gp frequency tables are worker-count independent") {
  Eigen::MatrixXd X(6, 3);
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) X(i, j) = ((i * 3 + j) % 5) / 4.0;
  const KernelMatrix km = kernel_matrix(X, 2, 1.0, 1.0);
  const FrequencyTable t1 = estimate_gp_label_frequencies(km, 20000, 5, 1);
  const FrequencyTable t4 = estimate_gp_label_frequencies(km, 20000, 5, 4);
  CHECK(t1.total == t4.total);
  REQUIRE(t1.counts.size() == t4.counts.size());
  for (const auto& [k, c] : t1.counts) CHECK(t4.counts.at(k) == c);
}

TEST_CASE("kernel dump round-trips") {
  Eigen::MatrixXd X(3, 2);
  X << 0, 1, 1, 0, 1, 1;
  const KernelMatrix km = kernel_matrix(X, 2, 1.5, 0.25);
  const std::string path = "test_kernel.bin";
  save_kernel(km, path);
  const KernelMatrix back = load_kernel(path);
  CHECK(back.depth == km.depth);
  CHECK(back.sigma_w == km.sigma_w);
  CHECK(back.sigma_b == km.sigma_b);
  CHECK(back.jitter == km.jitter);
  CHECK(back.fingerprint == km.fingerprint);
  CHECK((back.K - km.K).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_SUITE_END();
