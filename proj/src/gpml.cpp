#include "pfmap/gpml.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "pfmap/probit.hpp"
#include "pfmap/rng.hpp"

namespace pfmap {

namespace {

Eigen::VectorXd sign_targets(const BitVec& labels) {
  Eigen::VectorXd t(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    t[static_cast<Eigen::Index>(i)] = labels.get(i) ? 1.0 : -1.0;
  return t;
}

// Moments of cavity x probit site: zeroth moment Phi(z), posterior mean and
// variance of N(f; m_cav, v_cav) * Phi(t f).
struct SiteMoments {
  double z;
  double mean;
  double var;
};

SiteMoments probit_moments(double m_cav, double v_cav, double t) {
  const double denom = std::sqrt(1.0 + v_cav);
  const double z = t * m_cav / denom;
  const double r = norm_pdf_over_cdf(z);
  SiteMoments mom;
  mom.z = z;
  mom.mean = m_cav + t * v_cav * r / denom;
  mom.var = v_cav - v_cav * v_cav * r * (z + r) / (1.0 + v_cav);
  return mom;
}

}  // namespace

MarginalLikelihood log_ml_ep(const KernelMatrix& km, const BitVec& labels) {
  const Eigen::Index m = km.size();
  if (static_cast<Eigen::Index>(labels.size()) != m)
    throw std::invalid_argument("log_ml_ep: |labels| != dim(K)");

  const Eigen::MatrixXd& K = km.K;
  const Eigen::VectorXd t = sign_targets(labels);

  Eigen::VectorXd nu = Eigen::VectorXd::Zero(m);   // site nu~
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(m);  // site tau~ (>= 0)
  Eigen::MatrixXd Sigma = K;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd last_dtau = Eigen::VectorXd::Zero(m);

  constexpr double kTol = 1e-4;
  constexpr int kMaxSweeps = 100;
  MarginalLikelihood ml;
  ml.method = MlMethod::ep;

  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double sii = Sigma(i, i);
      const double tau_cav = 1.0 / sii - tau[i];
      const double nu_cav = mu[i] / sii - nu[i];
      if (tau_cav <= 0.0) continue;  // pathological cavity, retry next sweep

      const double v_cav = 1.0 / tau_cav;
      const double m_cav = nu_cav * v_cav;
      const SiteMoments mom = probit_moments(m_cav, v_cav, t[i]);
      const double var = std::max(mom.var, 1e-14);

      double tau_target = 1.0 / var - tau_cav;
      double nu_target = mom.mean / var - nu_cav;
      if (tau_target < 0.0) tau_target = 0.0;

      double dtau = tau_target - tau[i];
      double dnu = nu_target - nu[i];
      if (dtau * last_dtau[i] < 0.0) {  // oscillation: damp by half
        dtau *= 0.5;
        dnu *= 0.5;
      }
      last_dtau[i] = dtau;

      // rank-1 refresh of the posterior for the changed site
      const double denom = 1.0 + dtau * sii;
      const Eigen::VectorXd si = Sigma.col(i);
      Sigma.noalias() -= (dtau / denom) * (si * si.transpose());
      mu.noalias() += ((dnu - dtau * mu[i]) / denom) * si;
      tau[i] += dtau;
      nu[i] += dnu;
      max_delta = std::max({max_delta, std::abs(dtau), std::abs(dnu)});
    }

    // full refresh to keep Sigma/mu consistent with the site parameters
    const Eigen::VectorXd sW = tau.cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd B = sW.asDiagonal() * K * sW.asDiagonal();
    B.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("log_ml_ep: inner factorization failed");
    const Eigen::MatrixXd V =
        llt.matrixL().solve(sW.asDiagonal() * K);
    Sigma = K - V.transpose() * V;
    mu = Sigma * nu;

    if (max_delta < kTol) {
      ml.converged = true;
      ++sweep;
      break;
    }
  }
  ml.iterations = sweep;

  // evidence from the final site/cavity state, in the S~^{-1}-free form
  const Eigen::VectorXd sW = tau.cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd B = sW.asDiagonal() * K * sW.asDiagonal();
  B.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("log_ml_ep: final factorization failed");
  const Eigen::MatrixXd L = llt.matrixL();

  double log_z = 0.5 * nu.dot(mu);
  for (Eigen::Index i = 0; i < m; ++i) log_z -= std::log(L(i, i));
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sii = Sigma(i, i);
    double tau_cav = 1.0 / sii - tau[i];
    if (tau_cav <= 0.0) {
      ml.converged = false;
      tau_cav = 1e-12;
    }
    const double nu_cav = mu[i] / sii - nu[i];
    const double v_cav = 1.0 / tau_cav;
    const double m_cav = nu_cav * v_cav;
    const double z = t[i] * m_cav / std::sqrt(1.0 + v_cav);
    const double c = 1.0 + tau[i] * v_cav;
    log_z += log_norm_cdf(z);
    log_z += 0.5 * std::log(c);
    log_z += (m_cav * (tau[i] * m_cav - 2.0 * nu[i]) - v_cav * nu[i] * nu[i]) /
             (2.0 * c);
  }
  ml.log_pu = log_z;
  return ml;
}

MarginalLikelihood log_ml_laplace(const KernelMatrix& km, const BitVec& labels) {
  const Eigen::Index m = km.size();
  if (static_cast<Eigen::Index>(labels.size()) != m)
    throw std::invalid_argument("log_ml_laplace: |labels| != dim(K)");

  const Eigen::MatrixXd& K = km.K;
  const Eigen::VectorXd t = sign_targets(labels);

  Eigen::VectorXd f = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m);

  auto log_lik = [&](const Eigen::VectorXd& fv) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) s += log_norm_cdf(t[i] * fv[i]);
    return s;
  };

  MarginalLikelihood ml;
  ml.method = MlMethod::laplace;

  constexpr double kTol = 1e-8;
  constexpr int kMaxIter = 100;
  double psi = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd L;
  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    Eigen::VectorXd grad(m), W(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double z = t[i] * f[i];
      const double r = norm_pdf_over_cdf(z);
      grad[i] = t[i] * r;
      W[i] = std::max(r * (r + z), 1e-14);
    }
    const Eigen::VectorXd sW = W.cwiseSqrt();
    Eigen::MatrixXd B = sW.asDiagonal() * K * sW.asDiagonal();
    B.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("log_ml_laplace: factorization failed");
    L = llt.matrixL();

    const Eigen::VectorXd b = W.cwiseProduct(f) + grad;
    const Eigen::VectorXd kb = K * b;
    const Eigen::VectorXd inner =
        llt.solve((sW.cwiseProduct(kb)).eval());
    const Eigen::VectorXd a_new = b - sW.cwiseProduct(inner);
    Eigen::VectorXd f_new = K * a_new;

    // backtrack if the Newton proposal lowers the objective
    double step = 1.0;
    Eigen::VectorXd f_try = f_new;
    Eigen::VectorXd a_try = a_new;
    double psi_new;
    for (int h = 0; h < 30; ++h) {
      psi_new = -0.5 * a_try.dot(f_try) + log_lik(f_try);
      if (psi_new >= psi || !std::isfinite(psi)) break;
      step *= 0.5;
      f_try = f + step * (f_new - f);
      // a consistent with f_try: a = K^{-1} f_try is implicit; reuse blend
      a_try = a + step * (a_new - a);
    }
    const double delta = std::abs(psi_new - psi);
    f = f_try;
    a = a_try;
    psi = psi_new;
    if (delta < kTol) {
      ml.converged = true;
      ++iter;
      break;
    }
  }
  ml.iterations = iter;

  // evidence at the mode with the curvature of the final iterate
  Eigen::VectorXd W(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double z = t[i] * f[i];
    const double r = norm_pdf_over_cdf(z);
    W[i] = std::max(r * (r + z), 1e-14);
  }
  const Eigen::VectorXd sW = W.cwiseSqrt();
  Eigen::MatrixXd B = sW.asDiagonal() * K * sW.asDiagonal();
  B.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("log_ml_laplace: factorization failed");
  L = llt.matrixL();

  double log_z = -0.5 * a.dot(f) + log_lik(f);
  for (Eigen::Index i = 0; i < m; ++i) log_z -= std::log(L(i, i));
  ml.log_pu = log_z;
  return ml;
}

MarginalLikelihood log_ml_mc(const KernelMatrix& km, const BitVec& labels,
                             std::uint64_t n_draws, std::uint64_t seed,
                             int workers) {
  const Eigen::Index m = km.size();
  if (static_cast<Eigen::Index>(labels.size()) != m)
    throw std::invalid_argument("log_ml_mc: |labels| != dim(K)");
  if (m > 25)
    throw std::invalid_argument("log_ml_mc: m > 25 (hit rate too small)");
  if (n_draws < 10000)
    throw std::invalid_argument("log_ml_mc: needs at least 1e4 draws");
  if (workers < 1) workers = 1;

  const Eigen::MatrixXd L = cholesky_lower(km);

  constexpr std::uint64_t kBlockSize = 65536;
  const std::uint64_t n_blocks = (n_draws + kBlockSize - 1) / kBlockSize;
  std::atomic<std::uint64_t> next_block{0};
  std::atomic<std::uint64_t> total_hits{0};

  auto work = [&]() {
    std::vector<double> z(static_cast<std::size_t>(m));
    std::uint64_t hits = 0;
    for (;;) {
      const std::uint64_t b = next_block.fetch_add(1);
      if (b >= n_blocks) break;
      const std::uint64_t count = std::min(kBlockSize, n_draws - b * kBlockSize);
      Rng rng(derive_seed(seed, b));
      for (std::uint64_t s = 0; s < count; ++s) {
        bool match = true;
        for (Eigen::Index i = 0; i < m; ++i) {
          z[static_cast<std::size_t>(i)] = rng.normal();
          double y = 0.0;
          for (Eigen::Index j = 0; j <= i; ++j)
            y += L(i, j) * z[static_cast<std::size_t>(j)];
          if ((y > 0.0 ? 1 : 0) != labels.get(static_cast<std::size_t>(i))) {
            match = false;
            break;
          }
        }
        if (match) ++hits;
      }
    }
    total_hits.fetch_add(hits);
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  MarginalLikelihood ml;
  ml.method = MlMethod::mc;
  ml.iterations = static_cast<int>(std::min<std::uint64_t>(
      n_draws, static_cast<std::uint64_t>(std::numeric_limits<int>::max())));
  const std::uint64_t hits = total_hits.load();
  if (hits == 0) {
    ml.converged = false;
    ml.log_pu = -std::numeric_limits<double>::infinity();
    return ml;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n_draws);
  ml.log_pu = std::log(p);
  ml.mc_stderr = std::sqrt((1.0 - p) / static_cast<double>(hits));
  ml.converged = true;
  return ml;
}

}  // namespace pfmap
