#include "icstat/regression.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "icstat/ecdf.hpp"
#include "icstat/rng.hpp"

namespace icstat {

namespace {

constexpr double kConditionLimit = 1e12;
constexpr double kMadToSigma = 1.0 / 0.6745;

struct SymmetricInverse {
  Matrix inverse;
};

// Inverts a symmetric positive definite accumulation matrix, rejecting
// singular or badly conditioned ones.
SymmetricInverse guarded_inverse(const Matrix& a, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) throw RankError(std::string(what) + ": eigensolver failed");
  const Vector& lambda = es.eigenvalues();
  const double lo = lambda.minCoeff();
  const double hi = lambda.maxCoeff();
  if (!(hi > 0.0) || !(lo > 0.0) || hi / lo > kConditionLimit)
    throw RankError(std::string(what) +
                    ": design is singular or ill-conditioned (condition limit 1e12)");
  SymmetricInverse out;
  out.inverse = es.eigenvectors() * lambda.cwiseInverse().asDiagonal() *
                es.eigenvectors().transpose();
  return out;
}

void check_designs(const std::vector<DesignedCluster>& clusters) {
  if (clusters.empty()) throw EmptyInputError("regression needs at least one cluster");
  const Index p = clusters.front().X.cols();
  if (p < 1) throw InvalidArgumentError("regression needs at least one regressor");
  for (const DesignedCluster& cl : clusters) {
    if (cl.X.cols() != p) throw InvalidArgumentError("covariate dimension differs across clusters");
    if (cl.X.rows() != cl.y.size() || cl.X.rows() < 1)
      throw InvalidArgumentError("design rows and outcomes do not match");
    if (!cl.X.allFinite() || !cl.y.allFinite())
      throw InvalidArgumentError("regression inputs contain non-finite values");
  }
}

Index total_rows(const std::vector<DesignedCluster>& clusters) {
  Index n = 0;
  for (const DesignedCluster& cl : clusters) n += cl.X.rows();
  return n;
}

Vector flattened_residuals(const std::vector<DesignedCluster>& clusters, const Vector& beta) {
  Vector r(total_rows(clusters));
  Index pos = 0;
  for (const DesignedCluster& cl : clusters) {
    r.segment(pos, cl.y.size()) = cl.y - cl.X * beta;
    pos += cl.y.size();
  }
  return r;
}

void finish_covariance(RegressionFit& fit) {
  fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
  fit.std_errors = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
}

}  // namespace

NonConvergenceError::NonConvergenceError(const std::string& message, RegressionFit last)
    : Error(message), last_(std::move(last)) {}

std::vector<DesignedCluster> design_clusters(const ClusteredSample& sample, bool intercept) {
  if (sample.outcome_dim() != 1)
    throw InvalidArgumentError("regression requires a univariate outcome");
  if (!intercept && sample.covariate_dim() == 0)
    throw InvalidArgumentError("regression without intercept needs covariates");
  std::vector<DesignedCluster> designs;
  designs.reserve(sample.clusters().size());
  const Index p = sample.covariate_dim() + (intercept ? 1 : 0);
  for (const Cluster& cl : sample.clusters()) {
    DesignedCluster d;
    d.X.resize(cl.size(), p);
    Index col = 0;
    if (intercept) d.X.col(col++).setOnes();
    if (sample.covariate_dim() > 0) d.X.rightCols(sample.covariate_dim()) = cl.covariates;
    d.y = cl.outcomes.col(0);
    designs.push_back(std::move(d));
  }
  return designs;
}

RegressionFit icswls_fit(const std::vector<DesignedCluster>& clusters) {
  check_designs(clusters);
  const Index p = clusters.front().X.cols();

  Matrix a = Matrix::Zero(p, p);
  Vector b = Vector::Zero(p);
  for (const DesignedCluster& cl : clusters) {
    const double inv_n = 1.0 / static_cast<double>(cl.X.rows());
    a.noalias() += inv_n * cl.X.transpose() * cl.X;
    b.noalias() += inv_n * cl.X.transpose() * cl.y;
  }
  const SymmetricInverse inv = guarded_inverse(a, "weighted least squares");

  RegressionFit fit;
  fit.method = "icswls";
  fit.beta = inv.inverse * b;

  Matrix meat = Matrix::Zero(p, p);
  for (const DesignedCluster& cl : clusters) {
    const double inv_n = 1.0 / static_cast<double>(cl.X.rows());
    const Vector u = inv_n * cl.X.transpose() * (cl.y - cl.X * fit.beta);
    meat.noalias() += u * u.transpose();
  }
  fit.covariance = inv.inverse * meat * inv.inverse;
  fit.residuals = flattened_residuals(clusters, fit.beta);
  finish_covariance(fit);
  return fit;
}

RegressionFit ols_fit(const std::vector<DesignedCluster>& clusters) {
  check_designs(clusters);
  const Index p = clusters.front().X.cols();
  const Index n = total_rows(clusters);

  Matrix a = Matrix::Zero(p, p);
  Vector b = Vector::Zero(p);
  for (const DesignedCluster& cl : clusters) {
    a.noalias() += cl.X.transpose() * cl.X;
    b.noalias() += cl.X.transpose() * cl.y;
  }
  const SymmetricInverse inv = guarded_inverse(a, "pooled least squares");

  RegressionFit fit;
  fit.method = "ols";
  fit.beta = inv.inverse * b;
  fit.residuals = flattened_residuals(clusters, fit.beta);
  double sigma2 = 0.0;
  if (n > p) {
    sigma2 = fit.residuals.squaredNorm() / static_cast<double>(n - p);
  } else {
    fit.warnings.push_back("saturated fit: naive covariance set to zero");
  }
  fit.covariance = sigma2 * inv.inverse;
  fit.warnings.push_back("pooled fit ignores clustering; for comparison only");
  finish_covariance(fit);
  return fit;
}

RegressionFit huber_icw_fit(const std::vector<DesignedCluster>& clusters,
                            const HuberConfig& config) {
  check_designs(clusters);
  if (!(config.c > 0.0) || !(config.d > 0.0) || !(config.tol > 0.0) || config.max_iter < 1)
    throw InvalidArgumentError("Huber configuration values must be positive");
  const Index p = clusters.front().X.cols();
  const double m = static_cast<double>(clusters.size());

  double y_scale = 0.0;
  for (const DesignedCluster& cl : clusters)
    y_scale = std::max(y_scale, cl.y.cwiseAbs().maxCoeff());
  const double sigma_floor = 1e-10 * std::max(1.0, y_scale);

  Vector beta = icswls_fit(clusters).beta;

  // Scale start: weighted median absolute residual, rescaled to be consistent
  // at the normal.
  double sigma;
  {
    std::vector<double> absr;
    std::vector<double> weights;
    for (const DesignedCluster& cl : clusters) {
      const Vector r = cl.y - cl.X * beta;
      const double w = 1.0 / (m * static_cast<double>(cl.X.rows()));
      for (Index j = 0; j < r.size(); ++j) {
        absr.push_back(std::abs(r[j]));
        weights.push_back(w);
      }
    }
    const double mad = WeightedEcdf(absr, weights).quantile(0.5);
    if (mad <= sigma_floor)
      throw DegenerateError("residual scale collapsed: data fit exactly");
    sigma = mad * kMadToSigma;
  }

  const auto w1 = [&](double r) { return std::min(1.0, config.c / std::abs(r)); };
  // w2 * r^2 simplifies to d * min(r^2, c^2).

  int iter = 0;
  bool converged = false;
  for (; iter < config.max_iter; ++iter) {
    Matrix a = Matrix::Zero(p, p);
    Vector b = Vector::Zero(p);
    double scale_num = 0.0;
    for (const DesignedCluster& cl : clusters) {
      const Index ni = cl.X.rows();
      const double inv_n = 1.0 / static_cast<double>(ni);
      const Vector r = (cl.y - cl.X * beta) / sigma;
      Vector wr(ni);
      for (Index j = 0; j < ni; ++j) {
        wr[j] = r[j] == 0.0 ? 1.0 : w1(r[j]);
        scale_num += inv_n * config.d * std::min(r[j] * r[j], config.c * config.c);
      }
      const Matrix xw = cl.X.transpose() * wr.asDiagonal();
      a.noalias() += inv_n * xw * cl.X;
      b.noalias() += inv_n * xw * cl.y;
    }
    const SymmetricInverse inv = guarded_inverse(a, "weighted Huber regression");
    const Vector beta_new = inv.inverse * b;
    const double sigma_new = sigma * std::sqrt(scale_num / m);
    if (sigma_new <= sigma_floor)
      throw DegenerateError("residual scale collapsed during iteration");

    double change = std::abs(sigma_new - sigma) / (1.0 + sigma_new);
    for (Index k = 0; k < p; ++k)
      change = std::max(change, std::abs(beta_new[k] - beta[k]) / (1.0 + std::abs(beta_new[k])));
    beta = beta_new;
    sigma = sigma_new;
    if (change < config.tol) {
      converged = true;
      ++iter;
      break;
    }
  }

  RegressionFit fit;
  fit.method = "huber";
  fit.beta = beta;
  fit.scale = sigma;
  fit.iterations = iter;
  fit.converged = converged;
  fit.residuals = flattened_residuals(clusters, beta);

  Matrix a = Matrix::Zero(p, p);
  Matrix meat = Matrix::Zero(p, p);
  for (const DesignedCluster& cl : clusters) {
    const Index ni = cl.X.rows();
    const double inv_n = 1.0 / static_cast<double>(ni);
    const Vector r = cl.y - cl.X * beta;  // original scale
    Vector wr(ni);
    for (Index j = 0; j < ni; ++j) {
      const double rs = r[j] / sigma;
      wr[j] = rs == 0.0 ? 1.0 : w1(rs);
    }
    a.noalias() += inv_n * cl.X.transpose() * wr.asDiagonal() * cl.X;
    const Vector u = inv_n * cl.X.transpose() * (wr.asDiagonal() * r);
    meat.noalias() += u * u.transpose();
  }
  const SymmetricInverse inv = guarded_inverse(a, "weighted Huber regression");
  fit.covariance = inv.inverse * meat * inv.inverse;
  finish_covariance(fit);

  if (!converged)
    throw NonConvergenceError("Huber regression did not converge in " +
                                  std::to_string(config.max_iter) + " iterations",
                              std::move(fit));
  return fit;
}

namespace {

struct ReplicateOls {
  Vector beta;
  Matrix covariance;
};

// OLS on one row per cluster, via normal equations with the same condition
// guard as the full fits.
ReplicateOls replicate_ols(const std::vector<DesignedCluster>& clusters,
                           const std::vector<Index>& rows) {
  const Index m = static_cast<Index>(clusters.size());
  const Index p = clusters.front().X.cols();
  Matrix a = Matrix::Zero(p, p);
  Vector b = Vector::Zero(p);
  for (Index i = 0; i < m; ++i) {
    const auto x = clusters[static_cast<std::size_t>(i)].X.row(rows[static_cast<std::size_t>(i)]);
    const double y = clusters[static_cast<std::size_t>(i)].y[rows[static_cast<std::size_t>(i)]];
    a.noalias() += x.transpose() * x;
    b.noalias() += x.transpose() * y;
  }
  const SymmetricInverse inv = guarded_inverse(a, "resampled least squares");
  ReplicateOls out;
  out.beta = inv.inverse * b;
  double rss = 0.0;
  for (Index i = 0; i < m; ++i) {
    const auto x = clusters[static_cast<std::size_t>(i)].X.row(rows[static_cast<std::size_t>(i)]);
    const double e = clusters[static_cast<std::size_t>(i)].y[rows[static_cast<std::size_t>(i)]] -
                     x * out.beta;
    rss += e * e;
  }
  const double sigma2 = m > p ? rss / static_cast<double>(m - p) : 0.0;
  out.covariance = sigma2 * inv.inverse;
  return out;
}

}  // namespace

RegressionFit wcr_regression(const std::vector<DesignedCluster>& clusters,
                             const WcrRegressionConfig& config) {
  check_designs(clusters);
  if (config.replicates < 2)
    throw InvalidArgumentError("resampled regression needs at least two replicates");
  const Index m = static_cast<Index>(clusters.size());
  const Index p = clusters.front().X.cols();

  std::vector<Vector> betas;
  std::vector<Matrix> covariances;

  long long combos = 1;
  bool exact = config.exact_cap >= 1;
  for (const DesignedCluster& cl : clusters) {
    combos *= static_cast<long long>(cl.X.rows());
    if (combos > config.exact_cap) {
      exact = false;
      break;
    }
  }

  std::vector<double> weights;
  if (exact) {
    double total_weight = 0.0;
    double skipped_weight = 0.0;
    double base = 1.0;
    for (const DesignedCluster& cl : clusters) base *= static_cast<double>(cl.X.rows());
    const double w = 1.0 / base;
    std::vector<Index> rows(static_cast<std::size_t>(m), 0);
    while (true) {
      try {
        ReplicateOls rep = replicate_ols(clusters, rows);
        betas.push_back(std::move(rep.beta));
        covariances.push_back(std::move(rep.covariance));
        weights.push_back(w);
        total_weight += w;
      } catch (const RankError&) {
        skipped_weight += w;
      }
      Index i = 0;
      for (; i < m; ++i) {
        auto& r = rows[static_cast<std::size_t>(i)];
        if (++r < clusters[static_cast<std::size_t>(i)].X.rows()) break;
        r = 0;
      }
      if (i == m) break;
    }
    if (skipped_weight > 0.5 || betas.empty())
      throw RankError("more than half of the one-per-cluster designs are rank deficient");
    for (double& ww : weights) ww /= total_weight;
  } else {
    long long accepted = 0;
    long long attempts = 0;
    const long long max_attempts = 4 * config.replicates;
    while (accepted < config.replicates) {
      if (attempts >= max_attempts ||
          (attempts >= 20 && attempts - accepted > attempts / 2))
        throw RankError("more than half of the resampled designs are rank deficient");
      std::mt19937_64 rng = substream(config.seed, static_cast<std::uint64_t>(attempts));
      ++attempts;
      std::vector<Index> rows(static_cast<std::size_t>(m));
      for (Index i = 0; i < m; ++i) {
        const Index ni = clusters[static_cast<std::size_t>(i)].X.rows();
        if (ni == 1) {
          rows[static_cast<std::size_t>(i)] = 0;
        } else {
          std::uniform_int_distribution<Index> pick(0, ni - 1);
          rows[static_cast<std::size_t>(i)] = pick(rng);
        }
      }
      try {
        ReplicateOls rep = replicate_ols(clusters, rows);
        betas.push_back(std::move(rep.beta));
        covariances.push_back(std::move(rep.covariance));
        ++accepted;
      } catch (const RankError&) {
      }
    }
    weights.assign(betas.size(), 1.0 / static_cast<double>(betas.size()));
  }

  RegressionFit fit;
  fit.method = "wcr";
  fit.iterations = static_cast<int>(betas.size());
  fit.beta = Vector::Zero(p);
  for (std::size_t k = 0; k < betas.size(); ++k) fit.beta += weights[k] * betas[k];

  Matrix mean_cov = Matrix::Zero(p, p);
  Matrix spread = Matrix::Zero(p, p);
  for (std::size_t k = 0; k < betas.size(); ++k) {
    mean_cov += weights[k] * covariances[k];
    const Vector dev = betas[k] - fit.beta;
    spread += weights[k] * dev * dev.transpose();
  }
  if (!exact) {
    const double b = static_cast<double>(betas.size());
    spread *= b / (b - 1.0);
    fit.mc_std_errors = (spread.diagonal() / b).cwiseMax(0.0).cwiseSqrt();
  } else {
    fit.mc_std_errors = Vector::Zero(p);
  }
  fit.covariance = mean_cov - spread;
  bool clamped = false;
  for (Index k = 0; k < p; ++k) {
    if (fit.covariance(k, k) < 0.0) {
      fit.covariance(k, k) = 0.0;
      clamped = true;
    }
  }
  if (clamped)
    fit.warnings.push_back("negative resampling variance clamped to zero");
  fit.residuals = flattened_residuals(clusters, fit.beta);
  finish_covariance(fit);
  return fit;
}

}  // namespace icstat
