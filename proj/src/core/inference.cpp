#include "core/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace epifilter::inference {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Runs fn(i) for i in [0, n) across `threads` workers. Each index writes
/// only its own slot, so the merge order is the index order and the result
/// is independent of the worker count.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

double logsumexp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (int i = 0; i < v.size(); ++i) acc += std::exp(v[i] - m);
  return m + std::log(acc);
}

/// Coefficient of variation of the plausibility weights exp(dp * ll), shift-
/// and scale-invariant in log space.
double weight_cov(const Eigen::VectorXd& logliks, double dp) {
  const int n = static_cast<int>(logliks.size());
  double m = kNegInf;
  for (int i = 0; i < n; ++i)
    if (std::isfinite(logliks[i])) m = std::max(m, dp * logliks[i]);
  if (!std::isfinite(m)) return std::numeric_limits<double>::infinity();

  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = std::isfinite(logliks[i]) ? std::exp(dp * logliks[i] - m) : 0.0;
    sum += w;
    sumsq += w * w;
  }
  const double mean = sum / n;
  if (!(mean > 0.0)) return std::numeric_limits<double>::infinity();
  const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1));
  return std::sqrt(var) / mean;
}

/// Largest exponent increment whose weight COV stays at the target,
/// found by bisection; caps at the remaining distance to p = 1.
double next_exponent_increment(const Eigen::VectorXd& logliks, double remaining,
                               double cov_target) {
  if (weight_cov(logliks, remaining) <= cov_target) return remaining;
  double lo = 0.0, hi = remaining;
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (weight_cov(logliks, mid) > cov_target)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::MatrixXd proposal_cholesky(const Eigen::MatrixXd& cov) {
  const int d = static_cast<int>(cov.rows());
  Eigen::MatrixXd work = cov;
  double jitter = 0.0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    jitter = (jitter == 0.0) ? 1e-12 * std::max(1e-30, cov.trace() / d) : jitter * 100.0;
    work = cov + jitter * Eigen::MatrixXd::Identity(d, d);
  }
  // Fall back to independent per-coordinate proposals.
  Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(d, d);
  for (int k = 0; k < d; ++k) diag(k, k) = std::sqrt(std::max(0.0, cov(k, k)));
  return diag;
}

}  // namespace

double Marginal::log_density(double x) const {
  switch (kind) {
    case Kind::Uniform:
      if (x < a || x > b) return kNegInf;
      return -std::log(b - a);
    case Kind::Gaussian: {
      const double z = (x - a) / b;
      return -0.5 * z * z - std::log(b) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
  }
  return kNegInf;
}

double Marginal::sample(Rng& rng) const {
  switch (kind) {
    case Kind::Uniform: {
      std::uniform_real_distribution<double> u(a, b);
      return u(rng);
    }
    case Kind::Gaussian: {
      std::normal_distribution<double> n(a, b);
      return n(rng);
    }
  }
  return 0.0;
}

PriorSpec PriorSpec::sir_default() {
  PriorSpec prior;
  prior.marginals = {
      {Marginal::Kind::Uniform, 0.0, 1.0, "rho"},
      {Marginal::Kind::Uniform, 0.0, 1.0, "q_xi"},
      {Marginal::Kind::Uniform, 0.0, 1.0, "beta0_mean"},
      {Marginal::Kind::Uniform, 0.0, 1.0, "i0_mean"},
  };
  return prior;
}

double log_prior(const Eigen::VectorXd& phi, const PriorSpec& prior) {
  if (phi.size() != prior.dim())
    fail(ErrorKind::InvalidArgument, "log_prior: sample dimension does not match the prior");
  double acc = 0.0;
  for (int k = 0; k < prior.dim(); ++k) {
    const double ld = prior.marginals[k].log_density(phi[k]);
    if (!std::isfinite(ld)) return kNegInf;
    acc += ld;
  }
  return acc;
}

PosteriorEnsemble tmcmc(const PriorSpec& prior, const LogLikFn& loglik, const TmcmcConfig& cfg) {
  if (cfg.n_samples < 100)
    fail(ErrorKind::InvalidArgument, "tmcmc: n_samples must be at least 100");
  if (prior.dim() == 0) fail(ErrorKind::InvalidArgument, "tmcmc: empty prior");
  if (!(cfg.cov_target > 0.0))
    fail(ErrorKind::InvalidArgument, "tmcmc: cov_target must be positive");
  if (cfg.chain_burn_in < 0)
    fail(ErrorKind::InvalidArgument, "tmcmc: chain_burn_in must be non-negative");

  const int n = cfg.n_samples;
  const int d = prior.dim();

  Rng master(mix_seed(cfg.seed, 0xA11CE5ULL));

  Eigen::MatrixXd samples(n, d);
  Eigen::VectorXd logliks(n);
  Eigen::VectorXd logpriors(n);

  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) samples(i, k) = prior.marginals[k].sample(master);

  parallel_for(n, cfg.threads, [&](int i) {
    logliks[i] = loglik(samples.row(i).transpose());
    logpriors[i] = log_prior(samples.row(i).transpose(), prior);
  });

  PosteriorEnsemble ens;
  ens.log_evidence = 0.0;

  double p = 0.0;
  int stage = 0;
  while (p < 1.0) {
    if (stage >= cfg.max_stages)
      fail(ErrorKind::DegeneratePosterior,
           "tmcmc: exponent failed to reach 1 within " + std::to_string(cfg.max_stages) +
               " stages (p = " + std::to_string(p) + ")");
    ++stage;

    if (!logliks.array().isFinite().any())
      fail(ErrorKind::DegeneratePosterior,
           "tmcmc: all plausibility weights vanished at stage " + std::to_string(stage) +
               " (p = " + std::to_string(p) + ")");

    const double remaining = 1.0 - p;
    const double dp = next_exponent_increment(logliks, remaining, cfg.cov_target);
    if (!(dp > 0.0))
      fail(ErrorKind::DegeneratePosterior,
           "tmcmc: vanishing exponent increment at stage " + std::to_string(stage));
    const double p_new = (remaining - dp <= 0.0) ? 1.0 : p + dp;
    const double stage_cov = weight_cov(logliks, dp);

    Eigen::VectorXd logw = dp * logliks;
    for (int i = 0; i < n; ++i)
      if (!std::isfinite(logliks[i])) logw[i] = kNegInf;
    const double lse = logsumexp(logw);
    if (!std::isfinite(lse))
      fail(ErrorKind::DegeneratePosterior,
           "tmcmc: all plausibility weights vanished at stage " + std::to_string(stage));
    const double log_mean_weight = lse - std::log(static_cast<double>(n));

    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w[i] = std::exp(logw[i] - lse);

    // Weighted moments feed the mutation proposal.
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < n; ++i) mu += w[i] * samples.row(i).transpose();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd c = samples.row(i).transpose() - mu;
      cov += w[i] * c * c.transpose();
    }
    const Eigen::MatrixXd chol =
        proposal_cholesky(cfg.proposal_scale * cfg.proposal_scale * cov);

    // Multinomial resampling, bookkept as a multiplicity per lead sample. Each
    // lead with multiplicity m seeds one Markov chain of length m at the new
    // exponent, and every chain state becomes one output sample — one MH step
    // per sample, but duplicates of a lead mix along a shared chain instead of
    // taking a single correlated step each.
    std::discrete_distribution<int> resample(w.data(), w.data() + n);
    std::vector<int> multiplicity(n, 0);
    for (int i = 0; i < n; ++i) ++multiplicity[resample(master)];

    std::vector<int> leads, slot0;
    leads.reserve(n);
    slot0.reserve(n);
    int filled = 0;
    for (int l = 0; l < n; ++l) {
      if (multiplicity[l] == 0) continue;
      leads.push_back(l);
      slot0.push_back(filled);
      filled += multiplicity[l];
    }

    Eigen::MatrixXd next_samples(n, d);
    Eigen::VectorXd next_ll(n), next_lp(n);
    std::atomic<int> accepted{0};

    // Each chain owns a stream keyed by its lead slot and writes only its own
    // output rows, so the stage is reproducible for any thread count.
    parallel_for(static_cast<int>(leads.size()), cfg.threads, [&](int c) {
      const int lead = leads[c];
      Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(stage),
                       static_cast<std::uint64_t>(lead)));
      std::normal_distribution<double> normal(0.0, 1.0);
      std::uniform_real_distribution<double> unif(0.0, 1.0);

      Eigen::VectorXd x = samples.row(lead).transpose();
      double x_ll = logliks[lead];
      double x_lp = logpriors[lead];
      int taken = 0;
      Eigen::VectorXd z(d);
      const int steps = cfg.chain_burn_in + multiplicity[lead];
      for (int t = 0; t < steps; ++t) {
        for (int k = 0; k < d; ++k) z[k] = normal(rng);
        const double u = unif(rng);
        const Eigen::VectorXd cand = x + chol * z;
        const double c_lp = log_prior(cand, prior);
        const double c_ll = std::isfinite(c_lp) ? loglik(cand) : kNegInf;
        if (std::isfinite(c_lp) && std::isfinite(c_ll)) {
          const double log_alpha = p_new * (c_ll - x_ll) + c_lp - x_lp;
          if (std::log(u) < log_alpha) {
            x = cand;
            x_ll = c_ll;
            x_lp = c_lp;
            ++taken;
          }
        }
        if (t < cfg.chain_burn_in) continue;
        const int slot = slot0[c] + (t - cfg.chain_burn_in);
        next_samples.row(slot) = x.transpose();
        next_ll[slot] = x_ll;
        next_lp[slot] = x_lp;
      }
      accepted.fetch_add(taken, std::memory_order_relaxed);
    });

    samples = std::move(next_samples);
    logliks = std::move(next_ll);
    logpriors = std::move(next_lp);

    const int attempted = n + cfg.chain_burn_in * static_cast<int>(leads.size());
    ens.log_evidence += log_mean_weight;
    ens.stages.push_back({p_new, log_mean_weight, stage_cov,
                          static_cast<double>(accepted.load()) / attempted});
    p = p_new;
  }

  ens.samples = std::move(samples);
  ens.logliks = std::move(logliks);
  return ens;
}

PosteriorSummary posterior_summary(const PosteriorEnsemble& ens, const PriorSpec& prior) {
  const int n = static_cast<int>(ens.samples.rows());
  const int d = static_cast<int>(ens.samples.cols());
  if (n == 0) fail(ErrorKind::InvalidArgument, "posterior_summary: empty ensemble");

  int best = 0;
  double best_lp = kNegInf;
  for (int i = 0; i < n; ++i) {
    const double lp = log_prior(ens.samples.row(i).transpose(), prior) + ens.logliks[i];
    if (lp > best_lp) {
      best_lp = lp;
      best = i;
    }
  }

  PosteriorSummary out;
  out.log_evidence = ens.log_evidence;
  out.map_sample = ens.samples.row(best).transpose();
  out.map_log_posterior = best_lp;
  for (int k = 0; k < d; ++k) {
    ParamSummary ps;
    ps.name = k < prior.dim() ? prior.marginals[k].name : "param" + std::to_string(k);
    ps.map = ens.samples(best, k);
    ps.mean = ens.samples.col(k).mean();
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
      const double c = ens.samples(i, k) - ps.mean;
      var += c * c;
    }
    ps.stddev = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    out.params.push_back(std::move(ps));
  }
  return out;
}

model::StaticParams params_from_phi(const Eigen::VectorXd& phi, const model::StaticParams& fixed) {
  if (phi.size() != 4)
    fail(ErrorKind::InvalidArgument, "params_from_phi: expected a 4-vector (rho, q_xi, beta0, i0)");
  model::StaticParams p = fixed;
  p.rho = phi[0];
  p.q_xi = phi[1];
  p.beta0_mean = phi[2];
  p.i0_mean = phi[3];
  return p;
}

Eigen::VectorXd phi_from_params(const model::StaticParams& p) {
  Eigen::VectorXd phi(4);
  phi << p.rho, p.q_xi, p.beta0_mean, p.i0_mean;
  return phi;
}

double log_likelihood(const model::StaticParams& phi, const ObservationSeries& obs,
                      const filter::InitialBeliefConfig& init_cfg,
                      model::MeasurementLinearization lin) {
  if (obs.empty()) fail(ErrorKind::InvalidArgument, "log_likelihood: empty observation series");
  try {
    filter::FilterOptions options;
    options.linearization = lin;
    options.record_beliefs = false;
    const auto init = filter::initial_belief(phi, init_cfg);
    return filter::run_filter(phi, obs, init, options).loglik;
  } catch (const Error&) {
    return kNegInf;
  }
}

}  // namespace epifilter::inference
