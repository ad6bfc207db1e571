#include "igs/policies.hpp"

#include <cmath>

namespace igs {

PowerRule PowerRule::slack(double delta_s) {
  if (!(delta_s >= 0.0)) throw InvalidSlack("power rule: slack must be >= 0");
  PowerRule r;
  r.kind = Kind::Slack;
  r.delta_s = delta_s;
  return r;
}

PowerRule PowerRule::one_sparse(double gamma) {
  if (!(gamma > 0.0)) throw Error("power rule: gamma must be > 0");
  PowerRule r;
  r.kind = Kind::OneSparse;
  r.gamma = gamma;
  return r;
}

PowerRule PowerRule::fixed(double beta) {
  if (!(beta > 0.0)) throw Error("power rule: fixed beta must be > 0");
  PowerRule r;
  r.kind = Kind::Fixed;
  r.beta = beta;
  return r;
}

double allocate_power(double lambda_hat, const PrecisionSpec& spec, const PowerRule& rule,
                      std::optional<double> max_diag) {
  switch (rule.kind) {
    case PowerRule::Kind::Standard:
      if (lambda_hat <= 0.0) return 0.0;
      return spec.sigma2 * std::max(1.0 / spec.chi - 1.0 / lambda_hat, 0.0);
    case PowerRule::Kind::Slack: {
      if (rule.delta_s >= spec.chi)
        throw InvalidSlack("allocate_power: slack must be < chi");
      if (lambda_hat <= 0.0) return 0.0;
      return spec.sigma2 * std::max(1.0 / (spec.chi - rule.delta_s) - 1.0 / lambda_hat, 0.0);
    }
    case PowerRule::Kind::OneSparse: {
      if (!max_diag.has_value() || !(*max_diag > 0.0))
        throw Error("allocate_power: one-sparse rule needs max_diag > 0");
      return spec.sigma2 / (rule.gamma * *max_diag);
    }
    case PowerRule::Kind::Fixed:
      return rule.beta;
  }
  return 0.0;
}

Proposal next_measurement_infogreedy(const GaussianBelief& b, const PrecisionSpec& spec,
                                     const PowerRule& rule) {
  const EigenSystem es = eig_sym(b.cov);
  const double lambda = es.values.size() ? es.values[0] : 0.0;
  if (lambda <= spec.chi) return std::nullopt;
  const double beta = allocate_power(lambda, spec, rule, lambda);
  return Measurement{std::sqrt(beta) * es.vectors.col(0), beta};
}

Proposal next_measurement_one_sparse(const GaussianBelief& b, const PrecisionSpec& spec,
                                     const PowerRule& rule) {
  if (psd_norm_at_most(b.cov, spec.chi)) return std::nullopt;
  Eigen::Index j = 0;
  const double md = b.cov.diagonal().maxCoeff(&j);  // first max: lowest index
  const double beta = allocate_power(md, spec, rule, md);
  Vec a = Vec::Zero(b.dim());
  a[j] = std::sqrt(beta);
  return Measurement{std::move(a), beta};
}

Proposal next_measurement_gmm(const GmmBelief& b, const PrecisionSpec& spec,
                              const PowerRule& rule, bool sparse) {
  const int c_star = map_estimate(b).first;
  const GaussianBelief& comp = b.components[c_star];
  return sparse ? next_measurement_one_sparse(comp, spec, rule)
                : next_measurement_infogreedy(comp, spec, rule);
}

Measurement next_measurement_random(int n, double beta, Rng& rng, bool one_sparse) {
  if (!(beta > 0.0)) throw Error("next_measurement_random: beta must be > 0");
  Vec a = Vec::Zero(n);
  if (one_sparse) {
    a[static_cast<Eigen::Index>(rng.uniform_index(n))] = std::sqrt(beta);
    return {std::move(a), beta};
  }
  for (Eigen::Index i = 0; i < n; ++i) a[i] = rng.normal();
  const double nrm = a.norm();
  if (nrm == 0.0) a[0] = 1.0;  // measure-zero fallback
  a *= std::sqrt(beta) / (nrm == 0.0 ? 1.0 : nrm);
  return {std::move(a), beta};
}

std::vector<Measurement> plan_batch(const Mat& cov, int K, const PrecisionSpec& spec,
                                    const PowerRule& rule) {
  if (K < 0 || K > cov.rows()) throw DimError("plan_batch: need 0 <= K <= n");
  std::vector<Measurement> plan;
  if (K == 0) return plan;
  const EigenSystem es = eig_sym(cov);
  plan.reserve(K);
  for (int k = 0; k < K; ++k) {
    const double lambda = es.values[k];
    const double beta = allocate_power(lambda, spec, rule,
                                       lambda > 0.0 ? std::optional<double>(lambda)
                                                    : std::nullopt);
    plan.push_back({std::sqrt(beta) * es.vectors.col(k), beta});
  }
  return plan;
}

namespace {

// min_i (S_ij)^2 / (S_ii S_jj), the squared-correlation floor used by the
// one-sparse trace recursion. Includes i = j (value 1).
double min_sq_correlation(const Mat& cov, Eigen::Index j) {
  const double sjj = cov(j, j);
  if (!(sjj > 0.0)) return 0.0;
  double rmin = 1.0;
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    if (i == j) continue;
    const double sii = cov(i, i);
    const double r = sii > 0.0 ? (cov(i, j) * cov(i, j)) / (sii * sjj) : 0.0;
    rmin = std::min(rmin, r);
  }
  return rmin;
}

const Mat& active_cov(const Belief& b) {
  if (const auto* g = std::get_if<GaussianBelief>(&b)) return g->cov;
  const auto& gmm = std::get<GmmBelief>(b);
  return gmm.components[map_estimate(gmm).first].cov;
}

Proposal propose(const Belief& b, const PrecisionSpec& spec, const SensingOptions& opts,
                 double scheduled_beta, Rng& rng) {
  switch (opts.policy) {
    case Policy::InfoGreedy:
      if (const auto* g = std::get_if<GaussianBelief>(&b))
        return next_measurement_infogreedy(*g, spec, opts.rule);
      return next_measurement_gmm(std::get<GmmBelief>(b), spec, opts.rule, false);
    case Policy::OneSparse:
      if (const auto* g = std::get_if<GaussianBelief>(&b))
        return next_measurement_one_sparse(*g, spec, opts.rule);
      return next_measurement_gmm(std::get<GmmBelief>(b), spec, opts.rule, true);
    case Policy::Random:
    case Policy::RandomOneSparse: {
      const int n = static_cast<int>(std::visit([](const auto& x) { return x.dim(); }, b));
      return next_measurement_random(n, scheduled_beta, rng,
                                     opts.policy == Policy::RandomOneSparse);
    }
    case Policy::Batch:
      throw Error("propose: batch policy uses its precomputed plan");
  }
  return std::nullopt;
}

Belief update(const Belief& b, const Vec& a, double y, const PrecisionSpec& spec,
              const SensingOptions& opts) {
  if (const auto* g = std::get_if<GaussianBelief>(&b))
    return posterior_update_gaussian(*g, a, y, spec.sigma2);
  return posterior_update_gmm(std::get<GmmBelief>(b), a, y, spec.sigma2, opts.weight_mode);
}

double observe(const MeasurementOracle& oracle, const Vec& a) {
  try {
    return oracle(a);
  } catch (const MeasurementError&) {
    throw;
  } catch (const std::exception& e) {
    throw MeasurementError(std::string("measurement oracle failed: ") + e.what());
  }
}

}  // namespace

SensingTrace run_sensing(const Belief& b0, const PrecisionSpec& spec,
                         const SensingOptions& opts, const MeasurementOracle& oracle,
                         Rng& rng) {
  const int n = static_cast<int>(std::visit([](const auto& x) { return x.dim(); }, b0));
  const int max_steps = opts.max_steps > 0 ? opts.max_steps : n;
  const int split = std::max(opts.split, 1);

  std::vector<Measurement> batch_plan;
  if (opts.policy == Policy::Batch)
    batch_plan = plan_batch(active_cov(b0), std::min(max_steps, n), spec, opts.rule);

  SensingTrace trace;
  trace.final_belief = b0;
  Belief belief = b0;

  for (int step = 1; step <= max_steps; ++step) {
    double scheduled = 0.0;
    if (opts.policy == Policy::Random || opts.policy == Policy::RandomOneSparse) {
      if (!opts.power_schedule.empty()) {
        if (static_cast<std::size_t>(step - 1) >= opts.power_schedule.size()) break;
        scheduled = opts.power_schedule[step - 1];
      } else if (opts.rule.kind == PowerRule::Kind::Fixed) {
        scheduled = opts.rule.beta;
      } else {
        throw Error("run_sensing: random policy needs a power schedule or fixed rule");
      }
      if (!(scheduled > 0.0)) continue;
    }

    Proposal prop;
    if (opts.policy == Policy::Batch) {
      if (static_cast<std::size_t>(step - 1) >= batch_plan.size()) break;
      prop = batch_plan[step - 1];
      if (!(prop->beta > 0.0)) continue;  // clamped power: nothing to measure
    } else {
      prop = propose(belief, spec, opts, scheduled, rng);
    }
    if (!prop.has_value()) break;  // Stop

    const double beta = prop->beta;
    StepDiag diag;
    diag.step = step;
    diag.beta = beta;
    {
      const Mat& cov = active_cov(belief);
      if (opts.policy == Policy::InfoGreedy || opts.policy == Policy::Batch)
        diag.lambda_hat = prop->a.squaredNorm() > 0.0
                              ? prop->a.dot(cov * prop->a) / prop->a.squaredNorm()
                              : 0.0;
      if (opts.policy == Policy::OneSparse) {
        Eigen::Index j;
        prop->a.cwiseAbs().maxCoeff(&j);
        diag.j = static_cast<int>(j);
        diag.max_diag = cov(j, j);
        diag.rho_min = min_sq_correlation(cov, j);
      }
    }

    const int m = (opts.policy == Policy::InfoGreedy || opts.policy == Policy::OneSparse)
                      ? split
                      : 1;
    const double sub_beta = beta / m;
    Vec direction = prop->a / std::sqrt(beta);
    for (int i = 0; i < m; ++i) {
      if (i > 0) {
        // re-derive the direction from the updated belief; amplitude fixed
        Proposal sub = propose(belief, spec, opts, sub_beta, rng);
        if (!sub.has_value()) break;
        direction = sub->a / std::sqrt(sub->beta);
      }
      Vec a = std::sqrt(sub_beta) * direction;
      const double y = observe(oracle, a);
      belief = update(belief, a, y, spec, opts);
      trace.total_power += sub_beta;
      MeasurementRecord rec;
      rec.a = std::move(a);
      rec.beta = sub_beta;
      rec.y = y;
      rec.step = static_cast<int>(trace.records.size()) + 1;
      trace.records.push_back(std::move(rec));
    }

    {
      const Mat& cov = active_cov(belief);
      diag.trace = cov.trace();
      if (opts.diag == DiagLevel::Full) {
        diag.spec_norm = spectral_norm_sym(cov);
        if (const auto* g = std::get_if<GaussianBelief>(&belief))
          diag.entropy = posterior_entropy(*g);
      }
    }
    trace.steps.push_back(std::move(diag));
  }

  trace.final_belief = std::move(belief);
  return trace;
}

}  // namespace igs
