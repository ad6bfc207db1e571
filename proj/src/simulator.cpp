#include "igs/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "igs/estimation.hpp"

namespace igs {

namespace {

Mat normalized_spectral(Mat m) {
  const double nrm = spectral_norm_sym(m);
  if (nrm > 0.0) m /= nrm;
  return m;
}

Mat random_gram(int n, int r, Rng& rng) {
  Mat g(n, r);
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  return symmetrize(g * g.transpose());
}

}  // namespace

Mat gen_covariance(int n, CovStyle style, int rank, Rng& rng, const Mat* custom) {
  if (n < 1) throw DimError("gen_covariance: n must be >= 1");
  switch (style) {
    case CovStyle::RandomLowRank:
      return normalized_spectral(random_gram(n, std::max(rank, 1), rng));
    case CovStyle::Structured: {
      const double a = rng.normal();
      Mat m = Mat::Ones(n, n);
      for (int i = 0; i < n; ++i) m(i, i) += 20.0 * a * a * static_cast<double>(n - i);
      return normalized_spectral(std::move(m));
    }
    case CovStyle::OnesPlusDiag:
      return Mat::Ones(n, n) + 5.0 * Mat::Identity(n, n);
    case CovStyle::Custom: {
      if (custom == nullptr) throw InvalidMatrix("gen_covariance: custom matrix missing");
      if (custom->rows() != n || custom->cols() != n)
        throw DimError("gen_covariance: custom matrix has wrong dimension");
      if (!is_symmetric(*custom, 1e-9))
        throw InvalidMatrix("gen_covariance: custom matrix not symmetric");
      return symmetrize(*custom);
    }
  }
  throw Error("gen_covariance: unknown style");
}

Mat perturb_covariance(const Mat& sigma, const MismatchSpec& spec, Rng& rng) {
  switch (spec.style) {
    case MismatchSpec::Style::None:
      return sigma;
    case MismatchSpec::Style::AddRandGram: {
      Mat out = sigma + random_gram(static_cast<int>(sigma.rows()), spec.r, rng);
      return spec.normalize ? normalized_spectral(std::move(out)) : out;
    }
    case MismatchSpec::Style::ScaledTo: {
      if (spec.delta0 == 0.0) return sigma;
      // PSD direction of unit spectral norm keeps the sum PSD and makes the
      // distance exactly delta0.
      Mat g(sigma.rows(), sigma.cols());
      for (Eigen::Index j = 0; j < g.cols(); ++j)
        for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
      Mat dir = project_psd(symmetrize(g));
      const double nrm = spectral_norm_sym(dir);
      if (nrm == 0.0) dir = Mat::Identity(sigma.rows(), sigma.cols());
      else dir /= nrm;
      return sigma + spec.delta0 * dir;
    }
  }
  throw Error("perturb_covariance: unknown style");
}

SignalModel build_signal_model(const ModelSpec& spec, Rng& rng) {
  SignalModel m;
  m.kind = spec.kind;
  const int c_count = spec.kind == ModelSpec::Kind::Gmm ? std::max(spec.components, 1) : 1;
  if (spec.weights.size() > 0) {
    if (spec.weights.size() != c_count) throw DimError("signal model: weight count mismatch");
    m.weights = spec.weights / spec.weights.sum();
  } else {
    m.weights = Vec::Constant(c_count, 1.0 / c_count);
  }
  for (int c = 0; c < c_count; ++c) {
    m.means.push_back(Vec::Zero(spec.n));
    m.covs.push_back(gen_covariance(spec.n, spec.style, spec.rank, rng,
                                    spec.style == CovStyle::Custom ? &spec.custom_cov
                                                                   : nullptr));
    const EigenSystem es = eig_sym(m.covs.back());
    m.factors.push_back(es.vectors * es.values.cwiseMax(0.0).cwiseSqrt().asDiagonal());
  }
  return m;
}

Instance build_instance(const ModelSpec& model, const MismatchSpec& mismatch, Rng& rng,
                        const Vec* assumed_weights) {
  Instance inst;
  Rng model_rng = rng.fork(11);
  Rng mis_rng = rng.fork(12);
  inst.model = build_signal_model(model, model_rng);
  const int c_count = static_cast<int>(inst.model.covs.size());
  for (int c = 0; c < c_count; ++c) {
    inst.assumed_covs.push_back(perturb_covariance(inst.model.covs[c], mismatch, mis_rng));
    Vec mu = inst.model.means[c];
    if (mismatch.mean_offset != 0.0) {
      Vec dir(mu.size());
      for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = mis_rng.normal();
      mu += mismatch.mean_offset * dir / dir.norm();
    }
    inst.assumed_means.push_back(std::move(mu));
  }
  if (assumed_weights != nullptr && assumed_weights->size() > 0) {
    if (assumed_weights->size() != c_count)
      throw DimError("build_instance: assumed weight count mismatch");
    inst.assumed_weights = *assumed_weights / assumed_weights->sum();
  } else {
    inst.assumed_weights = Vec::Constant(c_count, 1.0 / c_count);
  }
  return inst;
}

std::pair<Vec, int> sample_signal(const SignalModel& model, Rng& rng) {
  int label = 0;
  if (model.kind == ModelSpec::Kind::Gmm && model.weights.size() > 1) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (Eigen::Index c = 0; c < model.weights.size(); ++c) {
      acc += model.weights[c];
      if (u < acc || c + 1 == model.weights.size()) {
        label = static_cast<int>(c);
        break;
      }
    }
  }
  const Mat& f = model.factors[label];
  Vec g(f.cols());
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
  return {model.means[label] + f * g, label};
}

double measure(const Vec& x, const Vec& a, double sigma2, Rng& rng) {
  if (x.size() != a.size()) throw DimError("measure: dimension mismatch");
  const double clean = a.dot(x);
  return sigma2 > 0.0 ? clean + std::sqrt(sigma2) * rng.normal() : clean;
}

namespace {

Belief assumed_belief(const Instance& inst) {
  if (inst.model.kind == ModelSpec::Kind::Gaussian)
    return make_gaussian_belief(inst.assumed_means[0], inst.assumed_covs[0]);
  std::vector<GaussianBelief> comps;
  for (std::size_t c = 0; c < inst.assumed_covs.size(); ++c)
    comps.push_back(make_gaussian_belief(inst.assumed_means[c], inst.assumed_covs[c]));
  return make_gmm_belief(std::move(comps), inst.assumed_weights);
}

// Replay the record on both tracks to measure the gap between them.
void replay_gaussian_twin(const Instance& inst, const PrecisionSpec& spec,
                          TrialResult& res) {
  GaussianBelief truth = make_gaussian_belief(inst.model.means[0], inst.model.covs[0]);
  GaussianBelief assumed =
      make_gaussian_belief(inst.assumed_means[0], inst.assumed_covs[0]);

  MismatchTrack& track = res.mismatch;
  track.sigma2 = spec.sigma2;
  track.chi = spec.chi;
  track.K = static_cast<int>(res.records.size());
  const EigenSystem es0 = eig_sym(truth.cov);
  track.eigs_true.assign(es0.values.data(), es0.values.data() + es0.values.size());
  const double lmax = es0.values.size() ? es0.values[0] : 0.0;
  track.s = 0;
  for (Eigen::Index i = 0; i < es0.values.size(); ++i)
    if (es0.values[i] > 1e-10 * std::max(lmax, 1e-300)) ++track.s;
  track.delta.push_back(spectral_norm_sym(assumed.cov - truth.cov));

  for (const auto& rec : res.records) {
    const double beta = rec.beta;
    track.beta.push_back(beta);
    track.lambda_hat.push_back(beta > 0.0 ? rec.a.dot(assumed.cov * rec.a) / beta : 0.0);
    Eigen::SelfAdjointEigenSolver<Mat> es(truth.cov, Eigen::EigenvaluesOnly);
    track.lambda_true.push_back(es.eigenvalues().maxCoeff());

    assumed = posterior_update_gaussian(assumed, rec.a, rec.y, spec.sigma2);
    truth = posterior_update_gaussian(truth, rec.a, rec.y, spec.sigma2);

    track.delta.push_back(spectral_norm_sym(assumed.cov - truth.cov));
    res.mean_gap.push_back(assumed.mean - truth.mean);
    res.trace_true.push_back(truth.cov.trace());
    res.trace_assumed.push_back(assumed.cov.trace());
    res.entropy_true.push_back(posterior_entropy(truth));
  }
}

void replay_gmm_twin(const Instance& inst, const PrecisionSpec& spec,
                     const SensingOptions& sensing, TrialResult& res) {
  std::vector<GaussianBelief> tc, ac;
  for (std::size_t c = 0; c < inst.model.covs.size(); ++c) {
    tc.push_back(make_gaussian_belief(inst.model.means[c], inst.model.covs[c]));
    ac.push_back(make_gaussian_belief(inst.assumed_means[c], inst.assumed_covs[c]));
  }
  GmmBelief truth = make_gmm_belief(std::move(tc), inst.model.weights);
  GmmBelief assumed = make_gmm_belief(std::move(ac), inst.assumed_weights);

  const int cs = res.true_label;
  GmmMismatchTrack& track = res.gmm_track;
  track.sigma2 = spec.sigma2;
  track.n = static_cast<int>(truth.dim());
  track.mu_component = truth.components[cs].mean;
  track.delta.push_back(
      spectral_norm_sym(assumed.components[cs].cov - truth.components[cs].cov));

  for (const auto& rec : res.records) {
    const GaussianBelief& t_prev = truth.components[cs];
    const GaussianBelief& a_prev = assumed.components[cs];
    track.a.push_back(rec.a);
    track.beta.push_back(rec.beta);
    track.y.push_back(rec.y);
    track.mu_true_prev.push_back(t_prev.mean);
    Eigen::SelfAdjointEigenSolver<Mat> es(t_prev.cov, Eigen::EigenvaluesOnly);
    track.lambda_true.push_back(es.eigenvalues().maxCoeff());
    track.lambda_hat.push_back(
        rec.beta > 0.0 ? rec.a.dot(a_prev.cov * rec.a) / rec.beta : 0.0);

    // the true track is the actual conditional distribution: exact weights
    truth = posterior_update_gmm(truth, rec.a, rec.y, spec.sigma2,
                                 WeightUpdateMode::ExactBayes);
    assumed = posterior_update_gmm(assumed, rec.a, rec.y, spec.sigma2,
                                   sensing.weight_mode);

    track.mu_true.push_back(truth.components[cs].mean);
    track.mu_hat.push_back(assumed.components[cs].mean);
    track.delta.push_back(
        spectral_norm_sym(assumed.components[cs].cov - truth.components[cs].cov));
    res.trace_true.push_back(truth.components[cs].cov.trace());
    res.trace_assumed.push_back(assumed.components[cs].cov.trace());
    res.mean_gap.push_back(assumed.components[cs].mean - truth.components[cs].mean);
  }
}

}  // namespace

TrialResult run_trial(const Instance& inst, const PrecisionSpec& spec,
                      const TrialOptions& opts, Rng& signal_rng, Rng& noise_rng) {
  TrialResult res;
  auto [x, label] = sample_signal(inst.model, signal_rng);
  res.true_label = label;

  Rng oracle_rng = noise_rng.fork(1);
  Rng policy_rng = noise_rng.fork(2);
  const MeasurementOracle oracle = [&](const Vec& a) {
    return measure(x, a, spec.sigma2, oracle_rng);
  };

  SensingTrace trace = run_sensing(assumed_belief(inst), spec, opts.sensing, oracle,
                                   policy_rng);
  res.total_power = trace.total_power;
  res.steps = static_cast<int>(trace.records.size());
  res.step_diags = std::move(trace.steps);
  res.records = std::move(trace.records);

  if (const auto* g = std::get_if<GaussianBelief>(&trace.final_belief)) {
    res.estimate = map_estimate(*g);
    res.predicted_label = 0;
  } else {
    auto [c, mu] = map_estimate(std::get<GmmBelief>(trace.final_belief));
    res.estimate = std::move(mu);
    res.predicted_label = c;
  }
  res.recovery_error = (res.estimate - x).norm();
  res.success = res.recovery_error <= spec.epsilon;

  if (opts.twin_track) {
    if (inst.model.kind == ModelSpec::Kind::Gaussian)
      replay_gaussian_twin(inst, spec, res);
    else
      replay_gmm_twin(inst, spec, opts.sensing, res);
  }
  return res;
}

std::vector<double> infogreedy_power_schedule(Mat cov, const PrecisionSpec& spec,
                                              const PowerRule& rule, int max_steps) {
  std::vector<double> schedule;
  const int cap = max_steps > 0 ? max_steps : static_cast<int>(cov.rows());
  for (int k = 0; k < cap; ++k) {
    const EigenSystem es = eig_sym(cov);
    const double lambda = es.values.size() ? es.values[0] : 0.0;
    if (lambda <= spec.chi) break;
    const double beta = allocate_power(lambda, spec, rule, lambda);
    if (!(beta > 0.0)) break;
    schedule.push_back(beta);
    const Vec a = std::sqrt(beta) * es.vectors.col(0);
    const Vec g = cov * a;
    cov = symmetrize(cov - (g * g.transpose()) / (a.dot(g) + spec.sigma2));
  }
  return schedule;
}

namespace {

void parallel_for(int total, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || total <= 1) {
    for (int i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min(threads, total);
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

McResult run_monte_carlo(const McConfig& cfg) {
  if (cfg.trials < 1) throw Error("run_monte_carlo: trials must be >= 1");
  const PrecisionSpec spec =
      make_precision_spec(cfg.epsilon, cfg.p, cfg.sigma2, cfg.model.n);
  Rng root(cfg.seed);

  // Shared instance (and paired random-power schedules) when the model is
  // drawn once for the whole aggregate.
  Instance shared;
  if (!cfg.redraw_per_trial)
    shared = build_instance(cfg.model, cfg.mismatch, root,
                            cfg.assumed_weights.size() ? &cfg.assumed_weights : nullptr);

  McResult result;
  for (std::size_t pi = 0; pi < cfg.policies.size(); ++pi) {
    const PolicySpec& pol = cfg.policies[pi];
    McPolicyResult pres;
    pres.name = pol.name;
    pres.rows.resize(cfg.trials);
    std::vector<std::vector<double>> tr_a(cfg.trials), tr_t(cfg.trials), dl(cfg.trials);

    // Paired power budget for the random baselines.
    std::vector<double> shared_schedule;
    const bool random_pol = pol.sensing.policy == Policy::Random ||
                            pol.sensing.policy == Policy::RandomOneSparse;
    if (random_pol && pol.pair_random_power && pol.sensing.power_schedule.empty() &&
        !cfg.redraw_per_trial && pol.sensing.rule.kind != PowerRule::Kind::Fixed) {
      shared_schedule = infogreedy_power_schedule(shared.assumed_covs[0], spec,
                                                  pol.sensing.rule, pol.sensing.max_steps);
    }

    // Info-Greedy-2 evolves the assumed covariance across trials; its loop is
    // inherently sequential.
    if (pol.info_greedy2 && cfg.redraw_per_trial)
      throw Error("run_monte_carlo: info_greedy2 needs a fixed model across trials");
    Mat ig2_cov;
    if (pol.info_greedy2) ig2_cov = shared.assumed_covs[0];

    auto run_one = [&](int t) {
      Rng trial_root(mix_seed(cfg.seed, static_cast<std::uint64_t>(t)));
      Rng signal_rng = trial_root.fork(1000);
      Rng noise_rng = trial_root.fork(2000 + pi);

      Instance local;
      const Instance* inst = &shared;
      if (cfg.redraw_per_trial) {
        Rng model_rng = trial_root.fork(3000);
        local = build_instance(cfg.model, cfg.mismatch, model_rng,
                               cfg.assumed_weights.size() ? &cfg.assumed_weights : nullptr);
        inst = &local;
      }

      TrialOptions topts;
      topts.sensing = pol.sensing;
      topts.twin_track = cfg.twin_track;
      if (random_pol && pol.pair_random_power && topts.sensing.power_schedule.empty() &&
          pol.sensing.rule.kind != PowerRule::Kind::Fixed) {
        topts.sensing.power_schedule =
            cfg.redraw_per_trial
                ? infogreedy_power_schedule(inst->assumed_covs[0], spec,
                                            pol.sensing.rule, pol.sensing.max_steps)
                : shared_schedule;
      }

      Instance ig2_inst;
      if (pol.info_greedy2) {
        ig2_inst = *inst;
        ig2_inst.assumed_covs[0] = ig2_cov;
        inst = &ig2_inst;
      }

      TrialResult res = run_trial(*inst, spec, topts, signal_rng, noise_rng);

      McTrialRow row;
      row.trial = t;
      row.error = res.recovery_error;
      row.success = res.success;
      row.power = res.total_power;
      row.steps = res.steps;
      if (cfg.model.kind == ModelSpec::Kind::Gmm)
        row.misclass = res.predicted_label == res.true_label ? 0 : 1;
      pres.rows[t] = row;

      for (const auto& d : res.step_diags) tr_a[t].push_back(d.trace);
      tr_t[t] = res.trace_true;
      dl[t] = std::vector<double>(res.mismatch.delta.begin(), res.mismatch.delta.end());

      if (pol.info_greedy2)
        ig2_cov = sequential_cov_update(ig2_cov, res.estimate, pol.alpha);
    };

    if (pol.info_greedy2) {
      for (int t = 0; t < cfg.trials; ++t) run_one(t);
    } else {
      parallel_for(cfg.trials, cfg.threads, run_one);
    }

    // deterministic reduction in trial order
    std::vector<double> errors;
    errors.reserve(cfg.trials);
    double sum_err = 0.0, sum_pow = 0.0, sum_steps = 0.0;
    int successes = 0, misclasses = 0, labeled = 0;
    for (const auto& row : pres.rows) {
      errors.push_back(row.error);
      sum_err += row.error;
      sum_pow += row.power;
      sum_steps += row.steps;
      successes += row.success ? 1 : 0;
      if (row.misclass >= 0) {
        ++labeled;
        misclasses += row.misclass;
      }
    }
    pres.mean_error = sum_err / cfg.trials;
    pres.median_error = median_of(errors);
    pres.success_rate = static_cast<double>(successes) / cfg.trials;
    pres.mean_power = sum_pow / cfg.trials;
    pres.mean_steps = sum_steps / cfg.trials;
    if (labeled > 0) pres.misclass_rate = static_cast<double>(misclasses) / labeled;

    auto average_steps = [](const std::vector<std::vector<double>>& per_trial) {
      std::vector<double> sum;
      std::vector<int> count;
      for (const auto& v : per_trial)
        for (std::size_t k = 0; k < v.size(); ++k) {
          if (k >= sum.size()) {
            sum.resize(k + 1, 0.0);
            count.resize(k + 1, 0);
          }
          sum[k] += v[k];
          ++count[k];
        }
      for (std::size_t k = 0; k < sum.size(); ++k)
        if (count[k] > 0) sum[k] /= count[k];
      return sum;
    };
    pres.mean_trace_assumed = average_steps(tr_a);
    pres.mean_trace_true = average_steps(tr_t);
    pres.mean_delta = average_steps(dl);
    result.policies.push_back(std::move(pres));
  }
  return result;
}

}  // namespace igs
