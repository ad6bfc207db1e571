#include "igs/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "igs/config.hpp"
#include "igs/estimation.hpp"
#include "igs/io.hpp"

namespace igs {

namespace {

using nlohmann::json;

int resolve_threads(int flag_threads, int cfg_threads) {
  if (flag_threads > 0) return flag_threads;
  if (cfg_threads > 0) return cfg_threads;
  if (const char* env = std::getenv("IGS_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

McConfig to_mc_config(const RunConfig& cfg, int threads) {
  McConfig mc;
  mc.model = cfg.model;
  mc.mismatch = cfg.mismatch;
  mc.epsilon = cfg.epsilon;
  mc.p = cfg.p;
  mc.sigma2 = cfg.sigma2;
  mc.policies = cfg.policies;
  mc.trials = cfg.trials;
  mc.seed = cfg.seed;
  mc.threads = threads;
  mc.redraw_per_trial = cfg.redraw_per_trial;
  mc.twin_track = cfg.twin_track;
  mc.assumed_weights = cfg.assumed_weights;
  return mc;
}

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

int cmd_sense(const RunConfig& cfg, const std::string& out) {
  const PrecisionSpec spec =
      make_precision_spec(cfg.epsilon, cfg.p, cfg.sigma2, cfg.model.n);
  Rng root(cfg.seed);
  Instance inst = build_instance(cfg.model, cfg.mismatch, root,
                                 cfg.assumed_weights.size() ? &cfg.assumed_weights
                                                            : nullptr);
  TrialOptions topts;
  topts.sensing = cfg.policies.front().sensing;
  topts.twin_track = cfg.twin_track;
  Rng trial_root(mix_seed(cfg.seed, 0));
  Rng signal_rng = trial_root.fork(1000);
  Rng noise_rng = trial_root.fork(2000);
  const TrialResult res = run_trial(inst, spec, topts, signal_rng, noise_rng);

  json j;
  j["chi"] = spec.chi;
  j["error"] = res.recovery_error;
  j["success"] = res.success;
  j["total_power"] = res.total_power;
  j["steps"] = res.steps;
  j["true_label"] = res.true_label;
  j["predicted_label"] = res.predicted_label;
  j["estimate"] = vec_to_json(res.estimate);
  json recs = json::array();
  for (const auto& r : res.records) {
    json jr;
    jr["step"] = r.step;
    jr["beta"] = r.beta;
    jr["y"] = r.y;
    jr["a"] = vec_to_json(r.a);
    recs.push_back(std::move(jr));
  }
  j["records"] = std::move(recs);
  json diags = json::array();
  for (const auto& d : res.step_diags) {
    json jd;
    jd["step"] = d.step;
    jd["beta"] = d.beta;
    jd["trace"] = d.trace;
    if (std::isfinite(d.lambda_hat)) jd["lambda_hat"] = d.lambda_hat;
    if (d.j >= 0) {
      jd["j"] = d.j;
      jd["max_diag"] = d.max_diag;
      jd["rho_min"] = d.rho_min;
    }
    diags.push_back(std::move(jd));
  }
  j["step_diags"] = std::move(diags);
  if (cfg.twin_track) {
    j["delta"] = res.mismatch.delta;
    j["trace_true"] = res.trace_true;
    j["entropy_true"] = res.entropy_true;
  }
  write_text_file(out, j.dump(2) + "\n");
  return 0;
}

int cmd_mc(const RunConfig& cfg, const std::string& out, int threads) {
  const McResult res = run_monte_carlo(to_mc_config(cfg, threads));
  CsvWriter csv(out, {"policy", "trial_or_agg", "error", "success", "power", "steps",
                      "misclass"});
  for (const auto& pol : res.policies) {
    for (const auto& row : pol.rows)
      csv.row({pol.name, std::to_string(row.trial), format_double(row.error),
               row.success ? "1" : "0", format_double(row.power),
               std::to_string(row.steps),
               row.misclass < 0 ? "" : std::to_string(row.misclass)});
    csv.row({pol.name, "agg", format_double(pol.mean_error),
             format_double(pol.success_rate), format_double(pol.mean_power),
             format_double(pol.mean_steps),
             std::isnan(pol.misclass_rate) ? "" : format_double(pol.misclass_rate)});
  }
  return 0;
}

int cmd_bounds(const RunConfig& cfg, const std::string& out) {
  const PrecisionSpec spec =
      make_precision_spec(cfg.epsilon, cfg.p, cfg.sigma2, cfg.model.n);
  Rng root(cfg.seed);
  Instance inst = build_instance(cfg.model, cfg.mismatch, root,
                                 cfg.assumed_weights.size() ? &cfg.assumed_weights
                                                            : nullptr);
  TrialOptions topts;
  topts.sensing = cfg.policies.front().sensing;
  topts.twin_track = true;
  Rng trial_root(mix_seed(cfg.seed, 0));
  Rng signal_rng = trial_root.fork(1000);
  Rng noise_rng = trial_root.fork(2000);
  const TrialResult res = run_trial(inst, spec, topts, signal_rng, noise_rng);

  CsvWriter csv(out, {"step", "measured", "bound"});
  if (cfg.bounds.kind == "entropy") {
    const double trace0 = inst.model.covs[0].trace();
    const EntropyBounds eb = entropy_bounds(res.mismatch, cfg.bounds.delta, trace0);
    for (std::size_t k = 0; k < eb.bound.size(); ++k)
      csv.row({std::to_string(k + 1), format_double(res.entropy_true[k]),
               format_double(eb.bound[k])});
  } else if (cfg.bounds.kind == "one_sparse_trace") {
    double prev = inst.model.covs[0].trace();
    for (std::size_t k = 0; k < res.step_diags.size(); ++k) {
      const StepDiag& d = res.step_diags[k];
      const double cap =
          one_sparse_trace_cap(prev, d.rho_min, cfg.model.n, cfg.bounds.gamma);
      csv.row({std::to_string(k + 1), format_double(d.trace), format_double(cap)});
      prev = d.trace;
    }
  } else {  // delta_recursion
    for (std::size_t k = 0; k + 1 < res.mismatch.delta.size(); ++k) {
      const double cap = 4.0 * res.mismatch.delta[k];
      csv.row({std::to_string(k + 1), format_double(res.mismatch.delta[k + 1]),
               format_double(cap)});
    }
  }
  return 0;
}

int cmd_sketch(const RunConfig& cfg, const std::string& out) {
  Rng root(cfg.seed);
  Rng model_rng = root.fork(1);
  Rng data_rng = root.fork(2);
  const SignalModel model = build_signal_model(cfg.model, model_rng);
  const Mat& truth = model.covs[0];
  const int n = cfg.model.n;

  const double tr = truth.trace();
  const double nrm = spectral_norm_sym(truth);
  SketchConfig sk = sketch_params(n, cfg.sketch.s, tr, nrm, cfg.sketch.sigma2,
                                  cfg.sketch.delta, cfg.sketch.c0, cfg.sketch.c1,
                                  cfg.sketch.c2);
  if (cfg.sketch.M > 0) sk.M = cfg.sketch.M;
  if (cfg.sketch.N > 0) sk.N = cfg.sketch.N;
  if (cfg.sketch.L > 0) sk.L = cfg.sketch.L;
  if (cfg.sketch.tau >= 0.0) sk.tau = cfg.sketch.tau;

  Mat vectors(n, sk.M);
  for (Eigen::Index j = 0; j < vectors.cols(); ++j)
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) vectors(i, j) = data_rng.normal();

  Mat signals(n, sk.N);
  for (long long j = 0; j < sk.N; ++j) {
    auto [x, label] = sample_signal(model, data_rng);
    signals.col(j) = x;
  }
  const SketchProblem prob =
      sketch_signals(signals, vectors, sk.L, cfg.sketch.sigma2, data_rng);
  const RecoveryResult rec = recover_covariance(prob, sk.tau);

  write_csv_matrix(out, rec.sigma);
  json report;
  report["M"] = sk.M;
  report["N"] = sk.N;
  report["L"] = sk.L;
  report["tau"] = sk.tau;
  report["sigma2"] = cfg.sketch.sigma2;
  report["iterations"] = rec.iterations;
  report["converged"] = rec.converged;
  report["l1_residual"] = rec.l1_residual;
  report["min_eigenvalue"] = rec.min_eigenvalue;
  report["trace"] = rec.sigma.trace();
  report["spec_error"] = spectral_norm_sym(rec.sigma - truth);
  report["fro_error"] = (rec.sigma - truth).norm();
  write_text_file(out + ".report.json", report.dump(2) + "\n");
  return 0;
}

int cmd_gen(const RunConfig& cfg, const std::string& out) {
  Rng root(cfg.seed);
  Rng model_rng = root.fork(1);
  const SignalModel model = build_signal_model(cfg.model, model_rng);
  if (cfg.gen.component >= static_cast<int>(model.covs.size()))
    throw ConfigError("gen: component index out of range");
  if (cfg.gen.what == "covariance") {
    write_csv_matrix(out, model.covs[cfg.gen.component]);
    return 0;
  }
  Rng draw_rng = root.fork(2);
  Mat samples(cfg.gen.count, cfg.model.n);  // one sample per row
  for (int i = 0; i < cfg.gen.count; ++i) {
    auto [x, label] = sample_signal(model, draw_rng);
    samples.row(i) = x.transpose();
  }
  write_csv_matrix(out, samples);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Info-greedy sequential compressed sensing toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  int threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_path, "output file (overrides config)");
    sub->add_option("--seed", seed, "RNG seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--trials", trials, "trial count (overrides config)");
    sub->add_option("--threads", threads, "worker threads (overrides IGS_THREADS)");
  };
  add_common(app.add_subcommand("sense", "run one sensing trial, write a JSON trace"));
  add_common(app.add_subcommand("mc", "Monte Carlo comparison, write CSV"));
  add_common(app.add_subcommand("sketch", "covariance sketching pipeline"));
  add_common(app.add_subcommand("bounds", "bound-vs-measured curves, write CSV"));
  add_common(app.add_subcommand("gen", "write generated covariance/samples CSV"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    RunConfig cfg = parse_config(config_path);
    if (seed_set) cfg.seed = seed;
    if (trials > 0) cfg.trials = trials;
    const int n_threads = resolve_threads(threads, cfg.threads);
    const std::string out = out_path.empty() ? cfg.out : out_path;
    if (out.empty()) throw ConfigError("no output path: set 'out' in config or --out");

    const std::string sub = app.get_subcommands().front()->get_name();
    const auto want = [&](RunConfig::Command c, const char* name) {
      if (cfg.command != c)
        throw ConfigError(std::string("config command does not match subcommand ") +
                          name);
    };
    if (sub == "sense") {
      want(RunConfig::Command::Sense, "sense");
      return cmd_sense(cfg, out);
    }
    if (sub == "mc") {
      want(RunConfig::Command::Mc, "mc");
      return cmd_mc(cfg, out, n_threads);
    }
    if (sub == "sketch") {
      want(RunConfig::Command::Sketch, "sketch");
      return cmd_sketch(cfg, out);
    }
    if (sub == "bounds") {
      want(RunConfig::Command::Bounds, "bounds");
      return cmd_bounds(cfg, out);
    }
    want(RunConfig::Command::Gen, "gen");
    return cmd_gen(cfg, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace igs
