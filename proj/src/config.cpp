#include "igs/config.hpp"

#include <fstream>

#include <json.hpp>

#include "igs/io.hpp"

namespace igs {

namespace {

using nlohmann::json;

struct Checker {
  std::vector<std::string> errors;

  void fail(const std::string& where, const std::string& what) {
    errors.push_back(where + ": " + what);
  }

  void known_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (const char* k : allowed)
        if (it.key() == k) {
          ok = true;
          break;
        }
      if (!ok) fail(where, "unknown key '" + it.key() + "'");
    }
  }

  double number(const json& obj, const std::string& where, const char* key, double def,
                double lo, double hi, bool required = false) {
    if (!obj.contains(key)) {
      if (required) fail(where, std::string("missing required key '") + key + "'");
      return def;
    }
    if (!obj[key].is_number()) {
      fail(where, std::string("'") + key + "' must be a number");
      return def;
    }
    const double v = obj[key].get<double>();
    if (v < lo || v > hi) {
      fail(where, std::string("'") + key + "' = " + std::to_string(v) +
                      " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return def;
    }
    return v;
  }

  long long integer(const json& obj, const std::string& where, const char* key,
                    long long def, long long lo, long long hi, bool required = false) {
    if (!obj.contains(key)) {
      if (required) fail(where, std::string("missing required key '") + key + "'");
      return def;
    }
    if (!obj[key].is_number_integer()) {
      fail(where, std::string("'") + key + "' must be an integer");
      return def;
    }
    const long long v = obj[key].get<long long>();
    if (v < lo || v > hi) {
      fail(where, std::string("'") + key + "' = " + std::to_string(v) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return def;
    }
    return v;
  }

  bool boolean(const json& obj, const std::string& where, const char* key, bool def) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_boolean()) {
      fail(where, std::string("'") + key + "' must be a boolean");
      return def;
    }
    return obj[key].get<bool>();
  }

  std::string text(const json& obj, const std::string& where, const char* key,
                   const std::string& def, bool required = false) {
    if (!obj.contains(key)) {
      if (required) fail(where, std::string("missing required key '") + key + "'");
      return def;
    }
    if (!obj[key].is_string()) {
      fail(where, std::string("'") + key + "' must be a string");
      return def;
    }
    return obj[key].get<std::string>();
  }

  Vec vec(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) return Vec();
    if (!obj[key].is_array()) {
      fail(where, std::string("'") + key + "' must be an array of numbers");
      return Vec();
    }
    Vec v(obj[key].size());
    Eigen::Index i = 0;
    for (const auto& e : obj[key]) {
      if (!e.is_number()) {
        fail(where, std::string("'") + key + "' must contain only numbers");
        return Vec();
      }
      v[i++] = e.get<double>();
    }
    return v;
  }
};

PowerRule parse_power(Checker& ck, const json& obj, const std::string& where) {
  ck.known_keys(obj, where, {"rule", "delta_s", "gamma", "beta"});
  const std::string rule = ck.text(obj, where, "rule", "standard");
  if (rule == "standard") return PowerRule::standard();
  if (rule == "slack")
    return PowerRule{PowerRule::Kind::Slack,
                     ck.number(obj, where, "delta_s", 0.0, 0.0, 1e300, true), 0.0, 0.0};
  if (rule == "one_sparse")
    return PowerRule{PowerRule::Kind::OneSparse, 0.0,
                     ck.number(obj, where, "gamma", 1.0, 1e-12, 1e300), 0.0};
  if (rule == "fixed")
    return PowerRule{PowerRule::Kind::Fixed, 0.0, 0.0,
                     ck.number(obj, where, "beta", 1.0, 1e-300, 1e300, true)};
  ck.fail(where, "unknown power rule '" + rule + "'");
  return PowerRule::standard();
}

PolicySpec parse_policy(Checker& ck, const json& obj, const std::string& where, int n) {
  PolicySpec p;
  ck.known_keys(obj, where,
                {"name", "type", "power", "max_steps", "split", "alpha", "weight_mode",
                 "pair_random_power"});
  const std::string type = ck.text(obj, where, "type", "", true);
  p.name = ck.text(obj, where, "name", type);
  if (type == "info_greedy") {
    p.sensing.policy = Policy::InfoGreedy;
  } else if (type == "info_greedy_2") {
    p.sensing.policy = Policy::InfoGreedy;
    p.info_greedy2 = true;
  } else if (type == "one_sparse") {
    p.sensing.policy = Policy::OneSparse;
  } else if (type == "random") {
    p.sensing.policy = Policy::Random;
  } else if (type == "random_one_sparse") {
    p.sensing.policy = Policy::RandomOneSparse;
  } else if (type == "batch") {
    p.sensing.policy = Policy::Batch;
  } else {
    ck.fail(where, "unknown policy type '" + type + "'");
  }
  if (obj.contains("power")) p.sensing.rule = parse_power(ck, obj["power"], where + ".power");
  p.sensing.max_steps =
      static_cast<int>(ck.integer(obj, where, "max_steps", -1, -1, 1000000));
  p.sensing.split = static_cast<int>(ck.integer(obj, where, "split", 1, 1, 10000));
  if (p.sensing.split > 1 &&
      (p.sensing.policy == Policy::Batch || p.sensing.policy == Policy::Random ||
       p.sensing.policy == Policy::RandomOneSparse))
    ck.fail(where, "split > 1 only applies to adaptive policies");
  p.alpha = ck.number(obj, where, "alpha", 0.5, 0.0, 1.0);
  const std::string mode = ck.text(obj, where, "weight_mode", "paper");
  if (mode == "paper")
    p.sensing.weight_mode = WeightUpdateMode::PaperLiteral;
  else if (mode == "exact_bayes")
    p.sensing.weight_mode = WeightUpdateMode::ExactBayes;
  else
    ck.fail(where, "unknown weight_mode '" + mode + "'");
  p.pair_random_power = ck.boolean(obj, where, "pair_random_power", true);
  if (p.sensing.max_steps < 0 && n > 0) p.sensing.max_steps = -1;  // default n
  return p;
}

}  // namespace

RunConfig parse_config_text(const std::string& content, const std::string& origin) {
  json root;
  try {
    root = json::parse(content);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": malformed JSON: " + e.what());
  }
  Checker ck;
  RunConfig cfg;
  if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");

  ck.known_keys(root, "config",
                {"command", "seed", "trials", "threads", "out", "model", "precision",
                 "mismatch", "policy", "policies", "bounds", "sketch", "gen",
                 "twin_track"});

  const std::string cmd = ck.text(root, "config", "command", "", true);
  if (cmd == "sense")
    cfg.command = RunConfig::Command::Sense;
  else if (cmd == "mc")
    cfg.command = RunConfig::Command::Mc;
  else if (cmd == "sketch")
    cfg.command = RunConfig::Command::Sketch;
  else if (cmd == "bounds")
    cfg.command = RunConfig::Command::Bounds;
  else if (cmd == "gen")
    cfg.command = RunConfig::Command::Gen;
  else if (!cmd.empty())
    ck.fail("config", "unknown command '" + cmd + "'");

  cfg.seed = static_cast<std::uint64_t>(
      ck.integer(root, "config", "seed", 0, 0, std::numeric_limits<long long>::max()));
  cfg.trials = static_cast<int>(ck.integer(root, "config", "trials", 1, 1, 100000000));
  cfg.threads = static_cast<int>(ck.integer(root, "config", "threads", 0, 0, 4096));
  cfg.out = ck.text(root, "config", "out", "");
  cfg.twin_track = ck.boolean(root, "config", "twin_track", false);

  if (root.contains("model")) {
    const json& m = root["model"];
    ck.known_keys(m, "model",
                  {"kind", "n", "style", "rank", "file", "components", "weights",
                   "assumed_weights"});
    const std::string kind = ck.text(m, "model", "kind", "gaussian");
    if (kind == "gaussian")
      cfg.model.kind = ModelSpec::Kind::Gaussian;
    else if (kind == "gmm")
      cfg.model.kind = ModelSpec::Kind::Gmm;
    else
      ck.fail("model", "unknown kind '" + kind + "'");
    cfg.model.n = static_cast<int>(ck.integer(m, "model", "n", 0, 1, 512, true));
    const std::string style = ck.text(m, "model", "style", "random_lowrank");
    if (style == "random_lowrank")
      cfg.model.style = CovStyle::RandomLowRank;
    else if (style == "structured")
      cfg.model.style = CovStyle::Structured;
    else if (style == "ones_plus_diag")
      cfg.model.style = CovStyle::OnesPlusDiag;
    else if (style == "custom")
      cfg.model.style = CovStyle::Custom;
    else
      ck.fail("model", "unknown style '" + style + "'");
    cfg.model.rank = static_cast<int>(ck.integer(m, "model", "rank", 3, 1, 512));
    const std::string file = ck.text(m, "model", "file", "");
    if (cfg.model.style == CovStyle::Custom) {
      if (file.empty())
        ck.fail("model", "custom style requires 'file'");
      else
        try {
          cfg.model.custom_cov = read_csv_matrix(file);
        } catch (const std::exception& e) {
          ck.fail("model", e.what());
        }
    }
    cfg.model.components =
        static_cast<int>(ck.integer(m, "model", "components", 1, 1, 64));
    cfg.model.weights = ck.vec(m, "model", "weights");
    if (cfg.model.weights.size() > 0 && cfg.model.weights.minCoeff() < 0.0)
      ck.fail("model", "weights must be nonnegative");
    cfg.assumed_weights = ck.vec(m, "model", "assumed_weights");
  } else {
    ck.fail("config", "missing required key 'model'");
  }

  if (root.contains("precision")) {
    const json& pr = root["precision"];
    ck.known_keys(pr, "precision", {"epsilon", "p", "sigma2"});
    cfg.epsilon = ck.number(pr, "precision", "epsilon", 0.1, 1e-300, 1e300, true);
    cfg.p = ck.number(pr, "precision", "p", 0.95, 1e-12, 1.0 - 1e-12, true);
    cfg.sigma2 = ck.number(pr, "precision", "sigma2", 1e-4, 1e-300, 1e300, true);
  } else {
    ck.fail("config", "missing required key 'precision'");
  }

  if (root.contains("mismatch")) {
    const json& mm = root["mismatch"];
    ck.known_keys(mm, "mismatch",
                  {"style", "r", "delta0", "normalize", "mean_offset",
                   "redraw_per_trial"});
    const std::string style = ck.text(mm, "mismatch", "style", "none");
    if (style == "none")
      cfg.mismatch.style = MismatchSpec::Style::None;
    else if (style == "add_rand_gram")
      cfg.mismatch.style = MismatchSpec::Style::AddRandGram;
    else if (style == "scaled_to")
      cfg.mismatch.style = MismatchSpec::Style::ScaledTo;
    else
      ck.fail("mismatch", "unknown style '" + style + "'");
    cfg.mismatch.r = static_cast<int>(ck.integer(mm, "mismatch", "r", 1, 1, 512));
    cfg.mismatch.delta0 = ck.number(mm, "mismatch", "delta0", 0.0, 0.0, 1e300);
    cfg.mismatch.normalize = ck.boolean(mm, "mismatch", "normalize", false);
    cfg.mismatch.mean_offset = ck.number(mm, "mismatch", "mean_offset", 0.0, 0.0, 1e300);
    cfg.redraw_per_trial = ck.boolean(mm, "mismatch", "redraw_per_trial", false);
  }

  const int n = cfg.model.n;
  if (root.contains("policies")) {
    if (!root["policies"].is_array() || root["policies"].empty())
      ck.fail("policies", "must be a non-empty array");
    else
      for (std::size_t i = 0; i < root["policies"].size(); ++i)
        cfg.policies.push_back(parse_policy(ck, root["policies"][i],
                                            "policies[" + std::to_string(i) + "]", n));
  }
  if (root.contains("policy"))
    cfg.policies.push_back(parse_policy(ck, root["policy"], "policy", n));
  if (cfg.policies.empty() &&
      (cfg.command == RunConfig::Command::Sense || cfg.command == RunConfig::Command::Mc ||
       cfg.command == RunConfig::Command::Bounds))
    ck.fail("config", "command needs 'policy' or 'policies'");

  if (root.contains("bounds")) {
    const json& b = root["bounds"];
    ck.known_keys(b, "bounds", {"kind", "delta", "gamma"});
    cfg.bounds.kind = ck.text(b, "bounds", "kind", "entropy");
    if (cfg.bounds.kind != "entropy" && cfg.bounds.kind != "one_sparse_trace" &&
        cfg.bounds.kind != "delta_recursion")
      ck.fail("bounds", "unknown kind '" + cfg.bounds.kind + "'");
    cfg.bounds.delta = ck.number(b, "bounds", "delta", 0.5, 1e-12, 1.0 - 1e-12);
    cfg.bounds.gamma = ck.number(b, "bounds", "gamma", 1.0, 1e-12, 1e300);
  }

  if (root.contains("sketch")) {
    const json& s = root["sketch"];
    ck.known_keys(s, "sketch", {"s", "delta", "c0", "c1", "c2", "M", "N", "L", "tau",
                                "sigma2"});
    cfg.sketch.s = static_cast<int>(ck.integer(s, "sketch", "s", 2, 1, 512));
    cfg.sketch.delta = ck.number(s, "sketch", "delta", 0.2, 1e-300, 1e300);
    cfg.sketch.c0 = ck.number(s, "sketch", "c0", 1.0, 1e-12, 1e300);
    cfg.sketch.c1 = ck.number(s, "sketch", "c1", 1.0, 1e-12, 1e300);
    cfg.sketch.c2 = ck.number(s, "sketch", "c2", 1.0, 1e-12, 1e300);
    cfg.sketch.M = ck.integer(s, "sketch", "M", -1, -1, 100000000);
    cfg.sketch.N = ck.integer(s, "sketch", "N", -1, -1, 10000000000LL);
    cfg.sketch.L = ck.integer(s, "sketch", "L", -1, -1, 10000000000LL);
    cfg.sketch.tau = ck.number(s, "sketch", "tau", -1.0, -1.0, 1e300);
    cfg.sketch.sigma2 = ck.number(s, "sketch", "sigma2", 1.0, 0.0, 1e300);
  }

  if (root.contains("gen")) {
    const json& g = root["gen"];
    ck.known_keys(g, "gen", {"what", "count", "component"});
    cfg.gen.what = ck.text(g, "gen", "what", "covariance");
    if (cfg.gen.what != "covariance" && cfg.gen.what != "samples")
      ck.fail("gen", "unknown what '" + cfg.gen.what + "'");
    cfg.gen.count = static_cast<int>(ck.integer(g, "gen", "count", 100, 1, 100000000));
    cfg.gen.component =
        static_cast<int>(ck.integer(g, "gen", "component", 0, 0, 63));
  }

  if (!ck.errors.empty()) {
    std::string msg = origin + ": config violations:";
    for (const auto& e : ck.errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return parse_config_text(content, path);
}

}  // namespace igs
