#include "rwtree/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "rwtree/config.hpp"
#include "rwtree/error.hpp"
#include "rwtree/mc.hpp"
#include "rwtree/report.hpp"

namespace rwtree {

using nlohmann::json;

EnvSpec worked_example_env(double kappa) {
  if (!(kappa > 0.0 && kappa <= 0.5)) throw ConfigError("kappa must lie in (0, 1/2]", "--kappa");
  return EnvSpec::rwre(2, {{0.3, kappa}, {3.5, 1.0 - kappa}}, Coupling::identical);
}

double ExampleQuantity::rel_error() const noexcept {
  if (closed_form == 0.0) return std::abs(computed);
  return std::abs(computed - closed_form) / std::abs(closed_form);
}

const ExampleQuantity* WorkedExample::find(const std::string& name) const {
  for (const ExampleQuantity& q : quantities) {
    if (q.name == name) return &q;
  }
  return nullptr;
}

WorkedExample worked_example(double kappa) {
  const EnvSpec env = worked_example_env(kappa);
  WorkedExample ex;
  ex.kappa = kappa;
  for (const Atom& at : env.support) {
    const double a[2] = {at.value, at.value};
    const std::vector<double> w = transition_weights_rwre(a);
    ex.omega.push_back({at.value, at.prob, w[0], w[1]});
  }

  const OffspringDist law = offspring_exact_rwre_psi1(env);
  const double alpha = extinction_probability(law.probs);
  const EnvMoments mom = env_moments(env, 2.0);
  const double k = kappa;
  ex.quantities = {
      {"p0", law.probs[0], 1.0 / 8 + k / 2},
      {"p1", law.probs[1], 7.0 / 36 + 11 * k / 117},
      {"p2", law.probs[2], 49.0 / 72 - 139 * k / 234},
      {"m1", law.mean(), (182 - 128 * k) / 117},
      {"alpha1", alpha, (117 + 468 * k) / (637 - 556 * k)},
      {"alpha1_identity", alpha, law.probs[0] / law.probs[2]},
      {"E[A^-2]", mom.inv_a_p, 4.0 / 49 + 4864 * k / 441},
      {"E[(1+1/(2A))^2]", mom.one_plus_inv_sum_p, 64.0 / 49 + 2560 * k / 441},
  };

  BoundsParams params;
  params.psi = 1;
  params.p = 1;
  params.eps = 1;
  ex.bounds = compute_bounds(env, params);
  ex.speed_lower = ex.bounds.speed.lower.applicable ? ex.bounds.speed.lower.value : 0.0;
  return ex;
}

json to_json(const WorkedExample& ex) {
  json j;
  j["kappa"] = ex.kappa;
  json om = json::array();
  for (const OmegaRow& r : ex.omega) {
    om.push_back({{"A", r.a},
                  {"prob", r.prob},
                  {"omega_parent", r.to_parent},
                  {"omega_child", r.to_child}});
  }
  j["omega"] = om;
  json qs = json::array();
  for (const ExampleQuantity& q : ex.quantities) {
    qs.push_back({{"name", q.name},
                  {"computed", json_number(q.computed)},
                  {"closed_form", json_number(q.closed_form)},
                  {"rel_error", json_number(q.rel_error())}});
  }
  j["quantities"] = qs;
  j["speed_lower_bound"] = json_number(ex.speed_lower);
  j["bounds"] = to_json(ex.bounds);
  return j;
}

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replicas;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::string blocks_out;
  std::string kappa = "1/30";
};

RunConfig load_with_overrides(const Options& o) {
  RunConfig cfg = load_config(o.config_path);
  if (o.seed) {
    cfg.campaign.seed = *o.seed;
    cfg.bounds.offspring_seed = *o.seed;
  }
  if (o.replicas) cfg.campaign.replicas = *o.replicas;
  if (o.workers) {
    cfg.campaign.workers = *o.workers;
    cfg.bounds.workers = *o.workers;
  }
  if (o.out) cfg.out_path = *o.out;
  if (o.format) cfg.format = parse_format(*o.format);
  if (!o.blocks_out.empty()) cfg.campaign.keep_blocks = true;
  cfg.validate();
  return cfg;
}

std::string render(const json& doc, OutputFormat fmt) {
  if (fmt == OutputFormat::csv) return to_csv_kv(doc);
  return doc.dump(2) + "\n";
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_atomically(path, text);
  }
}

bool inapplicable_families(const BoundsReport& r) { return !r.inapplicable.empty(); }

bool any_memory_cap(const std::vector<ReplicaStats>& stats) {
  return std::any_of(stats.begin(), stats.end(),
                     [](const ReplicaStats& s) { return s.status == ReplicaStatus::memory_cap; });
}

int cmd_bounds(const Options& o, std::ostream& out) {
  const RunConfig cfg = load_with_overrides(o);
  const BoundsReport r = compute_bounds(cfg.env, cfg.bounds);
  json doc = {{"provenance", provenance("bounds", cfg)}, {"bounds", to_json(r)}};
  emit(render(doc, cfg.format), cfg.out_path, out);
  return inapplicable_families(r) ? kExitInapplicable : kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const RunConfig cfg = load_with_overrides(o);
  const std::vector<ReplicaStats> stats = run_campaign(cfg.env, cfg.campaign);
  std::string text;
  if (cfg.format == OutputFormat::csv) {
    text = replicas_csv(stats);
  } else {
    json reps = json::array();
    for (const ReplicaStats& s : stats) reps.push_back(to_json(s));
    json doc = {{"provenance", provenance("simulate", cfg)}, {"replicas", reps}};
    text = doc.dump(2) + "\n";
  }
  if (!o.blocks_out.empty()) write_atomically(o.blocks_out, blocks_csv(stats));
  emit(text, cfg.out_path, out);
  return any_memory_cap(stats) ? kExitRuntimeCap : kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const RunConfig cfg = load_with_overrides(o);
  const BoundsReport bounds = compute_bounds(cfg.env, cfg.bounds);
  const std::vector<ReplicaStats> stats = run_campaign(cfg.env, cfg.campaign);
  VerifyOptions vo;
  vo.tail_n_max = cfg.bounds.tail_n_max;
  const VerificationReport rep = verify(cfg.env, bounds, stats, cfg.campaign, vo);
  json doc = {{"provenance", provenance("verify", cfg)},
              {"bounds", to_json(bounds)},
              {"verification", to_json(rep)}};
  emit(render(doc, cfg.format), cfg.out_path, out);
  if (any_memory_cap(stats)) return kExitRuntimeCap;
  if (rep.any_fail()) return kExitFailure;
  if (inapplicable_families(bounds)) return kExitInapplicable;
  return kExitOk;
}

int cmd_paper_example(const Options& o, std::ostream& out, std::ostream& err) {
  const double kappa = parse_rational(o.kappa, "--kappa");
  const WorkedExample ex = worked_example(kappa);
  json doc = to_json(ex);
  doc["tool"] = "rwtree";
  doc["version"] = std::string(tool_version());
  doc["command"] = "paper-example";
  int code = kExitOk;
  if (std::abs(kappa - 1.0 / 30) < 1e-15) {
    const bool ok = ex.speed_lower >= kHeadlineLow && ex.speed_lower <= kHeadlineHigh;
    doc["headline"] = {{"expected", kHeadlineSpeed},
                       {"accepted", {kHeadlineLow, kHeadlineHigh}},
                       {"ok", ok}};
    if (!ok) {
      err << "speed lower bound " << ex.speed_lower << " outside [" << kHeadlineLow << ", " << kHeadlineHigh
          << "]\n";
      code = kExitFailure;
    }
  }
  const OutputFormat fmt = o.format ? parse_format(*o.format) : OutputFormat::json;
  emit(render(doc, fmt), o.out.value_or(""), out);
  return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random walks on b-ary trees: bounds, simulation and verification", "rwtree"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(tool_version()));
  Options o;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    if (needs_config) c->required();
    sub->add_option("--seed", o.seed, "master seed (overrides the configuration)");
    sub->add_option("--replicas", o.replicas, "replica count (overrides the configuration)");
    sub->add_option("--workers", o.workers, "worker threads (does not affect results)");
    sub->add_option("--out", o.out, "output file (default: standard output)");
    sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* bounds = app.add_subcommand("bounds", "analytic bounds for a configuration");
  add_common(bounds, true);
  CLI::App* simulate = app.add_subcommand("simulate", "run a Monte Carlo campaign");
  add_common(simulate, true);
  simulate->add_option("--blocks-out", o.blocks_out, "also write every regeneration block as CSV");
  CLI::App* verify_cmd = app.add_subcommand("verify", "compare campaign estimates with the bounds");
  add_common(verify_cmd, true);
  CLI::App* example = app.add_subcommand("paper-example", "binary worked example and its speed bound");
  example->add_option("--kappa", o.kappa, "probability of A = 3/10, in (0, 1/2]");
  example->add_option("--out", o.out, "output file (default: standard output)");
  example->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << tool_version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (bounds->parsed()) return cmd_bounds(o, out);
    if (simulate->parsed()) return cmd_simulate(o, out);
    if (verify_cmd->parsed()) return cmd_verify(o, out);
    return cmd_paper_example(o, out, err);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace rwtree
