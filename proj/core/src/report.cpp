#include "rwtree/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rwtree/error.hpp"

#ifndef RWTREE_VERSION
#define RWTREE_VERSION "0.0.0"
#endif

namespace rwtree {

using nlohmann::json;

std::string_view tool_version() noexcept { return RWTREE_VERSION; }

json json_number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json to_json(const BoundValue& b) {
  json j;
  j["applicable"] = b.applicable;
  j["value"] = b.applicable ? json_number(b.value) : json(nullptr);
  std::string reason = b.reason;
  if (b.applicable && !std::isfinite(b.value) && reason.empty()) reason = "value is not finite";
  if (!reason.empty()) j["reason"] = reason;
  return j;
}

json to_json(const OffspringDist& d) {
  json j;
  j["psi"] = d.psi;
  j["provenance"] = std::string(to_string(d.provenance));
  json probs = json::array();
  for (double p : d.probs) probs.push_back(json_number(p));
  j["probs"] = probs;
  j["mean"] = json_number(d.mean());
  if (d.provenance == Provenance::monte_carlo) {
    j["samples"] = d.samples;
    json se = json::array();
    for (double s : d.std_errors) se.push_back(json_number(s));
    j["std_errors"] = se;
    j["cap_hits"] = d.cap_hits;
  }
  return j;
}

json to_json(const BranchingSummary& s) {
  json j;
  j["psi"] = s.psi;
  j["m"] = json_number(s.m);
  j["alpha"] = json_number(s.alpha);
  j["supercritical"] = s.supercritical;
  j["zeta"] = s.zeta;
  j["gamma"] = json_number(s.gamma);
  j["vartheta"] = json_number(s.vartheta);
  if (s.has_interval) {
    j["alpha_interval"] = {json_number(s.alpha_lo), json_number(s.alpha_hi)};
    j["gamma_interval"] = {json_number(s.gamma_lo), json_number(s.gamma_hi)};
    j["zeta_hi"] = s.zeta_hi;
    j["interval_note"] = "values at the stochastically extreme laws inside the 3-sigma box of the sampled law";
  }
  if (!s.note.empty()) j["note"] = s.note;
  return j;
}

json to_json(const BoundsReport& r) {
  json j;
  j["env"] = to_json(r.env);
  j["transience"] = {{"verdict", std::string(to_string(r.transience.verdict))},
                     {"min_phi", json_number(r.transience.min_phi)},
                     {"argmin_t", json_number(r.transience.argmin_t)},
                     {"threshold", json_number(r.transience.threshold)}};
  json sel = {{"ok", r.selection.ok}, {"psi", r.selection.psi}, {"m", json_number(r.selection.m)}};
  if (!r.selection.reason.empty()) sel["reason"] = r.selection.reason;
  j["psi_selection"] = sel;
  j["offspring"] = r.offspring ? to_json(*r.offspring) : json(nullptr);
  j["branching"] = r.branching ? to_json(*r.branching) : json(nullptr);
  j["alpha_used"] = json_number(r.alpha_used);
  j["gamma_used"] = json_number(r.gamma_used);
  if (r.env_moments_p) {
    j["env_moments"] = {
                        {"inv_a_p", json_number(r.env_moments_p->inv_a_p)},
                        {"one_plus_inv_sum_p", json_number(r.env_moments_p->one_plus_inv_sum_p)}};
  } else {
    j["env_moments"] = nullptr;
  }
  json th = json::array();
  for (double t : r.theta_table) th.push_back(json_number(t));
  j["theta_table"] = th;
  j["l_rho_moment_bound"] = to_json(r.l_rho);
  j["speed"] = {{"theorem", to_json(r.speed.theorem)},
                {"comparison", to_json(r.speed.comparison)},
                {"lower", to_json(r.speed.lower)},
                {"upper", to_json(r.speed.upper)}};
  json tail = json::array();
  for (std::size_t n = 0; n < r.ell1_tail.size(); ++n) {
    tail.push_back({{"n", n + 1}, {"level", static_cast<std::int64_t>(n + 1) * r.ell1_scale},
                    {"bound", json_number(r.ell1_tail[n])}});
  }
  j["ell1_tail"] = {{"gamma", json_number(r.gamma_used)}, {"scale", r.ell1_scale}, {"points", tail}};
  j["pi_mean_bound"] = to_json(r.pi_mean);
  j["tau1_mean_bound"] = to_json(r.tau1_mean);
  j["covariance"] = {{"a", r.covariance.a},
                     {"ell1_second_moment", to_json(r.covariance.ell1_sq)},
                     {"tau1_second_moment", to_json(r.covariance.tau1_sq)},
                     {"tau1_mean", to_json(r.covariance.tau1_mean)},
                     {"event_probability", to_json(r.covariance.event_prob)},
                     {"lower", to_json(r.covariance.lower)},
                     {"upper", to_json(r.covariance.upper)}};
  j["inapplicable"] = r.inapplicable;
  return j;
}

json to_json(const ReplicaStats& r) {
  json j;
  j["replica"] = r.index;
  j["status"] = std::string(to_string(r.status));
  j["final_step"] = r.final_step;
  j["final_level"] = r.final_level;
  j["max_level"] = r.max_level;
  j["L_root"] = r.L_root;
  j["returned_to_root_parent"] = r.returned;
  j["d_time"] = r.d_time;
  j["beta_hit_time"] = r.beta_hit_time;
  j["first_block_confirmed"] = r.first_confirmed;
  j["ell1"] = r.ell1;
  j["tau1"] = r.tau1;
  j["pi_to_tau1"] = r.pi_to_tau1;
  j["ell1_survives_to"] = r.ell1_survives_to;
  j["confirmed_blocks"] = r.confirmed;
  j["censored_blocks"] = r.censored;
  j["censor_fraction"] = json_number(r.censor_fraction);
  j["later_blocks"] = {{"n", r.later.n}, {"sum_dl", r.later.l}, {"sum_dt", r.later.t},
                       {"sum_dl2", r.later.ll}, {"sum_dldt", r.later.lt}, {"sum_dt2", r.later.tt}};
  j["pi_probe"] = r.pi_probe;
  if (!r.blocks.empty()) {
    json bl = json::array();
    for (const RegenBlock& b : r.blocks) bl.push_back({b.d_ell(), b.d_tau(), b.censored});
    j["blocks"] = bl;
  }
  return j;
}

namespace {

json to_json(const Estimate& e) {
  return {{"ok", e.ok}, {"value", json_number(e.value)}, {"se", json_number(e.se)},
          {"ci", {json_number(e.lo), json_number(e.hi)}}, {"n", e.n}};
}

json opt_number(const std::optional<double>& x) { return x ? json_number(*x) : json(nullptr); }

}  // namespace

json to_json(const VerificationReport& r) {
  json j;
  j["replicas"] = r.replicas;
  j["transience"] = std::string(to_string(r.transience));
  j["censor_fraction"] = json_number(r.censor_fraction);
  j["memory_cap_hits"] = r.memory_cap_hits;
  j["step_cap_hits"] = r.step_cap_hits;
  j["speed"] = {{"global", to_json(r.speed.global)}, {"blocks", to_json(r.speed.blocks)}};
  j["beta"] = {{"low", json_number(r.beta.low)},
               {"high", json_number(r.beta.high)},
               {"high_ci", {json_number(r.beta.high_ci.lo), json_number(r.beta.high_ci.hi)}},
               {"n", r.beta.n},
               {"returned", r.beta.returned},
               {"undecided", r.beta.undecided}};
  json tail = json::array();
  for (const TailPoint& tp : r.tail) {
    tail.push_back({{"n", tp.n},
                    {"level", tp.level},
                    {"survival", json_number(tp.survival.p)},
                    {"ci", {json_number(tp.survival.lo), json_number(tp.survival.hi)}},
                    {"bound", json_number(tp.bound)}});
  }
  j["ell1_tail"] = tail;
  j["K"] = to_json(r.K);
  j["block_convention"] = "first regeneration block discarded for block laws; kept for first-block checks";
  json checks = json::array();
  for (const Check& c : r.checks) {
    json cj = {{"name", c.name},
               {"verdict", std::string(to_string(c.verdict))},
               {"strict", c.strict},
               {"analytic", opt_number(c.analytic)},
               {"estimate", opt_number(c.estimate)},
               {"ci", {opt_number(c.ci_lo), opt_number(c.ci_hi)}}};
    if (c.analytic_hi) cj["analytic_hi"] = json_number(*c.analytic_hi);
    if (!c.note.empty()) cj["note"] = c.note;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  return j;
}

json provenance(std::string_view command, const RunConfig& cfg) {
  return {{"tool", "rwtree"},
          {"version", std::string(tool_version())},
          {"command", std::string(command)},
          {"config_hash", config_hash(cfg)},
          {"seed", cfg.campaign.seed},
          {"config", effective_config(cfg)}};
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string to_csv_kv(const json& j) {
  std::string out = "key,value\r\n";
  const json flat = j.flatten();
  for (const auto& [key, value] : flat.items()) {
    std::string v;
    if (value.is_string()) {
      v = value.get<std::string>();
    } else if (!value.is_null()) {
      v = value.dump();
    }
    out += csv_field(key) + "," + csv_field(v) + "\r\n";
  }
  return out;
}

std::string replicas_csv(const std::vector<ReplicaStats>& stats) {
  std::ostringstream os;
  os << "replica,status,final_step,final_level,max_level,L_root,returned_to_root_parent,d_time,beta_hit_time,"
        "first_block_confirmed,ell1,tau1,pi_to_tau1,confirmed_blocks,censored_blocks,censor_fraction,"
        "later_blocks\r\n";
  for (const ReplicaStats& r : stats) {
    os << r.index << ',' << to_string(r.status) << ',' << r.final_step << ',' << r.final_level << ','
       << r.max_level << ',' << r.L_root << ',' << (r.returned ? 1 : 0) << ',' << r.d_time << ','
       << r.beta_hit_time << ',' << (r.first_confirmed ? 1 : 0) << ',' << r.ell1 << ',' << r.tau1 << ','
       << r.pi_to_tau1 << ',' << r.confirmed << ',' << r.censored << ',' << json(r.censor_fraction).dump() << ','
       << r.later.n << "\r\n";
  }
  return os.str();
}

std::string blocks_csv(const std::vector<ReplicaStats>& stats) {
  std::ostringstream os;
  os << "replica,block,d_ell,d_tau,censored\r\n";
  for (const ReplicaStats& r : stats) {
    for (std::size_t i = 0; i < r.blocks.size(); ++i) {
      const RegenBlock& b = r.blocks[i];
      os << r.index << ',' << i << ',' << b.d_ell() << ',' << b.d_tau() << ',' << (b.censored ? 1 : 0) << "\r\n";
    }
  }
  return os.str();
}

void write_atomically(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("failed writing '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, target);
}

}  // namespace rwtree
