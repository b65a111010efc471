#include "retq/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace retq {

namespace {

using nlohmann::json;

json meta_json(const RunMeta& meta) {
  return {{"tool", kToolVersion}, {"config_hash", meta.config_hash}, {"seed", meta.seed}};
}

json number_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

json estimate_json(const Estimate& e) {
  return {{"mean", number_or_null(e.mean)},
          {"se", e.se},
          {"half_width", e.half_width},
          {"batches", e.batches}};
}

json estimates_json(const std::vector<Estimate>& v) {
  json arr = json::array();
  for (const Estimate& e : v) arr.push_back(estimate_json(e));
  return arr;
}

}  // namespace

std::string to_json(const StabilityReport& rep, const RunMeta& meta) {
  json j{{"meta", meta_json(meta)},
         {"stable", rep.stable},
         {"input_rate", rep.input_rate},
         {"departure_rate", rep.departure_rate},
         {"margin", rep.margin}};
  return j.dump(2);
}

std::string to_json(const MeasureReport& m, const SolverStats& stats,
                    const RunMeta& meta) {
  json j{{"meta", meta_json(meta)},
         {"solver",
          {{"initial_level", stats.initial_level},
           {"interval", stats.interval},
           {"final_level", stats.final_level},
           {"g_evaluations", stats.g_evaluations},
           {"sweeps", stats.sweeps},
           {"tail_mass_bound", stats.tail_mass_bound},
           {"wall_seconds", stats.wall_seconds}}},
         {"measures",
          {{"p_orbit", m.p_orbit},
           {"e_orbit", m.e_orbit},
           {"e_orbit_tail", m.e_orbit_tail},
           {"p_handoff", m.p_handoff},
           {"p_new", m.p_new},
           {"p_emergency", m.p_emergency},
           {"p_repair", m.p_repair},
           {"p_drop_normal", number_or_null(m.p_drop_normal)},
           {"p_drop_cat", number_or_null(m.p_drop_cat)},
           {"p_block_cat", number_or_null(m.p_block_cat)},
           {"p_block_emergency", number_or_null(m.p_block_emergency)},
           {"alpha_f", m.alpha_f},
           {"p_preempt_new", number_or_null(m.p_preempt_new)},
           {"p_preempt_emergency", number_or_null(m.p_preempt_emergency)},
           {"theta_r_succ", m.theta_r_succ}}}};
  return j.dump(2);
}

std::string to_json(const SimEstimate& e, const RunMeta& meta) {
  json j{{"meta", meta_json(meta)},
         {"orbit_warning", e.orbit_warning},
         {"estimates",
          {{"p_orbit", estimates_json(e.p_orbit)},
           {"e_orbit", estimate_json(e.e_orbit)},
           {"p_handoff", estimates_json(e.p_handoff)},
           {"p_new", estimates_json(e.p_new)},
           {"p_emergency", estimates_json(e.p_emergency)},
           {"p_repair", estimate_json(e.p_repair)},
           {"p_drop_normal", estimate_json(e.p_drop_normal)},
           {"p_drop_cat", estimate_json(e.p_drop_cat)},
           {"p_block_cat", estimate_json(e.p_block_cat)},
           {"p_block_emergency", estimate_json(e.p_block_emergency)},
           {"alpha_f", estimate_json(e.alpha_f)},
           {"p_preempt_new", estimate_json(e.p_preempt_new)},
           {"p_preempt_emergency", estimate_json(e.p_preempt_emergency)},
           {"theta_r_succ", estimate_json(e.theta_r_succ)}}}};
  return j.dump(2);
}

std::string to_json(const OptResult& r, const RunMeta& meta) {
  json j{{"meta", meta_json(meta)},
         {"feasible", r.feasible},
         {"k_star", r.k_star},
         {"lambda_star", r.lambda_star},
         {"mu_star", r.mu_star},
         {"constraints",
          {{"p_block_emergency", r.at_optimum.p_block_emergency},
           {"p_block_cat", r.at_optimum.p_block_cat},
           {"p_preempt_emergency", r.at_optimum.p_preempt_emergency},
           {"violation", r.at_optimum.violation}}},
         {"generations", r.generations},
         {"evaluations", r.evaluations}};
  return j.dump(2);
}

std::string agreement_csv(const MeasureReport& m, const SimEstimate& e) {
  std::ostringstream os;
  os << "measure,analytic,sim_mean,sim_half_width,inside_ci\n";
  auto row = [&os](const std::string& name, double analytic, const Estimate& est) {
    if (!std::isfinite(analytic) || !std::isfinite(est.mean)) return;
    os << name << ',' << analytic << ',' << est.mean << ',' << est.half_width << ','
       << (est.covers(analytic) ? 1 : 0) << '\n';
  };
  row("e_orbit", m.e_orbit, e.e_orbit);
  const size_t orbit_n = std::min(m.p_orbit.size(), e.p_orbit.size());
  for (size_t l = 0; l < orbit_n; ++l)
    row("p_orbit_" + std::to_string(l), m.p_orbit[l], e.p_orbit[l]);
  for (size_t x = 0; x < m.p_handoff.size(); ++x)
    row("p_handoff_" + std::to_string(x), m.p_handoff[x], e.p_handoff[x]);
  for (size_t x = 0; x < m.p_new.size(); ++x)
    row("p_new_" + std::to_string(x), m.p_new[x], e.p_new[x]);
  for (size_t x = 0; x < m.p_emergency.size(); ++x)
    row("p_emergency_" + std::to_string(x), m.p_emergency[x], e.p_emergency[x]);
  row("p_repair", m.p_repair, e.p_repair);
  row("p_drop_normal", m.p_drop_normal, e.p_drop_normal);
  row("p_drop_cat", m.p_drop_cat, e.p_drop_cat);
  row("p_block_cat", m.p_block_cat, e.p_block_cat);
  row("p_block_emergency", m.p_block_emergency, e.p_block_emergency);
  row("alpha_f", m.alpha_f, e.alpha_f);
  row("p_preempt_new", m.p_preempt_new, e.p_preempt_new);
  row("p_preempt_emergency", m.p_preempt_emergency, e.p_preempt_emergency);
  row("theta_r_succ", m.theta_r_succ, e.theta_r_succ);
  return os.str();
}

void write_distribution_csv(const StationaryDistribution& z, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "level,state,probability\n";
  for (size_t l = 0; l < z.z.size(); ++l)
    for (Eigen::Index q = 0; q < z.z[l].size(); ++q)
      out << l << ',' << q << ',' << z.z[l](q) << '\n';
}

std::string optimum_csv(const OptResult& r) {
  std::ostringstream os;
  os << "k_star,lambda_e_star,mu_e_star,p_e,p_b_c,p_preempt_emr,feasible\n"
     << r.k_star << ',' << r.lambda_star << ',' << r.mu_star << ','
     << r.at_optimum.p_block_emergency << ',' << r.at_optimum.p_block_cat << ','
     << r.at_optimum.p_preempt_emergency << ',' << (r.feasible ? 1 : 0) << '\n';
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace retq
