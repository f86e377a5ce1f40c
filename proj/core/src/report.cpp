#include "lsrn/report.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <ostream>

namespace lsrn {
namespace {

using nlohmann::ordered_json;

// JSON has no inf/nan; such values are written as null.
ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json to_json(const SolveReport& r) {
  const auto& st = r.iteration_stats;
  const auto& sb = r.sigma_bounds;
  ordered_json j;
  j["schema"] = kReportSchema;
  j["m"] = r.m;
  j["n"] = r.n;
  j["orientation"] = to_string(r.orientation);
  j["solver"] = to_string(r.solver);
  j["seed"] = r.seed;
  j["gamma"] = number(r.gamma);
  j["eps"] = number(r.eps);
  j["delta"] = number(r.delta);
  j["alpha"] = number(sb.alpha);
  j["alpha_clamped"] = r.alpha_clamped;
  j["s"] = r.s;
  j["detected_rank"] = r.detected_rank;
  j["sigma_bounds"] = {{"lower", number(sb.sigma_lower)},
                       {"upper", number(sb.sigma_upper)},
                       {"failure_prob", number(sb.failure_prob)},
                       {"kappa_bound", sb.r > 0 ? number(sb.kappa_bound()) : ordered_json(nullptr)}};
  j["iteration_bound"] = r.iteration_bound;
  j["max_iter"] = r.max_iter;
  j["iterations"] = st.iterations;
  j["converged"] = st.converged;
  j["residual_norm"] = number(st.final_residual_norm);
  j["normal_residual_norm"] = number(st.normal_residual_norm);
  j["refinement_steps"] = r.refinement_steps;
  j["refinement_iterations"] = r.refinement_iterations;
  if (!st.residual_history.empty()) {
    auto& h = j["residual_history"] = ordered_json::array();
    for (const double v : st.residual_history) h.push_back(number(v));
  }
  j["timings"] = {{"randn", r.timings.randn},
                  {"mult", r.timings.mult},
                  {"svd", r.timings.svd},
                  {"iter", r.timings.iter},
                  {"wall", r.wall_seconds}};
  j["warnings"] = r.warnings;
  return j;
}

void csv_value(std::ostream& out, const ordered_json& v) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    bool quote = s.find_first_of(",\"\n") != std::string::npos;
    if (quote) {
      std::string q = "\"";
      for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      out << q << '"';
    } else {
      out << s;
    }
  } else if (v.is_number_float()) {
    out << std::setprecision(17) << v.get<double>();
  } else {
    out << v.dump();
  }
}

void flatten(std::ostream& out, const std::string& prefix, const ordered_json& j) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      flatten(out, key, *it);
    } else if (it->is_array()) {
      for (std::size_t i = 0; i < it->size(); ++i) {
        out << key << '.' << i << ',';
        csv_value(out, (*it)[i]);
        out << '\n';
      }
    } else {
      out << key << ',';
      csv_value(out, *it);
      out << '\n';
    }
  }
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  throw Error("unknown report format '" + name + "' (expected json or csv)");
}

std::string report_json(const SolveReport& report) { return to_json(report).dump(2); }

void write_report(std::ostream& out, const SolveReport& report, ReportFormat format) {
  if (format == ReportFormat::json) {
    out << report_json(report) << '\n';
    return;
  }
  out << "key,value\n";
  flatten(out, "", to_json(report));
}

}  // namespace lsrn
