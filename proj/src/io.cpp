#include "sgda/io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "sgda/errors.hpp"

namespace sgda {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(std::string(where) + ": unknown key '" + k + "'");
}

void write_optional(std::ostream& os, const std::optional<double>& v) {
  if (v) os << format_double(*v);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  os << kTraceHeader << '\n';
  for (const TraceRow& r : trace.rows) {
    os << r.k << ',' << r.tau << ',' << format_double(r.dx_norm) << ',' << format_double(r.dy_norm)
       << ',' << format_double(r.xz_gap) << ',' << r.samples << ',';
    write_optional(os, r.res_x);
    os << ',';
    write_optional(os, r.res_y);
    os << ',';
    write_optional(os, r.lyapunov);
    os << '\n';
  }
}

Json number_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ConfigError("expected a number, got " + j.dump());
}

Json meta_to_json(const SmoothnessMeta& m) {
  Json j;
  j["L_x"] = number_to_json(m.L_x);
  j["L_y"] = number_to_json(m.L_y);
  j["rho"] = number_to_json(m.rho);
  j["ell"] = number_to_json(m.ell);
  j["sigma_x"] = number_to_json(m.sigma_x);
  j["sigma_y"] = number_to_json(m.sigma_y);
  j["mu"] = number_to_json(m.mu);
  j["theta"] = number_to_json(m.theta);
  j["D_Y"] = number_to_json(m.D_Y);
  j["sigma_estimated"] = m.sigma_estimated;
  return j;
}

SmoothnessMeta meta_from_json(const Json& j) {
  reject_unknown(j, {"L_x", "L_y", "rho", "ell", "sigma_x", "sigma_y", "mu", "theta", "D_Y", "sigma_estimated"},
                 "meta");
  SmoothnessMeta m;
  auto get = [&](const char* k, double& out) {
    if (j.contains(k)) out = number_from_json(j.at(k));
  };
  get("L_x", m.L_x);
  get("L_y", m.L_y);
  get("rho", m.rho);
  get("ell", m.ell);
  get("sigma_x", m.sigma_x);
  get("sigma_y", m.sigma_y);
  get("mu", m.mu);
  get("theta", m.theta);
  get("D_Y", m.D_Y);
  if (j.contains("sigma_estimated")) m.sigma_estimated = j.at("sigma_estimated").get<bool>();
  return m;
}

Json audit_to_json(const AuditRecord& a) {
  Json in;
  in["meta"] = meta_to_json(a.input.meta);
  in["epsilon"] = number_to_json(a.input.epsilon);
  if (const auto* fs = std::get_if<FiniteSum>(&a.input.regime))
    in["regime"] = Json{{"kind", "finite_sum"}, {"n", fs->n}};
  else
    in["regime"] = Json{{"kind", "online"}};
  in["delta_phi"] = number_to_json(a.input.delta_phi);
  Json ov = Json::object();
  const TunerOverrides& o = a.input.overrides;
  if (o.r) ov["r"] = *o.r;
  if (o.alpha_x) ov["alpha_x"] = *o.alpha_x;
  if (o.alpha_y) ov["alpha_y"] = *o.alpha_y;
  if (o.beta) ov["beta"] = *o.beta;
  if (o.K) ov["K"] = *o.K;
  if (o.T) ov["T"] = *o.T;
  if (o.M) ov["M"] = *o.M;
  if (o.B) ov["B"] = *o.B;
  in["overrides"] = ov;
  in["asymptotic_constant"] = number_to_json(a.input.asymptotic_constant);
  in["sample_cap"] = number_to_json(a.input.sample_cap);
  in["seed"] = a.input.seed;
  Json entries = Json::array();
  for (const auto& [k, v] : a.entries) entries.push_back(Json{{"name", k}, {"value", number_to_json(v)}});
  return Json{{"input", in}, {"entries", entries}};
}

AuditRecord audit_from_json(const Json& j) {
  reject_unknown(j, {"input", "entries"}, "audit");
  AuditRecord a;
  const Json& in = j.at("input");
  reject_unknown(in, {"meta", "epsilon", "regime", "delta_phi", "overrides", "asymptotic_constant",
                      "sample_cap", "seed"},
                 "audit input");
  a.input.meta = meta_from_json(in.at("meta"));
  a.input.epsilon = number_from_json(in.at("epsilon"));
  const Json& reg = in.at("regime");
  if (reg.at("kind") == "finite_sum")
    a.input.regime = FiniteSum{reg.at("n").get<std::size_t>()};
  else
    a.input.regime = Online{};
  a.input.delta_phi = number_from_json(in.at("delta_phi"));
  const Json& ov = in.at("overrides");
  TunerOverrides& o = a.input.overrides;
  if (ov.contains("r")) o.r = ov["r"].get<double>();
  if (ov.contains("alpha_x")) o.alpha_x = ov["alpha_x"].get<double>();
  if (ov.contains("alpha_y")) o.alpha_y = ov["alpha_y"].get<double>();
  if (ov.contains("beta")) o.beta = ov["beta"].get<double>();
  if (ov.contains("K")) o.K = ov["K"].get<std::size_t>();
  if (ov.contains("T")) o.T = ov["T"].get<std::size_t>();
  if (ov.contains("M")) o.M = ov["M"].get<std::size_t>();
  if (ov.contains("B")) o.B = ov["B"].get<std::size_t>();
  a.input.asymptotic_constant = number_from_json(in.at("asymptotic_constant"));
  a.input.sample_cap = number_from_json(in.at("sample_cap"));
  a.input.seed = in.at("seed").get<std::uint64_t>();
  for (const Json& e : j.at("entries")) a.add(e.at("name").get<std::string>(), number_from_json(e.at("value")));
  return a;
}

Json config_to_json(const SolverConfig& c) {
  Json j;
  j["K"] = c.K;
  j["T"] = c.T;
  j["M"] = c.M;
  j["B"] = c.B;
  j["alpha_x"] = number_to_json(c.alpha_x);
  j["alpha_y"] = number_to_json(c.alpha_y);
  j["beta"] = number_to_json(c.beta);
  j["r"] = number_to_json(c.r);
  j["seed"] = c.seed;
  j["trace_stride"] = c.trace_stride;
  return j;
}

}  // namespace sgda
