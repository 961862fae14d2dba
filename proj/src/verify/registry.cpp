#include <chrono>
#include <functional>
#include <ostream>
#include <utility>

#include "common.hpp"
#include "sgda/errors.hpp"

namespace sgda::verify {

namespace {

struct Entry {
  std::string name;
  std::string title;
  std::function<SuiteResult()> fn;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> r = {
      {"kl-example", "KL example inequality on the grid", suite_kl_example},
      {"estimator", "estimator exactness", suite_estimator},
      {"estimator-error", "estimator error bounds", suite_estimator_error},
      {"convergence", "tuned run on the quadratic saddle", suite_convergence},
      {"smoothing-bias", "Moreau smoothing bias", suite_smoothing_bias},
      {"gradients", "smoothed gradients vs finite differences", suite_gradients},
      {"projections", "projections vs brute-force oracles", suite_projections},
      {"group-dro", "Group-DRO worst-group loss vs ERM", suite_group_dro},
      {"output-sampling", "uniform output sampling", suite_output_sampling},
      {"complexity-trend", "iterations-to-epsilon trend", suite_complexity_trend},
      {"tuner", "unit-constant schedule", suite_tuner},
      {"lyapunov", "Lyapunov lower bound and decrease", suite_lyapunov},
  };
  return r;
}

}  // namespace

bool SuiteResult::pass() const {
  if (checks.empty()) return false;
  for (const Check& c : checks)
    if (!c.pass) return false;
  return true;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const Entry& e : registry()) n.push_back(e.name);
    return n;
  }();
  return names;
}

bool has_suite(const std::string& name) {
  for (const Entry& e : registry())
    if (e.name == name) return true;
  return false;
}

SuiteResult run_suite(const std::string& name) {
  for (const Entry& e : registry()) {
    if (e.name != name) continue;
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult r;
    try {
      r = e.fn();
    } catch (const std::exception& ex) {
      r.checks.push_back(check("suite completed", false, std::string("exception: ") + ex.what()));
    }
    r.suite = e.name;
    r.title = e.title;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }
  throw ConfigError("unknown suite '" + name + "'");
}

void print_suite(std::ostream& os, const SuiteResult& r) {
  for (const Check& c : r.checks)
    os << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name << ": " << c.detail << '\n';
  os << (r.pass() ? "PASS " : "FAIL ") << r.suite << " (" << r.title << ") "
     << fmt("%.2f s", r.seconds) << '\n';
}

}  // namespace sgda::verify
