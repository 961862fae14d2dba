#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "sgda/io.hpp"

using namespace sgda;

TEST_CASE("doubles round-trip through text") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 5e-324}) CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("trace CSV layout") {
  RunTrace t;
  TraceRow a;
  a.k = 1;
  a.tau = 2;
  a.dx_norm = 0.5;
  a.dy_norm = 0.25;
  a.xz_gap = 0.125;
  a.samples = 42;
  TraceRow b = a;
  b.res_x = 0.75;
  b.res_y = 1.5;
  b.lyapunov = -2.0;
  t.rows = {a, b};
  std::ostringstream os;
  write_trace_csv(os, t);
  CHECK(os.str() ==
        "k,tau,dx_norm,dy_norm,xz_gap,samples,res_x,res_y,lyapunov\n"
        "1,2,0.5,0.25,0.125,42,,,\n"
        "1,2,0.5,0.25,0.125,42,0.75,1.5,-2\n");
}

TEST_CASE("non-finite numbers in JSON") {
  CHECK(number_to_json(INFINITY) == "inf");
  CHECK(number_to_json(-INFINITY) == "-inf");
  CHECK(number_to_json(NAN) == "nan");
  CHECK(std::isinf(number_from_json(Json("inf"))));
  CHECK(std::isnan(number_from_json(Json("nan"))));
  CHECK(number_from_json(Json(0.25)) == 0.25);
  CHECK_THROWS_AS(number_from_json(Json("x")), ConfigError);
}

TEST_CASE("metadata and audit round trips") {
  SmoothnessMeta m;
  m.L_x = 3;
  m.L_y = 0.5;
  m.rho = 0.1;
  m.mu = 0.2;
  m.theta = 0.5;
  m.D_Y = 2;
  const SmoothnessMeta back = meta_from_json(meta_to_json(m));
  CHECK(back.L_x == 3);
  CHECK(back.mu == 0.2);
  CHECK(back.D_Y == 2);
  Json bad = meta_to_json(m);
  bad["L_z"] = 1;
  CHECK_THROWS_AS(meta_from_json(bad), ConfigError);

  TunerInput in;
  in.meta = m;
  in.meta.rho = 0.0;
  in.epsilon = 0.1;
  in.regime = FiniteSum{16};
  in.overrides.K = 7;
  const TunedSchedule s = tune_smooth(in);
  const Json j = audit_to_json(s.audit);
  const AuditRecord a = audit_from_json(Json::parse(j.dump()));
  REQUIRE(a.entries.size() == s.audit.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(a.entries[i].first == s.audit.entries[i].first);
    const double u = a.entries[i].second, v = s.audit.entries[i].second;
    CHECK((u == v || (std::isinf(u) && std::isinf(v))));
  }
  CHECK(a.input.overrides.K == std::optional<std::size_t>(7));
  CHECK(std::get<FiniteSum>(a.input.regime).n == 16);
  // the recorded input reproduces the schedule
  const TunedSchedule again = tune_smooth(a.input);
  CHECK(again.config.alpha_x == s.config.alpha_x);
  CHECK(again.config.beta == s.config.beta);
  CHECK(again.config.K == 7);
}

TEST_CASE("solver config as JSON") {
  SolverConfig c;
  c.K = 3;
  c.alpha_x = 0.5;
  const Json j = config_to_json(c);
  CHECK(j["K"] == 3);
  CHECK(j["alpha_x"] == 0.5);
}
