#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>

#include "sgda/solver.hpp"
#include "sgda/tuner.hpp"

namespace sgda {

using Json = nlohmann::ordered_json;

/// %.17g; round-trips every finite double.
std::string format_double(double v);

inline constexpr const char* kTraceHeader = "k,tau,dx_norm,dy_norm,xz_gap,samples,res_x,res_y,lyapunov";

/// Trace rows in the fixed column order; optional fields are left empty.
void write_trace_csv(std::ostream& os, const RunTrace& trace);

/// Non-finite numbers are written as the strings "inf", "-inf", "nan".
Json number_to_json(double v);
double number_from_json(const Json& j);

Json meta_to_json(const SmoothnessMeta& m);
/// Rejects unknown keys; missing keys keep their defaults.
SmoothnessMeta meta_from_json(const Json& j);

Json audit_to_json(const AuditRecord& a);
AuditRecord audit_from_json(const Json& j);

Json config_to_json(const SolverConfig& c);

}  // namespace sgda
