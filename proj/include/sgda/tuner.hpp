#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sgda/core.hpp"
#include "sgda/smoothing.hpp"
#include "sgda/solver.hpp"

namespace sgda {

struct TunerOverrides {
  std::optional<double> r, alpha_x, alpha_y, beta;
  std::optional<std::size_t> K, T, M, B;
};

struct TunerInput {
  SmoothnessMeta meta;
  double epsilon = 0.0;
  Regime regime = Online{};
  double delta_phi = 1.0;  // estimate of Phi_r(start) - lower bound of F
  TunerOverrides overrides;
  double asymptotic_constant = 1.0;
  double sample_cap = 1e9;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Every formula input and output in evaluation order.
struct AuditRecord {
  TunerInput input;
  std::vector<std::pair<std::string, double>> entries;

  void add(std::string name, double value) { entries.emplace_back(std::move(name), value); }
  std::optional<double> get(const std::string& name) const;
};

struct Budget {
  std::size_t K, T, M, B;
  double kt_target;
  double b_raw;  // unrounded online batch expression, 0 for finite-sum
};

struct TunedSchedule {
  SolverConfig config;
  AuditRecord audit;
};

double compute_r(const SmoothnessMeta& meta);
/// Upper end of the admissible interval for alpha_x.
double compute_alpha_x(const SmoothnessMeta& meta, double r);
/// Lower end 24 (L_y + 1) / (r - rho)^2 of the admissible interval.
double alpha_x_lower_bound(const SmoothnessMeta& meta, double r);
/// Throws InfeasibleScheduleError unless r >= max(2 rho, L_y + rho) and
/// lower bound <= alpha_x <= upper bound.
void check_alpha_x_interval(const SmoothnessMeta& meta, double r, double alpha_x);
double compute_alpha_y(const SmoothnessMeta& meta, double alpha_x);
/// Dual error-bound constant varpi.
double compute_varpi(const SmoothnessMeta& meta, double r, double alpha_y);
double compute_beta(const SmoothnessMeta& meta, double r, double alpha_x, double alpha_y,
                    double epsilon, double asymptotic_constant = 1.0);

/// Iteration count target KT before rounding.
double kt_target_low(const SmoothnessMeta& meta, double epsilon, double delta_phi);
double kt_target_high(const SmoothnessMeta& meta, double epsilon, double delta_phi);
/// Online batch expression before rounding.
double online_batch_low(const SmoothnessMeta& meta, double epsilon);
double online_batch_high(const SmoothnessMeta& meta, double epsilon);

Budget compute_budget(const TunerInput& input, double r, double alpha_x);

TunedSchedule tune_smooth(const TunerInput& input);

struct LambdaChoice {
  std::optional<double> given;  // empty: automatic
};

struct NonsmoothSchedule {
  double lambda;
  SmoothnessMeta smoothed_meta;
  TunedSchedule schedule;
};

/// Picks lambda, substitutes the smoothed constants into input.meta, then tunes.
NonsmoothSchedule tune_nonsmooth(const TunerInput& input, const CompositeConstants& constants,
                                 LambdaChoice choice = {});

/// Tuner input from a problem: copies the metadata and rejects an unbounded Y.
TunerInput tuner_input_for(const ProblemInstance& problem, double epsilon, double delta_phi);

}  // namespace sgda
