#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sgda/core.hpp"

namespace sgda {

/// SPIDER gradient estimates and the point they were last advanced to.
struct EstimatorState {
  Vector gx, gy;
  Vector prev_x, prev_y;
  std::size_t tau = 0;
  std::size_t epoch = 0;
  /// Ids drawn by the last anchor/recurse call (empty for a full pass).
  std::vector<SampleId> last_batch;
  /// Number of samples consumed by the last call.
  std::size_t batch_samples = 0;
};

/// Epoch anchor. Finite-sum problems use every sample in index order (B is
/// ignored); online problems average B fresh draws keyed by `key`.
EstimatorState anchor(const ProblemInstance& problem, VecView x, VecView y, std::size_t B,
                      const BatchKey& key);

/// Recursive step G <- mean_i[grad f(new; xi_i) - grad f(prev; xi_i)] + G, with
/// one batch of M draws shared by both blocks. On a finite-sum problem with
/// M >= N the batch is the full index set, which makes the update telescope.
EstimatorState recurse(EstimatorState state, const ProblemInstance& problem, VecView x_new,
                       VecView y_new, std::size_t M, const BatchKey& key);

struct EstimatorMseRow {
  double mse_x, mse_y;
  double se_x, se_y;        // standard errors of the Monte-Carlo means
  double bound_x, bound_y;  // error bound right-hand sides
};

/// Monte-Carlo error of the estimator along a fixed trajectory, against the
/// bounds  E|Gy - grad_y F|^2 <= (L_y^2/M)(S_x + S_y)  and
///         E|Gx - grad_x F|^2 <= (2 L_x^2/M) S_x + (2 L_y^2/M) S_y,
/// where S_x, S_y are the running sums of squared steps. Finite-sum only, so
/// the anchor term vanishes.
std::vector<EstimatorMseRow> estimator_mse(const ProblemInstance& problem,
                                           const std::vector<std::pair<Vector, Vector>>& trajectory,
                                           std::size_t M, std::size_t B, std::size_t trials,
                                           std::uint64_t seed);

}  // namespace sgda
