#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "wvf/table.hpp"
#include "wvf/world.hpp"

namespace wvf {

struct ViOptions {
  double discount = 1.0;
  double tolerance = 1e-9;
  /// Sweep cap; defaults to default_sweep_cap().
  std::optional<long> max_sweeps;
};

/// Value iteration hit its sweep cap. Carries the last max-norm change.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, long sweeps)
      : std::runtime_error(what), residual_(residual), sweeps_(sweeps) {}
  double residual() const { return residual_; }
  long sweeps() const { return sweeps_; }

 private:
  double residual_;
  long sweeps_;
};

/// 10 * |S| sweeps, extended by the number of sweeps a zero-initialised
/// iteration needs to descend to the lowest reachable value (penalty plus a
/// full-length walk) at the smallest step cost, and by the geometric horizon
/// when discount < 1.
long default_sweep_cap(const Task& task, const ViOptions& options);

/// Goal-conditioned value iteration under the extended reward. Each goal
/// slice is solved independently; values start at 0.
WVFTable vi_wvf(const Task& task, const std::vector<StateId>& goals,
                const ViOptions& options = {});

/// Plain task value iteration under R_M.
QTable vi_task(const Task& task, const ViOptions& options = {});

/// Max-norm of (T Q̄ - Q̄) for the goal-conditioned Bellman optimality
/// operator.
double bellman_residual(const Task& task, const WVFTable& table,
                        double discount = 1.0);
double bellman_residual(const Task& task, const QTable& table,
                        double discount = 1.0);

/// States reachable from `s` through non-absorbing transitions, `s`
/// included. Sorted ascending.
std::vector<StateId> reachable_states(const WorldSpec& world, StateId s);

/// Members of `goals` reachable from `s` that have a terminal action.
std::vector<StateId> reachable_goals(const WorldSpec& world, StateId s,
                                     const std::vector<StateId>& goals);
/// All terminal states reachable from `s`.
std::vector<StateId> reachable_goals(const WorldSpec& world, StateId s);

}  // namespace wvf
