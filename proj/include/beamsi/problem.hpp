#pragma once

// The full forward problem: beam, grid, load, solver settings and the
// closed-form ground-truth parameter profiles.

#include "beamsi/ode_solver.hpp"

namespace beamsi {

struct BeamProblem {
  BeamSpec spec = BeamSpec::aluminum_strip();
  int nodes = 16;
  LoadModel load;
  SolverConfig solver;
  GroundTruthProfile truth;

  SpatialGrid grid() const { return {spec.length(), nodes}; }
  SpatialOperators operators() const { return build_operators(grid()); }
  ParameterField truth_fields() const { return ground_truth_fields(spec, grid(), truth); }
  BeamSystem system(const ParameterField& fields) const {
    return {spec, operators(), fields, load};
  }

  /// Stable internal step for any modulus field bounded by modulus_bound,
  /// estimated on the constant field P = modulus_bound.
  double step_for_bound(double modulus_bound) const;

  /// Copy with solver.step resolved: kept if already set, otherwise
  /// step_for_bound(modulus_bound).
  BeamProblem with_resolved_step(double modulus_bound) const;

  /// Same problem over a longer window with proportionally more saves.
  BeamProblem extended(int multiplier) const;
};

/// Solve the forward problem for the given fields (no tape).
Trajectory solve(const BeamProblem& problem, const ParameterField& fields);

}  // namespace beamsi
