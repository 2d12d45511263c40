#include "beamsi/problem.hpp"

namespace beamsi {

double BeamProblem::step_for_bound(double modulus_bound) const {
  const SpatialGrid g = grid();
  ParameterField bound(Vec::Constant(nodes + 2, modulus_bound), Vec::Zero(nodes));
  return estimate_stable_step(BeamSystem(spec, build_operators(g), bound, load), solver.safety)
      .max_step;
}

BeamProblem BeamProblem::with_resolved_step(double modulus_bound) const {
  BeamProblem out = *this;
  if (!out.solver.step) out.solver.step = step_for_bound(modulus_bound);
  return out;
}

BeamProblem BeamProblem::extended(int multiplier) const {
  if (multiplier < 1) throw DomainError("extension multiplier must be >= 1");
  BeamProblem out = *this;
  out.solver.t_end = solver.t_end * multiplier;
  out.solver.n_save = solver.n_save * multiplier;
  return out;
}

Trajectory solve(const BeamProblem& problem, const ParameterField& fields) {
  return integrate(problem.system(fields), problem.solver).trajectory;
}

}  // namespace beamsi
