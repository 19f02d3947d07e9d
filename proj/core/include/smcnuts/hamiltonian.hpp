#ifndef SMCNUTS_HAMILTONIAN_HPP
#define SMCNUTS_HAMILTONIAN_HPP

#include "smcnuts/target.hpp"
#include "smcnuts/types.hpp"

namespace smcnuts {

/// Diagonal positive-definite mass matrix with cached inverse and square root.
class MassMatrix {
 public:
  explicit MassMatrix(Vector diag);
  static MassMatrix identity(Eigen::Index dim);

  Eigen::Index dim() const { return diag_.size(); }
  const Vector &diag() const { return diag_; }
  const Vector &inverse() const { return inverse_; }
  const Vector &sqrt() const { return sqrt_; }
  double log_det() const { return log_det_; }

 private:
  Vector diag_;
  Vector inverse_;
  Vector sqrt_;
  double log_det_;
};

struct PhasePoint {
  Vector x;  // position
  Vector p;  // momentum
};

// Hamiltonian error above which a trajectory is abandoned.
inline constexpr double kDivergenceThreshold = 1000.0;

/// A phase point together with the target quantities evaluated at x.
struct IntegratorState {
  PhasePoint point;
  Vector grad;         // grad log pi(x)
  double log_density;  // log pi(x)
};

struct LeapfrogOutcome {
  IntegratorState state;
  // Set when the new gradient or log-density is not finite. `state` then holds
  // the offending position.
  bool divergent = false;
};

IntegratorState make_integrator_state(const TargetModel &model, PhasePoint s);

/**
 * One leapfrog step: half kick, drift, half kick.
 *
 * `step` may be negative to integrate backwards in time. The gradient at the
 * start comes from `from.grad`, so only one new gradient evaluation is made.
 */
LeapfrogOutcome leapfrog(const TargetModel &model, const IntegratorState &from,
                         double step, const MassMatrix &mass);

/// Uncached single step; evaluates the gradient at both ends.
LeapfrogOutcome leapfrog_step(const TargetModel &model, const PhasePoint &s,
                              double h, const MassMatrix &mass);

/// Runs |steps| leapfrog steps with step size sign(steps) * h.
LeapfrogOutcome integrate(const TargetModel &model, const PhasePoint &s,
                          double h, int steps, const MassMatrix &mass);

/// Draw from N(0, M).
Vector sample_momentum(const MassMatrix &mass, Rng &rng);

/// log N(p; 0, M) with its normalizing constant.
double momentum_log_density(const Vector &p, const MassMatrix &mass);

/// 0.5 p^T M^{-1} p.
double kinetic_energy(const Vector &p, const MassMatrix &mass);

/// H(x, p) = -log pi(x) + 0.5 p^T M^{-1} p.
double hamiltonian(double log_density, const Vector &p, const MassMatrix &mass);

// Finite-difference Jacobian diagnostics. These are only used to verify that
// the position/momentum determinants cancel in the weight ratio; the sampler
// never evaluates them.

/// |det d x_n / d p_0| for the map p_0 -> x_n after `steps` signed steps.
double position_momentum_jacobian_determinant(const TargetModel &model,
                                              const PhasePoint &s, double h,
                                              const MassMatrix &mass,
                                              int steps = 1,
                                              double fd_step = 1e-6);

/// det of the full (x, p) -> (x', p') map after `steps` signed steps.
double phase_space_jacobian_determinant(const TargetModel &model,
                                        const PhasePoint &s, double h,
                                        const MassMatrix &mass, int steps = 1,
                                        double fd_step = 1e-6);

/// Single-step convenience: finite-difference estimate of h^D prod 1/m_d.
double jacobian_determinant_check(const TargetModel &model, const PhasePoint &s,
                                  double h, const MassMatrix &mass);

}  // namespace smcnuts

#endif  // SMCNUTS_HAMILTONIAN_HPP
