#include "smcnuts/hamiltonian.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace smcnuts {

MassMatrix::MassMatrix(Vector diag) : diag_(std::move(diag)) {
  if (diag_.size() == 0) throw std::invalid_argument("MassMatrix: empty");
  if (!diag_.allFinite() || (diag_.array() <= 0.0).any()) {
    throw std::invalid_argument("MassMatrix: entries must be positive");
  }
  inverse_ = diag_.cwiseInverse();
  sqrt_ = diag_.cwiseSqrt();
  log_det_ = diag_.array().log().sum();
}

MassMatrix MassMatrix::identity(Eigen::Index dim) {
  return MassMatrix(Vector::Ones(dim));
}

IntegratorState make_integrator_state(const TargetModel &model, PhasePoint s) {
  IntegratorState st{std::move(s), Vector(), 0.0};
  st.log_density = model.log_density_and_gradient(st.point.x, st.grad);
  return st;
}

LeapfrogOutcome leapfrog(const TargetModel &model, const IntegratorState &from,
                         double step, const MassMatrix &mass) {
  const double half = 0.5 * step;
  LeapfrogOutcome out;
  IntegratorState &to = out.state;
  // grad log pi = -dU/dx, hence the plus signs.
  to.point.p = from.point.p + half * from.grad;
  to.point.x = from.point.x +
               step * mass.inverse().cwiseProduct(to.point.p);
  if (!to.point.x.allFinite()) {
    out.divergent = true;
    to.log_density = -std::numeric_limits<double>::infinity();
    return out;
  }
  to.log_density = model.log_density_and_gradient(to.point.x, to.grad);
  if (!std::isfinite(to.log_density) || !to.grad.allFinite()) {
    out.divergent = true;
    return out;
  }
  to.point.p += half * to.grad;
  out.divergent = !to.point.p.allFinite();
  return out;
}

LeapfrogOutcome leapfrog_step(const TargetModel &model, const PhasePoint &s,
                              double h, const MassMatrix &mass) {
  if (!(h > 0.0)) throw std::invalid_argument("leapfrog_step: h must be > 0");
  return leapfrog(model, make_integrator_state(model, s), h, mass);
}

LeapfrogOutcome integrate(const TargetModel &model, const PhasePoint &s,
                          double h, int steps, const MassMatrix &mass) {
  const double step = steps < 0 ? -h : h;
  LeapfrogOutcome out{make_integrator_state(model, s), false};
  for (int i = 0; i < std::abs(steps) && !out.divergent; ++i) {
    out = leapfrog(model, out.state, step, mass);
  }
  return out;
}

Vector sample_momentum(const MassMatrix &mass, Rng &rng) {
  return mass.sqrt().cwiseProduct(standard_normal_vector(rng, mass.dim()));
}

double kinetic_energy(const Vector &p, const MassMatrix &mass) {
  return 0.5 * p.cwiseProduct(mass.inverse()).dot(p);
}

double momentum_log_density(const Vector &p, const MassMatrix &mass) {
  if (p.size() != mass.dim()) {
    throw std::invalid_argument("momentum_log_density: dimension mismatch");
  }
  return -0.5 * static_cast<double>(p.size()) *
             std::log(2.0 * std::numbers::pi) -
         0.5 * mass.log_det() - kinetic_energy(p, mass);
}

double hamiltonian(double log_density, const Vector &p, const MassMatrix &mass) {
  return -log_density + kinetic_energy(p, mass);
}

double position_momentum_jacobian_determinant(const TargetModel &model,
                                              const PhasePoint &s, double h,
                                              const MassMatrix &mass,
                                              int steps, double fd_step) {
  const Eigen::Index d = s.x.size();
  Matrix jac(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    PhasePoint plus = s, minus = s;
    plus.p[j] += fd_step;
    minus.p[j] -= fd_step;
    const Vector xp = integrate(model, plus, h, steps, mass).state.point.x;
    const Vector xm = integrate(model, minus, h, steps, mass).state.point.x;
    jac.col(j) = (xp - xm) / (2.0 * fd_step);
  }
  return std::abs(jac.determinant());
}

double phase_space_jacobian_determinant(const TargetModel &model,
                                        const PhasePoint &s, double h,
                                        const MassMatrix &mass, int steps,
                                        double fd_step) {
  const Eigen::Index d = s.x.size();
  Matrix jac(2 * d, 2 * d);
  auto map = [&](const PhasePoint &q) {
    const auto out = integrate(model, q, h, steps, mass);
    Vector z(2 * d);
    z << out.state.point.x, out.state.point.p;
    return z;
  };
  for (Eigen::Index j = 0; j < 2 * d; ++j) {
    PhasePoint plus = s, minus = s;
    if (j < d) {
      plus.x[j] += fd_step;
      minus.x[j] -= fd_step;
    } else {
      plus.p[j - d] += fd_step;
      minus.p[j - d] -= fd_step;
    }
    jac.col(j) = (map(plus) - map(minus)) / (2.0 * fd_step);
  }
  return jac.determinant();
}

double jacobian_determinant_check(const TargetModel &model, const PhasePoint &s,
                                  double h, const MassMatrix &mass) {
  return position_momentum_jacobian_determinant(model, s, h, mass, 1);
}

}  // namespace smcnuts
