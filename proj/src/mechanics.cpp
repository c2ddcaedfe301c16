#include "hyperfe/mechanics.hpp"

#include <cmath>
#include <stdexcept>

namespace hyperfe {

void MaterialParams::validate() const {
  if (!(K_f > 0.0) || !(G_f > 0.0) || !(K_m > 0.0) || !(alpha_1 > 0.0))
    throw std::invalid_argument("MaterialParams: all moduli must be positive");
  if (!(alpha_2 > 0.0))
    throw std::invalid_argument("MaterialParams: alpha_2 must be positive");
}

double trace_plane_strain(const Strain2D& eps) {
  return eps.eps_xx + eps.eps_yy;
}

StrainDeviator deviator_plane_strain(const Strain2D& eps) {
  const double tr3 = trace_plane_strain(eps) / 3.0;
  StrainDeviator d;
  d.dev_xx = eps.eps_xx - tr3;
  d.dev_yy = eps.eps_yy - tr3;
  d.dev_zz = -tr3;  // eps_zz = 0 under plane strain
  d.eps_xy = 0.5 * eps.gamma_xy;
  return d;
}

double dev_norm(const Strain2D& eps) {
  const StrainDeviator d = deviator_plane_strain(eps);
  return std::sqrt(d.dev_xx * d.dev_xx + d.dev_yy * d.dev_yy +
                   d.dev_zz * d.dev_zz + 2.0 * d.eps_xy * d.eps_xy);
}

double matrix_shear_modulus(const Strain2D& eps, const MaterialParams& p) {
  return p.alpha_1 / (p.alpha_2 + dev_norm(eps));
}

namespace {

Stress2D isotropic_stress(const Strain2D& eps, double K, double G,
                          double dev_factor) {
  const double vol = K * trace_plane_strain(eps);
  const StrainDeviator d = deviator_plane_strain(eps);
  Stress2D s;
  s.sig_xx = vol + dev_factor * G * d.dev_xx;
  s.sig_yy = vol + dev_factor * G * d.dev_yy;
  s.sig_zz = vol + dev_factor * G * d.dev_zz;
  s.tau_xy = dev_factor * G * d.eps_xy;
  return s;
}

}  // namespace

Stress2D fiber_stress(const Strain2D& eps, const MaterialParams& p) {
  return isotropic_stress(eps, p.K_f, p.G_f, p.dev_factor);
}

Stress2D matrix_stress(const Strain2D& eps, const MaterialParams& p) {
  return isotropic_stress(eps, p.K_m, matrix_shear_modulus(eps, p),
                          p.dev_factor);
}

Stress2D evaluate_stress(const Strain2D& eps, Phase phase,
                         const MaterialParams& p) {
  return phase == Phase::Fiber ? fiber_stress(eps, p) : matrix_stress(eps, p);
}

Tangent3x3 linear_tangent(double K, double G, double dev_factor) {
  const double fg = dev_factor * G;
  Tangent3x3 c;
  c << K + 2.0 * fg / 3.0, K - fg / 3.0, 0.0,
       K - fg / 3.0, K + 2.0 * fg / 3.0, 0.0,
       0.0, 0.0, 0.5 * fg;
  return c;
}

Tangent3x3 material_tangent(const Strain2D& eps, Phase phase,
                            const MaterialParams& p) {
  if (phase == Phase::Fiber) return linear_tangent(p.K_f, p.G_f, p.dev_factor);

  const double n = dev_norm(eps);
  const double g = p.alpha_1 / (p.alpha_2 + n);
  Tangent3x3 c = linear_tangent(p.K_m, g, p.dev_factor);
  if (n < kDevNormGuard) return c;  // G' * eps^D -> 0 in the limit

  // d||eps^D||/d(eps_xx, eps_yy, gamma) = (dev_xx, dev_yy, eps_xy) / n,
  // so the dG_m contribution is a symmetric rank-one update.
  const StrainDeviator d = deviator_plane_strain(eps);
  const double gprime = -p.alpha_1 / ((p.alpha_2 + n) * (p.alpha_2 + n));
  const Eigen::Vector3d v(d.dev_xx, d.dev_yy, d.eps_xy);
  c += (p.dev_factor * gprime / n) * (v * v.transpose());
  return c;
}

}  // namespace hyperfe
