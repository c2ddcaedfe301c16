#ifndef HYPERFE_MECHANICS_HPP
#define HYPERFE_MECHANICS_HPP

#include <Eigen/Dense>

// Plane-strain tensor algebra and the two constitutive laws (linear-elastic
// fiber, nonlinear-elastic matrix) shared by the micro, surrogate and macro
// solvers. Voigt convention throughout: {xx, yy, xy} with engineering shear
// gamma_xy = 2*eps_xy.

namespace hyperfe {

// 3x3 consistent tangent d(sig_xx, sig_yy, tau_xy)/d(eps_xx, eps_yy, gamma_xy)
using Tangent3x3 = Eigen::Matrix3d;

enum class Phase { Fiber, Matrix };

struct Strain2D {
  double eps_xx = 0.0;
  double eps_yy = 0.0;
  double gamma_xy = 0.0;  // engineering shear, 2*eps_xy

  Eigen::Vector3d voigt() const { return {eps_xx, eps_yy, gamma_xy}; }
  static Strain2D from_voigt(const Eigen::Vector3d& v) {
    return {v[0], v[1], v[2]};
  }
};

struct Stress2D {
  double sig_xx = 0.0;
  double sig_yy = 0.0;
  double tau_xy = 0.0;
  double sig_zz = 0.0;  // plane strain produces nonzero out-of-plane stress

  Eigen::Vector3d voigt() const { return {sig_xx, sig_yy, tau_xy}; }
};

struct MaterialParams {
  double K_f = 4.35e4;      // fiber bulk modulus [N/mm^2]
  double G_f = 2.99e4;      // fiber shear modulus [N/mm^2]
  double K_m = 4.78e3;      // matrix bulk modulus [N/mm^2]
  double alpha_1 = 50.0;    // matrix shear parameter [N/mm^2]
  double alpha_2 = 0.06;    // matrix shear parameter [-]
  double dev_factor = 1.0;  // multiplier on the deviatoric stress term

  void validate() const;
};

// Components of the deviatoric strain tensor under plane strain (eps_zz = 0).
// The trace is divided by 3 over the full 3-D tensor, so dev_zz != 0 in
// general; eps_xy is the tensorial shear gamma_xy / 2.
struct StrainDeviator {
  double dev_xx = 0.0;
  double dev_yy = 0.0;
  double dev_zz = 0.0;
  double eps_xy = 0.0;
};

double trace_plane_strain(const Strain2D& eps);
StrainDeviator deviator_plane_strain(const Strain2D& eps);

// Frobenius norm of the full 3-D deviatoric strain tensor.
double dev_norm(const Strain2D& eps);

// Strain-dependent matrix shear modulus G_m = alpha_1 / (alpha_2 + ||eps^D||).
double matrix_shear_modulus(const Strain2D& eps, const MaterialParams& p);

Stress2D fiber_stress(const Strain2D& eps, const MaterialParams& p);
Stress2D matrix_stress(const Strain2D& eps, const MaterialParams& p);

Stress2D evaluate_stress(const Strain2D& eps, Phase phase,
                         const MaterialParams& p);

// Exact analytic d(stress)/d(strain) in Voigt form. Constant for the fiber
// law; for the matrix law includes the dG_m/d(eps) rank-one term, which is
// dropped below ||eps^D|| = kDevNormGuard where its limit is zero.
Tangent3x3 material_tangent(const Strain2D& eps, Phase phase,
                            const MaterialParams& p);

// Linear isotropic plane-strain tangent for fixed bulk/shear moduli; the
// fiber tangent and the zero-strain matrix limit are both of this form.
Tangent3x3 linear_tangent(double K, double G, double dev_factor);

inline constexpr double kDevNormGuard = 1e-12;

}  // namespace hyperfe

#endif
