#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hardylab/forms.hpp"

namespace hardylab {

using Point3 = std::array<double, 3>;
using Complex = std::complex<double>;

// f(xi, y, z) of the ground-state correction, together with d f / d z.
struct AnsatzFunction {
  enum class Label { paper_choice, custom };

  Label label = Label::custom;
  std::function<double(double beta, double xi, double y, double z)> f;
  std::function<double(double beta, double xi, double y, double z)> dfdz;

  // f = (1/2) |beta| / z^3 (y0^2 - y^2), y0 = -z^2 xi / beta.
  static AnsatzFunction paper_choice();
  static AnsatzFunction zero();
};

// The five-term potential exactly as printed.
double vf_potential(const AnsatzFunction& ansatz, double beta, double xi, double y, double z);

// The potential produced by the integration by parts, which also carries
// -f^2: V_f - f^2.
double vf_potential_corrected(const AnsatzFunction& ansatz, double beta, double xi, double y,
                              double z);

// Closed form |beta| / z^4 (y^2 + y0^2).
double vf_closed_form(double beta, double xi, double y, double z);

/// psi(q) = (a0 + a1 . d) exp(-sum d_k^2 / (2 w_k^2)) exp(i P(d)), d = q - center,
/// P(d) = b . d + d^T Q d / 2. Coordinates are (xi, y, z) for the
/// substitution identities and (x, y, z) elsewhere.
struct TestFunction {
  Point3 center{0.0, 0.0, 2.0};
  Point3 width{0.5, 0.5, 0.2};
  Point3 phase_linear{0.0, 0.0, 0.0};
  std::array<Point3, 3> phase_quadratic{};  // symmetric
  Complex amp0{1.0, 0.0};
  std::array<Complex, 3> amp1{};

  Complex value(const Point3& q) const;
  std::array<Complex, 3> gradient(const Point3& q) const;

  static TestFunction gaussian(const Point3& center, const Point3& width);
  // Random phase polynomial and complex linear amplitude.
  static TestFunction random(std::uint64_t seed, const Point3& center, const Point3& width);
};

/// Tensor grid on a box. Axis a has n[a] nodes x = mid + half (s + k s^3) / (1 + k)
/// for uniform s in [-1, 1], k = cluster[a] >= 0; k > 0 packs nodes
/// towards the middle. Trapezoid weights in x.
struct BoxGrid {
  Point3 lo{-1.0, -1.0, 0.5};
  Point3 hi{1.0, 1.0, 3.5};
  std::array<int, 3> n{32, 32, 64};
  Point3 cluster{0.0, 0.0, 0.0};

  std::vector<double> nodes(int axis) const;
  std::vector<double> weights(int axis) const;
  BoxGrid refined(int factor) const;  // every n[a] - 1 multiplied by factor
};

// Throws std::invalid_argument naming the face when |psi| or |grad psi|
// exceeds tol on the boundary of the box.
void check_support(const TestFunction& psi, const BoxGrid& grid, double tol = 1e-12);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // |lhs - rhs| / (|lhs| + |rhs| + eps)
};

double relative_residual(double lhs, double rhs);

enum class SubstitutionStage { form2, form3, form4 };
enum class Convention { printed, corrected };

std::string to_string(SubstitutionStage stage);
SubstitutionStage substitution_stage_from_string(const std::string& name);
std::string to_string(Convention convention);

// Both sides of the stated identity by quadrature in (xi, y, z). The
// convention selects V_f (printed) or V_f - f^2 (corrected) in form4.
IdentityCheck substitution_identity_residual(SubstitutionStage stage, const TestFunction& psi,
                                             const ConfiningSpec& spec, const BoxGrid& grid,
                                             const AnsatzFunction* ansatz = nullptr,
                                             Convention convention = Convention::printed);

/// Pi_j = -i d_j + (A_beta)_j for A_beta = beta (y / z^2, 0, 0), j in {1, 2, 3}.
class MagneticGradient {
 public:
  explicit MagneticGradient(double beta) : beta_(beta) {}

  double potential(int j, const Point3& q) const;
  Complex apply(int j, const TestFunction& psi, const Point3& q) const;
  // B_jk = d_j A_k - d_k A_j.
  double field(int j, int k, const Point3& q) const;

 private:
  double beta_;
};

// ||Pi_j psi||^2 + ||Pi_k psi||^2 against ||(Pi_j + s i Pi_k) psi||^2 + c s <psi, B_jk psi>
// with s = sign (+1 / -1), c = +1 as printed and c = -1 corrected.
IdentityCheck commutator_identity_residual(const TestFunction& psi, int j, int k, int sign,
                                           double beta, const BoxGrid& grid,
                                           Convention convention = Convention::printed);

struct MagneticPotential {
  enum class Kind { aharonov_bohm, confining };
  Kind kind = Kind::confining;
  double strength = 0.0;  // alpha or beta

  Point3 at(const Point3& q) const;
};

// ||(grad + iA) psi||^2 - ||grad |psi| ||^2 on the box, coordinates (x, y, z).
double diamagnetic_margin(const TestFunction& psi, const MagneticPotential& potential,
                          const BoxGrid& grid);

// ||(-Delta_beta - k^2) psi_n|| / ||psi_n|| for psi_n = F(|X - c|^2 / R^2) e^{ikz},
// F(u) = exp(-1 / (1 - u)), c = (0, 0, n), R = n / 4.
double weyl_residual(double beta, double k, double n, int nodes = 64);

}  // namespace hardylab
