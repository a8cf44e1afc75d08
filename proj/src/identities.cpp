#include "hardylab/identities.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace hardylab {

namespace {

void check_potential_args(double beta, double z) {
  if (z == 0.0) throw std::invalid_argument("V_f is undefined on the plane z = 0");
  if (beta == 0.0) throw std::invalid_argument("V_f needs beta != 0");
}

double y0_squared(double beta, double xi, double z) {
  const double y0 = -z * z * xi / beta;
  return y0 * y0;
}

// |beta| / z^3 (y^2 - y0^2): d_z log eta.
double eta_log_derivative(double beta, double xi, double y, double z) {
  return std::abs(beta) / (z * z * z) * (y * y - y0_squared(beta, xi, z));
}

constexpr Complex I{0.0, 1.0};

template <class Visit>
void for_each_node(const BoxGrid& grid, Visit&& visit) {
  const auto x0 = grid.nodes(0), x1 = grid.nodes(1), x2 = grid.nodes(2);
  const auto w0 = grid.weights(0), w1 = grid.weights(1), w2 = grid.weights(2);
  for (std::size_t k = 0; k < x2.size(); ++k) {
    for (std::size_t j = 0; j < x1.size(); ++j) {
      for (std::size_t i = 0; i < x0.size(); ++i) {
        visit(Point3{x0[i], x1[j], x2[k]}, w0[i] * w1[j] * w2[k]);
      }
    }
  }
}

void check_index(int j) {
  if (j < 1 || j > 3) throw std::invalid_argument("magnetic gradient component must be 1, 2 or 3");
}

}  // namespace

AnsatzFunction AnsatzFunction::paper_choice() {
  AnsatzFunction a;
  a.label = Label::paper_choice;
  // y0^2 = z^4 xi^2 / beta^2, so f = |beta|/2 (z xi^2/beta^2 - y^2/z^3).
  a.f = [](double beta, double xi, double y, double z) {
    return 0.5 * (std::abs(beta) / (z * z * z)) * (y0_squared(beta, xi, z) - y * y);
  };
  a.dfdz = [](double beta, double xi, double y, double z) {
    const double z4 = z * z * z * z;
    return 0.5 * std::abs(beta) * (xi * xi / (beta * beta) + 3.0 * y * y / z4);
  };
  return a;
}

AnsatzFunction AnsatzFunction::zero() {
  AnsatzFunction a;
  a.label = Label::custom;
  a.f = [](double, double, double, double) { return 0.0; };
  a.dfdz = [](double, double, double, double) { return 0.0; };
  return a;
}

double vf_potential(const AnsatzFunction& ansatz, double beta, double xi, double y, double z) {
  check_potential_args(beta, z);
  const double b = std::abs(beta);
  const double f = ansatz.f(beta, xi, y, z);
  const double fz = ansatz.dfdz(beta, xi, y, z);
  const double y0s = y0_squared(beta, xi, z);
  const double diff = y * y - y0s;
  const double z3 = z * z * z;
  const double z4 = z3 * z;
  const double c = b / z3;
  // -2 c diff f - c^2 diff^2, grouped so the two large terms meet first.
  const double cross = -c * diff * (2.0 * f + c * diff);
  return -fz - f / z + cross + 2.0 * b / z4 * (y * y + y0s);
}

double vf_potential_corrected(const AnsatzFunction& ansatz, double beta, double xi, double y,
                              double z) {
  const double f = ansatz.f(beta, xi, y, z);
  return vf_potential(ansatz, beta, xi, y, z) - f * f;
}

double vf_closed_form(double beta, double xi, double y, double z) {
  check_potential_args(beta, z);
  return std::abs(beta) / (z * z * z * z) * (y * y + y0_squared(beta, xi, z));
}

// ---- Test functions -------------------------------------------------------

Complex TestFunction::value(const Point3& q) const {
  double g = 0.0, phase = 0.0;
  Complex a = amp0;
  Point3 d{};
  for (int k = 0; k < 3; ++k) d[k] = q[k] - center[k];
  for (int k = 0; k < 3; ++k) {
    g += d[k] * d[k] / (2.0 * width[k] * width[k]);
    phase += phase_linear[k] * d[k];
    for (int l = 0; l < 3; ++l) phase += 0.5 * phase_quadratic[k][l] * d[k] * d[l];
    a += amp1[k] * d[k];
  }
  return a * std::exp(-g) * std::exp(I * phase);
}

std::array<Complex, 3> TestFunction::gradient(const Point3& q) const {
  double g = 0.0, phase = 0.0;
  Complex a = amp0;
  Point3 d{};
  for (int k = 0; k < 3; ++k) d[k] = q[k] - center[k];
  Point3 dphase{};
  for (int k = 0; k < 3; ++k) {
    g += d[k] * d[k] / (2.0 * width[k] * width[k]);
    phase += phase_linear[k] * d[k];
    dphase[k] = phase_linear[k];
    for (int l = 0; l < 3; ++l) {
      phase += 0.5 * phase_quadratic[k][l] * d[k] * d[l];
      dphase[k] += 0.5 * (phase_quadratic[k][l] + phase_quadratic[l][k]) * d[l];
    }
    a += amp1[k] * d[k];
  }
  const Complex e = std::exp(-g) * std::exp(I * phase);
  std::array<Complex, 3> grad{};
  for (int k = 0; k < 3; ++k) {
    grad[k] = e * (amp1[k] + a * (-d[k] / (width[k] * width[k]) + I * dphase[k]));
  }
  return grad;
}

TestFunction TestFunction::gaussian(const Point3& center, const Point3& width) {
  TestFunction t;
  t.center = center;
  t.width = width;
  return t;
}

TestFunction TestFunction::random(std::uint64_t seed, const Point3& center, const Point3& width) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  TestFunction t = gaussian(center, width);
  for (int k = 0; k < 3; ++k) {
    t.phase_linear[k] = 2.0 * uni(rng) / width[k];
    for (int l = k; l < 3; ++l) {
      const double q = uni(rng) / (width[k] * width[l]);
      t.phase_quadratic[k][l] = q;
      t.phase_quadratic[l][k] = q;
    }
    t.amp1[k] = Complex(uni(rng), uni(rng)) / width[k];
  }
  t.amp0 = Complex(1.0 + 0.5 * uni(rng), 0.5 * uni(rng));
  return t;
}

// ---- Box grids ------------------------------------------------------------

std::vector<double> BoxGrid::nodes(int axis) const {
  const int m = n[axis];
  if (m < 2) throw std::invalid_argument("box grid needs at least two nodes per axis");
  if (!(hi[axis] > lo[axis])) throw std::invalid_argument("box grid needs hi > lo");
  const double k = cluster[axis];
  if (k < 0.0) throw std::invalid_argument("box grid clustering must be >= 0");
  const double mid = 0.5 * (lo[axis] + hi[axis]);
  const double half = 0.5 * (hi[axis] - lo[axis]);
  std::vector<double> x(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double s = -1.0 + 2.0 * i / (m - 1);
    x[i] = mid + half * (s + k * s * s * s) / (1.0 + k);
  }
  x.front() = lo[axis];
  x.back() = hi[axis];
  return x;
}

std::vector<double> BoxGrid::weights(int axis) const {
  const auto x = nodes(axis);
  const std::size_t m = x.size();
  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double left = i == 0 ? x[0] : 0.5 * (x[i - 1] + x[i]);
    const double right = i + 1 == m ? x[m - 1] : 0.5 * (x[i] + x[i + 1]);
    w[i] = right - left;
  }
  return w;
}

BoxGrid BoxGrid::refined(int factor) const {
  BoxGrid g = *this;
  for (int a = 0; a < 3; ++a) g.n[a] = (n[a] - 1) * factor + 1;
  return g;
}

void check_support(const TestFunction& psi, const BoxGrid& grid, double tol) {
  const double scale = std::max(1.0, std::abs(psi.amp0));
  const std::array<std::vector<double>, 3> x{grid.nodes(0), grid.nodes(1), grid.nodes(2)};
  static const char* names[3] = {"first", "second", "third"};
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    for (double face : {grid.lo[a], grid.hi[a]}) {
      for (double u : x[b]) {
        for (double v : x[c]) {
          Point3 q{};
          q[a] = face;
          q[b] = u;
          q[c] = v;
          double size = std::abs(psi.value(q));
          for (const auto& g : psi.gradient(q)) size = std::max(size, std::abs(g));
          if (size > tol * scale) {
            throw std::invalid_argument(std::string("support violation: test function does not vanish on the ") +
                                        (face == grid.lo[a] ? "lower " : "upper ") + names[a] +
                                        "-axis face");
          }
        }
      }
    }
  }
}

double relative_residual(double lhs, double rhs) {
  return std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + std::numeric_limits<double>::min());
}

std::string to_string(SubstitutionStage stage) {
  switch (stage) {
    case SubstitutionStage::form2: return "form2";
    case SubstitutionStage::form3: return "form3";
    case SubstitutionStage::form4: return "form4";
  }
  return "unknown";
}

SubstitutionStage substitution_stage_from_string(const std::string& name) {
  for (auto s : {SubstitutionStage::form2, SubstitutionStage::form3, SubstitutionStage::form4}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown substitution stage '" + name + "'");
}

std::string to_string(Convention convention) {
  return convention == Convention::printed ? "printed" : "corrected";
}

// ---- Substitution chain ---------------------------------------------------

IdentityCheck substitution_identity_residual(SubstitutionStage stage, const TestFunction& psi,
                                             const ConfiningSpec& spec, const BoxGrid& grid,
                                             const AnsatzFunction* ansatz, Convention convention) {
  if (!(grid.lo[2] > 0.0)) throw std::invalid_argument("support violation: the z range must stay above 0");
  if (stage != SubstitutionStage::form2 && spec.beta == 0.0) {
    throw std::invalid_argument("form3 and form4 need beta != 0");
  }
  if (stage == SubstitutionStage::form4 && ansatz == nullptr) {
    throw std::invalid_argument("form4 needs an ansatz function f");
  }
  check_support(psi, grid);
  const double beta = spec.beta;
  const double b = std::abs(beta);
  const double shift = stage == SubstitutionStage::form2 ? 0.25 : 0.25 + b;
  double q_form = 0.0, hardy = 0.0, rhs = 0.0;
  for_each_node(grid, [&](const Point3& p, double w) {
    const double xi = p[0], y = p[1], z = p[2];
    const Complex v = psi.value(p);
    const auto g = psi.gradient(p);
    const double A = xi + beta * y / (z * z);
    q_form += w * (A * A * std::norm(v) + std::norm(g[1]) + std::norm(g[2]));
    hardy += w * std::norm(v) / (z * z);

    // psi = sqrt(z) phi
    const double sz = std::sqrt(z);
    const Complex phi = v / sz;
    const Complex phi_y = g[1] / sz;
    const Complex phi_z = g[2] / sz - 0.5 * v / (z * sz);
    if (stage == SubstitutionStage::form2) {
      rhs += w * z * (A * A * std::norm(phi) + std::norm(phi_y) + std::norm(phi_z));
      return;
    }
    // eta d_y(phi / eta) = phi_y + |beta| (y - y0) / z^2 phi
    const double y0 = -z * z * xi / beta;
    const Complex vphi_y = phi_y + b * (y - y0) / (z * z) * phi;
    if (stage == SubstitutionStage::form3) {
      rhs += w * z * (std::norm(vphi_y) + std::norm(phi_z));
      return;
    }
    // eta (d_z - f)(phi / eta) = phi_z - (g + f) phi
    const double gz = eta_log_derivative(beta, xi, y, z);
    const double f = ansatz->f(beta, xi, y, z);
    const double V = convention == Convention::printed ? vf_potential(*ansatz, beta, xi, y, z)
                                                       : vf_potential_corrected(*ansatz, beta, xi, y, z);
    rhs += w * z * (std::norm(vphi_y) + std::norm(phi_z - (gz + f) * phi) + V * std::norm(phi));
  });
  IdentityCheck out;
  out.lhs = q_form - shift * hardy;
  out.rhs = rhs;
  out.residual = relative_residual(out.lhs, out.rhs);
  return out;
}

// ---- Magnetic gradient ----------------------------------------------------

double MagneticGradient::potential(int j, const Point3& q) const {
  check_index(j);
  return j == 1 ? beta_ * q[1] / (q[2] * q[2]) : 0.0;
}

Complex MagneticGradient::apply(int j, const TestFunction& psi, const Point3& q) const {
  check_index(j);
  return -I * psi.gradient(q)[j - 1] + potential(j, q) * psi.value(q);
}

double MagneticGradient::field(int j, int k, const Point3& q) const {
  check_index(j);
  check_index(k);
  if (j == k) return 0.0;
  const double z = q[2];
  auto upper = [&](int a, int c) -> double {
    if (a == 1 && c == 2) return -beta_ / (z * z);
    if (a == 1 && c == 3) return 2.0 * beta_ * q[1] / (z * z * z);
    return 0.0;
  };
  return j < k ? upper(j, k) : -upper(k, j);
}

IdentityCheck commutator_identity_residual(const TestFunction& psi, int j, int k, int sign,
                                           double beta, const BoxGrid& grid, Convention convention) {
  check_index(j);
  check_index(k);
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  if (!(grid.lo[2] > 0.0)) throw std::invalid_argument("support violation: the z range must stay above 0");
  check_support(psi, grid);
  const MagneticGradient pi(beta);
  const double c = convention == Convention::printed ? 1.0 : -1.0;
  double lhs = 0.0, rhs = 0.0;
  for_each_node(grid, [&](const Point3& p, double w) {
    const Complex pj = pi.apply(j, psi, p);
    const Complex pk = pi.apply(k, psi, p);
    lhs += w * (std::norm(pj) + std::norm(pk));
    rhs += w * (std::norm(pj + static_cast<double>(sign) * I * pk) +
                c * sign * pi.field(j, k, p) * std::norm(psi.value(p)));
  });
  return {lhs, rhs, relative_residual(lhs, rhs)};
}

// ---- Diamagnetic inequality -------------------------------------------------

Point3 MagneticPotential::at(const Point3& q) const {
  if (kind == Kind::aharonov_bohm) {
    const double rho2 = q[0] * q[0] + q[1] * q[1];
    if (rho2 == 0.0) return {0.0, 0.0, 0.0};
    return {-strength * q[1] / rho2, strength * q[0] / rho2, 0.0};
  }
  if (q[2] == 0.0) return {0.0, 0.0, 0.0};
  return {strength * q[1] / (q[2] * q[2]), 0.0, 0.0};
}

double diamagnetic_margin(const TestFunction& psi, const MagneticPotential& potential,
                          const BoxGrid& grid) {
  check_support(psi, grid);
  if (potential.kind == MagneticPotential::Kind::aharonov_bohm) {
    const double scale = std::max(1.0, std::abs(psi.amp0));
    for (double z : grid.nodes(2)) {
      if (std::abs(psi.value({0.0, 0.0, z})) > 1e-12 * scale) {
        throw std::invalid_argument("support violation: test function does not vanish on the flux line");
      }
    }
  } else if (!(grid.lo[2] > 0.0)) {
    throw std::invalid_argument("support violation: the z range must stay above 0");
  }
  double margin = 0.0;
  for_each_node(grid, [&](const Point3& p, double w) {
    const Complex v = psi.value(p);
    const auto g = psi.gradient(p);
    const Point3 A = potential.at(p);
    const double mod = std::abs(v);
    double magnetic = 0.0, modulus = 0.0;
    for (int k = 0; k < 3; ++k) {
      magnetic += std::norm(g[k] + I * A[k] * v);
      const double d = mod > 0.0 ? std::real(std::conj(v) * g[k]) / mod : 0.0;
      modulus += d * d;
    }
    margin += w * (magnetic - modulus);
  });
  return margin;
}

// ---- Weyl quasimodes --------------------------------------------------------

double weyl_residual(double beta, double k, double n, int nodes) {
  if (!(k >= 0.0)) throw std::invalid_argument("weyl_residual needs k >= 0");
  if (!(n >= 1.0)) throw std::invalid_argument("weyl_residual needs n >= 1");
  if (nodes < 8) throw std::invalid_argument("weyl_residual needs at least 8 nodes per axis");
  const double R = n / 4.0;
  const double R2 = R * R;
  double num = 0.0, den = 0.0;
  for (int a = 0; a < nodes; ++a) {
    const double sx = -1.0 + 2.0 * (a + 0.5) / nodes;
    for (int b = 0; b < nodes; ++b) {
      const double sy = -1.0 + 2.0 * (b + 0.5) / nodes;
      for (int c = 0; c < nodes; ++c) {
        const double sz = -1.0 + 2.0 * (c + 0.5) / nodes;
        const double u = sx * sx + sy * sy + sz * sz;
        if (u >= 1.0) continue;
        const double x = R * sx, y = R * sy, z = n + R * sz;
        const double t = 1.0 / (1.0 - u);
        const double F = std::exp(-t);
        const double Fu = -F * t * t;
        const double Fuu = F * (t * t * t * t - 2.0 * t * t * t);
        const double lap = Fuu * 4.0 * u / R2 + Fu * 6.0 / R2;
        const double Fx = Fu * 2.0 * x / R2;
        const double Fz = Fu * 2.0 * (R * sz) / R2;
        const double z2 = z * z;
        // e^{-ikz} (-Delta_beta - k^2)(F e^{ikz})
        const double re = -lap + beta * beta * y * y / (z2 * z2) * F;
        const double im = -2.0 * k * Fz - 2.0 * beta * y / z2 * Fx;
        num += re * re + im * im;
        den += F * F;
      }
    }
  }
  return std::sqrt(num / den);
}

}  // namespace hardylab
