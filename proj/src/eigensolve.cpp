#include "hardylab/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>

namespace hardylab {

Pencil::Pencil(Eigen::SparseMatrix<double> H, Eigen::VectorXd W) : H_(std::move(H)), W_(std::move(W)) {
  if (H_.rows() != H_.cols()) throw std::invalid_argument("pencil matrix must be square");
  if (H_.rows() != W_.size()) throw std::invalid_argument("pencil dimensions do not match");
  if (W_.size() == 0) throw std::invalid_argument("pencil is empty");
  if (!(W_.array() > 0.0).all()) throw std::invalid_argument("pencil weight must be strictly positive");
  H_.makeCompressed();
}

Pencil::Pencil(const FormMatrix& H, const DiagonalWeight& W) : Pencil(H.matrix, W.values) {}

double Pencil::rayleigh_quotient(const Eigen::VectorXd& u) const {
  return u.dot(H_ * u) / u.dot(W_.cwiseProduct(u));
}

double Pencil::residual(double lambda, const Eigen::VectorXd& u) const {
  const Eigen::VectorXd r = H_ * u - lambda * W_.cwiseProduct(u);
  const double num = std::sqrt(r.cwiseAbs2().cwiseQuotient(W_).sum());
  return num / std::sqrt(u.dot(W_.cwiseProduct(u)));
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Factor = Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>;

// Standard form A = W^{-1/2} H W^{-1/2} with every diagonal entry stored.
SpMat reduce(const Pencil& pencil, const Eigen::VectorXd& d) {
  SpMat eye(pencil.dimension(), pencil.dimension());
  eye.setIdentity();
  SpMat A = d.asDiagonal() * pencil.H() * d.asDiagonal();
  A = A + 0.0 * eye;
  A.makeCompressed();
  return A;
}

bool factor_shifted(Factor& factor, const SpMat& A, double sigma) {
  SpMat M = A;
  M.diagonal().array() -= sigma;
  factor.factorize(M);
  return factor.info() == Eigen::Success;
}

double gershgorin_lower(const SpMat& A) {
  Eigen::VectorXd radius = Eigen::VectorXd::Zero(A.rows());
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(A.rows());
  for (Eigen::Index c = 0; c < A.outerSize(); ++c) {
    for (SpMat::InnerIterator it(A, c); it; ++it) {
      if (it.row() == it.col()) {
        diag[it.row()] += it.value();
      } else {
        radius[it.row()] += std::abs(it.value());
      }
    }
  }
  return (diag - radius).minCoeff();
}

// Smallest Ritz value of a plain Lanczos run; an estimate from above.
double lanczos_estimate(const SpMat& A, int steps, std::mt19937_64& rng) {
  const Eigen::Index n = A.rows();
  steps = static_cast<int>(std::min<Eigen::Index>(steps, n));
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = uni(rng);
  q.normalize();
  Eigen::VectorXd q_prev = Eigen::VectorXd::Zero(n);
  std::vector<double> alpha, beta;
  double b = 0.0;
  for (int j = 0; j < steps; ++j) {
    Eigen::VectorXd w = A * q - b * q_prev;
    const double a = q.dot(w);
    w -= a * q;
    alpha.push_back(a);
    b = w.norm();
    if (b <= 1e-14 * std::abs(a) || j + 1 == steps) break;
    beta.push_back(b);
    q_prev = q;
    q = w / b;
  }
  Eigen::VectorXd dvec = Eigen::Map<Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
  Eigen::VectorXd evec(std::max<Eigen::Index>(dvec.size() - 1, 0));
  for (Eigen::Index i = 0; i < evec.size(); ++i) evec[i] = beta[static_cast<std::size_t>(i)];
  if (dvec.size() == 1) return dvec[0];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  tri.computeFromTridiagonal(dvec, evec, Eigen::EigenvaluesOnly);
  return tri.eigenvalues().minCoeff();
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& X) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  return qr.householderQ() * Eigen::MatrixXd::Identity(X.rows(), X.cols());
}

struct ShiftChoice {
  double sigma = 0.0;
  bool ok = false;
  std::string note;
};

// Finds sigma with A - sigma I positive definite, i.e. sigma below the
// whole spectrum. Starts at 0; otherwise walks down from a Lanczos estimate.
ShiftChoice choose_shift(Factor& factor, const SpMat& A, std::mt19937_64& rng) {
  ShiftChoice c;
  if (factor_shifted(factor, A, 0.0)) {
    c.ok = true;
    return c;
  }
  const double theta = lanczos_estimate(A, 300, rng);
  double delta = 1e-2 * std::max(1.0, std::abs(theta));
  for (int attempt = 0; attempt < 30; ++attempt) {
    const double sigma = theta - delta;
    if (factor_shifted(factor, A, sigma)) {
      c.sigma = sigma;
      c.ok = true;
      c.note = "shift lowered below the spectrum";
      return c;
    }
    delta *= 4.0;
  }
  const double g = gershgorin_lower(A);
  const double sigma = g - 1e-8 * std::max(1.0, std::abs(g));
  if (factor_shifted(factor, A, sigma)) {
    c.sigma = sigma;
    c.ok = true;
    c.note = "Gershgorin shift";
    return c;
  }
  c.note = "factorization failed for every shift";
  return c;
}

std::vector<EigenResult> dense_lowest(const Pencil& pencil, const Eigen::VectorXd& d, int k) {
  const SpMat A = reduce(pencil, d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(A), Eigen::ComputeEigenvectors);
  std::vector<EigenResult> out;
  for (int i = 0; i < k; ++i) {
    EigenResult r;
    r.lambda_min = es.eigenvalues()[i];
    r.vector = d.cwiseProduct(es.eigenvectors().col(i));
    r.residual = pencil.residual(r.lambda_min, r.vector);
    r.iterations = 1;
    r.converged = true;
    r.diagnostic = "dense path";
    out.push_back(std::move(r));
  }
  return out;
}

void fix_sign(Eigen::VectorXd& u) {
  Eigen::Index imax = 0;
  u.cwiseAbs().maxCoeff(&imax);
  if (u[imax] < 0.0) u = -u;
}

}  // namespace

std::vector<EigenResult> lowest_eigenpairs(const Pencil& pencil, int k, const SolverOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
  if (k < 1) throw std::invalid_argument("need at least one eigenpair");
  const Eigen::Index n = pencil.dimension();
  k = static_cast<int>(std::min<Eigen::Index>(k, n));
  const Eigen::VectorXd d = pencil.W().cwiseSqrt().cwiseInverse();
  const int guard = std::max(3, k);
  const auto p = static_cast<Eigen::Index>(std::min<Eigen::Index>(n, k + guard));

  std::vector<EigenResult> out;
  if (p >= n) {
    out = dense_lowest(pencil, d, k);
    for (auto& r : out) fix_sign(r.vector);
    return out;
  }

  std::mt19937_64 rng(options.seed);
  const SpMat A = reduce(pencil, d);
  Factor factor;
  factor.analyzePattern(A);
  ShiftChoice shift = choose_shift(factor, A, rng);
  if (!shift.ok) {
    for (int i = 0; i < k; ++i) {
      EigenResult r;
      r.converged = false;
      r.diagnostic = shift.note;
      r.lambda_min = std::numeric_limits<double>::quiet_NaN();
      r.residual = std::numeric_limits<double>::infinity();
      out.push_back(std::move(r));
    }
    return out;
  }

  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::MatrixXd V(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) V(i, j) = uni(rng);
  }
  V = orthonormalize(V);

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd res = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::infinity());
  int it = 0;
  int reshifts = 0;
  bool converged = false;
  double best = std::numeric_limits<double>::infinity();
  int best_at = 0;
  for (it = 1; it <= options.max_iter; ++it) {
    V = orthonormalize(factor.solve(V));
    Eigen::MatrixXd AV = A * V;
    Eigen::MatrixXd T = V.transpose() * AV;
    T = 0.5 * (T + T.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(T);
    V = V * rr.eigenvectors();
    AV = AV * rr.eigenvectors();
    theta = rr.eigenvalues();
    for (Eigen::Index j = 0; j < p; ++j) res[j] = (AV.col(j) - theta[j] * V.col(j)).norm();
    if (res.head(k).maxCoeff() <= 0.5 * options.tol) {
      converged = true;
      break;
    }
    // Stagnation at the rounding floor.
    if (res.head(k).maxCoeff() < 0.9 * best) {
      best = res.head(k).maxCoeff();
      best_at = it;
    } else if (it - best_at > 60) {
      break;
    }
    // Move the shift up under the wanted eigenvalues when convergence is slow.
    const double ratio = (theta[k - 1] - shift.sigma) / (theta[p - 1] - shift.sigma);
    if (it % 5 == 0 && ratio > 0.1 && reshifts < 8) {
      const double spread = std::max(theta[p - 1] - theta[0], 1e-300);
      const double gap = std::max({2.0 * res[0], 1e-3 * spread, 1e-12 * std::abs(theta[0])});
      const double candidate = theta[0] - gap;
      if (candidate > shift.sigma) {
        if (factor_shifted(factor, A, candidate)) {
          shift.sigma = candidate;
          ++reshifts;
        } else if (!factor_shifted(factor, A, shift.sigma)) {
          break;
        }
      }
    }
  }

  for (int i = 0; i < k; ++i) {
    EigenResult r;
    r.lambda_min = theta[i];
    r.vector = d.cwiseProduct(V.col(i));
    fix_sign(r.vector);
    r.residual = pencil.residual(r.lambda_min, r.vector);
    r.iterations = std::min(it, options.max_iter);
    r.converged = converged && r.residual <= options.tol;
    r.shift = shift.sigma;
    r.diagnostic = shift.note;
    if (!r.converged && r.diagnostic.empty()) r.diagnostic = "max_iter reached";
    out.push_back(std::move(r));
  }
  return out;
}

EigenResult smallest_eigenpair(const Pencil& pencil, const SolverOptions& options) {
  return lowest_eigenpairs(pencil, 1, options).front();
}

GridDescriptor describe(const RadialGrid& grid) {
  GridDescriptor g;
  g.kind = grid.spacing() == Spacing::logarithmic ? "logarithmic" : "uniform";
  g.inner = grid.inner_cutoff();
  g.outer = grid.outer_radius();
  g.n = static_cast<long>(grid.size());
  g.n1 = g.n;
  g.n2 = 0;
  g.extent1 = grid.outer_radius();
  g.relative_step = grid.relative_step();
  return g;
}

GridDescriptor describe(const PlaneGrid& grid) {
  GridDescriptor g;
  const bool polar = grid.coordinates() == PlaneCoordinates::polar;
  const Axis& singular = grid.axis1().is_signed() ? grid.axis2() : grid.axis1();
  g.kind = singular.spacing() == Spacing::logarithmic ? "logarithmic" : "uniform";
  g.inner = singular.inner_cutoff();
  g.outer = singular.outer_radius();
  g.n = static_cast<long>(grid.size());
  g.n1 = static_cast<long>(grid.n1());
  g.n2 = static_cast<long>(grid.n2());
  g.extent1 = grid.axis1().is_signed()
                  ? 0.5 * (grid.axis1().outer_radius() - grid.axis1().inner_cutoff())
                  : grid.axis1().outer_radius();
  g.relative_step = std::max(grid.axis1().relative_step(), grid.axis2().relative_step());
  if (polar) g.angular_cutoff = grid.axis2().inner_cutoff();
  return g;
}

}  // namespace hardylab
