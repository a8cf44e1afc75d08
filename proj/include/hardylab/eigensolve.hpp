#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hardylab/forms.hpp"

namespace hardylab {

/// Generalized symmetric problem H u = lambda W u with W positive diagonal.
class Pencil {
 public:
  Pencil(Eigen::SparseMatrix<double> H, Eigen::VectorXd W);
  Pencil(const FormMatrix& H, const DiagonalWeight& W);

  const Eigen::SparseMatrix<double>& H() const { return H_; }
  const Eigen::VectorXd& W() const { return W_; }
  Eigen::Index dimension() const { return W_.size(); }

  double rayleigh_quotient(const Eigen::VectorXd& u) const;

  // Residual of (lambda, u) in the norm dual to ||.||_W, relative to ||u||_W.
  double residual(double lambda, const Eigen::VectorXd& u) const;

 private:
  Eigen::SparseMatrix<double> H_;
  Eigen::VectorXd W_;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 5000;
  std::uint64_t seed = 20180711;
};

struct EigenResult {
  double lambda_min = 0.0;
  Eigen::VectorXd vector;  // nodal values u, normalised to ||u||_W = 1
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double shift = 0.0;
  std::string diagnostic;
};

EigenResult smallest_eigenpair(const Pencil& pencil, const SolverOptions& options = {});

// The k lowest eigenpairs in ascending order.
std::vector<EigenResult> lowest_eigenpairs(const Pencil& pencil, int k,
                                           const SolverOptions& options = {});

struct GridDescriptor {
  std::string kind;      // "uniform" / "logarithmic" of the singular axis
  double inner = 0.0;    // inner cutoff of the singular axis
  double outer = 0.0;    // outer radius of the singular axis
  long n = 0;            // total node count
  long n1 = 0;           // nodes along axis 1 (plane grids)
  long n2 = 0;           // nodes along axis 2 (plane grids), 0 for 1D
  double extent1 = 0.0;  // half-width of a signed axis 1 or outer radius of axis 1
  double relative_step = 0.0;
  double angular_cutoff = 0.0;  // theta_min of polar grids, 0 otherwise

  bool operator==(const GridDescriptor&) const = default;
};

GridDescriptor describe(const RadialGrid& grid);
GridDescriptor describe(const PlaneGrid& grid);

struct ConvergenceRow {
  GridDescriptor grid;
  EigenResult result;
  std::string error;  // non-empty when the row failed before or during the solve
};

/// One independent solve per grid descriptor, in family order.
template <class GridSpec>
using PencilBuilder = std::function<std::pair<GridDescriptor, Pencil>(const GridSpec&)>;

template <class GridSpec>
std::vector<ConvergenceRow> convergence_study(const PencilBuilder<GridSpec>& builder,
                                              const std::vector<GridSpec>& family,
                                              const SolverOptions& options = {}) {
  std::vector<ConvergenceRow> table;
  table.reserve(family.size());
  for (const auto& spec : family) {
    ConvergenceRow row;
    try {
      auto [descriptor, pencil] = builder(spec);
      row.grid = descriptor;
      row.result = smallest_eigenpair(pencil, options);
    } catch (const std::exception& e) {
      row.error = e.what();
      row.result.converged = false;
    }
    table.push_back(std::move(row));
  }
  return table;
}

}  // namespace hardylab
