#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "hardylab/eigensolve.hpp"

namespace oracle {

// Full spectrum of H u = lambda W u from a dense generalized solver.
inline Eigen::VectorXd dense_spectrum(const Eigen::SparseMatrix<double>& H, const Eigen::VectorXd& W) {
  const Eigen::MatrixXd Hd = Eigen::MatrixXd(H);
  const Eigen::MatrixXd Wd = W.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Hd, Wd, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double dense_lambda_min(const hardylab::Pencil& p) { return dense_spectrum(p.H(), p.W())[0]; }

inline bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * (1.0 + std::abs(b)); }

}  // namespace oracle
