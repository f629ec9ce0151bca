#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace wellgap {

struct EigResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns
};

// Dense symmetric eigendecomposition. Throws on asymmetric input.
EigResult sym_eig(const Eigen::MatrixXd& A);

// Result of the symmetric-definite pencil solve A x = lambda B x.
struct PencilResult {
  Eigen::VectorXd values;     // finite eigenvalues, ascending
  Eigen::MatrixXd vectors;    // columns in original coordinates (iff requested)
  int stable_dim = 0;         // dimension retained after deflation
  std::vector<std::string> deflation_log;
};

// Fix-Heiberger reduction for ill-conditioned symmetric-definite pencils.
// B must be positive semidefinite up to the tolerance; eigenvalues of B
// below eps * lambda_max(B) are deflated, then near-null rows of the
// transformed A are eliminated as constraints (one further stage). Throws
// std::runtime_error("singular pencil ...") when no finite eigenproblem
// remains, and std::invalid_argument for bad eps or a zero/indefinite B.
PencilResult fix_heiberger(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           double eps, bool want_vectors = false);

}  // namespace wellgap
