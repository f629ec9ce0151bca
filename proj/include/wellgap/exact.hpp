#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>

#include "wellgap/model.hpp"
#include "wellgap/symmetry.hpp"

namespace wellgap {

struct Spectrum {
  Eigen::VectorXd values;   // ascending; degenerate values repeated
  Eigen::MatrixXd vectors;  // sector coordinates; empty when not computed
};

// ---- sector matrix builders (dense symmetric, stoquastic) ----

// Radial sigma block of a Hamming-symmetric problem. All wells must share a
// center (callers pass one well, or several coincident ones whose potentials
// add). Dimension n - 2 sigma + 1, tridiagonal in w.
Eigen::MatrixXd radial_sector_matrix(int n, std::span<const WellSpec> wells,
                                     Schedule driver, double s, int sigma);

// Pair-frame sector (s1, s2). wi / wj may be nullptr to drop that potential
// (isolated-well solves in the pair frame). extra_diag, when given, is added
// to the diagonal (the V_c correction), indexed like the sector layout.
Eigen::MatrixXd pair_sector_matrix(const PairFrame& frame, const WellSpec* wi,
                                   const WellSpec* wj, Schedule driver, double s,
                                   int s1, int s2,
                                   const Eigen::VectorXd* extra_diag = nullptr);

// Structured y = H x for the same operator, O(dim) per apply.
void pair_sector_apply(const PairFrame& frame, const WellSpec* wi, const WellSpec* wj,
                       Schedule driver, double s, int s1, int s2,
                       const Eigen::VectorXd* extra_diag,
                       const Eigen::VectorXd& x, Eigen::VectorXd& y);

// Index helpers for pair sectors: row-major over h1 in [s1, n1-s1],
// h2 in [s2, n2-s2].
inline int pair_sector_rows(const PairFrame& f, int s1) { return f.n1 - 2 * s1 + 1; }
inline int pair_sector_cols(const PairFrame& f, int s2) { return f.n2 - 2 * s2 + 1; }
inline int pair_sector_dim(const PairFrame& f, int s1, int s2) {
  return pair_sector_rows(f, s1) * pair_sector_cols(f, s2);
}

// ---- solvers ----

// Full spectrum of one radial sigma block of an isolated well, ground vector
// sign-fixed positive. Throws on an empty sector (sigma > n/2).
Spectrum solve_single_well(int n, const WellSpec& well, double s, int sigma,
                           Schedule driver = Schedule::RampDown);

// K=2 instance, pair sector (s1, s2).
Spectrum solve_two_well(const ProblemInstance& inst, double s, int s1, int s2);

// K=3 instance, sector labels (sigma_1..sigma_4) over the four relabeled
// blocks. Throws on inconsistent geometry (cannot happen for real centers).
Spectrum solve_three_well(const ProblemInstance& inst, double s,
                          const std::array<int, 4>& sigma);

// Ground and global first excited energy for K <= 3 via the sector-minimum
// rule: E0 from the all-zeros sector, E1 = min over the all-zeros second
// value and the ground of every sector with total sigma = 1.
struct LowestTwo {
  double e0, e1;
};
LowestTwo exact_lowest_two(const ProblemInstance& inst, double s);

// Lowest-two of the K=2 (or K<=1 radial) problem using iterative solves for
// large sectors; same values as exact_lowest_two.
LowestTwo exact_two_well_lowest(const ProblemInstance& inst, double s);

// Lowest m eigenvalues of the full 2^n Hamiltonian. Dense for small n,
// matrix-free Lanczos above that; hard cap n <= 16. Eigenvectors only on
// the dense path (want_vectors).
Spectrum brute_force_spectrum(const ProblemInstance& inst, double s, int m,
                              bool want_vectors = false);

}  // namespace wellgap
