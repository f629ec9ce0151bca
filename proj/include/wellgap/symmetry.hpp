#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "wellgap/model.hpp"

namespace wellgap {

int hamming_distance(const BitString& x, const BitString& y);

// Raising/lowering coefficients of the total-spin ladder within a sigma
// block: C+ = sqrt((w-sigma+1)(n-sigma-w)), C- = sqrt((w-sigma)(n-sigma-w+1)).
struct Ladder {
  double up;    // couples w -> w+1
  double down;  // couples w -> w-1
};
Ladder ladder_coeffs(int w, int sigma, int n);

// Shared log-binomial table for one n, built once and then read-only.
class BinomTable {
 public:
  explicit BinomTable(int nmax);
  double log_binom(int n, int k) const;   // -inf for k outside [0,n]
  double binom(int n, int k) const;       // exp of the above
  int nmax() const { return nmax_; }

 private:
  int nmax_;
  std::vector<double> lgamma_;  // lgamma(i+1) for i = 0..nmax
};

// Thread-safe process-wide cache; tables are immutable once built.
const BinomTable& binom_table(int nmax);

// Relabeled coordinates for a pair of wells: S1 = positions where the two
// centers differ (|S1| = n1), S2 the rest. Well i maps to the all-zeros
// string and well j to 1^{n1} 0^{n2}; a string with h1 ones in S1 and h2 in
// S2 is at distance h1+h2 from i and (n1-h1)+h2 from j.
struct PairFrame {
  int n = 0, n1 = 0, n2 = 0;
  std::vector<uint8_t> mask;  // 1 on S1 positions

  static PairFrame from_centers(const BitString& ci, const BitString& cj);
  // Frame coordinates (h1, h2) of an arbitrary center, measured from ci.
  std::pair<int, int> locate(const BitString& ck, const BitString& ci) const;
};

// Block sizes of the relabeled coordinates for a well triple, solved from
// the three pairwise distances. consistent == false when the distances
// violate parity or the triangle-like constraints.
struct TripleFrame {
  int n1p = 0, n2p = 0, n3p = 0, n4p = 0;
  bool consistent = false;
  int n() const { return n1p + n2p + n3p + n4p; }
  int n1() const { return n1p + n2p; }
};
TripleFrame triple_frame(int n1, int Rik, int Rjk, int n);

// Number of strings simultaneously at distance r_i = h1+h2 from well i,
// r_j = (n1-h1)+h2 from well j and r_k from well k. Log-domain binomials;
// exact for moderate n, ~1e-13 relative for large n.
double count_triple_intersections(int h1, int h2, const TripleFrame& frame, int rk);

// Same count in exact integer arithmetic (valid while products of binomials
// fit in 64 bits; ample for the n <= 14 validation range).
uint64_t count_triple_intersections_exact(int h1, int h2, const TripleFrame& frame, int rk);

// Expand a normalized radial profile phi(r), r = 0..n, of well i (or j) into
// sector-(0,0) amplitudes over the (h1, h2) grid, row-major in h1.
Eigen::VectorXd radial_to_pair(const Eigen::VectorXd& phi, const PairFrame& frame,
                               bool from_well_i);

}  // namespace wellgap
