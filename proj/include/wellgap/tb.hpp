#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "wellgap/model.hpp"
#include "wellgap/symmetry.hpp"

namespace wellgap {

// An isolated-well eigenstate entering the tight-binding basis.
// sigma == 0: radially symmetric, `radial` holds phi(r) and expands into any
// pair frame. sigma == 1: one representative of the degenerate multiplet,
// stored as a pair-sector vector (only constructed for K = 2 instances).
struct BoundState {
  int well = 0;
  int order = 0;  // 0 ground, 1 first-excited candidate
  int sigma = 0;
  int sector_s1 = 0, sector_s2 = 0;
  Eigen::VectorXd radial;
  Eigen::VectorXd sector_vec;
  double energy = 0.0;
};

// Ground state (order 0), plus the first-excited candidate (order 1): the
// lower of the radial sigma=0 second state and the sigma=1 ground. Candidates
// that are not bound (isolated energy above the free-driver floor at this s)
// are dropped. For sigma=1 winners the returned states are the pair-sector
// representatives when K = 2, a single marker state otherwise.
std::vector<BoundState> isolated_well_states(const ProblemInstance& inst, int well,
                                             double s, int order);

// Per-instance pair frames and s-independent V_c weight tables.
class TBGeometry {
 public:
  explicit TBGeometry(const ProblemInstance& inst);
  const PairFrame& frame(int i, int j) const;  // i != j
  // V_c diagonal over the (0,0) sector of pair (min(i,j), max(i,j)) at s;
  // zero vector for K <= 2.
  Eigen::VectorXd vc_diag(int i, int j, double s) const;
  bool has_vc() const { return has_vc_; }

 private:
  int K_;
  bool has_vc_;
  std::vector<PairFrame> frames_;
  // weights grouped by schedule tag so only the scalar factors depend on s
  std::vector<std::array<Eigen::VectorXd, 3>> weights_;
  int pidx(int i, int j) const;
};

struct TBBlock {
  int s1 = 0, s2 = 0;    // pair sector; (-1,-1) for a K=1 radial sigma=1 block
  int multiplicity = 1;  // gamma degeneracy carried by this representative
  std::vector<int> states;
  Eigen::MatrixXd H, S;
};

struct TBSystem {
  double s = 0;
  int order = 0;
  std::vector<BoundState> states;
  std::vector<TBBlock> blocks;
  bool sigma1_skipped = false;  // K>2 candidate existed but is not representable
};

TBSystem assemble_tb(const ProblemInstance& inst, double s, int order,
                     const TBGeometry* geom = nullptr);

// <state_i | state_j> with state_i read from the frame's i side and state_j
// from the j side; orthogonal sectors give exactly zero.
double tb_overlap(const BoundState& a, const BoundState& b, const PairFrame& frame);

// <state_i | H | state_j> evaluated in the owner pair's frame, exact within
// the span (V_c included for K > 2 radial states).
double tb_h_element(const BoundState& a, const BoundState& b,
                    const ProblemInstance& inst, double s);

// Root-sum-square of per-well expectations of the Hamiltonian with that
// well's own potential removed, over the order-0 ground states.
double tb_error_estimate(const ProblemInstance& inst, double s,
                         const std::vector<BoundState>& grounds);

struct TBDiagnostics {
  double e0 = 0, e1 = 0;
  double error_estimate = 0;
  double gamma_tilde = 0;  // e1 - e0 - sqrt(2) * error_estimate
  int stable_dim = 0;
  bool resolved = false;   // gamma_tilde > 0
  bool sigma1_skipped = false;
};

TBDiagnostics tb_solve(const ProblemInstance& inst, double s, int order, double epsilon,
                       const TBGeometry* geom = nullptr);

}  // namespace wellgap
