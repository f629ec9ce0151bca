#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wellgap/model.hpp"
#include "wellgap/tb.hpp"

namespace wellgap {

// splitmix64: deterministic across platforms, unlike <random> distributions
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}
  uint64_t next();
  double uniform();                    // [0, 1)
  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);     // inclusive
 private:
  uint64_t state_;
};

// Run fn(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

// Full-precision CSV cell (17 significant digits); empty string for unset.
std::string csv_real(double v);

// ---- solve sweeps ----

struct SweepRow {
  double s = 0;
  Method method = Method::Exact;
  double e0 = 0, e1 = 0, gap = 0;
  std::optional<double> error_estimate, gamma_tilde;
  std::optional<int> stable_dim;
  std::optional<bool> resolved;
};

std::vector<SweepRow> run_sweep(const RunConfig& cfg, int jobs = 1);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

// ---- minimum-gap location ----

// Minimum of gap(s) over [lo, hi]: coarse grid then golden-section refinement
// inside the bracketing cell (refine=false keeps the plain grid minimum).
struct MinGap {
  double gap = 0, s = 0;
};
MinGap minimize_gap(const std::function<double(double)>& gap, double lo, double hi,
                    int coarse, bool refine);

// ---- Grover with a prior guess ----

struct GroverPriorParams {
  int n = 20;
  double prior_depth = -0.5;
  int prior_radius = 0;
  double marked_depth = -1.0;
  int s_count = 33;
  bool refine = true;
  double epsilon = 0.1;
};

struct GroverRow {
  int n = 0;
  int R = -1;  // -1 marks the per-n summary row
  double exact_gap = 0, exact_s = 0;
  std::optional<double> tb0_gap, tb0_s, tb0_error_estimate;
  std::optional<double> baseline_gap, prob_scaled_gap;  // summary row only
};

std::vector<GroverRow> run_grover_prior(const GroverPriorParams& p, int jobs = 1);
void write_grover_csv(std::ostream& os, const std::vector<GroverRow>& rows);

// ---- Ising-model ground-state mapping ----

struct IsingMapParams {
  int L = 3;
  double J = 1.0;        // uniform coupling, all pairs
  double B = 0.015;      // uniform transverse field
  double alpha = 30.0;   // diagonal shift
  double sstar = 0.95;
  int n = 10;
  int m = 1;             // bits per spin in the well encoding
  double tol = 1e-9;     // relative diagonal-calibration tolerance
  int max_iter = 100;
  double epsilon = 0.1;
};

struct IsingMapReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> depths;          // calibrated well depths (2^L)
  double max_diag_residual = 0;        // |diag(S^-1 H) - diag(H_I)|_max
  double max_residual = 0;             // |S^-1 H - H_I|_max elementwise
  std::vector<double> p_eff, p_ising;  // ground distributions per outcome
  std::vector<double> p_brute;         // empty when n > 14
};

IsingMapReport run_ising_map(const IsingMapParams& p);
void write_ising_report(std::ostream& os, const IsingMapParams& p, const IsingMapReport& r);

// ---- random validation batch ----

struct RandomBatchParams {
  int runs = 200;
  int n_min = 4, n_max = 10;
  int k_min = 2, k_max = 10;
  double depth_min = -5.99, depth_max = -1.0;
  int s_count = 17;
  double s_lo = 0.15, s_hi = 0.95;
  uint64_t seed = 1;
  double epsilon = 0.1;
};

struct BatchRow {
  int run = 0, n = 0, K = 0;
  double s = 0;
  double tb_gap = 0, oracle_gap = 0, rel_error = 0;
  double estimate_rel = 0, gamma_tilde = 0;
  bool resolved = false;
};

struct BatchResult {
  std::vector<BatchRow> rows;
  int resolved_points = 0;
  int within_bound = 0;  // resolved and rel_error <= estimate_rel
  double fraction = 0;
};

ProblemInstance random_instance(Rng& rng, int n_min, int n_max, int k_min, int k_max,
                                double depth_min, double depth_max);
BatchResult run_random_batch(const RandomBatchParams& p, int jobs = 1);
void write_batch_csv(std::ostream& os, const BatchResult& res);

}  // namespace wellgap
