#include "wellgap/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>

#include "wellgap/exact.hpp"
#include "wellgap/geigen.hpp"

namespace wellgap {

uint64_t Rng::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return double(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int lo, int hi) {
  return lo + int(next() % uint64_t(hi - lo + 1));
}

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> cursor{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(jobs));
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = cursor.fetch_add(1); i < count; i = cursor.fetch_add(1)) fn(i);
      } catch (...) {
        errors[static_cast<size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string csv_real(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- sweeps

std::vector<SweepRow> run_sweep(const RunConfig& cfg, int jobs) {
  const auto& inst = cfg.instance;
  const int K = inst.num_wells();
  if (cfg.method == Method::Brute && inst.n > 16)
    throw std::invalid_argument("method=brute requires n <= 16");
  if (cfg.method == Method::Exact && K > 3)
    throw std::invalid_argument("method=exact requires K <= 3");
  if ((cfg.method == Method::TB0 || cfg.method == Method::TB1) && K < 1)
    throw std::invalid_argument("tight-binding requires K >= 1");

  std::optional<TBGeometry> geom;
  if (cfg.method == Method::TB0 || cfg.method == Method::TB1) geom.emplace(inst);

  const auto ss = cfg.s_grid.points();
  std::vector<SweepRow> rows(ss.size());
  parallel_for(static_cast<int>(ss.size()), jobs, [&](int i) {
    const double s = ss[static_cast<size_t>(i)];
    SweepRow row;
    row.s = s;
    row.method = cfg.method;
    switch (cfg.method) {
      case Method::Brute: {
        Spectrum sp = brute_force_spectrum(inst, s, 2);
        row.e0 = sp.values[0];
        row.e1 = sp.values.size() > 1 ? sp.values[1]
                                      : std::numeric_limits<double>::quiet_NaN();
        break;
      }
      case Method::Exact: {
        LowestTwo lt = exact_lowest_two(inst, s);
        row.e0 = lt.e0;
        row.e1 = lt.e1;
        break;
      }
      case Method::TB0:
      case Method::TB1: {
        TBDiagnostics d = tb_solve(inst, s, cfg.method == Method::TB1 ? 1 : 0,
                                   cfg.epsilon, &*geom);
        row.e0 = d.e0;
        row.e1 = d.e1;
        row.error_estimate = d.error_estimate;
        row.gamma_tilde = d.gamma_tilde;
        row.stable_dim = d.stable_dim;
        row.resolved = d.resolved;
        break;
      }
    }
    row.gap = row.e1 - row.e0;
    rows[static_cast<size_t>(i)] = row;
  });
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "s,method,E0,E1,gap,error_estimate,gamma_tilde,stable_dim,resolved\n";
  for (const auto& r : rows) {
    os << csv_real(r.s) << ',' << method_name(r.method) << ',' << csv_real(r.e0) << ','
       << csv_real(r.e1) << ',' << csv_real(r.gap) << ','
       << (r.error_estimate ? csv_real(*r.error_estimate) : "") << ','
       << (r.gamma_tilde ? csv_real(*r.gamma_tilde) : "") << ','
       << (r.stable_dim ? std::to_string(*r.stable_dim) : "") << ','
       << (r.resolved ? (*r.resolved ? "1" : "0") : "") << '\n';
  }
}

// ---------------------------------------------------------------- min gap

MinGap minimize_gap(const std::function<double(double)>& gap, double lo, double hi,
                    int coarse, bool refine) {
  if (coarse < 2) throw std::invalid_argument("minimize_gap: need >= 2 grid points");
  std::vector<double> ss(static_cast<size_t>(coarse)), gs(static_cast<size_t>(coarse));
  int best = 0;
  for (int i = 0; i < coarse; ++i) {
    ss[size_t(i)] = lo + (hi - lo) * i / (coarse - 1);
    gs[size_t(i)] = gap(ss[size_t(i)]);
    if (gs[size_t(i)] < gs[size_t(best)]) best = i;
  }
  if (!refine) return {gs[size_t(best)], ss[size_t(best)]};
  double a = ss[size_t(std::max(0, best - 1))];
  double b = ss[size_t(std::min(coarse - 1, best + 1))];
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = gap(c), fd = gap(d);
  for (int it = 0; it < 80 && (b - a) > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = gap(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = gap(d);
    }
  }
  double sm = 0.5 * (a + b);
  double gm = gap(sm);
  if (gs[size_t(best)] < gm) return {gs[size_t(best)], ss[size_t(best)]};
  return {gm, sm};
}

// ---------------------------------------------------------------- grover prior

namespace {

BitString prefix_ones(int n, int R) {
  BitString b = BitString::zeros(n);
  for (int i = 0; i < R; ++i) b.bits[size_t(i)] = 1;
  return b;
}

// gap of the merged single-center problem: marked well plus prior on top
double merged_radial_gap(int n, const WellSpec& marked, const WellSpec& prior, double s) {
  std::vector<WellSpec> both{marked, prior};
  Eigen::MatrixXd m0 = radial_sector_matrix(n, both, Schedule::RampDown, s, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es0(m0, Eigen::EigenvaluesOnly);
  double e0 = es0.eigenvalues()[0];
  double e1 = es0.eigenvalues()[1];
  if (n >= 2) {
    Eigen::MatrixXd m1 = radial_sector_matrix(n, both, Schedule::RampDown, s, 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es1(m1, Eigen::EigenvaluesOnly);
    e1 = std::min(e1, es1.eigenvalues()[0]);
  }
  return e1 - e0;
}

}  // namespace

std::vector<GroverRow> run_grover_prior(const GroverPriorParams& p, int jobs) {
  if (p.n < 4) throw std::invalid_argument("grover-prior: n >= 4");
  if (p.prior_radius < 0 || p.prior_radius > p.n)
    throw std::invalid_argument("grover-prior: prior radius outside [0,n]");
  const int n = p.n;
  WellSpec marked{BitString::zeros(n), StepWell{p.marked_depth, 0}, Schedule::RampUp};

  // no-prior baseline: single marked well
  ProblemInstance single{n, {marked}, Schedule::RampDown};
  MinGap base = minimize_gap(
      [&](double s) {
        LowestTwo lt = exact_two_well_lowest(single, s);
        return lt.e1 - lt.e0;
      },
      0.0, 1.0, p.s_count, p.refine);

  std::vector<GroverRow> rows(static_cast<size_t>(n + 1));
  parallel_for(n + 1, jobs, [&](int R) {
    GroverRow row;
    row.n = n;
    row.R = R;
    WellSpec prior{prefix_ones(n, R), StepWell{p.prior_depth, p.prior_radius},
                   Schedule::RampDown};
    if (R == 0) {
      // prior sits on the marked item: merged Hamming-symmetric problem
      MinGap mg = minimize_gap([&](double s) { return merged_radial_gap(n, marked, prior, s); },
                               0.0, 1.0, p.s_count, p.refine);
      row.exact_gap = mg.gap;
      row.exact_s = mg.s;
    } else {
      ProblemInstance inst{n, {marked, prior}, Schedule::RampDown};
      MinGap mg = minimize_gap(
          [&](double s) {
            LowestTwo lt = exact_two_well_lowest(inst, s);
            return lt.e1 - lt.e0;
          },
          0.0, 1.0, p.s_count, p.refine);
      row.exact_gap = mg.gap;
      row.exact_s = mg.s;
      TBGeometry geom(inst);
      MinGap mt = minimize_gap(
          [&](double s) {
            TBDiagnostics d = tb_solve(inst, s, 0, p.epsilon, &geom);
            return d.e1 - d.e0;
          },
          0.0, 1.0, p.s_count, p.refine);
      row.tb0_gap = mt.gap;
      row.tb0_s = mt.s;
      row.tb0_error_estimate = tb_solve(inst, mt.s, 0, p.epsilon, &geom).error_estimate;
    }
    rows[static_cast<size_t>(R)] = row;
  });

  // probability-scaled aggregate over a uniformly random prior location
  const BinomTable& bt = binom_table(n);
  double agg = 0.0;
  for (int R = 0; R <= n; ++R)
    agg += std::exp(bt.log_binom(n, R) - n * std::log(2.0)) *
           rows[static_cast<size_t>(R)].exact_gap;
  GroverRow summary;
  summary.n = n;
  summary.R = -1;
  summary.exact_gap = base.gap;
  summary.exact_s = base.s;
  summary.baseline_gap = base.gap;
  summary.prob_scaled_gap = agg;
  rows.push_back(summary);
  return rows;
}

void write_grover_csv(std::ostream& os, const std::vector<GroverRow>& rows) {
  os << "n,R,min_gap_exact,s_exact,min_gap_tb0,s_tb0,tb0_error_estimate,"
        "baseline_gap,prob_scaled_gap\n";
  for (const auto& r : rows) {
    os << r.n << ',' << (r.R >= 0 ? std::to_string(r.R) : "") << ','
       << csv_real(r.exact_gap) << ',' << csv_real(r.exact_s) << ','
       << (r.tb0_gap ? csv_real(*r.tb0_gap) : "") << ','
       << (r.tb0_s ? csv_real(*r.tb0_s) : "") << ','
       << (r.tb0_error_estimate ? csv_real(*r.tb0_error_estimate) : "") << ','
       << (r.baseline_gap ? csv_real(*r.baseline_gap) : "") << ','
       << (r.prob_scaled_gap ? csv_real(*r.prob_scaled_gap) : "") << '\n';
  }
}

// ---------------------------------------------------------------- ising map

namespace {

int spin_sign(int z, int i) { return ((z >> i) & 1) ? -1 : 1; }

Eigen::MatrixXd ising_hamiltonian(const IsingMapParams& p) {
  const int NI = 1 << p.L;
  Eigen::MatrixXd HI = Eigen::MatrixXd::Zero(NI, NI);
  for (int z = 0; z < NI; ++z) {
    double d = 0.0;
    for (int i = 0; i < p.L; ++i)
      for (int j = i + 1; j < p.L; ++j)
        d -= p.J * spin_sign(z, i) * spin_sign(z, j);
    HI(z, z) = d - p.alpha;
    for (int i = 0; i < p.L; ++i) HI(z, z ^ (1 << i)) = -p.B;
  }
  return HI;
}

BitString block_center(int z, int L, int m, int n) {
  BitString c = BitString::zeros(n);
  for (int i = 0; i < L; ++i)
    if ((z >> i) & 1)
      for (int b = 0; b < m; ++b) c.bits[size_t(i * m + b)] = 1;
  return c;
}

}  // namespace

IsingMapReport run_ising_map(const IsingMapParams& p) {
  if (p.L < 1 || p.L > 4) throw std::invalid_argument("ising-map: L in [1,4]");
  if (p.m < 1 || p.m * p.L > p.n)
    throw std::invalid_argument("ising-map: need m*L <= n");
  const int NI = 1 << p.L;
  Eigen::MatrixXd HI = ising_hamiltonian(p);
  Eigen::VectorXd targets = HI.diagonal();

  ProblemInstance inst;
  inst.n = p.n;
  inst.driver_schedule = Schedule::RampDown;
  for (int z = 0; z < NI; ++z)
    inst.wells.push_back({block_center(z, p.L, p.m, p.n),
                          StepWell{targets[z] / p.sstar, 0}, Schedule::RampUp});

  IsingMapReport rep;
  Eigen::MatrixXd H(NI, NI), S(NI, NI), eff(NI, NI);
  const double tol = p.tol * targets.cwiseAbs().maxCoeff();
  for (rep.iterations = 0; rep.iterations < p.max_iter; ++rep.iterations) {
    TBSystem sys = assemble_tb(inst, p.sstar, 0);
    H = sys.blocks[0].H;
    S = sys.blocks[0].S;
    eff = S.lu().solve(H);
    Eigen::VectorXd resid = eff.diagonal() - targets;
    rep.max_diag_residual = resid.cwiseAbs().maxCoeff();
    if (rep.max_diag_residual < tol) {
      rep.converged = true;
      break;
    }
    for (int z = 0; z < NI; ++z)
      std::get<StepWell>(inst.wells[size_t(z)].profile).depth -= resid[z] / p.sstar;
  }
  rep.depths.resize(static_cast<size_t>(NI));
  for (int z = 0; z < NI; ++z)
    rep.depths[size_t(z)] = std::get<StepWell>(inst.wells[size_t(z)].profile).depth;
  rep.max_residual = (eff - HI).cwiseAbs().maxCoeff();

  // effective-model ground distribution from the generalized ground vector
  PencilResult pr = fix_heiberger(H, S, p.epsilon, true);
  Eigen::VectorXd c = pr.vectors.col(0);
  rep.p_eff.resize(static_cast<size_t>(NI));
  double norm = c.squaredNorm();
  for (int z = 0; z < NI; ++z) rep.p_eff[size_t(z)] = c[z] * c[z] / norm;

  // exact Ising reference; average over the ground manifold when degenerate
  EigResult eI = sym_eig(HI);
  rep.p_ising.assign(static_cast<size_t>(NI), 0.0);
  const double scale = eI.values.cwiseAbs().maxCoeff();
  int deg = 1;
  while (deg < NI && eI.values[deg] - eI.values[0] < 1e-12 * scale) ++deg;
  for (int g = 0; g < deg; ++g)
    for (int z = 0; z < NI; ++z)
      rep.p_ising[size_t(z)] += eI.vectors(z, g) * eI.vectors(z, g) / deg;

  // well-occupation distribution of the true adiabatic ground state
  if (p.n <= 14) {
    Spectrum sp = brute_force_spectrum(inst, p.sstar, 1, true);
    Eigen::VectorXd g = sp.vectors.col(0);
    rep.p_brute.assign(static_cast<size_t>(NI), 0.0);
    std::vector<uint32_t> masks;
    for (const auto& w : inst.wells) {
      uint32_t mk = 0;
      for (int b = 0; b < p.n; ++b)
        if (w.center.bits[size_t(b)]) mk |= uint32_t(1) << b;
      masks.push_back(mk);
    }
    double tot = 0.0;
    for (int z = 0; z < NI; ++z) {
      const int radius = std::get<StepWell>(inst.wells[size_t(z)].profile).radius;
      double acc = 0.0;
      for (uint32_t x = 0; x < (uint32_t(1) << p.n); ++x)
        if (std::popcount(x ^ masks[size_t(z)]) <= radius) acc += g[x] * g[x];
      rep.p_brute[size_t(z)] = acc;
      tot += acc;
    }
    for (auto& v : rep.p_brute) v /= tot;
  }
  return rep;
}

void write_ising_report(std::ostream& os, const IsingMapParams& p,
                        const IsingMapReport& r) {
  os << "ising-map report\n";
  os << "L=" << p.L << " J=" << csv_real(p.J) << " B=" << csv_real(p.B)
     << " alpha=" << csv_real(p.alpha) << " sstar=" << csv_real(p.sstar)
     << " n=" << p.n << " m=" << p.m << "\n";
  os << "converged=" << (r.converged ? "yes" : "no") << " iterations=" << r.iterations
     << "\n";
  os << "max_diag_residual=" << csv_real(r.max_diag_residual) << "\n";
  os << "max_elementwise_residual=" << csv_real(r.max_residual) << "\n";
  os << "calibrated sstar*V:";
  for (double d : r.depths) os << ' ' << csv_real(p.sstar * d);
  os << "\n";
  os << "outcome,p_effective,p_ising,p_adiabatic\n";
  for (size_t z = 0; z < r.p_eff.size(); ++z) {
    os << z << ',' << csv_real(r.p_eff[z]) << ',' << csv_real(r.p_ising[z]) << ','
       << (r.p_brute.empty() ? "" : csv_real(r.p_brute[z])) << '\n';
  }
}

// ---------------------------------------------------------------- random batch

ProblemInstance random_instance(Rng& rng, int n_min, int n_max, int k_min, int k_max,
                                double depth_min, double depth_max) {
  ProblemInstance inst;
  inst.n = rng.uniform_int(n_min, n_max);
  inst.driver_schedule = Schedule::RampDown;
  const int K = rng.uniform_int(k_min, k_max);
  std::set<uint32_t> used;
  while (static_cast<int>(used.size()) < K)
    used.insert(uint32_t(rng.next() & ((uint64_t(1) << inst.n) - 1)));
  for (uint32_t mask : used) {
    BitString c = BitString::zeros(inst.n);
    for (int b = 0; b < inst.n; ++b)
      if ((mask >> b) & 1u) c.bits[size_t(b)] = 1;
    inst.wells.push_back({std::move(c), StepWell{rng.uniform(depth_min, depth_max), 0},
                          Schedule::RampUp});
  }
  return inst;
}

BatchResult run_random_batch(const RandomBatchParams& p, int jobs) {
  if (p.n_max > 16) throw std::invalid_argument("random-batch: n_max <= 16 (oracle cap)");
  if (p.n_min < 1 || p.n_min > p.n_max || p.k_min < 1 || p.k_min > p.k_max)
    throw std::invalid_argument("random-batch: bad ranges");
  SGrid grid{p.s_lo, p.s_hi, p.s_count};
  const auto ss = grid.points();
  BatchResult res;
  res.rows.resize(static_cast<size_t>(p.runs) * ss.size());
  parallel_for(p.runs, jobs, [&](int run) {
    Rng rng(p.seed ^ (0x9E3779B97F4A7C15ULL * uint64_t(run + 1)));
    ProblemInstance inst = random_instance(rng, p.n_min, p.n_max, p.k_min, p.k_max,
                                           p.depth_min, p.depth_max);
    TBGeometry geom(inst);
    for (size_t si = 0; si < ss.size(); ++si) {
      const double s = ss[si];
      BatchRow row;
      row.run = run;
      row.n = inst.n;
      row.K = inst.num_wells();
      row.s = s;
      TBDiagnostics d = tb_solve(inst, s, 0, p.epsilon, &geom);
      Spectrum sp = brute_force_spectrum(inst, s, 2);
      row.tb_gap = d.e1 - d.e0;
      row.oracle_gap = sp.values[1] - sp.values[0];
      row.rel_error = std::abs(row.tb_gap - row.oracle_gap) / std::abs(row.oracle_gap);
      row.gamma_tilde = d.gamma_tilde;
      row.resolved = d.resolved;
      row.estimate_rel = d.resolved ? d.error_estimate / d.gamma_tilde
                                    : std::numeric_limits<double>::quiet_NaN();
      res.rows[static_cast<size_t>(run) * ss.size() + si] = row;
    }
  });
  for (const auto& r : res.rows) {
    if (!r.resolved) continue;
    ++res.resolved_points;
    if (r.rel_error <= r.estimate_rel) ++res.within_bound;
  }
  res.fraction = res.resolved_points ? double(res.within_bound) / res.resolved_points : 0.0;
  return res;
}

void write_batch_csv(std::ostream& os, const BatchResult& res) {
  os << "run,n,K,s,gap_tb0,gap_oracle,rel_error,estimate_rel,gamma_tilde,resolved\n";
  for (const auto& r : res.rows) {
    os << r.run << ',' << r.n << ',' << r.K << ',' << csv_real(r.s) << ','
       << csv_real(r.tb_gap) << ',' << csv_real(r.oracle_gap) << ','
       << csv_real(r.rel_error) << ',' << csv_real(r.estimate_rel) << ','
       << csv_real(r.gamma_tilde) << ',' << (r.resolved ? 1 : 0) << '\n';
  }
  os << "# resolved_points=" << res.resolved_points << " within_bound=" << res.within_bound
     << " fraction=" << csv_real(res.fraction) << '\n';
}

}  // namespace wellgap
