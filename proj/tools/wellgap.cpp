// wellgap: spectra and minimum gaps of multi-well adiabatic Hamiltonians.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "wellgap/experiments.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("config", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// stdout when no --out given
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot write output file " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectra and minimum gaps of sums of Hamming-symmetric wells"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  double epsilon_flag = -1.0;
  uint64_t seed = 1;
  int jobs = 1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "output path (default: stdout)");
    cmd->add_option("--epsilon", epsilon_flag, "deflation tolerance in (0,1)");
    cmd->add_option("--jobs", jobs, "worker threads");
  };

  auto* solve = app.add_subcommand("solve", "sweep the s grid of a config file");
  solve->add_option("--config", config_path, "problem config file")->required();
  add_common(solve);

  wellgap::GroverPriorParams gp;
  int n_min = 0, n_max = 0;
  bool no_refine = false;
  auto* grover = app.add_subcommand("grover-prior",
                                    "marked-item search with a prior guess well");
  grover->add_option("--n", gp.n, "qubit count");
  grover->add_option("--n-min", n_min, "sweep start (with --n-max)");
  grover->add_option("--n-max", n_max, "sweep end");
  grover->add_option("--prior-depth", gp.prior_depth, "prior well depth (default -0.5)");
  grover->add_option("--prior-radius", gp.prior_radius, "prior well radius");
  grover->add_option("--marked-depth", gp.marked_depth, "marked well depth");
  grover->add_option("--s-count", gp.s_count, "coarse s grid size");
  grover->add_flag("--no-refine", no_refine, "report plain grid minima");
  add_common(grover);

  wellgap::IsingMapParams ip;
  auto* ising = app.add_subcommand("ising-map",
                                   "simulate an Ising ground state with wells");
  ising->add_option("--L", ip.L, "spin count");
  ising->add_option("--J", ip.J, "uniform coupling");
  ising->add_option("--B", ip.B, "uniform transverse field");
  ising->add_option("--alpha", ip.alpha, "diagonal shift");
  ising->add_option("--sstar", ip.sstar, "schedule point of the mapping");
  ising->add_option("--n", ip.n, "host qubit count");
  ising->add_option("--m", ip.m, "bits per spin in the well encoding");
  add_common(ising);

  wellgap::RandomBatchParams bp;
  auto* batch = app.add_subcommand("random-batch",
                                   "tb0 vs oracle over random instances");
  batch->add_option("--runs", bp.runs, "number of random instances");
  batch->add_option("--n-min", bp.n_min, "min qubits");
  batch->add_option("--n-max", bp.n_max, "max qubits");
  batch->add_option("--k-min", bp.k_min, "min wells");
  batch->add_option("--k-max", bp.k_max, "max wells");
  batch->add_option("--depth-min", bp.depth_min, "depth range low");
  batch->add_option("--depth-max", bp.depth_max, "depth range high");
  batch->add_option("--s-count", bp.s_count, "s grid size");
  batch->add_option("--seed", seed, "rng seed");
  add_common(batch);

  CLI11_PARSE(app, argc, argv);

  try {
    Output out(out_path);
    if (*solve) {
      wellgap::RunConfig cfg = wellgap::parse_config(read_file(config_path));
      if (epsilon_flag > 0) cfg.epsilon = epsilon_flag;
      auto rows = wellgap::run_sweep(cfg, jobs);
      wellgap::write_sweep_csv(out.stream(), rows);
    } else if (*grover) {
      gp.refine = !no_refine;
      if (epsilon_flag > 0) gp.epsilon = epsilon_flag;
      std::vector<wellgap::GroverRow> all;
      if (n_max > 0) {
        for (int n = n_min; n <= n_max; ++n) {
          auto p = gp;
          p.n = n;
          auto rows = wellgap::run_grover_prior(p, jobs);
          all.insert(all.end(), rows.begin(), rows.end());
        }
      } else {
        all = wellgap::run_grover_prior(gp, jobs);
      }
      wellgap::write_grover_csv(out.stream(), all);
    } else if (*ising) {
      if (epsilon_flag > 0) ip.epsilon = epsilon_flag;
      auto rep = wellgap::run_ising_map(ip);
      wellgap::write_ising_report(out.stream(), ip, rep);
      if (!rep.converged) {
        std::cerr << "ising-map: calibration did not converge (residual "
                  << rep.max_diag_residual << ")\n";
        return 2;
      }
    } else if (*batch) {
      bp.seed = seed;
      if (epsilon_flag > 0) bp.epsilon = epsilon_flag;
      auto res = wellgap::run_random_batch(bp, jobs);
      wellgap::write_batch_csv(out.stream(), res);
      std::cerr << "resolved=" << res.resolved_points << " within_bound="
                << res.within_bound << " fraction=" << res.fraction << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
