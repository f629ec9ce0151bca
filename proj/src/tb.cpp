#include "wellgap/tb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "wellgap/exact.hpp"
#include "wellgap/geigen.hpp"

namespace wellgap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int schedule_slot(Schedule t) {
  switch (t) {
    case Schedule::RampUp: return 0;
    case Schedule::RampDown: return 1;
    case Schedule::Constant: return 2;
  }
  return 0;
}

// distance from the frame's k-side well at cell (h1, h2), seen from the side
// the state was expanded on
inline int partner_distance(const PairFrame& f, bool state_on_i_side, int h1, int h2) {
  return state_on_i_side ? (f.n1 - h1) + h2 : h1 + h2;
}

}  // namespace

int TBGeometry::pidx(int i, int j) const {
  if (i > j) std::swap(i, j);
  return i * K_ - i * (i + 1) / 2 + (j - i - 1);
}

TBGeometry::TBGeometry(const ProblemInstance& inst) : K_(inst.num_wells()) {
  has_vc_ = K_ > 2;
  frames_.reserve(static_cast<size_t>(K_) * (K_ - 1) / 2);
  if (has_vc_) weights_.resize(static_cast<size_t>(K_) * (K_ - 1) / 2);
  const BinomTable& bt = binom_table(inst.n);
  for (int i = 0; i < K_; ++i) {
    for (int j = i + 1; j < K_; ++j) {
      PairFrame f = PairFrame::from_centers(inst.wells[size_t(i)].center,
                                            inst.wells[size_t(j)].center);
      const int idx = pidx(i, j);
      if (has_vc_) {
        const int n1 = f.n1, n2 = f.n2, dim = (n1 + 1) * (n2 + 1);
        auto& wtab = weights_[size_t(idx)];
        for (int k = 0; k < K_; ++k) {
          if (k == i || k == j) continue;
          const auto& wk = inst.wells[size_t(k)];
          TripleFrame tf = triple_frame(
              n1, hamming_distance(inst.wells[size_t(i)].center, wk.center),
              hamming_distance(inst.wells[size_t(j)].center, wk.center), inst.n);
          // step wells only contribute rk <= radius
          int rk_max = inst.n;
          if (const auto* sw = std::get_if<StepWell>(&wk.profile)) rk_max = sw->radius;
          Eigen::VectorXd& w = wtab[size_t(schedule_slot(wk.schedule))];
          if (w.size() == 0) w = Eigen::VectorXd::Zero(dim);
          for (int h1 = 0; h1 <= n1; ++h1) {
            for (int h2 = 0; h2 <= n2; ++h2) {
              double acc = 0.0;
              for (int rk = 0; rk <= rk_max; ++rk) {
                double cnt = count_triple_intersections(h1, h2, tf, rk);
                if (cnt != 0.0) acc += cnt * profile_value(wk.profile, rk);
              }
              if (acc != 0.0)
                w[h1 * (n2 + 1) + h2] +=
                    acc / (bt.binom(n1, h1) * bt.binom(n2, h2));
            }
          }
        }
      }
      frames_.push_back(std::move(f));
    }
  }
}

const PairFrame& TBGeometry::frame(int i, int j) const {
  return frames_[size_t(pidx(i, j))];
}

Eigen::VectorXd TBGeometry::vc_diag(int i, int j, double s) const {
  const PairFrame& f = frame(i, j);
  const int dim = (f.n1 + 1) * (f.n2 + 1);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
  if (!has_vc_) return out;
  const auto& wtab = weights_[size_t(pidx(i, j))];
  const Schedule tags[3] = {Schedule::RampUp, Schedule::RampDown, Schedule::Constant};
  for (int t = 0; t < 3; ++t)
    if (wtab[size_t(t)].size() != 0)
      out += schedule_eval(tags[t], s) * wtab[size_t(t)];
  return out;
}

namespace {

// isolated radial solve: values + vectors of one sigma block
Spectrum isolated_radial(const ProblemInstance& inst, int well, double s, int sigma) {
  return solve_single_well(inst.n, inst.wells[size_t(well)], s, sigma,
                           inst.driver_schedule);
}

// asymptotic floor of the isolated-well problem: free-driver band bottom plus
// the potential far from the well
double bound_floor(const ProblemInstance& inst, int well, double s) {
  const auto& w = inst.wells[size_t(well)];
  return -inst.driver(s) + schedule_eval(w.schedule, s) * profile_value(w.profile, inst.n);
}

// isolated ground state of `well` solved in the K=2 pair frame sector
BoundState sector_representative(const ProblemInstance& inst, const PairFrame& f,
                                 int well, double s, int s1, int s2) {
  const WellSpec* wi = well == 0 ? &inst.wells[0] : nullptr;
  const WellSpec* wj = well == 1 ? &inst.wells[1] : nullptr;
  Eigen::MatrixXd M = pair_sector_matrix(f, wi, wj, inst.driver_schedule, s, s1, s2);
  EigResult e = sym_eig(M);
  Eigen::VectorXd v = e.vectors.col(0);
  if (v.sum() < 0) v = -v;
  BoundState st;
  st.well = well;
  st.order = 1;
  st.sigma = 1;
  st.sector_s1 = s1;
  st.sector_s2 = s2;
  st.sector_vec = std::move(v);
  st.energy = e.values[0];
  return st;
}

}  // namespace

std::vector<BoundState> isolated_well_states(const ProblemInstance& inst, int well,
                                             double s, int order) {
  if (well < 0 || well >= inst.num_wells())
    throw std::out_of_range("isolated_well_states: bad well index");
  std::vector<BoundState> out;
  Spectrum s0 = isolated_radial(inst, well, s, 0);
  BoundState g;
  g.well = well;
  g.order = 0;
  g.sigma = 0;
  g.radial = s0.vectors.col(0);
  g.energy = s0.values[0];
  out.push_back(std::move(g));
  if (order == 0) return out;

  const double floor = bound_floor(inst, well, s);
  double e_s0_2nd = s0.values.size() > 1 ? s0.values[1]
                                         : std::numeric_limits<double>::infinity();
  double e_s1 = std::numeric_limits<double>::infinity();
  if (inst.n >= 2)
    e_s1 = sym_eig(radial_sector_matrix(
                       inst.n, std::span<const WellSpec>(&inst.wells[size_t(well)], 1),
                       inst.driver_schedule, s, 1))
               .values[0];

  if (e_s1 < e_s0_2nd) {
    if (e_s1 >= floor) return out;  // not tightly bound
    if (inst.num_wells() == 2) {
      PairFrame f = PairFrame::from_centers(inst.wells[0].center, inst.wells[1].center);
      if (f.n1 >= 2) out.push_back(sector_representative(inst, f, well, s, 1, 0));
      if (f.n2 >= 2) out.push_back(sector_representative(inst, f, well, s, 0, 1));
    } else {
      BoundState marker;
      marker.well = well;
      marker.order = 1;
      marker.sigma = 1;
      marker.energy = e_s1;
      out.push_back(std::move(marker));
    }
  } else {
    if (e_s0_2nd >= floor) return out;
    BoundState x;
    x.well = well;
    x.order = 1;
    x.sigma = 0;
    x.radial = s0.vectors.col(1);
    x.energy = e_s0_2nd;
    out.push_back(std::move(x));
  }
  return out;
}

namespace {

// cross-well potential expectation <a| b_k V_k |b> for radial states a, b of
// the same well, evaluated in the (well, k) pair frame
double cross_potential(const ProblemInstance& inst, const TBGeometry& geom,
                       const BoundState& a, const BoundState& b, int k, double s) {
  const int w = a.well;
  const PairFrame& f = geom.frame(w, k);
  const bool on_i = w < k;
  Eigen::VectorXd ca = radial_to_pair(a.radial, f, on_i);
  Eigen::VectorXd cb = (&a == &b) ? ca : radial_to_pair(b.radial, f, on_i);
  const auto& wk = inst.wells[size_t(k)];
  double acc = 0.0;
  for (int h1 = 0; h1 <= f.n1; ++h1)
    for (int h2 = 0; h2 <= f.n2; ++h2) {
      const int idx = h1 * (f.n2 + 1) + h2;
      acc += ca[idx] * cb[idx] *
             potential_at(wk, partner_distance(f, on_i, h1, h2), s, inst.n);
    }
  return acc;
}

// radial-radial element pair for states of different wells, in their frame
struct ElementPair {
  double h, s;
};
ElementPair radial_pair_element(const ProblemInstance& inst, const TBGeometry& geom,
                                const BoundState& a, const BoundState& b, double s) {
  const int i = std::min(a.well, b.well), j = std::max(a.well, b.well);
  const PairFrame& f = geom.frame(i, j);
  Eigen::VectorXd ca = radial_to_pair(a.radial, f, a.well == i);
  Eigen::VectorXd cb = radial_to_pair(b.radial, f, b.well == i);
  Eigen::VectorXd vc;
  const Eigen::VectorXd* vcp = nullptr;
  if (geom.has_vc()) {
    vc = geom.vc_diag(i, j, s);
    vcp = &vc;
  }
  Eigen::VectorXd t(ca.size());
  pair_sector_apply(f, &inst.wells[size_t(i)], &inst.wells[size_t(j)],
                    inst.driver_schedule, s, 0, 0, vcp, cb, t);
  double hij = ca.dot(t);
  pair_sector_apply(f, &inst.wells[size_t(i)], &inst.wells[size_t(j)],
                    inst.driver_schedule, s, 0, 0, vcp, ca, t);
  double hji = cb.dot(t);
  return {0.5 * (hij + hji), ca.dot(cb)};
}

double radial_element_h(const ProblemInstance& inst, const TBGeometry& geom,
                        const BoundState& a, const BoundState& b, double s) {
  if (a.well == b.well) {
    double h = (a.order == b.order) ? a.energy : 0.0;
    for (int k = 0; k < inst.num_wells(); ++k)
      if (k != a.well) h += cross_potential(inst, geom, a, b, k, s);
    return h;
  }
  return radial_pair_element(inst, geom, a, b, s).h;
}

ElementPair sector_pair_element(const ProblemInstance& inst, const PairFrame& f,
                                const BoundState& a, const BoundState& b, double s) {
  Eigen::VectorXd t(a.sector_vec.size());
  pair_sector_apply(f, &inst.wells[0], &inst.wells[1], inst.driver_schedule, s,
                    a.sector_s1, a.sector_s2, nullptr, b.sector_vec, t);
  double hij = a.sector_vec.dot(t);
  pair_sector_apply(f, &inst.wells[0], &inst.wells[1], inst.driver_schedule, s,
                    a.sector_s1, a.sector_s2, nullptr, a.sector_vec, t);
  double hji = b.sector_vec.dot(t);
  return {0.5 * (hij + hji), a.sector_vec.dot(b.sector_vec)};
}

}  // namespace

TBSystem assemble_tb(const ProblemInstance& inst, double s, int order,
                     const TBGeometry* geom_in) {
  if (inst.num_wells() < 1)
    throw std::invalid_argument("assemble_tb: needs at least one well");
  if (order != 0 && order != 1) throw std::invalid_argument("assemble_tb: order 0|1");
  std::optional<TBGeometry> local;
  if (!geom_in) local.emplace(inst);
  const TBGeometry& geom = geom_in ? *geom_in : *local;
  const int K = inst.num_wells();

  TBSystem sys;
  sys.s = s;
  sys.order = order;

  std::vector<int> radial_idx;
  std::vector<int> sigma1_idx;
  for (int w = 0; w < K; ++w) {
    for (auto& st : isolated_well_states(inst, w, s, order)) {
      if (st.sigma == 0) {
        radial_idx.push_back(static_cast<int>(sys.states.size()));
        sys.states.push_back(std::move(st));
      } else if (K == 2 && st.sector_vec.size() > 0) {
        sigma1_idx.push_back(static_cast<int>(sys.states.size()));
        sys.states.push_back(std::move(st));
      } else if (K == 1) {
        // exact 1x1 block: the sigma=1 multiplet of a single isolated well
        TBBlock blk;
        blk.s1 = blk.s2 = -1;
        blk.multiplicity = std::max(1, inst.n - 1);
        blk.states = {static_cast<int>(sys.states.size())};
        blk.H = Eigen::MatrixXd::Constant(1, 1, st.energy);
        blk.S = Eigen::MatrixXd::Identity(1, 1);
        sys.states.push_back(std::move(st));
        sys.blocks.push_back(std::move(blk));
      } else {
        sys.sigma1_skipped = true;  // K > 2: no cross-frame representation
      }
    }
  }

  // radial block: all sigma=0 states, elements exact within the span
  {
    TBBlock blk;
    blk.s1 = blk.s2 = 0;
    blk.multiplicity = 1;
    blk.states = radial_idx;
    const int d = static_cast<int>(radial_idx.size());
    blk.H.resize(d, d);
    blk.S.resize(d, d);
    for (int p = 0; p < d; ++p) {
      const BoundState& a = sys.states[size_t(radial_idx[size_t(p)])];
      for (int r = p; r < d; ++r) {
        const BoundState& b = sys.states[size_t(radial_idx[size_t(r)])];
        double hv, sv;
        if (a.well == b.well) {
          hv = radial_element_h(inst, geom, a, b, s);
          sv = (p == r) ? 1.0 : 0.0;
        } else {
          ElementPair e = radial_pair_element(inst, geom, a, b, s);
          hv = e.h;
          sv = e.s;
        }
        blk.H(p, r) = blk.H(r, p) = hv;
        blk.S(p, r) = blk.S(r, p) = sv;
      }
    }
    sys.blocks.push_back(std::move(blk));
  }

  // K=2 sigma=1 sector blocks
  if (!sigma1_idx.empty()) {
    const PairFrame& f = geom.frame(0, 1);
    for (auto [s1, s2] : {std::pair{1, 0}, std::pair{0, 1}}) {
      std::vector<int> members;
      for (int idx : sigma1_idx) {
        const auto& st = sys.states[size_t(idx)];
        if (st.sector_s1 == s1 && st.sector_s2 == s2) members.push_back(idx);
      }
      if (members.empty()) continue;
      TBBlock blk;
      blk.s1 = s1;
      blk.s2 = s2;
      blk.multiplicity = s1 == 1 ? f.n1 - 1 : f.n2 - 1;
      blk.states = members;
      const int d = static_cast<int>(members.size());
      blk.H.resize(d, d);
      blk.S.resize(d, d);
      for (int p = 0; p < d; ++p)
        for (int r = p; r < d; ++r) {
          ElementPair e = sector_pair_element(inst, f, sys.states[size_t(members[size_t(p)])],
                                              sys.states[size_t(members[size_t(r)])], s);
          blk.H(p, r) = blk.H(r, p) = e.h;
          blk.S(p, r) = blk.S(r, p) = e.s;
        }
      sys.blocks.push_back(std::move(blk));
    }
  }
  return sys;
}

double tb_overlap(const BoundState& a, const BoundState& b, const PairFrame& frame) {
  if (a.sigma == 0 && b.sigma == 0) {
    Eigen::VectorXd ca = radial_to_pair(a.radial, frame, true);
    Eigen::VectorXd cb = radial_to_pair(b.radial, frame, false);
    return ca.dot(cb);
  }
  if (a.sigma != b.sigma) return 0.0;  // orthogonal symmetry sectors
  if (a.sector_s1 != b.sector_s1 || a.sector_s2 != b.sector_s2) return 0.0;
  if (a.sector_vec.size() != b.sector_vec.size())
    throw std::invalid_argument("tb_overlap: frame mismatch");
  return a.sector_vec.dot(b.sector_vec);
}

double tb_h_element(const BoundState& a, const BoundState& b,
                    const ProblemInstance& inst, double s) {
  TBGeometry geom(inst);
  if (a.sigma == 0 && b.sigma == 0) return radial_element_h(inst, geom, a, b, s);
  if (a.sigma != b.sigma) return 0.0;
  if (a.sector_s1 != b.sector_s1 || a.sector_s2 != b.sector_s2) return 0.0;
  if (inst.num_wells() != 2)
    throw std::invalid_argument("tb_h_element: sector states need K = 2");
  const PairFrame& f = geom.frame(0, 1);
  return sector_pair_element(inst, f, a, b, s).h;
}

double tb_error_estimate(const ProblemInstance& inst, double s,
                         const std::vector<BoundState>& grounds) {
  TBGeometry geom(inst);
  double total = 0.0;
  for (const auto& g : grounds) {
    const auto& w = inst.wells[size_t(g.well)];
    double own = 0.0;
    for (int r = 0; r <= inst.n; ++r)
      own += g.radial[r] * g.radial[r] * potential_at(w, r, s, inst.n);
    double t = g.energy - own;
    for (int k = 0; k < inst.num_wells(); ++k)
      if (k != g.well) t += cross_potential(inst, geom, g, g, k, s);
    total += t * t;
  }
  return std::sqrt(total);
}

TBDiagnostics tb_solve(const ProblemInstance& inst, double s, int order, double epsilon,
                       const TBGeometry* geom_in) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("tb_solve: epsilon in (0,1)");
  std::optional<TBGeometry> local;
  if (!geom_in) local.emplace(inst);
  const TBGeometry& geom = geom_in ? *geom_in : *local;

  TBSystem sys = assemble_tb(inst, s, order, &geom);

  std::vector<BoundState> grounds;
  for (const auto& st : sys.states)
    if (st.order == 0) grounds.push_back(st);
  double est = tb_error_estimate(inst, s, grounds);

  struct Entry {
    double value;
    int multiplicity;
  };
  std::vector<Entry> entries;
  int stable = 0;
  for (const auto& blk : sys.blocks) {
    PencilResult pr = fix_heiberger(blk.H, blk.S, epsilon);
    stable += pr.stable_dim * blk.multiplicity;
    for (int i = 0; i < pr.values.size(); ++i)
      entries.push_back({pr.values[i], blk.multiplicity});
  }
  if (entries.empty())
    throw std::runtime_error("degenerate overlap: all dimensions deflated");
  std::sort(entries.begin(), entries.end(),
            [](const Entry& x, const Entry& y) { return x.value < y.value; });

  TBDiagnostics d;
  d.sigma1_skipped = sys.sigma1_skipped;
  d.stable_dim = stable;
  d.error_estimate = est;
  d.e0 = entries[0].value;
  if (entries[0].multiplicity > 1)
    d.e1 = entries[0].value;
  else if (entries.size() > 1)
    d.e1 = entries[1].value;
  else
    d.e1 = kNaN;
  d.gamma_tilde = d.e1 - d.e0 - std::sqrt(2.0) * est;
  d.resolved = d.gamma_tilde > 0.0;
  return d;
}

}  // namespace wellgap
