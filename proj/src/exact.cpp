#include "wellgap/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

#include "wellgap/geigen.hpp"

namespace wellgap {

namespace {

void fix_ground_sign(Eigen::MatrixXd& vectors) {
  if (vectors.cols() == 0) return;
  if (vectors.col(0).sum() < 0) vectors.col(0) = -vectors.col(0);
}

double driver_amp(Schedule driver, double s) { return schedule_eval(driver, s); }

}  // namespace

Eigen::MatrixXd radial_sector_matrix(int n, std::span<const WellSpec> wells,
                                     Schedule driver, double s, int sigma) {
  const int dim = n - 2 * sigma + 1;
  if (dim <= 0) throw std::invalid_argument("radial sector empty: sigma > n/2");
  const double a = driver_amp(driver, s);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
  for (int w = sigma; w <= n - sigma; ++w) {
    const int k = w - sigma;
    double v = 0.0;
    for (const auto& well : wells) v += potential_at(well, w, s, n);
    M(k, k) = v;
    if (w < n - sigma) {
      double c = ladder_coeffs(w, sigma, n).up;
      M(k, k + 1) = M(k + 1, k) = -a / n * c;
    }
  }
  return M;
}

namespace {

struct PairDiag {
  // Diagonal of the pair-sector operator at (h1, h2).
  const PairFrame& f;
  const WellSpec* wi;
  const WellSpec* wj;
  double s;
  int n;
  double operator()(int h1, int h2) const {
    double v = 0.0;
    if (wi) v += potential_at(*wi, h1 + h2, s, n);
    if (wj) v += potential_at(*wj, (f.n1 - h1) + h2, s, n);
    return v;
  }
};

}  // namespace

Eigen::MatrixXd pair_sector_matrix(const PairFrame& frame, const WellSpec* wi,
                                   const WellSpec* wj, Schedule driver, double s,
                                   int s1, int s2, const Eigen::VectorXd* extra_diag) {
  const int rows = pair_sector_rows(frame, s1), cols = pair_sector_cols(frame, s2);
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("pair sector empty");
  const int dim = rows * cols;
  if (extra_diag && extra_diag->size() != dim)
    throw std::invalid_argument("extra_diag size mismatch");
  const double a = driver_amp(driver, s);
  const int n = frame.n;
  PairDiag diag{frame, wi, wj, s, n};
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
  for (int h1 = s1; h1 <= frame.n1 - s1; ++h1) {
    for (int h2 = s2; h2 <= frame.n2 - s2; ++h2) {
      const int k = (h1 - s1) * cols + (h2 - s2);
      M(k, k) = diag(h1, h2) + (extra_diag ? (*extra_diag)[k] : 0.0);
      if (h1 < frame.n1 - s1) {
        double c = ladder_coeffs(h1, s1, frame.n1).up;
        M(k, k + cols) = M(k + cols, k) = -a / n * c;
      }
      if (h2 < frame.n2 - s2) {
        double c = ladder_coeffs(h2, s2, frame.n2).up;
        M(k, k + 1) = M(k + 1, k) = -a / n * c;
      }
    }
  }
  return M;
}

void pair_sector_apply(const PairFrame& frame, const WellSpec* wi, const WellSpec* wj,
                       Schedule driver, double s, int s1, int s2,
                       const Eigen::VectorXd* extra_diag,
                       const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  const int rows = pair_sector_rows(frame, s1), cols = pair_sector_cols(frame, s2);
  const int dim = rows * cols;
  const double a = driver_amp(driver, s);
  const int n = frame.n;
  PairDiag diag{frame, wi, wj, s, n};
  y.resize(dim);
  for (int h1 = s1; h1 <= frame.n1 - s1; ++h1) {
    for (int h2 = s2; h2 <= frame.n2 - s2; ++h2) {
      const int k = (h1 - s1) * cols + (h2 - s2);
      double acc = (diag(h1, h2) + (extra_diag ? (*extra_diag)[k] : 0.0)) * x[k];
      if (h1 < frame.n1 - s1)
        acc -= a / n * ladder_coeffs(h1, s1, frame.n1).up * x[k + cols];
      if (h1 > s1)
        acc -= a / n * ladder_coeffs(h1, s1, frame.n1).down * x[k - cols];
      if (h2 < frame.n2 - s2)
        acc -= a / n * ladder_coeffs(h2, s2, frame.n2).up * x[k + 1];
      if (h2 > s2)
        acc -= a / n * ladder_coeffs(h2, s2, frame.n2).down * x[k - 1];
      y[k] = acc;
    }
  }
}

Spectrum solve_single_well(int n, const WellSpec& well, double s, int sigma,
                           Schedule driver) {
  Eigen::MatrixXd M = radial_sector_matrix(n, std::span<const WellSpec>(&well, 1),
                                           driver, s, sigma);
  EigResult e = sym_eig(M);
  fix_ground_sign(e.vectors);
  return {e.values, e.vectors};
}

Spectrum solve_two_well(const ProblemInstance& inst, double s, int s1, int s2) {
  if (inst.num_wells() != 2) throw std::invalid_argument("solve_two_well: K != 2");
  PairFrame f = PairFrame::from_centers(inst.wells[0].center, inst.wells[1].center);
  Eigen::MatrixXd M = pair_sector_matrix(f, &inst.wells[0], &inst.wells[1],
                                         inst.driver_schedule, s, s1, s2);
  EigResult e = sym_eig(M);
  fix_ground_sign(e.vectors);
  return {e.values, e.vectors};
}

namespace {

struct TripleLayout {
  TripleFrame f;
  std::array<int, 4> sig;
  std::array<int, 4> lo, hi, dim;
  int total = 1;
  TripleLayout(const TripleFrame& fr, const std::array<int, 4>& sigma) : f(fr), sig(sigma) {
    const std::array<int, 4> sizes{f.n1p, f.n2p, f.n3p, f.n4p};
    for (int l = 0; l < 4; ++l) {
      lo[l] = sig[l];
      hi[l] = sizes[l] - sig[l];
      dim[l] = hi[l] - lo[l] + 1;
      if (dim[l] <= 0) throw std::invalid_argument("triple sector empty");
      total *= dim[l];
    }
  }
  int block_size(int l) const { return dim[l]; }
};

}  // namespace

Spectrum solve_three_well(const ProblemInstance& inst, double s,
                          const std::array<int, 4>& sigma) {
  if (inst.num_wells() != 3) throw std::invalid_argument("solve_three_well: K != 3");
  const auto& c0 = inst.wells[0].center;
  const auto& c1 = inst.wells[1].center;
  const auto& c2 = inst.wells[2].center;
  TripleFrame f = triple_frame(hamming_distance(c0, c1), hamming_distance(c0, c2),
                               hamming_distance(c1, c2), inst.n);
  if (!f.consistent) throw std::invalid_argument("solve_three_well: inconsistent triple");
  TripleLayout lay(f, sigma);
  const std::array<int, 4> sizes{f.n1p, f.n2p, f.n3p, f.n4p};
  const double a = inst.driver(s);
  const int n = inst.n;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(lay.total, lay.total);

  // strides for row-major (h1', h2', h3', h4')
  std::array<int, 4> stride;
  stride[3] = 1;
  for (int l = 2; l >= 0; --l) stride[l] = stride[l + 1] * lay.dim[l + 1];

  std::array<int, 4> h{};
  for (int idx = 0; idx < lay.total; ++idx) {
    int rem = idx;
    for (int l = 0; l < 4; ++l) {
      h[l] = lay.lo[l] + rem / stride[l] % lay.dim[l];
      rem %= stride[l];
    }
    // distances to the three wells in the relabeled frame
    const int r0 = (sizes[0] - h[0]) + h[1] + h[2] + h[3];
    const int r1 = h[0] + (sizes[1] - h[1]) + h[2] + h[3];
    const int r2 = h[0] + h[1] + (sizes[2] - h[2]) + h[3];
    M(idx, idx) = potential_at(inst.wells[0], r0, s, n) +
                  potential_at(inst.wells[1], r1, s, n) +
                  potential_at(inst.wells[2], r2, s, n);
    for (int l = 0; l < 4; ++l) {
      if (h[l] < lay.hi[l]) {
        double c = ladder_coeffs(h[l], sigma[l], sizes[l]).up;
        M(idx, idx + stride[l]) = M(idx + stride[l], idx) = -a / n * c;
      }
    }
  }
  EigResult e = sym_eig(M);
  fix_ground_sign(e.vectors);
  return {e.values, e.vectors};
}

namespace {

// Lowest m eigenvalues of a symmetric operator by Lanczos with full
// reorthogonalization. Restarts with a fresh random direction when the
// Krylov space closes early.
Eigen::VectorXd lanczos_lowest(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
                               int dim, int m, uint64_t seed = 12345) {
  const int max_iter = std::min(dim, std::max(220, 8 * m + 60));
  Eigen::MatrixXd V(dim, max_iter);
  std::vector<double> alpha, beta;  // beta[j] couples v_j and v_{j+1}
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_orth = [&](int j) {
    Eigen::VectorXd v(dim);
    for (int attempt = 0; attempt < 64; ++attempt) {
      for (int i = 0; i < dim; ++i) v[i] = gauss(gen);
      for (int c = 0; c < j; ++c) v -= V.col(c).dot(v) * V.col(c);
      double nrm = v.norm();
      if (nrm > 1e-8) return Eigen::VectorXd(v / nrm);
    }
    throw std::runtime_error("lanczos: cannot extend basis");
  };
  V.col(0) = random_orth(0);
  Eigen::VectorXd w(dim);
  Eigen::VectorXd prev_vals;
  int j = 0;
  for (; j < max_iter; ++j) {
    apply(V.col(j), w);
    double a = V.col(j).dot(w);
    alpha.push_back(a);
    if (j + 1 >= max_iter) break;
    w -= a * V.col(j);
    if (j > 0 && beta[static_cast<size_t>(j - 1)] != 0.0)
      w -= beta[static_cast<size_t>(j - 1)] * V.col(j - 1);
    // full reorthogonalization, twice for safety
    for (int pass = 0; pass < 2; ++pass)
      for (int c = 0; c <= j; ++c) w -= V.col(c).dot(w) * V.col(c);
    double b = w.norm();
    double scale = std::max(1.0, std::abs(a));
    if (b <= 1e-14 * scale) {
      // invariant subspace: deflate and continue on a fresh direction
      if (j + 1 >= dim) { ++j; break; }
      beta.push_back(0.0);
      V.col(j + 1) = random_orth(j + 1);
      continue;
    }
    beta.push_back(b);
    V.col(j + 1) = w / b;

    if ((j + 1) % 12 == 0 || j + 2 == max_iter) {
      const int k = j + 1;
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
      for (int i = 0; i < k; ++i) {
        T(i, i) = alpha[static_cast<size_t>(i)];
        if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[static_cast<size_t>(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
      Eigen::VectorXd vals = es.eigenvalues().head(std::min(m, k));
      if (prev_vals.size() == vals.size()) {
        double spread = std::max(1.0, std::abs(es.eigenvalues()[k - 1] - es.eigenvalues()[0]));
        if ((vals - prev_vals).cwiseAbs().maxCoeff() < 1e-14 * spread && k >= m) {
          prev_vals = vals;
          ++j;
          break;
        }
      }
      prev_vals = vals;
    }
  }
  const int k = std::min(j + 1, static_cast<int>(alpha.size()));
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    T(i, i) = alpha[static_cast<size_t>(i)];
    if (i + 1 < k && i < static_cast<int>(beta.size()))
      T(i, i + 1) = T(i + 1, i) = beta[static_cast<size_t>(i)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
  return es.eigenvalues().head(std::min(m, k));
}

std::vector<uint32_t> center_masks(const ProblemInstance& inst) {
  std::vector<uint32_t> masks;
  masks.reserve(inst.wells.size());
  for (const auto& w : inst.wells) {
    uint32_t mk = 0;
    for (int b = 0; b < inst.n; ++b)
      if (w.center.bits[static_cast<size_t>(b)]) mk |= uint32_t(1) << b;
    masks.push_back(mk);
  }
  return masks;
}

}  // namespace

Spectrum brute_force_spectrum(const ProblemInstance& inst, double s, int m,
                              bool want_vectors) {
  if (inst.n > 16) throw std::invalid_argument("brute force capped at n <= 16");
  if (m < 1) throw std::invalid_argument("need m >= 1 eigenvalues");
  const int n = inst.n;
  const uint32_t N = uint32_t(1) << n;
  const double a = inst.driver(s);
  const auto masks = center_masks(inst);

  Eigen::VectorXd diag(N);
  for (uint32_t x = 0; x < N; ++x) {
    double v = 0.0;
    for (size_t k = 0; k < masks.size(); ++k)
      v += potential_at(inst.wells[k], std::popcount(x ^ masks[k]), s, n);
    diag[x] = v;
  }

  if (a == 0.0 && !want_vectors) {
    // purely diagonal Hamiltonian
    std::vector<double> d(diag.data(), diag.data() + N);
    const int mm = std::min<int>(m, static_cast<int>(N));
    std::partial_sort(d.begin(), d.begin() + mm, d.end());
    Eigen::VectorXd vals(mm);
    for (int i = 0; i < mm; ++i) vals[i] = d[static_cast<size_t>(i)];
    return {vals, {}};
  }

  if (n <= 9 || want_vectors) {
    if (want_vectors && n > 12)
      throw std::invalid_argument("brute-force eigenvectors limited to n <= 12");
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(N, N);
    for (uint32_t x = 0; x < N; ++x) {
      H(x, x) = diag[x];
      for (int b = 0; b < n; ++b) H(x, x ^ (uint32_t(1) << b)) = -a / n;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    if (want_vectors) {
      es.compute(H);
      const int mm = std::min<int>(m, static_cast<int>(N));
      return {es.eigenvalues().head(mm), es.eigenvectors().leftCols(mm)};
    }
    es.compute(H, Eigen::EigenvaluesOnly);
    return {es.eigenvalues().head(std::min<int>(m, static_cast<int>(N))), {}};
  }

  auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    y.resize(N);
    const double t = -a / n;
    for (uint32_t i = 0; i < N; ++i) {
      double acc = diag[i] * x[i];
      for (int b = 0; b < n; ++b) acc += t * x[i ^ (uint32_t(1) << b)];
      y[i] = acc;
    }
  };
  return {lanczos_lowest(apply, static_cast<int>(N), m), {}};
}

namespace {

double lowest_of_radial(const ProblemInstance& inst, double s, int sigma, int which,
                        bool second) {
  // which = well index, or -1 for no potential (K=0)
  std::span<const WellSpec> span =
      which >= 0 ? std::span<const WellSpec>(&inst.wells[size_t(which)], 1)
                 : std::span<const WellSpec>();
  Eigen::MatrixXd M = radial_sector_matrix(inst.n, span, inst.driver_schedule, s, sigma);
  if (M.rows() < (second ? 2 : 1)) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[second ? 1 : 0];
}

LowestTwo radial_lowest_two(const ProblemInstance& inst, double s, int which) {
  double e0 = lowest_of_radial(inst, s, 0, which, false);
  double e1 = lowest_of_radial(inst, s, 0, which, true);
  if (inst.n >= 2) e1 = std::min(e1, lowest_of_radial(inst, s, 1, which, false));
  return {e0, e1};
}

// lowest one/two eigenvalues of a pair sector, iterative above the dense cutoff
Eigen::VectorXd pair_sector_lowest(const PairFrame& f, const WellSpec* wi,
                                   const WellSpec* wj, Schedule driver, double s,
                                   int s1, int s2, int m) {
  const int dim = pair_sector_dim(f, s1, s2);
  if (dim <= 600) {
    Eigen::MatrixXd M = pair_sector_matrix(f, wi, wj, driver, s, s1, s2);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().head(std::min(m, dim));
  }
  auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    pair_sector_apply(f, wi, wj, driver, s, s1, s2, nullptr, x, y);
  };
  return lanczos_lowest(apply, dim, m);
}

}  // namespace

LowestTwo exact_two_well_lowest(const ProblemInstance& inst, double s) {
  if (inst.num_wells() <= 1)
    return radial_lowest_two(inst, s, inst.num_wells() == 1 ? 0 : -1);
  if (inst.num_wells() != 2) throw std::invalid_argument("exact_two_well_lowest: K > 2");
  PairFrame f = PairFrame::from_centers(inst.wells[0].center, inst.wells[1].center);
  const WellSpec* wi = &inst.wells[0];
  const WellSpec* wj = &inst.wells[1];
  Eigen::VectorXd zz = pair_sector_lowest(f, wi, wj, inst.driver_schedule, s, 0, 0, 2);
  double e0 = zz[0];
  double e1 = zz.size() > 1 ? zz[1] : std::numeric_limits<double>::infinity();
  if (f.n1 >= 2)
    e1 = std::min(e1, pair_sector_lowest(f, wi, wj, inst.driver_schedule, s, 1, 0, 1)[0]);
  if (f.n2 >= 2)
    e1 = std::min(e1, pair_sector_lowest(f, wi, wj, inst.driver_schedule, s, 0, 1, 1)[0]);
  return {e0, e1};
}

LowestTwo exact_lowest_two(const ProblemInstance& inst, double s) {
  const int K = inst.num_wells();
  if (K <= 2) return exact_two_well_lowest(inst, s);
  if (K != 3) throw std::invalid_argument("exact solver supports K <= 3");
  Spectrum zeros = solve_three_well(inst, s, {0, 0, 0, 0});
  double e0 = zeros.values[0];
  double e1 = zeros.values.size() > 1 ? zeros.values[1]
                                      : std::numeric_limits<double>::infinity();
  const auto& c0 = inst.wells[0].center;
  const auto& c1 = inst.wells[1].center;
  const auto& c2 = inst.wells[2].center;
  TripleFrame f = triple_frame(hamming_distance(c0, c1), hamming_distance(c0, c2),
                               hamming_distance(c1, c2), inst.n);
  const std::array<int, 4> sizes{f.n1p, f.n2p, f.n3p, f.n4p};
  for (int l = 0; l < 4; ++l) {
    if (sizes[l] < 2) continue;
    std::array<int, 4> sig{0, 0, 0, 0};
    sig[l] = 1;
    e1 = std::min(e1, solve_three_well(inst, s, sig).values[0]);
  }
  return {e0, e1};
}

}  // namespace wellgap
