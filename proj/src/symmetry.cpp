#include "wellgap/symmetry.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace wellgap {

int hamming_distance(const BitString& x, const BitString& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("hamming_distance: length mismatch");
  int d = 0;
  for (size_t i = 0; i < x.bits.size(); ++i) d += x.bits[i] != y.bits[i];
  return d;
}

Ladder ladder_coeffs(int w, int sigma, int n) {
  if (w < sigma || w > n - sigma)
    throw std::out_of_range("ladder_coeffs: w outside [sigma, n-sigma]");
  Ladder c;
  c.up = std::sqrt(double(w - sigma + 1) * double(n - sigma - w));
  c.down = std::sqrt(double(w - sigma) * double(n - sigma - w + 1));
  return c;
}

BinomTable::BinomTable(int nmax) : nmax_(nmax) {
  lgamma_.resize(static_cast<size_t>(nmax) + 1);
  for (int i = 0; i <= nmax; ++i) lgamma_[static_cast<size_t>(i)] = std::lgamma(double(i) + 1.0);
}

double BinomTable::log_binom(int n, int k) const {
  if (k < 0 || k > n || n > nmax_)
    return -std::numeric_limits<double>::infinity();
  return lgamma_[size_t(n)] - lgamma_[size_t(k)] - lgamma_[size_t(n - k)];
}

double BinomTable::binom(int n, int k) const { return std::exp(log_binom(n, k)); }

const BinomTable& binom_table(int nmax) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<BinomTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[nmax];
  if (!slot) slot = std::make_unique<BinomTable>(nmax);
  return *slot;
}

PairFrame PairFrame::from_centers(const BitString& ci, const BitString& cj) {
  if (ci.size() != cj.size())
    throw std::invalid_argument("pair_frame: center length mismatch");
  if (ci == cj) throw std::invalid_argument("pair_frame: identical centers");
  PairFrame f;
  f.n = ci.size();
  f.mask.resize(ci.bits.size());
  for (size_t p = 0; p < ci.bits.size(); ++p) {
    f.mask[p] = ci.bits[p] != cj.bits[p];
    f.n1 += f.mask[p];
  }
  f.n2 = f.n - f.n1;
  return f;
}

std::pair<int, int> PairFrame::locate(const BitString& ck, const BitString& ci) const {
  if (ck.size() != n || ci.size() != n)
    throw std::invalid_argument("pair_frame locate: length mismatch");
  int h1 = 0, h2 = 0;
  for (size_t p = 0; p < mask.size(); ++p) {
    if (ck.bits[p] != ci.bits[p]) (mask[p] ? h1 : h2) += 1;
  }
  return {h1, h2};
}

TripleFrame triple_frame(int n1, int Rik, int Rjk, int n) {
  TripleFrame f;
  if (n1 < 0 || Rik < 0 || Rjk < 0 || n1 > n || Rik > n || Rjk > n)
    throw std::out_of_range("triple_frame: distances outside [0,n]");
  int a = n1 + Rik - Rjk;
  int c = Rik + Rjk - n1;
  if (a % 2 != 0 || c % 2 != 0) return f;  // parity violation
  f.n1p = a / 2;
  f.n2p = n1 - f.n1p;
  f.n3p = c / 2;
  f.n4p = n - f.n1p - f.n2p - f.n3p;
  f.consistent = f.n1p >= 0 && f.n2p >= 0 && f.n3p >= 0 && f.n4p >= 0;
  return f;
}

namespace {

// Constants of the Diophantine system: with h2' = h1' + c2, h3' = h1' + c3,
// h4' = c4 - h1', the sphere equations hold identically. Returns false when
// parity admits no solution.
bool diophantine_offsets(const TripleFrame& f, int ri, int rj, int rk,
                         int& c2, int& c3, int& c4) {
  int a2 = ri - rj - f.n1p + f.n2p;
  int a3 = ri - rk - f.n1p + f.n3p;
  int a4 = rj + rk - f.n2p - f.n3p;
  if (a2 % 2 != 0 || a3 % 2 != 0) return false;
  c2 = a2 / 2;
  c3 = a3 / 2;
  c4 = a4 / 2;  // even whenever a2, a3 are
  return true;
}

void check_count_args(int h1, int h2, const TripleFrame& frame, int rk) {
  if (!frame.consistent)
    throw std::invalid_argument("count_triple_intersections: inconsistent frame");
  if (h1 < 0 || h1 > frame.n1() || h2 < 0 || h2 > frame.n() - frame.n1() ||
      rk < 0 || rk > frame.n())
    throw std::out_of_range("count_triple_intersections: input out of range");
}

}  // namespace

double count_triple_intersections(int h1, int h2, const TripleFrame& frame, int rk) {
  check_count_args(h1, h2, frame, rk);
  const int ri = h1 + h2;
  const int rj = (frame.n1() - h1) + h2;
  int c2, c3, c4;
  if (!diophantine_offsets(frame, ri, rj, rk, c2, c3, c4)) return 0.0;
  const BinomTable& bt = binom_table(frame.n());
  double total = 0.0;
  for (int h1p = 0; h1p <= frame.n1p; ++h1p) {
    int h2p = h1p + c2, h3p = h1p + c3, h4p = c4 - h1p;
    if (h2p < 0 || h2p > frame.n2p || h3p < 0 || h3p > frame.n3p ||
        h4p < 0 || h4p > frame.n4p)
      continue;
    total += std::exp(bt.log_binom(frame.n1p, h1p) + bt.log_binom(frame.n2p, h2p) +
                      bt.log_binom(frame.n3p, h3p) + bt.log_binom(frame.n4p, h4p));
  }
  return total;
}

uint64_t count_triple_intersections_exact(int h1, int h2, const TripleFrame& frame, int rk) {
  check_count_args(h1, h2, frame, rk);
  const int ri = h1 + h2;
  const int rj = (frame.n1() - h1) + h2;
  int c2, c3, c4;
  if (!diophantine_offsets(frame, ri, rj, rk, c2, c3, c4)) return 0;
  auto ibinom = [](int n, int k) -> uint64_t {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * uint64_t(n - k + i) / uint64_t(i);
    return r;
  };
  uint64_t total = 0;
  for (int h1p = 0; h1p <= frame.n1p; ++h1p) {
    int h2p = h1p + c2, h3p = h1p + c3, h4p = c4 - h1p;
    if (h2p < 0 || h2p > frame.n2p || h3p < 0 || h3p > frame.n3p ||
        h4p < 0 || h4p > frame.n4p)
      continue;
    total += ibinom(frame.n1p, h1p) * ibinom(frame.n2p, h2p) *
             ibinom(frame.n3p, h3p) * ibinom(frame.n4p, h4p);
  }
  return total;
}

Eigen::VectorXd radial_to_pair(const Eigen::VectorXd& phi, const PairFrame& frame,
                               bool from_well_i) {
  const int n = frame.n, n1 = frame.n1, n2 = frame.n2;
  if (phi.size() != n + 1)
    throw std::invalid_argument("radial_to_pair: profile length != n+1");
  if (std::abs(phi.squaredNorm() - 1.0) > 1e-10)
    throw std::invalid_argument("radial_to_pair: profile not normalized");
  const BinomTable& bt = binom_table(n);
  Eigen::VectorXd out((n1 + 1) * (n2 + 1));
  for (int h1 = 0; h1 <= n1; ++h1) {
    for (int h2 = 0; h2 <= n2; ++h2) {
      int r = from_well_i ? h1 + h2 : (n1 - h1) + h2;
      double w = std::exp(0.5 * (bt.log_binom(n1, h1) + bt.log_binom(n2, h2) -
                                 bt.log_binom(n, r)));
      out[h1 * (n2 + 1) + h2] = phi[r] * w;
    }
  }
  return out;
}

}  // namespace wellgap
