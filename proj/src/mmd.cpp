#include "hdmmd/mmd.hpp"

#include "hdmmd/error.hpp"
#include "hdmmd/normal.hpp"
#include "hdmmd/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace hdmmd {

namespace {

// Fixed tile height. Results depend on the tiling, never on the thread count.
constexpr long kTileRows = 128;

struct Segment {
  int sample;  // 0 = X, 1 = Y
  long begin;  // row within its own sample
  long len;
  long pooled;  // row within [X; Y]
};

struct Tile {
  int a;
  int b;  // a <= b
};

struct TileSum {
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;
};

struct KernelSums {
  double xx = 0.0;  // sum over i < i'
  double yy = 0.0;  // sum over j < j'
  double xy = 0.0;  // sum over all (i, j)
};

std::vector<Segment> make_segments(long n, long m) {
  std::vector<Segment> segs;
  for (long b = 0; b < n; b += kTileRows) segs.push_back({0, b, std::min(kTileRows, n - b), b});
  for (long b = 0; b < m; b += kTileRows) segs.push_back({1, b, std::min(kTileRows, m - b), n + b});
  return segs;
}

std::vector<Tile> make_tiles(const std::vector<Segment>& segs) {
  std::vector<Tile> tiles;
  const int k = static_cast<int>(segs.size());
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) tiles.push_back({a, b});
  }
  return tiles;
}

RowMatrix tile_product(const RowMatrix& a, long a_begin, long a_len, const RowMatrix& b, long b_begin, long b_len) {
  RowMatrix g(a_len, b_len);
  g.noalias() = a.middleRows(a_begin, a_len) * b.middleRows(b_begin, b_len).transpose();
  return g;
}

// Sums k(d) over the tile; `gram(i, j)` yields the inner product of local rows.
template <class G, class F>
double sum_tile(const G& gram, const double* norm_a, const double* norm_b, long rows, long cols, bool diagonal,
                F&& k_of_sqdist) {
  double total = 0.0;
  for (long i = 0; i < rows; ++i) {
    double row_total = 0.0;
    for (long j = diagonal ? i + 1 : 0; j < cols; ++j) {
      const double d = std::max(0.0, norm_a[i] + norm_b[j] - 2.0 * gram(i, j));
      row_total += k_of_sqdist(d);
    }
    total += row_total;
  }
  return total;
}

template <class Fn>
decltype(auto) with_kernel(const KernelSpec& kernel, Fn&& fn) {
  kernel.validate();
  const double inv = 1.0 / kernel.bandwidth;
  switch (kernel.family) {
    case KernelFamily::Gaussian:
      return fn([inv](double d) { return std::exp(-d * inv); });
    case KernelFamily::Laplace:
      return fn([inv](double d) { return std::exp(-std::sqrt(d * inv)); });
    case KernelFamily::RationalQuadratic: {
      const double alpha = kernel.rq_alpha;
      return fn([inv, alpha](double d) { return std::pow(1.0 + d * inv, -alpha); });
    }
    case KernelFamily::Energy:
      return fn([inv](double d) { return -std::sqrt(d * inv); });
  }
  fail(ErrorCode::InvalidArgument, "unknown kernel family");
}

double combine(const KernelSums& s, long n, long m) {
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return 2.0 * s.xx / (dn * (dn - 1.0)) + 2.0 * s.yy / (dm * (dm - 1.0)) - 2.0 * s.xy / (dn * dm);
}

KernelSums reduce(const std::vector<Tile>& tiles, const std::vector<TileSum>& parts) {
  KernelSums s;
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    s.xx += parts[t].xx;
    s.yy += parts[t].yy;
    s.xy += parts[t].xy;
  }
  return s;
}

void add_to(TileSum& part, int sample_a, int sample_b, double value) {
  if (sample_a == 0 && sample_b == 0) {
    part.xx = value;
  } else if (sample_a == 1 && sample_b == 1) {
    part.yy = value;
  } else {
    part.xy = value;
  }
}

void check_pair(const SampleMatrix& x, const SampleMatrix& y, long min_rows) {
  if (x.cols() != y.cols()) fail(ErrorCode::DimensionMismatch, "samples have different dimensions");
  if (x.rows() < min_rows || y.rows() < min_rows) {
    fail(ErrorCode::TooFewSamples, "need at least " + std::to_string(min_rows) + " rows in each sample");
  }
}

// Total order on samples so that mmd(X, Y) and mmd(Y, X) run identical
// floating-point operations.
bool canonical_less(const SampleMatrix& a, const SampleMatrix& b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows();
  const double* pa = a.matrix().data();
  const double* pb = b.matrix().data();
  return std::lexicographical_compare(pa, pa + a.matrix().size(), pb, pb + b.matrix().size());
}

template <class F>
double streaming_mmd(const SampleMatrix& x_in, const SampleMatrix& y_in, F&& k_of_sqdist, int threads) {
  check_pair(x_in, y_in, 2);
  const bool swap = canonical_less(y_in, x_in);
  const RowMatrix& x = swap ? y_in.matrix() : x_in.matrix();
  const RowMatrix& y = swap ? x_in.matrix() : y_in.matrix();
  const long n = x.rows();
  const long m = y.rows();

  const Eigen::VectorXd nx = x.rowwise().squaredNorm();
  const Eigen::VectorXd ny = y.rowwise().squaredNorm();
  const auto segs = make_segments(n, m);
  const auto tiles = make_tiles(segs);
  std::vector<TileSum> parts(tiles.size());

  parallel_for(tiles.size(), threads, [&](std::size_t t) {
    const Segment& sa = segs[tiles[t].a];
    const Segment& sb = segs[tiles[t].b];
    const RowMatrix& ma = sa.sample == 0 ? x : y;
    const RowMatrix& mb = sb.sample == 0 ? x : y;
    const double* na = (sa.sample == 0 ? nx : ny).data() + sa.begin;
    const double* nb = (sb.sample == 0 ? nx : ny).data() + sb.begin;
    const RowMatrix g = tile_product(ma, sa.begin, sa.len, mb, sb.begin, sb.len);
    const double v = sum_tile(g, na, nb, sa.len, sb.len, tiles[t].a == tiles[t].b, k_of_sqdist);
    add_to(parts[t], sa.sample, sb.sample, v);
  });
  return combine(reduce(tiles, parts), n, m);
}

}  // namespace

RowMatrix squared_distance_block(const SampleMatrix& a, const SampleMatrix& b, int threads) {
  if (a.cols() != b.cols()) fail(ErrorCode::DimensionMismatch, "blocks have different dimensions");
  const long na = a.rows();
  const long nb = b.rows();
  const Eigen::VectorXd norm_a = a.matrix().rowwise().squaredNorm();
  const Eigen::VectorXd norm_b = b.matrix().rowwise().squaredNorm();
  RowMatrix out(na, nb);

  const long row_tiles = (na + kTileRows - 1) / kTileRows;
  const long col_tiles = (nb + kTileRows - 1) / kTileRows;
  parallel_for(static_cast<std::size_t>(row_tiles * col_tiles), threads, [&](std::size_t t) {
    const long ib = static_cast<long>(t) / col_tiles * kTileRows;
    const long jb = static_cast<long>(t) % col_tiles * kTileRows;
    const long ri = std::min(kTileRows, na - ib);
    const long rj = std::min(kTileRows, nb - jb);
    const RowMatrix g = tile_product(a.matrix(), ib, ri, b.matrix(), jb, rj);
    for (long i = 0; i < ri; ++i) {
      for (long j = 0; j < rj; ++j) {
        out(ib + i, jb + j) = std::max(0.0, norm_a[ib + i] + norm_b[jb + j] - 2.0 * g(i, j));
      }
    }
  });
  return out;
}

double mmd_unbiased(const SampleMatrix& x, const SampleMatrix& y, const KernelSpec& kernel, int threads) {
  return with_kernel(kernel, [&](auto k) { return streaming_mmd(x, y, k, threads); });
}

double mmd_unbiased(const SampleMatrix& x, const SampleMatrix& y,
                    const std::function<double(double)>& k_of_sqdist, int threads) {
  return streaming_mmd(x, y, k_of_sqdist, threads);
}

TauHats tau_hats(const SampleMatrix& x, const SampleMatrix& y) {
  check_pair(x, y, 2);
  return PooledGram(x, y).tau_hats();
}

TraceHats trace_estimators(const SampleMatrix& x, const SampleMatrix& y) {
  check_pair(x, y, 4);
  return PooledGram(x, y).trace_hats();
}

double variance_estimate(const SampleMatrix& x, const SampleMatrix& y, const KernelSpec& kernel) {
  check_pair(x, y, 4);
  return PooledGram(x, y).variance(kernel);
}

TestResult two_sample_test(const SampleMatrix& x, const SampleMatrix& y, const KernelSpec& kernel, double alpha) {
  check_pair(x, y, 4);
  return PooledGram(x, y).test(kernel, alpha);
}

// ---------------------------------------------------------------------------

PooledGram::PooledGram(const SampleMatrix& x, const SampleMatrix& y, int threads)
    : n_(x.rows()), m_(y.rows()), p_(x.cols()), threads_(std::max(1, threads)) {
  if (x.cols() != y.cols()) fail(ErrorCode::DimensionMismatch, "samples have different dimensions");
  if (n_ < 1 || m_ < 1) fail(ErrorCode::TooFewSamples, "empty sample");

  const long total = n_ + m_;
  gram_.resize(total, total);
  const auto segs = make_segments(n_, m_);
  const auto tiles = make_tiles(segs);
  parallel_for(tiles.size(), threads_, [&](std::size_t t) {
    const Segment& sa = segs[tiles[t].a];
    const Segment& sb = segs[tiles[t].b];
    const RowMatrix g = tile_product(sa.sample == 0 ? x.matrix() : y.matrix(), sa.begin, sa.len,
                                     sb.sample == 0 ? x.matrix() : y.matrix(), sb.begin, sb.len);
    gram_.block(sa.pooled, sb.pooled, sa.len, sb.len) = g;
    if (tiles[t].a != tiles[t].b) gram_.block(sb.pooled, sa.pooled, sb.len, sa.len) = g.transpose();
  });
}

double PooledGram::sqdist(long i, long j) const {
  return std::max(0.0, gram_(i, i) + gram_(j, j) - 2.0 * gram_(i, j));
}

template <class F>
double PooledGram::mmd_impl(F&& k_of_sqdist) const {
  if (n_ < 2 || m_ < 2) fail(ErrorCode::TooFewSamples, "need at least 2 rows in each sample");
  const Eigen::VectorXd norms = gram_.diagonal();
  const auto segs = make_segments(n_, m_);
  const auto tiles = make_tiles(segs);
  std::vector<TileSum> parts(tiles.size());
  parallel_for(tiles.size(), threads_, [&](std::size_t t) {
    const Segment& sa = segs[tiles[t].a];
    const Segment& sb = segs[tiles[t].b];
    const auto g = gram_.block(sa.pooled, sb.pooled, sa.len, sb.len);
    const double v = sum_tile(g, norms.data() + sa.pooled, norms.data() + sb.pooled, sa.len, sb.len,
                              tiles[t].a == tiles[t].b, k_of_sqdist);
    add_to(parts[t], sa.sample, sb.sample, v);
  });
  return combine(reduce(tiles, parts), n_, m_);
}

double PooledGram::mmd(const KernelSpec& kernel) const {
  return with_kernel(kernel, [&](auto k) { return mmd_impl(k); });
}

double PooledGram::mmd(const std::function<double(double)>& k_of_sqdist) const { return mmd_impl(k_of_sqdist); }

TauHats PooledGram::tau_hats() const {
  if (n_ < 2 || m_ < 2) fail(ErrorCode::TooFewSamples, "need at least 2 rows in each sample");
  const double dn = static_cast<double>(n_);
  const double dm = static_cast<double>(m_);

  // Within-sample pieces: mean |Z_i|^2 and the off-diagonal U-statistic of Z_i'Z_j.
  auto within = [&](long begin, long len, double& mean_sq, double& offdiag) {
    double diag = 0.0;
    double all = 0.0;
    for (long i = begin; i < begin + len; ++i) {
      diag += gram_(i, i);
      double row = 0.0;
      for (long j = begin; j < begin + len; ++j) row += gram_(i, j);
      all += row;
    }
    const double l = static_cast<double>(len);
    mean_sq = diag / l;
    offdiag = (all - diag) / (l * (l - 1.0));
  };
  double mx = 0.0, ux = 0.0, my = 0.0, uy = 0.0;
  within(0, n_, mx, ux);
  within(n_, m_, my, uy);

  double cross = 0.0;
  for (long i = 0; i < n_; ++i) {
    double row = 0.0;
    for (long j = n_; j < n_ + m_; ++j) row += gram_(i, j);
    cross += row;
  }
  cross /= dn * dm;

  // (1/n) sum_i X_i'(X_i - Xbar_{-i}) = mean |X_i|^2 - U_X.
  const double ax = mx - ux;
  const double ay = my - uy;
  const double p = static_cast<double>(p_);
  return {2.0 * ax / p, 2.0 * ay / p, (ax + ay + ux + uy - 2.0 * cross) / p};
}

TraceHats PooledGram::trace_hats() const {
  if (n_ < 4 || m_ < 4) fail(ErrorCode::TooFewSamples, "trace estimators need at least 4 rows in each sample");

  // Within-sample: 1/(n(n-1)) sum_{j != k} [X_j'(X_k - Xbar_(j,k))] [X_k'(X_j - Xbar_(j,k))],
  // with X_j' Xbar_(j,k) = (s_j - g_jj - g_jk) / (n - 2) and s_j = X_j' sum_l X_l.
  auto within = [&](long begin, long len) {
    std::vector<double> s(static_cast<std::size_t>(len), 0.0);
    for (long i = 0; i < len; ++i) {
      double row = 0.0;
      for (long j = 0; j < len; ++j) row += gram_(begin + i, begin + j);
      s[i] = row;
    }
    const double l = static_cast<double>(len);
    const double inv = 1.0 / (l - 2.0);
    double total = 0.0;
    for (long j = 0; j < len; ++j) {
      const double gjj = gram_(begin + j, begin + j);
      double row = 0.0;
      for (long k = j + 1; k < len; ++k) {
        const double gjk = gram_(begin + j, begin + k);
        const double gkk = gram_(begin + k, begin + k);
        const double a = gjk - (s[j] - gjj - gjk) * inv;
        const double b = gjk - (s[k] - gkk - gjk) * inv;
        row += a * b;
      }
      total += row;
    }
    return 2.0 * total / (l * (l - 1.0));
  };

  // Cross: 1/(nm) sum_{l,k} [X_l'(Y_k - Ybar_(k))] [Y_k'(X_l - Xbar_(l))].
  const double dn = static_cast<double>(n_);
  const double dm = static_cast<double>(m_);
  std::vector<double> t(static_cast<std::size_t>(n_), 0.0);  // X_l' sum_k Y_k
  std::vector<double> u(static_cast<std::size_t>(m_), 0.0);  // Y_k' sum_l X_l
  for (long l = 0; l < n_; ++l) {
    for (long k = 0; k < m_; ++k) {
      const double c = gram_(l, n_ + k);
      t[l] += c;
      u[k] += c;
    }
  }
  double cross = 0.0;
  for (long l = 0; l < n_; ++l) {
    double row = 0.0;
    for (long k = 0; k < m_; ++k) {
      const double c = gram_(l, n_ + k);
      const double a = c - (t[l] - c) / (dm - 1.0);
      const double b = c - (u[k] - c) / (dn - 1.0);
      row += a * b;
    }
    cross += row;
  }

  return {within(0, n_), within(n_, m_), cross / (dn * dm)};
}

double PooledGram::variance(const KernelSpec& kernel) const {
  kernel.validate();
  const TauHats tau = tau_hats();
  const TraceHats tr = trace_hats();
  const double p = static_cast<double>(p_);
  const double scale = p / kernel.bandwidth;
  const double d1 = scaled_f_deriv(kernel, 1, tau.tau1, scale);
  const double d2 = scaled_f_deriv(kernel, 1, tau.tau2, scale);
  const double d3 = scaled_f_deriv(kernel, 1, tau.tau3, scale);
  const double dn = static_cast<double>(n_);
  const double dm = static_cast<double>(m_);
  const double v = 8.0 / (p * p) *
                   (d1 * d1 * std::max(0.0, tr.tr_sigma1_sq) / (dn * (dn - 1.0)) +
                    d2 * d2 * std::max(0.0, tr.tr_sigma2_sq) / (dm * (dm - 1.0)) +
                    2.0 * d3 * d3 * std::max(0.0, tr.tr_sigma1_sigma2) / (dn * dm));
  if (!(v > 0.0)) fail(ErrorCode::DegenerateVariance, "variance estimate is zero");
  return v;
}

TestResult PooledGram::test(const KernelSpec& kernel, double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  if (n_ < 4 || m_ < 4) fail(ErrorCode::TooFewSamples, "the test needs at least 4 rows in each sample");
  TestResult r;
  r.alpha = alpha;
  r.kernel = kernel_name(kernel);
  r.bandwidth = kernel.bandwidth;
  r.n = n_;
  r.m = m_;
  r.p = p_;
  r.mmd_stat = mmd(kernel);
  r.tau_hats = tau_hats();
  r.trace_hats = trace_hats();
  try {
    r.var_hat = variance(kernel);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateVariance) throw;
    if (r.mmd_stat > 0.0) {
      fail(ErrorCode::DegenerateVariance, "variance estimate is zero while the statistic is positive");
    }
    r.var_hat = 0.0;
    r.z_score = -std::numeric_limits<double>::infinity();
    r.p_value = 1.0;
    r.reject = false;
    return r;
  }
  r.z_score = r.mmd_stat / std::sqrt(r.var_hat);
  r.p_value = normal_upper_tail(r.z_score);
  r.reject = r.z_score > normal_quantile(1.0 - alpha);
  return r;
}

double PooledGram::median_sqdist() const {
  const long total = n_ + m_;
  if (total < 2) fail(ErrorCode::EmptyInput, "median heuristic needs at least two pooled rows");
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(total * (total - 1) / 2));
  for (long i = 0; i < total; ++i) {
    for (long j = i + 1; j < total; ++j) d.push_back(sqdist(i, j));
  }
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double median = d[mid];
  if (d.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  if (!(median > 0.0)) fail(ErrorCode::DegenerateBandwidth, "median pairwise squared distance is zero");
  return median;
}

}  // namespace hdmmd
