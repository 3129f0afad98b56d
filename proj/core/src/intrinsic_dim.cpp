#include "repalign/intrinsic_dim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dense_ops.hpp"
#include "repalign/errors.hpp"
#include "repalign/parallel.hpp"

namespace repalign {

namespace {

// Indices of the rows that survive exact-duplicate removal (earliest row of
// each duplicate group kept), in original order.
std::vector<std::size_t> unique_rows(const EmbeddingSet& set, std::size_t& duplicates_removed) {
  const std::size_t n = set.n_items;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&set](std::size_t a, std::size_t b) {
    const auto ra = set.row(a), rb = set.row(b);
    for (std::size_t c = 0; c < ra.size(); ++c) {
      if (ra[c] != rb[c]) return ra[c] < rb[c];
    }
    return a < b;
  });
  std::vector<std::size_t> kept;
  kept.reserve(n);
  for (std::size_t p = 0; p < n; ++p) {
    if (p > 0 && std::equal(set.row(idx[p]).begin(), set.row(idx[p]).end(), set.row(idx[p - 1]).begin())) {
      continue;
    }
    kept.push_back(idx[p]);
  }
  duplicates_removed = n - kept.size();
  std::sort(kept.begin(), kept.end());
  return kept;
}

// k smallest squared distances from kept[i] to the other kept rows, ascending.
void nearest_sq(const EmbeddingSet& set, const std::vector<std::size_t>& kept, std::size_t i,
                std::size_t k, std::vector<double>& out) {
  const std::size_t m = kept.size();
  out.assign(k, 0.0);
  std::vector<double> heap;  // max-heap of the k best so far
  heap.reserve(k);
  const auto row_i = set.row(kept[i]);
  for (std::size_t j = 0; j < m; ++j) {
    if (j == i) continue;
    const double d = detail::dist_sq(row_i, set.row(kept[j]));
    if (heap.size() < k) {
      heap.push_back(d);
      std::push_heap(heap.begin(), heap.end());
    } else if (d < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = d;
      std::push_heap(heap.begin(), heap.end());
    }
  }
  std::sort_heap(heap.begin(), heap.end());
  std::copy(heap.begin(), heap.end(), out.begin());
}

}  // namespace

const char* to_string(IdMethod method) { return method == IdMethod::twonn ? "twonn" : "mle"; }

IdMethod parse_id_method(std::string_view name) {
  if (name == "twonn") return IdMethod::twonn;
  if (name == "mle") return IdMethod::mle;
  throw std::invalid_argument("unknown estimator '" + std::string(name) + "' (expected twonn or mle)");
}

IdEstimate twonn_id(const EmbeddingSet& set, double discard_fraction) {
  if (!(discard_fraction >= 0.0 && discard_fraction < 0.5)) {
    throw std::invalid_argument("discard fraction must lie in [0, 0.5)");
  }
  std::size_t duplicates_removed = 0;
  const auto kept = unique_rows(set, duplicates_removed);
  const std::size_t m = kept.size();
  if (m < 10) {
    throw data_error("'" + set.model_name + "': only " + std::to_string(m) +
                     " distinct points after duplicate removal; need at least 10");
  }
  std::vector<double> mu(m);
  parallel_for(m, [&](std::size_t i) {
    std::vector<double> two;
    nearest_sq(set, kept, i, 2, two);
    mu[i] = std::sqrt(two[1] / two[0]);
  });
  std::sort(mu.begin(), mu.end());
  std::size_t n_keep = m - static_cast<std::size_t>(std::floor(discard_fraction * static_cast<double>(m)));
  if (n_keep >= m) n_keep = m - 1;  // the P = 1 point never enters the fit
  // Least squares through the origin of y = -ln(1 - P) on x = ln(mu).
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t r = 0; r < n_keep; ++r) {
    const double p = static_cast<double>(r + 1) / static_cast<double>(m);
    const double x = std::log(mu[r]);
    const double y = -std::log1p(-p);
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  if (sxx <= 0.0) {
    throw degenerate_input_error("'" + set.model_name +
                                 "': all neighbor ratios equal 1; dimension fit is undefined");
  }
  const double slope = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t r = 0; r < n_keep; ++r) {
    const double p = static_cast<double>(r + 1) / static_cast<double>(m);
    const double resid = -std::log1p(-p) - slope * std::log(mu[r]);
    ss_res += resid * resid;
  }
  IdEstimate est;
  est.value = slope;
  est.method = IdMethod::twonn;
  est.k_or_discard = discard_fraction;
  est.fit_r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  est.n_used = n_keep;
  est.duplicates_removed = duplicates_removed;
  return est;
}

IdEstimate mle_id(const EmbeddingSet& set, std::size_t k) {
  if (k < 2) throw std::invalid_argument("mle estimator needs k >= 2");
  std::size_t duplicates_removed = 0;
  const auto kept = unique_rows(set, duplicates_removed);
  const std::size_t m = kept.size();
  if (m < 10) {
    throw data_error("'" + set.model_name + "': only " + std::to_string(m) +
                     " distinct points after duplicate removal; need at least 10");
  }
  if (m <= k) {
    throw data_error("'" + set.model_name + "': " + std::to_string(m) +
                     " distinct points cannot support k = " + std::to_string(k));
  }
  std::vector<double> inv(m);
  parallel_for(m, [&](std::size_t i) {
    std::vector<double> dists;
    nearest_sq(set, kept, i, k, dists);
    // ln(r_k / r_j) = 0.5 ln(r_k^2 / r_j^2); duplicates are gone, so r_1 > 0.
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < k; ++j) acc += 0.5 * std::log(dists[k - 1] / dists[j]);
    inv[i] = acc / static_cast<double>(k - 1);
  });
  double mean_inv = 0.0;
  for (std::size_t i = 0; i < m; ++i) mean_inv += inv[i];
  mean_inv /= static_cast<double>(m);
  if (mean_inv <= 0.0) {
    throw degenerate_input_error("'" + set.model_name +
                                 "': neighbor distance ratios are all 1; dimension is undefined");
  }
  IdEstimate est;
  est.value = 1.0 / mean_inv;
  est.method = IdMethod::mle;
  est.k_or_discard = static_cast<double>(k);
  est.fit_r2 = 1.0;
  est.n_used = m;
  est.duplicates_removed = duplicates_removed;
  return est;
}

}  // namespace repalign
