#pragma once

#include <cstddef>
#include <string_view>

#include "repalign/embedding.hpp"

namespace repalign {

enum class IdMethod { twonn, mle };
const char* to_string(IdMethod method);
IdMethod parse_id_method(std::string_view name);

struct IdEstimate {
  double value = 0.0;
  IdMethod method = IdMethod::twonn;
  double k_or_discard = 0.0;  // MLE neighbor count, or TwoNN discard fraction
  double fit_r2 = 1.0;        // regression quality; 1 for MLE
  std::size_t n_used = 0;     // points entering the final fit
  std::size_t duplicates_removed = 0;
};

// Two-nearest-neighbor estimator: regress -ln(1 - P) on ln(mu) through the
// origin, where mu = r2/r1 and P is the empirical CDF, after dropping the
// top discard_fraction of mu values (and the P = 1 point). Exact duplicate
// rows are removed first, keeping the earliest.
IdEstimate twonn_id(const EmbeddingSet& set, double discard_fraction = 0.1);

// Pooled maximum-likelihood estimator: the inverse of the mean over points
// of (1/(k-1)) sum_{j<k} ln(r_k / r_j). Exact duplicates removed first.
IdEstimate mle_id(const EmbeddingSet& set, std::size_t k = 50);

}  // namespace repalign
