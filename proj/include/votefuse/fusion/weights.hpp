#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "votefuse/error.hpp"

namespace votefuse::fusion {

inline constexpr double min_weight = 1e-6;

struct ModelWeights {
  std::vector<double> mae;
  std::vector<double> weight;      // W_j = max(1 - mae_j, min_weight)
  std::vector<int> rank;           // 1 = worst (largest mae), k = best
  std::vector<double> rank_weight; // R_j / sum(R)

  std::size_t models() const noexcept { return mae.size(); }
  /// k (k + 1) / 2, the exact rank total.
  long rank_total() const noexcept {
    const auto k = static_cast<long>(rank.size());
    return k * (k + 1) / 2;
  }
  double weight_total() const { return std::accumulate(weight.begin(), weight.end(), 0.0); }

  bool operator==(const ModelWeights&) const = default;
};

/// Fills the W part: W_j = max(1 - mae_j, min_weight).
inline ModelWeights weights_from_mae(std::span<const double> mae) {
  ModelWeights out;
  out.mae.assign(mae.begin(), mae.end());
  out.weight.resize(mae.size());
  for (std::size_t j = 0; j < mae.size(); ++j) {
    if (!(mae[j] >= 0.0)) throw DataError("weights: mae must be non-negative");
    out.weight[j] = std::max(1.0 - mae[j], min_weight);
  }
  return out;
}

/// Fills the rank part. The largest mae gets rank 1, the smallest rank k; equal maes keep
/// registration order, so the earlier model gets the lower rank. RW_j = R_j / (k (k + 1) / 2).
inline ModelWeights rank_weights(std::span<const double> mae) {
  if (mae.empty()) throw DataError("weights: at least one model is required");
  ModelWeights out;
  out.mae.assign(mae.begin(), mae.end());
  std::vector<std::size_t> order(mae.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return mae[a] > mae[b]; });
  out.rank.resize(mae.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) out.rank[order[pos]] = static_cast<int>(pos + 1);
  const double total = static_cast<double>(out.rank_total());
  for (int r : out.rank) out.rank_weight.push_back(static_cast<double>(r) / total);
  return out;
}

/// Both weight families.
inline ModelWeights model_weights(std::span<const double> mae) {
  ModelWeights out = rank_weights(mae);
  out.weight = weights_from_mae(mae).weight;
  return out;
}

}  // namespace votefuse::fusion
