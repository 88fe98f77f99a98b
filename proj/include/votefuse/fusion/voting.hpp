#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "votefuse/error.hpp"
#include "votefuse/fusion/vote_matrix.hpp"
#include "votefuse/fusion/weights.hpp"

namespace votefuse::fusion {

enum class Method { consensus, majority, weighted, rank };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::consensus: return "consensus";
    case Method::majority: return "majority";
    case Method::weighted: return "weighted";
    case Method::rank: return "rank";
  }
  return "unknown";
}

// Row-level rules. `votes` holds one 0/1 entry per model in registration order.

inline bool unanimous(std::span<const std::uint8_t> votes) {
  return !votes.empty() && std::all_of(votes.begin(), votes.end(), [](auto v) { return v != 0; });
}

/// Strictly more than half of the models vote 1.
inline bool majority(std::span<const std::uint8_t> votes) {
  std::size_t yes = 0;
  for (auto v : votes) yes += v ? 1 : 0;
  return 2 * yes > votes.size();
}

/// (1 / sum W) * sum_j W_j v_j > 0.5
inline bool weighted_majority(std::span<const std::uint8_t> votes, std::span<const double> weight) {
  double total = 0.0, yes = 0.0;
  for (std::size_t j = 0; j < votes.size(); ++j) {
    total += weight[j];
    if (votes[j]) yes += weight[j];
  }
  return yes / total > 0.5;
}

/// sum_j (R_j / sum R) v_j > 0.5, evaluated exactly in integers as 2 sum_j R_j v_j > sum R.
inline bool rank_majority(std::span<const std::uint8_t> votes, std::span<const int> rank) {
  long total = 0, yes = 0;
  for (std::size_t j = 0; j < votes.size(); ++j) {
    total += rank[j];
    if (votes[j]) yes += rank[j];
  }
  return 2 * yes > total;
}

/// Per-row verdicts of one voting rule over a VoteMatrix.
struct VoteOutcome {
  std::vector<std::uint8_t> labels;  // one per candidate row
  std::vector<Timestamp> flagged;    // candidates labelled 1, in row order

  std::size_t count() const noexcept { return flagged.size(); }
  bool operator==(const VoteOutcome&) const = default;
};

namespace detail {

template <typename Rule>
VoteOutcome apply(const VoteMatrix& votes, Rule rule) {
  VoteOutcome out;
  out.labels.reserve(votes.rows());
  for (std::size_t r = 0; r < votes.rows(); ++r) {
    const bool flag = rule(votes.row(r));
    out.labels.push_back(flag ? 1 : 0);
    if (flag) out.flagged.push_back(votes.candidates()[r]);
  }
  return out;
}

inline void require_cover(const VoteMatrix& votes, std::size_t n) {
  if (n != votes.models()) throw DataError("voting: weights must cover every model");
}

}  // namespace detail

/// Rows where every model votes 1. N_a is the outcome's count.
inline VoteOutcome consensus(const VoteMatrix& votes) {
  return detail::apply(votes, [](auto row) { return unanimous(row); });
}

inline VoteOutcome majority_vote(const VoteMatrix& votes) {
  return detail::apply(votes, [](auto row) { return majority(row); });
}

inline VoteOutcome weighted_average_vote(const VoteMatrix& votes, const ModelWeights& w) {
  detail::require_cover(votes, w.weight.size());
  return detail::apply(votes, [&](auto row) { return weighted_majority(row, w.weight); });
}

inline VoteOutcome rank_vote(const VoteMatrix& votes, const ModelWeights& w) {
  detail::require_cover(votes, w.rank.size());
  return detail::apply(votes, [&](auto row) { return rank_majority(row, w.rank); });
}

struct FusedCount {
  std::size_t count = 0;
  Method selected = Method::majority;

  bool operator==(const FusedCount&) const = default;
};

/// Majority of three counts in the order (majority, weighted, rank). When two or more agree,
/// the earliest agreeing method is selected; when all differ, the median and its method.
inline FusedCount fuse_counts(std::size_t majority_count, std::size_t weighted_count, std::size_t rank_count) {
  if (majority_count == weighted_count || majority_count == rank_count) return {majority_count, Method::majority};
  if (weighted_count == rank_count) return {weighted_count, Method::weighted};
  std::array<std::pair<std::size_t, Method>, 3> c{{{majority_count, Method::majority},
                                                   {weighted_count, Method::weighted},
                                                   {rank_count, Method::rank}}};
  std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return {c[1].first, c[1].second};
}

}  // namespace votefuse::fusion
