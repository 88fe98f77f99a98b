#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "votefuse/error.hpp"
#include "votefuse/labels.hpp"

namespace votefuse::fusion {

/// Candidate instants x k models, entries in {0, 1}. Column order is the model
/// registration order and stays fixed through every fusion step.
class VoteMatrix {
public:
  VoteMatrix() = default;

  VoteMatrix(std::vector<Timestamp> candidates, std::vector<std::string> models, std::vector<std::uint8_t> votes)
      : candidates_(std::move(candidates)), models_(std::move(models)), votes_(std::move(votes)) {
    if (votes_.size() != candidates_.size() * models_.size())
      throw DataError("vote matrix: vote count does not match candidates x models");
    for (auto v : votes_)
      if (v > 1) throw DataError("vote matrix: votes must be 0 or 1");
  }

  std::size_t rows() const noexcept { return candidates_.size(); }
  std::size_t models() const noexcept { return models_.size(); }
  bool empty() const noexcept { return candidates_.empty(); }

  const std::vector<Timestamp>& candidates() const noexcept { return candidates_; }
  const std::vector<std::string>& model_names() const noexcept { return models_; }

  std::span<const std::uint8_t> row(std::size_t r) const { return {votes_.data() + r * models(), models()}; }
  std::uint8_t at(std::size_t r, std::size_t model) const { return votes_[r * models() + model]; }

  bool operator==(const VoteMatrix&) const = default;

private:
  std::vector<Timestamp> candidates_;
  std::vector<std::string> models_;
  std::vector<std::uint8_t> votes_;
};

/// Rows are the instants where at least one model votes 1, minus `exclude`, in time order.
inline VoteMatrix build_vote_matrix(const std::vector<LabelSeries>& labels, const std::vector<std::string>& names,
                                    const std::set<Timestamp>& exclude = {}) {
  if (labels.empty()) throw DataError("vote matrix: at least one model is required");
  if (names.size() != labels.size()) throw DataError("vote matrix: one name per model is required");
  const auto& grid = labels.front().timestamps;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels[j].timestamps != grid || labels[j].labels.size() != grid.size())
      throw DataError("vote matrix: label series of model '" + names[j] + "' is on a different timestamp grid");
  }
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return grid[a] < grid[b]; });

  std::vector<Timestamp> candidates;
  std::vector<std::uint8_t> votes;
  for (auto i : order) {
    bool any = false;
    for (const auto& l : labels) any = any || l.labels[i] != 0;
    if (!any || exclude.count(grid[i])) continue;
    candidates.push_back(grid[i]);
    for (const auto& l : labels) votes.push_back(l.labels[i] ? 1 : 0);
  }
  return {std::move(candidates), names, std::move(votes)};
}

}  // namespace votefuse::fusion
