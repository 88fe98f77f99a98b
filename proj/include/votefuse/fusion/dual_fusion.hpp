#pragma once

#include <algorithm>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "votefuse/fusion/vote_matrix.hpp"
#include "votefuse/fusion/voting.hpp"
#include "votefuse/fusion/weights.hpp"

namespace votefuse::fusion {

/// Which methods flagged one instant, and whether it is in the final set.
struct Provenance {
  Timestamp at;
  std::vector<Method> methods;
  bool final = false;

  bool operator==(const Provenance&) const = default;
};

struct FusionResult {
  std::vector<std::string> models;
  ModelWeights weights;

  VoteMatrix candidates;   // every instant flagged by at least one model
  VoteOutcome consensus;   // over `candidates`; count() = N_a
  VoteMatrix stage_b;      // candidates minus the consensus instants
  VoteOutcome majority;    // N_b.1
  VoteOutcome weighted;    // N_b.2a
  VoteOutcome rank;        // N_b.2b

  std::size_t n_a = 0;
  std::size_t n_b1 = 0;
  std::size_t n_b2a = 0;
  std::size_t n_b2b = 0;
  std::size_t n_b = 0;
  std::size_t n = 0;
  Method selected = Method::majority;

  std::vector<Timestamp> final_set;
  std::vector<Provenance> provenance;  // every instant flagged by any method, in time order

  const VoteOutcome& outcome(Method m) const {
    switch (m) {
      case Method::consensus: return consensus;
      case Method::majority: return majority;
      case Method::weighted: return weighted;
      case Method::rank: return rank;
    }
    return majority;
  }

  bool operator==(const FusionResult&) const = default;
};

/// Consensus over all candidates, then majority / weighted / rank voting over the remaining
/// candidates, count fusion, and N = N_a + N_b. The final set is the consensus set plus the
/// selected voting method's set.
inline FusionResult dual_fusion(const std::vector<LabelSeries>& labels, const std::vector<std::string>& names,
                                std::span<const double> mae) {
  if (mae.size() != labels.size()) throw DataError("dual fusion: one mae per model is required");
  FusionResult out;
  out.models = names;
  out.weights = model_weights(mae);

  out.candidates = build_vote_matrix(labels, names);
  out.consensus = fusion::consensus(out.candidates);
  out.n_a = out.consensus.count();

  const std::set<Timestamp> agreed(out.consensus.flagged.begin(), out.consensus.flagged.end());
  out.stage_b = build_vote_matrix(labels, names, agreed);
  out.majority = majority_vote(out.stage_b);
  out.weighted = weighted_average_vote(out.stage_b, out.weights);
  out.rank = rank_vote(out.stage_b, out.weights);
  out.n_b1 = out.majority.count();
  out.n_b2a = out.weighted.count();
  out.n_b2b = out.rank.count();

  const FusedCount fused = fuse_counts(out.n_b1, out.n_b2a, out.n_b2b);
  out.n_b = fused.count;
  out.selected = fused.selected;
  out.n = out.n_a + out.n_b;

  std::set<Timestamp> final_set(agreed);
  const auto& chosen = out.outcome(out.selected).flagged;
  final_set.insert(chosen.begin(), chosen.end());
  out.final_set.assign(final_set.begin(), final_set.end());

  std::set<Timestamp> any(agreed);
  for (auto m : {Method::majority, Method::weighted, Method::rank})
    any.insert(out.outcome(m).flagged.begin(), out.outcome(m).flagged.end());
  for (auto t : any) {
    Provenance p{t, {}, final_set.count(t) > 0};
    for (auto m : {Method::consensus, Method::majority, Method::weighted, Method::rank}) {
      const auto& f = out.outcome(m).flagged;
      if (std::binary_search(f.begin(), f.end(), t)) p.methods.push_back(m);
    }
    out.provenance.push_back(std::move(p));
  }
  return out;
}

}  // namespace votefuse::fusion
