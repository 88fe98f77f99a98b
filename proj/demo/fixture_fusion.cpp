// Fuses a vote table with per-model mae and prints the counts.
//
//   fixture_fusion data/fixtures/cooling_votes.csv data/fixtures/cooling_mae.csv

#include <iostream>

#include "votefuse/votefuse.hpp"

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: fixture_fusion <votes.csv> <mae.csv>\n";
    return 1;
  }
  using namespace votefuse;
  try {
    auto table = fusion::load_vote_table(argv[1]);
    auto mae = fusion::mae_for(fusion::load_mae_list(argv[2]), table.models);
    auto result = fusion::dual_fusion(table.labels, table.models, mae);
    std::cout << "N_a=" << result.n_a << " N_b.1=" << result.n_b1 << " N_b.2a=" << result.n_b2a
              << " N_b.2b=" << result.n_b2b << " N_b=" << result.n_b << " N=" << result.n << '\n';
    for (auto t : result.final_set) std::cout << format_timestamp(t) << '\n';
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
}
