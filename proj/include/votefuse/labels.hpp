#pragma once

#include <cstdint>
#include <vector>

#include "votefuse/timestamp.hpp"

namespace votefuse {

/// Binary verdict per instant, 1 = anomaly.
struct LabelSeries {
  std::vector<Timestamp> timestamps;
  std::vector<std::uint8_t> labels;

  std::size_t count() const {
    std::size_t n = 0;
    for (auto l : labels) n += l;
    return n;
  }
  bool operator==(const LabelSeries&) const = default;
};

}  // namespace votefuse
