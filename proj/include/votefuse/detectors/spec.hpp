#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "votefuse/error.hpp"

namespace votefuse::detectors {

enum class DetectorKind {
  window_linear_autoencoder,
  pca_reconstructor,
  seasonal_residual,
  moving_average_residual,
  knn_distance,
};

inline constexpr std::array<DetectorKind, 5> all_kinds{
    DetectorKind::window_linear_autoencoder, DetectorKind::pca_reconstructor,
    DetectorKind::seasonal_residual, DetectorKind::moving_average_residual,
    DetectorKind::knn_distance};

inline std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::window_linear_autoencoder: return "window-linear-autoencoder";
    case DetectorKind::pca_reconstructor: return "pca-reconstructor";
    case DetectorKind::seasonal_residual: return "seasonal-residual";
    case DetectorKind::moving_average_residual: return "moving-average-residual";
    case DetectorKind::knn_distance: return "knn-distance";
  }
  return "unknown";
}

inline std::optional<DetectorKind> parse_kind(std::string_view text) {
  for (auto k : all_kinds)
    if (to_string(k) == text) return k;
  return std::nullopt;
}

/// Hyperparameters shared by the detector family. Each kind reads the subset it needs:
///   window-linear-autoencoder: window, latent, learning_rate, batch_size, max_epochs, patience
///   pca-reconstructor:         window, latent
///   seasonal-residual:         period
///   moving-average-residual:   window
///   knn-distance:              window, neighbors, max_reference
struct Hyperparameters {
  int window = 8;
  int latent = 4;
  int neighbors = 5;
  int period = 24;
  int max_reference = 2000;
  double learning_rate = 0.01;
  int batch_size = 32;
  int max_epochs = 200;
  int patience = 5;

  bool operator==(const Hyperparameters&) const = default;

  /// Sets a field by its config-file name. Returns false for unknown names.
  bool set(std::string_view name, double value) {
    auto as_int = static_cast<int>(value);
    if (name == "window") window = as_int;
    else if (name == "latent") latent = as_int;
    else if (name == "neighbors") neighbors = as_int;
    else if (name == "period") period = as_int;
    else if (name == "max_reference") max_reference = as_int;
    else if (name == "learning_rate") learning_rate = value;
    else if (name == "batch_size") batch_size = as_int;
    else if (name == "max_epochs") max_epochs = as_int;
    else if (name == "patience") patience = as_int;
    else return false;
    return true;
  }
};

struct DetectorSpec {
  std::string name;
  DetectorKind kind = DetectorKind::pca_reconstructor;
  Hyperparameters hyper;
  std::uint64_t seed = 0;

  bool operator==(const DetectorSpec&) const = default;
};

/// Allowed hyperparameter sweep ranges. Defaults follow the cross-validation table:
/// timesteps 1..24 samples, batch 16..64, learning rate 1e-4..1e-2, epochs 50..500.
struct HyperparameterRanges {
  int min_window = 1, max_window = 24;
  int min_batch = 16, max_batch = 64;
  double min_learning_rate = 1e-4, max_learning_rate = 1e-2;
  int min_epochs = 50, max_epochs = 500;
  int min_patience = 1;
};

inline bool uses_window(DetectorKind k) { return k != DetectorKind::seasonal_residual; }

/// Throws ConfigError when `spec` violates a structural invariant or a configured range.
/// `channels` is the series width m (latent must stay below window * m).
inline void validate(const DetectorSpec& spec, std::size_t channels,
                     const HyperparameterRanges& ranges = {}) {
  const auto& h = spec.hyper;
  auto fail = [&](const std::string& msg) {
    throw ConfigError("detector '" + spec.name + "' (" + std::string(to_string(spec.kind)) + "): " + msg);
  };
  if (uses_window(spec.kind) && (h.window < ranges.min_window || h.window > ranges.max_window))
    fail("window " + std::to_string(h.window) + " outside [" + std::to_string(ranges.min_window) + ", " +
         std::to_string(ranges.max_window) + "]");
  switch (spec.kind) {
    case DetectorKind::window_linear_autoencoder:
      if (h.batch_size < ranges.min_batch || h.batch_size > ranges.max_batch)
        fail("batch_size " + std::to_string(h.batch_size) + " outside range");
      if (!(h.learning_rate >= ranges.min_learning_rate && h.learning_rate <= ranges.max_learning_rate))
        fail("learning_rate outside range");
      if (h.max_epochs < ranges.min_epochs || h.max_epochs > ranges.max_epochs)
        fail("max_epochs " + std::to_string(h.max_epochs) + " outside range");
      if (h.patience < ranges.min_patience) fail("patience must be >= 1");
      [[fallthrough]];
    case DetectorKind::pca_reconstructor:
      if (h.latent < 1 || static_cast<std::size_t>(h.latent) >= static_cast<std::size_t>(h.window) * channels)
        fail("latent must satisfy 1 <= latent < window * channels");
      break;
    case DetectorKind::seasonal_residual:
      if (h.period < 1) fail("period must be >= 1");
      break;
    case DetectorKind::moving_average_residual:
      break;
    case DetectorKind::knn_distance:
      if (h.neighbors < 1) fail("neighbors must be >= 1");
      if (h.max_reference < h.neighbors + 1) fail("max_reference must exceed neighbors");
      break;
  }
}

}  // namespace votefuse::detectors
