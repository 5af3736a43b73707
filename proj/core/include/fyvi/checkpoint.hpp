#ifndef FYVI_CHECKPOINT_HPP
#define FYVI_CHECKPOINT_HPP

#include <filesystem>

#include "fyvi/fyem_gmm.hpp"
#include "fyvi/fyvae_toy.hpp"

namespace fyvi {

/// Self-describing JSON text: format tag, dimensions, regularizer, eta,
/// means and row-major covariances. Doubles round-trip exactly.
void save_gmm_checkpoint(const std::filesystem::path& path, const GmmState& state);
GmmState load_gmm_checkpoint(const std::filesystem::path& path);

struct VaeCheckpoint {
  VaeConfig config;
  VaeParams params;
};

void save_vae_checkpoint(const std::filesystem::path& path, const VaeConfig& config, const VaeParams& params);
VaeCheckpoint load_vae_checkpoint(const std::filesystem::path& path);

}  // namespace fyvi

#endif  // FYVI_CHECKPOINT_HPP
