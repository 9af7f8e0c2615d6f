#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "ldh/networks.hpp"

namespace ldh {

inline constexpr const char* kCheckpointMagic = "LDH-CKPT-1";

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything needed to resume training or run inference.
///
/// File layout: the magic line "LDH-CKPT-1\n", an 8-byte little-endian
/// header length, a JSON header (network config, config echo, counters, RNG
/// state, tensor index) and the tensors as little-endian float64 in index
/// order.
struct Checkpoint {
    NetworkConfig network;
    std::string config_json = "null"; ///< resolved run configuration
    std::uint64_t step = 0;           ///< optimizer steps taken
    int epoch = 0;                    ///< epochs completed
    std::string rng_state;
    std::map<std::string, Tensor> tensors; ///< parameters and optimizer state
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies every parameter of `models` into `ckpt.tensors` under its layer name.
void store_parameters(Checkpoint& ckpt, const Models& models);

/// Builds networks for `ckpt.network` and loads their parameters.
Models restore_models(const Checkpoint& ckpt);

} // namespace ldh
