#pragma once

#include <string>

#include "coldoc/model.hpp"

namespace coldoc {

/// Checkpoint file layout (all integers little-endian):
///   8-byte magic "CLDCKPT1" | u32 format version | u64 manifest length |
///   manifest JSON (UTF-8)   | raw little-endian float64 payload
/// The manifest carries the config snapshot, the vocabulary, the selected
/// decision threshold, and a named parameter table (name, shape, byte
/// offset into the payload). Offsets are contiguous and payload-covering;
/// save/load/save is byte-identical.
inline constexpr char kCheckpointMagic[8] = {'C', 'L', 'D', 'C', 'K', 'P', 'T', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Model& model, double threshold, const std::string& path);

struct LoadedCheckpoint {
  Model model;
  double threshold = 0.0;
};

/// Throws data_error on bad magic, unsupported version, or an inconsistent
/// manifest/payload.
LoadedCheckpoint load_checkpoint(const std::string& path);

/// TrainConfig <-> JSON text (used by checkpoints and run manifests).
std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& text);

}  // namespace coldoc
