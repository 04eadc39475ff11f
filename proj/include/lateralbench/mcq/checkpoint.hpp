#pragma once

#include <string>

#include "lateralbench/mcq/model.hpp"

namespace lateral::mcq {

// Model checkpoint: one file holding config, vocabulary and parameters.
// Layout: 8-byte magic "LBCKPT01" (carries the format version), u64 header
// length, JSON header {format_version, config, vocab}, then every parameter
// tensor's raw little-endian doubles in ModelParams::visit order. Raw IEEE
// bytes make save/load round-trip bitwise.
inline constexpr char kCheckpointMagic[8] = {'L', 'B', 'C', 'K', 'P', 'T', '0', '1'};
inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  ModelParams params;
  Vocabulary vocab;
};

void save_checkpoint(const ModelParams& params, const Vocabulary& vocab,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lateral::mcq
