#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "flatnas/nncore.hpp"
#include "flatnas/supernet.hpp"

namespace flatnas {

inline constexpr std::string_view kCheckpointMagic = "flatnas-ckpt-v1";

struct CheckpointHeader {
    std::string preset;
    std::uint64_t seed = 0;
    int epoch = 0;
    std::string config_digest;
};

/// Container format: text header lines (magic, preset, seed, epoch, digest,
/// section count), then per section a label line and per entry a header line
/// followed by the raw little-endian 64-bit float payload (endian-explicit,
/// byte-identical across platforms).
void write_paramset_checkpoint(std::ostream& os, const CheckpointHeader& header,
                               const ParamSet& params);
ParamSet read_paramset_checkpoint(std::istream& is, CheckpointHeader* header = nullptr);

void write_supernet_checkpoint(const std::string& path, const CheckpointHeader& header,
                               const SuperNet& net);
SuperNet read_supernet_checkpoint(const std::string& path, CheckpointHeader* header = nullptr);

void write_paramset_checkpoint(const std::string& path, const CheckpointHeader& header,
                               const ParamSet& params);
ParamSet read_paramset_checkpoint(const std::string& path, CheckpointHeader* header = nullptr);

}  // namespace flatnas
