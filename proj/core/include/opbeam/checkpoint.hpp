#pragma once

#include <filesystem>
#include <string>

#include "opbeam/network.hpp"

namespace opbeam {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    QNetworkConfig config;
    QNetworkParams params;
};

/// Self-describing JSON: format tag, version, network config and every named
/// tensor with its shape and row-major data. Round-trips bit-exactly.
std::string checkpoint_to_json(const QNetworkConfig& cfg, const QNetworkParams& params);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& file, const QNetworkConfig& cfg,
                     const QNetworkParams& params);
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace opbeam
