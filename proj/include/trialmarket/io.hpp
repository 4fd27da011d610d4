#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "trialmarket/analysis.hpp"
#include "trialmarket/experiments.hpp"
#include "trialmarket/market.hpp"
#include "trialmarket/two_class_logit.hpp"

namespace trialmarket {

inline constexpr const char* kToolVersion = "0.1.0";

nlohmann::json read_json_file(const std::filesystem::path& path);

// Market instances: {"num_items","num_classes","class_weights"|"arrival_rates",
// "appeals","qualities","visibilities","z"}; matrices are item-major.
nlohmann::json config_to_json(const MarketConfig& config);
MarketConfig config_from_json(const nlohmann::json& doc);

// {"V1","V2","revenues","alpha"}
nlohmann::json instance_to_json(const TwoClassLogitInstance& instance);
TwoClassLogitInstance instance_from_json(const nlohmann::json& doc);

/// Unavailable quantities serialize as null. Item indices are 1-based.
nlohmann::json report_to_json(const AsymptoticReport& report);

// Experiment description:
// {"scheme","figure","num_items","horizon","replications","seed","z","visibility_profile"}
FigureRequest request_from_json(const nlohmann::json& doc);
nlohmann::json request_to_json(const FigureRequest& request);

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

/// Run record: tool version, timestamp, seed, resolved config and output
/// checksums. Callers add what is needed to replay the run.
nlohmann::json manifest_json(std::uint64_t seed, const MarketConfig& config,
                             const std::vector<std::filesystem::path>& outputs);

}  // namespace trialmarket
