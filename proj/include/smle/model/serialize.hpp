#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "smle/model/smle_model.hpp"

namespace smle {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// "SMLE" magic, u32 version, dimension header, then little-endian f64 blocks.
std::vector<std::uint8_t> serialize(const SmleModel& model);
SmleModel deserialize(std::span<const std::uint8_t> bytes);

nlohmann::json to_json(const SmleModel& model);
SmleModel model_from_json(const nlohmann::json& j);

void save_model(const SmleModel& model, const std::filesystem::path& path);
SmleModel load_model(const std::filesystem::path& path);

}  // namespace smle
