#pragma once

#include "admmdet/hnet.hpp"
#include "admmdet/mimo_model.hpp"
#include "admmdet/psnet.hpp"

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace admmdet {

using Json = nlohmann::json;

/// Serializes with 2-space indentation; floating-point numbers are written with
/// 17 significant digits so a reload is bit-identical. Numeric arrays stay on one line.
std::string dump_json(const Json& j);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

Json to_json(const DatasetDescriptor& d);
DatasetDescriptor dataset_from_json(const Json& j);

Json to_json(const PenaltyParams& p);
PenaltyParams penalties_from_json(const Json& j);

Json to_json(const PsnetModel& m);
PsnetModel psnet_from_json(const Json& j);

Json to_json(const HnetModel& m);
HnetModel hnet_from_json(const Json& j);

void save_psnet(const PsnetModel& m, const std::filesystem::path& path);
PsnetModel load_psnet(const std::filesystem::path& path);
void save_hnet(const HnetModel& m, const std::filesystem::path& path);
HnetModel load_hnet(const std::filesystem::path& path);

/// Reads a JSON file, reporting parse failures with line and column.
Json parse_json_file(const std::filesystem::path& path);

} // namespace admmdet
