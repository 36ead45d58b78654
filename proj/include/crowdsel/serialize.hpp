#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crowdsel/types.hpp"
#include "json.hpp"

namespace crowdsel {

/// Malformed dataset or run file. The message names the offending line or field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic JSON rendering: object keys sorted, floating-point values
/// printed with 17 significant digits, no insignificant whitespace, trailing LF.
std::string canonical_dump(const nlohmann::json& value);

nlohmann::json to_json(const Dataset& dataset);
nlohmann::json to_json(const DomainModel& model);
nlohmann::json to_json(const RoundRecord& record);
nlohmann::json to_json(const RunResult& result);

std::string canonical_serialize(const Dataset& dataset);
std::string canonical_serialize(const RunResult& result);

/// Parses a dataset document. Workers are re-numbered densely in id order;
/// unknown fields and re-numbering are reported through `warnings`.
Dataset parse_dataset(std::string_view text, std::vector<std::string>* warnings = nullptr);
Dataset dataset_from_json(const nlohmann::json& doc, std::vector<std::string>* warnings = nullptr);
DomainModel model_from_json(const nlohmann::json& doc);
RunResult parse_run_result(std::string_view text);

std::string bits_to_string(const Bits& bits);
Bits bits_from_string(std::string_view s);

void write_text_file(const std::filesystem::path& path, std::string_view contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace crowdsel
