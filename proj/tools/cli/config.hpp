#pragma once
// Scenario files: YAML documents checked against schema/scenario.schema.yaml, which is compiled
// into the binary.
#include <filesystem>
#include <string>

#include <yaml-cpp/yaml.h>

namespace cr::cli {

struct ScenarioConfig {
    YAML::Node root;
    std::filesystem::path base_dir;   // relative paths in the file resolve against this
};

const std::string& schema_text();

// Throws SchemaError with the line and column of the first offending node.
void validate(const YAML::Node& doc, const YAML::Node& schema, const std::string& where = "");
void validate(const YAML::Node& doc);

// Parse, splice `system.include`, validate.
ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
ScenarioConfig load_config(const std::filesystem::path& path);

} // namespace cr::cli
