#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include "json.hpp"
#include <string>
#include <vector>

#include "ridgefind/model.hpp"

namespace ridgefind {

using Json = nlohmann::json;

// Serializes with every floating-point number written at 17 significant
// digits, so reals round-trip bit-exactly. Non-finite reals are an error.
std::string dump_json(const Json& j, int indent = 2);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j, int indent = 2);
// Appends one compact JSON document per line.
void append_json_line(const std::filesystem::path& path, const Json& j);

Json to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const Json& j);

Json activation_to_json(const Activation& a);
Activation activation_from_json(const Json& j);

Json instance_to_json(const SumOfFeaturesModel& model, const NoiseSpec& noise);
Instance instance_from_json(const Json& j);

}  // namespace ridgefind
