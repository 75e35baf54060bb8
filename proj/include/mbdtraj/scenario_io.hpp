#pragma once

// Scenario files (JSON) and run outputs.
//
// An output directory holds
//   result.json        self-describing bundle incl. the scenario echo
//   trace.csv          t,lambda,best_R,mean_R,V,E,wall_ms
//   trajectory.csv     i,s,q_1..q_n
//   path_errors.csv    i,translation_err,rotation_err
// CSV floats are written with 17 significant digits; JSON floats use the
// shortest text that parses back to the same double.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "mbdtraj/scenario.hpp"

namespace mbdtraj {

// Throws ValidationError naming the offending field, e.g.
// "arms[1].joints[0].velocity_limit: must be positive".
Scenario ParseScenario(const nlohmann::json& doc);

// Throws ValidationError with line and column on malformed JSON.
Scenario ParseScenarioText(const std::string& text);

// Throws IoError when the file cannot be read.
Scenario LoadScenario(const std::filesystem::path& path);

nlohmann::json LoadJsonFile(const std::filesystem::path& path);

std::string FormatDouble(double value);

nlohmann::json BundleToJson(const ResultBundle& bundle);
ResultBundle BundleFromJson(const nlohmann::json& doc);

std::string TraceCsv(const RunTrace& trace);
std::string TrajectoryCsv(const ResultBundle& bundle);
std::string PathErrorCsv(const ResultBundle& bundle);

// Creates out_dir when missing. Throws IoError on write failure.
void Emit(const ResultBundle& bundle, const std::filesystem::path& out_dir);

void WriteTextFile(const std::filesystem::path& path, const std::string& text);

struct VerifyReport {
  Evaluation recorded;
  Evaluation recomputed;
  bool bit_identical = false;
};

// Rebuilds the scenario from the echo inside result.json and re-evaluates
// theta_star with the recorded final lambda.
VerifyReport VerifyResult(const nlohmann::json& result_doc);

}  // namespace mbdtraj
