#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "mtc/eval/metrics.hpp"
#include "mtc/eval/protocols.hpp"

namespace mtc::eval {

// A report file is {"body": {...}, "generated_at": "<UTC time>"}. Everything
// that depends on the inputs lives in "body"; the timestamp is kept outside
// it so that re-running a command reproduces the body byte for byte.
//
// Every body carries "protocol", "config", "fingerprint" and "seed".

/// Hex digest of the config serialized with sorted keys and no whitespace.
std::string config_fingerprint(const nlohmann::json& config);

nlohmann::json metrics_to_json(const MetricsReport& report);

nlohmann::json cv_body(const CvResult& result, const nlohmann::json& config, std::uint64_t seed);
nlohmann::json zero_day_body(std::span<const ZeroDayResult> results, const nlohmann::json& config,
                             std::uint64_t seed);
nlohmann::json incremental_body(std::span<const IncrementalStep> steps, const nlohmann::json& config,
                                std::uint64_t seed);
nlohmann::json cross_body(std::span<const CrossDatasetResult> results, const nlohmann::json& config,
                          std::uint64_t seed);

/// Wraps a body with the current UTC time.
nlohmann::json make_report(nlohmann::json body);

/// Serialized body exactly as it appears in the written file.
std::string dump_body(const nlohmann::json& report);

void write_report(const nlohmann::json& report, const std::filesystem::path& path);
/// Throws CorruptReport if the file is not a report.
nlohmann::json read_report(const std::filesystem::path& path);

/// Human-readable rendering of any report kind.
std::string render_report(const nlohmann::json& report);

/// One row per test sample: session_id, fold, truth, predicted, p_<class>...
void write_predictions_csv(std::span<const SamplePrediction> predictions, std::span<const std::string> classes,
                           const std::filesystem::path& path);

} // namespace mtc::eval
