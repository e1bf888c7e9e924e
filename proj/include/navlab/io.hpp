#pragma once

// Versioned file formats. Maps are a one-line JSON header followed by the
// ASCII grid (north row first); everything else is JSON or CSV.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "navlab/harness.hpp"

namespace navlab {

inline constexpr const char* kMapSchema = "navlab.map/1";
inline constexpr const char* kEpisodesSchema = "navlab.episodes/1";
inline constexpr const char* kPriorsSchema = "navlab.priors/1";
inline constexpr const char* kTrajectorySchema = "navlab.trajectory/1";
inline constexpr const char* kReportSchema = "navlab.report/1";
inline constexpr const char* kRunConfigSchema = "navlab.run/1";
inline constexpr const char* kMapSpecSchema = "navlab.mapspec/1";
inline constexpr const char* kAnalysisSchema = "navlab.analysis/1";

using Json = nlohmann::ordered_json;

/// Fixed-precision number formatting shared by every CSV writer.
std::string format_number(double v);

void write_map(std::ostream& os, const GroundTruthMap& map, WorldMode mode);
/// Throws ParseError on a malformed document.
GroundTruthMap read_map(std::istream& is, WorldMode* mode = nullptr);

Json episodes_to_json(const GeneratedMap& g);
/// Fills episodes, doors and mode of `g` (whose map must already be set).
void episodes_from_json(const Json& j, GeneratedMap& g);

/// `<stem>.map` plus `<stem>.episodes.json`.
void save_generated(const std::string& stem, const GeneratedMap& g);
/// Accepts either the stem or the .map path.
GeneratedMap load_generated(const std::string& path);

Json priors_to_json(const ActionPriorTable& t);
ActionPriorTable priors_from_json(const Json& j);

Json trajectory_to_json(const Trajectory& t);
Trajectory trajectory_from_json(const Json& j);

/// Scores quantized to digits 0-9 in map layout, walls of the belief shown
/// as-is; the sidecar holds raw scores as x,y,score rows.
void write_belief(std::ostream& grid, std::ostream& sidecar, const OccupancyBelief& belief);

Json map_spec_to_json(const MapSpec& s);
MapSpec map_spec_from_json(const Json& j);
Json run_config_to_json(const RunConfig& c);
RunConfig run_config_from_json(const Json& j);

Json report_to_json(const MetricsReport& r);
Json benchmark_to_json(const BenchmarkResult& r, const RunConfig& cfg);
std::string reports_csv(const std::vector<MetricsReport>& reports);
std::string episodes_csv(const std::vector<EpisodeRecord>& records);
std::string correlations_csv(const std::vector<CorrelationRow>& rows);
std::string difficulty_csv(const std::vector<EpisodeDifficulty>& rows);
/// One row per (agent, noise): the success-rate curve plot data.
std::string noise_curve_csv(const std::vector<MetricsReport>& reports);

/// Writes report.json, report.csv, episodes.csv, correlation.csv,
/// difficulty.csv, noise_curve.csv and priors.json under `dir`.
void write_benchmark(const std::string& dir, const BenchmarkResult& r, const RunConfig& cfg);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace navlab
