#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "relanno/aggregation.hpp"
#include "relanno/config.hpp"
#include "relanno/costing.hpp"
#include "relanno/metrics.hpp"
#include "relanno/run_store.hpp"

// Command implementations shared by the CLI, the acceptance suite and the tests.
namespace relanno::orchestrator {

parsing::AnnotationRecord parse_record(const backends::RawResponse& r, const parsing::StyleLexicon& lexicon);

struct LoadedRun {
    store::RunData data;
    std::vector<parsing::AnnotationRecord> records;

    const std::string& id() const { return data.manifest.run_id; }
};

/// Loads a completed run and checks it against the workspace dataset: the fingerprint must match
/// and every record must name a known instance.
LoadedRun load_checked_run(const std::filesystem::path& dir, const Workspace& ws);
std::vector<LoadedRun> load_checked_runs(const std::vector<std::filesystem::path>& dirs, const Workspace& ws);

struct AnnotateRequest {
    std::string backend;
    prompting::PromptVariant variant = prompting::PromptVariant::simple;
    std::optional<double> temperature;
    std::optional<std::int64_t> seed;
    std::optional<int> max_parallel;
    int run_index = 1;
    std::optional<std::filesystem::path> out;   // default: runs_dir / run id
    std::optional<std::size_t> stop_after;
};

/// Effective backend config for a request (CLI flags override the config file).
backends::BackendConfig resolve_backend(const Workspace& ws, const AnnotateRequest& req);

/// Runs (or resumes) one annotation run and returns its directory.
std::filesystem::path annotate(const Workspace& ws, const AnnotateRequest& req, backends::Annotator* annotator = nullptr);

nlohmann::ordered_json to_json(const metrics::MetricReport& r);
nlohmann::ordered_json to_json(const parsing::ParsedLabel& p);
parsing::ParsedLabel parsed_from_json(const nlohmann::json& j);

/// Table-1-shaped report: one row per (backend, variant, temperature) with its runs and their
/// average, plus the crowd majority baseline when crowd labels exist and, optionally, the
/// majority-vote ensemble of all given runs.
nlohmann::ordered_json evaluate_report(const Workspace& ws, const std::vector<LoadedRun>& runs, metrics::EvalMode mode,
                                       bool ensemble = false);

/// Crowd-worker majority (ties to the smallest id) as predictions.
metrics::LabelVector crowd_majority(const dataset::Dataset& ds);

/// Pairwise Cohen's kappa and Fleiss' kappa over the given runs.
nlohmann::ordered_json agreement_report(const std::vector<LoadedRun>& runs);

aggregation::Panel make_panel(const std::vector<LoadedRun>& runs);

nlohmann::ordered_json votes_to_json(const aggregation::Panel& panel, const std::vector<aggregation::VoteResult>& votes);
std::vector<aggregation::VoteResult> votes_from_json(const nlohmann::json& j);
std::vector<aggregation::VoteResult> load_votes(const std::filesystem::path& path);

std::string curve_csv(const std::vector<aggregation::CurvePoint>& points);

nlohmann::ordered_json triage_to_json(const aggregation::TriageSplit& split, const aggregation::TriagePolicy& policy);

/// Usage averages over a run's records, in the unit the pricing kind needs.
costing::UsageStats usage_stats(const store::RunData& run, const costing::PricingModel& pricing);

nlohmann::ordered_json cost_report(const Workspace& ws, const std::vector<LoadedRun>& runs);

/// Cost checks against the published averages, and the human baseline with the published figure.
nlohmann::ordered_json reference_cost_report();

/// Mock stand-ins for the three evaluated models, with per-variant accuracies taken from the
/// published temperature-0.2 accuracies. Used by `relanno synth` and the acceptance suite.
nlohmann::ordered_json demo_backends();

/// Writes via a temporary file and rename.
void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

} // namespace relanno::orchestrator
