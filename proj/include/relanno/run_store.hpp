#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "relanno/backends.hpp"

// Append-only run directories: records.jsonl plus a terminal manifest.json.
namespace relanno::store {

struct RunTotals {
    std::size_t instances = 0;
    std::size_t input_tokens = 0;
    std::size_t output_tokens = 0;
    std::size_t input_chars = 0;
    std::size_t output_chars = 0;
    double wall_seconds = 0.0;
};

struct RunManifest {
    std::string run_id;
    nlohmann::ordered_json backend;   // config snapshot
    prompting::PromptVariant variant = prompting::PromptVariant::simple;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
    int run_index = 1;
    std::string dataset_fingerprint;
    RunTotals totals;
    std::string created_at;           // ISO-8601 UTC
};

nlohmann::ordered_json to_json(const backends::RawResponse& r);
backends::RawResponse response_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const backends::BackendConfig& c);

std::string make_run_id(const backends::BackendConfig& c, prompting::PromptVariant v, int run_index);

class RunStore {
public:
    /// Opens (creating if needed) a run directory and indexes already persisted records.
    explicit RunStore(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }
    bool contains(const std::string& instance_id) const { return persisted_.count(instance_id) > 0; }
    std::size_t size() const { return persisted_.size(); }

    /// Appends one record and flushes it to disk before returning.
    void append(const backends::RawResponse& r);
    void write_manifest(const RunManifest& m);
    bool has_manifest() const;

    std::filesystem::path records_path() const { return dir_ / "records.jsonl"; }
    std::filesystem::path manifest_path() const { return dir_ / "manifest.json"; }

private:
    std::filesystem::path dir_;
    std::set<std::string> persisted_;
};

struct RunData {
    std::filesystem::path dir;
    RunManifest manifest;
    std::vector<backends::RawResponse> records;
};

/// Loads a completed run. A missing manifest means the run never finished and is an error.
RunData load_run(const std::filesystem::path& dir);
std::vector<backends::RawResponse> load_records(const std::filesystem::path& dir);

} // namespace relanno::store
