#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "relanno/aggregation.hpp"
#include "relanno/backends.hpp"
#include "relanno/costing.hpp"
#include "relanno/dataset.hpp"
#include "relanno/parsing.hpp"
#include "relanno/prompting.hpp"

// One JSON file naming the dataset, schemas, exemplar bank, similarity matrix, backends and pricing.
namespace relanno::orchestrator {

struct Config {
    std::filesystem::path dataset;
    std::filesystem::path schemas;
    std::optional<std::filesystem::path> exemplars;
    /// Generate exemplars for pairs the bank does not cover (synthetic datasets only).
    bool synthetic_exemplars = false;
    std::optional<std::filesystem::path> similarity;
    std::optional<std::filesystem::path> styles;
    std::optional<std::filesystem::path> lexicon;
    std::optional<std::filesystem::path> pricing;
    std::filesystem::path runs_dir = "runs";
    std::vector<backends::BackendConfig> backends;

    const backends::BackendConfig& backend(const std::string& name) const;

    /// Relative paths resolve against `base_dir`.
    static Config parse(std::string_view json_text, const std::filesystem::path& base_dir);
    static Config load(const std::filesystem::path& path);
};

backends::BackendConfig backend_from_json(const nlohmann::json& j);
backends::MockProfile mock_profile_from_json(const nlohmann::json& j);

/// Everything a command needs, loaded and validated once.
struct Workspace {
    Config config;
    dataset::Dataset dataset;
    prompting::ExemplarBank exemplars;
    prompting::StyleBook styles;
    parsing::StyleLexicon lexicon;
    aggregation::SimilarityBook similarity;
    costing::PricingBook pricing;

    static Workspace open(Config config);
};

} // namespace relanno::orchestrator
