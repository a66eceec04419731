#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Relation-extraction instances and the per-entity-pair label schemas they are annotated against.
namespace relanno::dataset {

/// Span offsets count Unicode code points, start inclusive, end exclusive.
struct EntitySpan {
    std::string surface;
    std::size_t start = 0;
    std::size_t end = 0;

    bool operator==(const EntitySpan&) const = default;
};

struct RelationSchema {
    std::string pair_type;
    std::vector<std::string> labels;                  // canonical snake_case ids, display order
    std::map<std::string, std::string> templates;     // label -> option text with {E1}/{E2}
    std::string no_relation_label;
    std::string relation_group;                       // short task noun phrase, e.g. "date of formation"

    bool has_label(std::string_view label) const;
    /// Option text for `label` with entity surfaces substituted.
    std::string render_option(const std::string& label, std::string_view e1, std::string_view e2) const;
    void validate() const;

    bool operator==(const RelationSchema&) const = default;
};

struct Instance {
    std::string id;
    std::string sentence;
    EntitySpan e1;
    EntitySpan e2;
    std::string pair_type;
    std::optional<std::string> gold_label;
    std::vector<std::string> crowd_labels;   // one per crowdworker, in worker order

    bool operator==(const Instance&) const = default;
};

using SchemaMap = std::map<std::string, RelationSchema>;

struct Dataset {
    SchemaMap schemas;
    std::vector<Instance> instances;
    /// SHA-256 of the JSONL bytes this dataset was loaded from (or serialized to).
    std::string fingerprint;

    const RelationSchema& schema_for(const Instance& inst) const;
    const Instance* find(std::string_view id) const;
    /// Copy restricted to the given ids, in dataset order.
    Dataset subset(const std::vector<std::string>& ids) const;

    bool operator==(const Dataset& o) const { return schemas == o.schemas && instances == o.instances; }
};

SchemaMap load_schemas(const std::filesystem::path& path);
SchemaMap parse_schemas(std::string_view json_text);
std::string serialize_schemas(const SchemaMap& schemas);

/// Parses a JSONL dataset against known schemas. Malformed lines are reported by line
/// number, contract violations by instance id.
Dataset parse_dataset(std::string_view jsonl, const SchemaMap& schemas);
Dataset load_dataset(const std::filesystem::path& path, const SchemaMap& schemas);
Dataset load_dataset(const std::filesystem::path& path, const std::filesystem::path& schema_path);

/// Canonical JSONL encoding; parse_dataset(serialize_dataset(d)) == d byte for byte.
std::string serialize_dataset(const Dataset& d);
std::string serialize_instance(const Instance& inst);

void validate_instance(const Instance& inst, const SchemaMap& schemas);

/// Sentence with `**` around e1 and `__` around e2, inserted by offset.
std::string mark_entities(const Instance& inst);

std::map<std::string, std::size_t> counts_by_pair(const Dataset& d);

// Synthetic data for tests, benchmarks and demos.

/// Default schemas for the six entity pairs used in the evaluation slice.
SchemaMap default_schemas();

struct SynthOptions {
    std::map<std::string, std::size_t> per_pair;  // pair_type -> count
    std::uint64_t seed = 1;
    std::size_t crowd_workers = 3;
    double crowd_accuracy = 0.45;
};

Dataset synthesize(const SchemaMap& schemas, const SynthOptions& opts);
/// `n` instances spread round-robin over the schema pair types.
Dataset synthesize(const SchemaMap& schemas, std::size_t n, std::uint64_t seed);

} // namespace relanno::dataset
