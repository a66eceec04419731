#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "relanno/aggregation.hpp"
#include "relanno/dataset.hpp"

// Expert review queue: triaged items plus an append-only decision log replayed at startup.
namespace relanno::orchestrator {

struct ExpertDecision {
    std::string label;
    std::string reviewer;
    std::string timestamp;
    std::size_t seq = 0;
    std::optional<std::size_t> supersedes;   // seq of the decision this one replaced
};

struct ReviewOption {
    std::string label;
    std::string text;
};

struct ReviewItem {
    std::string instance_id;
    std::string pair_type;
    std::string sentence;
    std::string marked_sentence;
    dataset::EntitySpan e1;
    dataset::EntitySpan e2;
    std::vector<ReviewOption> options;   // canonical schema order
    std::vector<aggregation::Assessment> assessments;
    std::map<std::string, double> confid;
    double rel_index = 0.0;
    std::string selected;
    bool queued = false;
    std::optional<ExpertDecision> decision;
};

nlohmann::ordered_json to_json(const ReviewItem& item);

struct Progress {
    std::size_t total = 0;          // queued items
    std::size_t reviewed = 0;
    std::size_t auto_accepted = 0;
    std::optional<double> mean_rel_index_remaining;
};

nlohmann::ordered_json to_json(const Progress& p);

struct DecisionOutcome {
    std::size_t remaining = 0;
    bool superseded = false;
    ExpertDecision decision;
};

class ReviewStore {
public:
    /// Creates a review directory (items, dataset copy, empty decision log).
    static void create(const std::filesystem::path& dir, const dataset::Dataset& ds,
                       const std::vector<aggregation::VoteResult>& votes, const aggregation::TriageSplit& split);

    /// Opens a review directory and replays its decision log.
    explicit ReviewStore(std::filesystem::path dir);

    /// Next `limit` unreviewed queued items, by (rel_index asc, id asc).
    std::vector<ReviewItem> queue(std::size_t limit) const;
    std::optional<ReviewItem> item(const std::string& id) const;

    /// Persists the decision (fsync) before returning. Unknown id -> NotFoundError,
    /// label outside the item's options -> ValidationError.
    DecisionOutcome decide(const std::string& instance_id, const std::string& label, const std::string& reviewer);

    Progress progress() const;

    /// Dataset with gold_label = expert decision, else the auto-selected label.
    dataset::Dataset merged() const;
    std::string export_jsonl() const;

    const std::filesystem::path& dir() const { return dir_; }

private:
    void apply(const ExpertDecision& d, const std::string& instance_id, bool& superseded);

    std::filesystem::path dir_;
    dataset::Dataset ds_;
    std::vector<ReviewItem> items_;
    std::map<std::string, std::size_t> index_;
    std::vector<std::size_t> queue_order_;
    std::size_t next_seq_ = 1;
    mutable std::mutex mu_;
};

} // namespace relanno::orchestrator
