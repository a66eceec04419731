#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relanno/dataset.hpp"
#include "relanno/metrics.hpp"
#include "relanno/parsing.hpp"

// Multi-annotator aggregation: majority vote, similarity-weighted RelIndex, coverage curves, triage.
namespace relanno::aggregation {

/// Expert similarity between the labels of one entity pair. Defaults to identity.
class SimilarityMatrix {
public:
    SimilarityMatrix() = default;
    SimilarityMatrix(std::string pair_type, std::vector<std::string> labels);

    const std::string& pair_type() const { return pair_type_; }
    const std::vector<std::string>& labels() const { return labels_; }
    bool has_label(std::string_view l) const;
    std::size_t index(std::string_view l) const;   // throws ValidationError for unknown labels

    /// Sets sim(a,b) and sim(b,a).
    void set(std::string_view a, std::string_view b, double value);
    double operator()(std::string_view a, std::string_view b) const;
    double at(std::size_t i, std::size_t j) const { return sim_[i * labels_.size() + j]; }

    /// Every value multiplied by c (the diagonal included).
    SimilarityMatrix scaled(double c) const;

    /// Diagonal 1, symmetric, values in [0,1].
    void validate() const;

private:
    std::string pair_type_;
    std::vector<std::string> labels_;
    std::vector<double> sim_;
};

class SimilarityBook {
public:
    /// Identity matrices for every schema.
    static SimilarityBook identity(const dataset::SchemaMap& schemas);
    /// JSON pair_type -> label -> label -> value, on top of identity defaults. A value given in
    /// one direction only is mirrored; conflicting directions are an error.
    static SimilarityBook parse(std::string_view json_text, const dataset::SchemaMap& schemas);
    static SimilarityBook load(const std::filesystem::path& path, const dataset::SchemaMap& schemas);

    void put(SimilarityMatrix m);
    const SimilarityMatrix& for_pair(const std::string& pair_type) const;

private:
    std::map<std::string, SimilarityMatrix> matrices_;
};

/// The label an outcome votes for: its label, or a hallucination's style when that style is one of
/// `labels`. Blanks and unmapped hallucinations vote for nothing.
std::optional<std::string> effective_label(const parsing::ParsedLabel& outcome, const std::vector<std::string>& labels);

struct MajorityResult {
    std::string label;
    std::size_t support = 0;
};

/// Plurality over usable votes; ties go to the lexicographically smallest label id.
/// Throws ValidationError("no usable votes") when no outcome votes for a label.
MajorityResult majority_vote(const std::vector<parsing::ParsedLabel>& outcomes, const std::vector<std::string>& labels);

struct Assessment {
    std::string annotator;
    parsing::ParsedLabel outcome;
};

struct VoteResult {
    std::string instance_id;
    std::string pair_type;
    std::map<std::string, double> confid;
    std::string selected;
    double rel_index = 0.0;
    std::vector<Assessment> assessments;
};

/// confid(l) = (1/K) sum_i sim(a_i, l); selected = argmax (smallest id on ties), rel_index = max.
VoteResult relindex_vote(const std::vector<parsing::ParsedLabel>& outcomes, const SimilarityMatrix& sim);

/// K annotators, each contributing one outcome per instance.
struct Panel {
    std::vector<std::string> annotators;
    std::vector<metrics::LabelVector> votes;

    void add(std::string annotator, metrics::LabelVector v);
    std::size_t size() const { return annotators.size(); }
};

/// RelIndex vote for every dataset instance, in dataset order.
std::vector<VoteResult> relindex_vote_panel(const Panel& panel, const dataset::Dataset& ds, const SimilarityBook& sims);

/// Majority-vote predictions for every dataset instance; instances without usable votes become blanks.
metrics::LabelVector majority_vote_panel(const Panel& panel, const dataset::Dataset& ds);

namespace serial {
std::vector<VoteResult> relindex_vote_panel(const Panel& panel, const dataset::Dataset& ds, const SimilarityBook& sims);
metrics::LabelVector majority_vote_panel(const Panel& panel, const dataset::Dataset& ds);
} // namespace serial

/// Votes ordered by rel_index descending, then instance id ascending.
std::vector<const VoteResult*> ranked(const std::vector<VoteResult>& votes);

/// Number of instances covered by fraction p of n: ceil(p*n).
std::size_t covered_count(double p, std::size_t n);

struct CurvePoint {
    double coverage = 0.0;
    std::size_t count = 0;
    double accuracy = 0.0;
};

std::vector<CurvePoint> coverage_curve(const std::vector<VoteResult>& votes, const dataset::Dataset& gold,
                                       const std::vector<double>& steps);

/// 0.05, 0.10, ..., 1.00
std::vector<double> default_steps();

struct TriagePolicy {
    enum class Kind { threshold, coverage };
    Kind kind = Kind::coverage;
    double value = 0.65;

    static TriagePolicy threshold(double t) { return {Kind::threshold, t}; }
    static TriagePolicy coverage(double c) { return {Kind::coverage, c}; }
    void validate() const;
};

struct TriageSplit {
    std::vector<std::string> auto_accepted;   // rel_index descending
    std::vector<std::string> expert_queue;    // rel_index ascending, then id
};

TriageSplit triage(const std::vector<VoteResult>& votes, const TriagePolicy& policy);

} // namespace relanno::aggregation
