#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Annotation cost and time: token-, character-, machine-hour- and human-priced annotators.
namespace relanno::costing {

struct PerToken {
    double input_per_1k = 0.0;
    double output_per_1k = 0.0;
};
struct PerChar {
    double per_1k = 0.0;
};
struct PerHour {
    double per_hour = 0.0;
};
struct Human {
    double seconds_per_instance = 0.0;
    double hourly_wage = 0.0;
};

struct PricingModel {
    std::string name;
    std::variant<PerToken, PerChar, PerHour, Human> kind;
    std::string currency = "USD";

    std::string_view kind_name() const;
    void validate() const;
};

enum class Unit { tokens, chars };

struct UsageStats {
    std::size_t n = 0;
    double avg_input = 0.0;     // in `unit`
    double avg_output = 0.0;
    double avg_seconds = 0.0;
    Unit unit = Unit::tokens;
};

/// One record's usage, for the exact (summed) mode.
struct RecordUsage {
    double input = 0.0;
    double output = 0.0;
    double seconds = 0.0;
};

struct CostEstimate {
    double cost = 0.0;        // rounded half-up to cents
    double raw_cost = 0.0;    // unrounded
    double hours = 0.0;
};

/// Half-up rounding to cents.
double round_cents(double amount);

/// Formula on averages: per_token n*(in*p_in + out*p_out)/1000, per_char n*(in+out)*p/1000,
/// per_hour n*(sec/3600)*p, human n*(sec/3600)*wage. Throws when the stats unit does not fit the kind.
CostEstimate estimate_cost(const UsageStats& stats, const PricingModel& pricing);

/// Same formulas summed over individual records; rounding happens once at the end.
CostEstimate estimate_cost_exact(const std::vector<RecordUsage>& records, Unit unit, const PricingModel& pricing);

/// n*seconds/3600*wage, rounded to cents.
double human_baseline(std::size_t n, double seconds, double wage);

/// Named pricing models. Defaults carry GPT-4 and PaLM 2 list prices, a p3.2xlarge hourly rate
/// and the minimum-wage human annotator.
class PricingBook {
public:
    static PricingBook defaults();
    /// JSON list of {name, kind, ...} objects.
    static PricingBook parse(std::string_view json_text);
    static PricingBook load(const std::filesystem::path& path);

    void add(PricingModel m);
    const PricingModel& get(const std::string& name) const;
    bool contains(const std::string& name) const { return models_.count(name) > 0; }
    std::vector<std::string> names() const;

private:
    std::map<std::string, PricingModel> models_;
};

} // namespace relanno::costing
