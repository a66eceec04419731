#include "relanno/costing.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "relanno/error.hpp"

namespace relanno::costing {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_unit(const PricingModel& p, Unit have)
{
    const bool ok = std::visit(overloaded{[&](const PerToken&) { return have == Unit::tokens; },
                                          [&](const PerChar&) { return have == Unit::chars; },
                                          [](const auto&) { return true; }},
                               p.kind);
    if (!ok)
        throw ValidationError("pricing " + p.name + " (" + std::string(p.kind_name()) + ") cannot price usage counted in " +
                              (have == Unit::tokens ? "tokens" : "characters"));
}

/// Unrounded cost of `n` instances with the given per-instance usage.
double raw(const PricingModel& p, double n, double in, double out, double seconds)
{
    return std::visit(overloaded{[&](const PerToken& k) { return n * (in * k.input_per_1k + out * k.output_per_1k) / 1000.0; },
                                 [&](const PerChar& k) { return n * (in + out) * k.per_1k / 1000.0; },
                                 [&](const PerHour& k) { return n * (seconds / 3600.0) * k.per_hour; },
                                 [&](const Human& k) { return n * (k.seconds_per_instance / 3600.0) * k.hourly_wage; }},
                      p.kind);
}

double seconds_of(const PricingModel& p, double seconds)
{
    if (const auto* h = std::get_if<Human>(&p.kind))
        return h->seconds_per_instance;
    return seconds;
}

} // namespace

std::string_view PricingModel::kind_name() const
{
    return std::visit(overloaded{[](const PerToken&) { return std::string_view("per_token"); },
                                 [](const PerChar&) { return std::string_view("per_char"); },
                                 [](const PerHour&) { return std::string_view("per_hour"); },
                                 [](const Human&) { return std::string_view("human"); }},
                      kind);
}

void PricingModel::validate() const
{
    const bool ok = std::visit(
        overloaded{[](const PerToken& k) { return k.input_per_1k >= 0 && k.output_per_1k >= 0; },
                   [](const PerChar& k) { return k.per_1k >= 0; }, [](const PerHour& k) { return k.per_hour >= 0; },
                   [](const Human& k) { return k.seconds_per_instance >= 0 && k.hourly_wage >= 0; }},
        kind);
    if (!ok)
        throw ValidationError("pricing " + name + ": prices must be non-negative");
}

double round_cents(double amount)
{
    return std::floor(amount * 100.0 + 0.5 + 1e-9) / 100.0;
}

CostEstimate estimate_cost(const UsageStats& s, const PricingModel& pricing)
{
    pricing.validate();
    if (s.avg_input < 0 || s.avg_output < 0 || s.avg_seconds < 0)
        throw ValidationError("usage stats must be non-negative");
    require_unit(pricing, s.unit);
    const double n = static_cast<double>(s.n);
    CostEstimate e;
    e.raw_cost = raw(pricing, n, s.avg_input, s.avg_output, s.avg_seconds);
    e.cost = round_cents(e.raw_cost);
    e.hours = n * seconds_of(pricing, s.avg_seconds) / 3600.0;
    return e;
}

CostEstimate estimate_cost_exact(const std::vector<RecordUsage>& records, Unit unit, const PricingModel& pricing)
{
    pricing.validate();
    require_unit(pricing, unit);
    CostEstimate e;
    for (const auto& r : records) {
        if (r.input < 0 || r.output < 0 || r.seconds < 0)
            throw ValidationError("usage stats must be non-negative");
        e.raw_cost += raw(pricing, 1.0, r.input, r.output, r.seconds);
        e.hours += seconds_of(pricing, r.seconds) / 3600.0;
    }
    e.cost = round_cents(e.raw_cost);
    return e;
}

double human_baseline(std::size_t n, double seconds, double wage)
{
    if (seconds < 0 || wage < 0)
        throw ValidationError("human_baseline: seconds and wage must be non-negative");
    return round_cents(static_cast<double>(n) * seconds / 3600.0 * wage);
}

PricingBook PricingBook::defaults()
{
    PricingBook b;
    b.add({"gpt4", PerToken{0.03, 0.06}, "USD"});
    b.add({"palm2", PerChar{0.0010}, "USD"});
    b.add({"mpt_p3_2xlarge", PerHour{3.06}, "USD"});
    b.add({"human_min_wage", Human{45.0, 7.25}, "USD"});
    return b;
}

PricingBook PricingBook::parse(std::string_view json_text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("pricing file: ") + e.what());
    }
    if (!doc.is_array())
        throw ValidationError("pricing file: expected a list of pricing models");
    PricingBook b;
    for (const auto& j : doc) {
        PricingModel m;
        try {
            m.name = j.at("name").get<std::string>();
            m.currency = j.value("currency", "USD");
            const auto kind = j.at("kind").get<std::string>();
            if (kind == "per_token")
                m.kind = PerToken{j.at("input_per_1k").get<double>(), j.at("output_per_1k").get<double>()};
            else if (kind == "per_char")
                m.kind = PerChar{j.at("per_1k").get<double>()};
            else if (kind == "per_hour")
                m.kind = PerHour{j.at("per_hour").get<double>()};
            else if (kind == "human")
                m.kind = Human{j.at("seconds_per_instance").get<double>(), j.at("hourly_wage").get<double>()};
            else
                throw ValidationError("pricing file: unknown kind " + kind);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("pricing file: ") + e.what());
        }
        m.validate();
        b.add(std::move(m));
    }
    return b;
}

PricingBook PricingBook::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw NotFoundError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void PricingBook::add(PricingModel m)
{
    auto name = m.name;
    models_.insert_or_assign(std::move(name), std::move(m));
}

const PricingModel& PricingBook::get(const std::string& name) const
{
    auto it = models_.find(name);
    if (it == models_.end())
        throw NotFoundError("unknown pricing model " + name);
    return it->second;
}

std::vector<std::string> PricingBook::names() const
{
    std::vector<std::string> out;
    for (const auto& [k, v] : models_)
        out.push_back(k);
    return out;
}

} // namespace relanno::costing
