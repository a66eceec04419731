#include <algorithm>
#include <array>
#include <bit>

#include "relanno/backends.hpp"
#include "relanno/error.hpp"
#include "relanno/hash.hpp"
#include "relanno/text.hpp"

namespace relanno::backends {

namespace {

void check_rates(const MockRates& r, const std::string& where)
{
    for (double p : {r.accuracy, r.hallucination_rate, r.blank_rate})
        if (!(p >= 0.0 && p <= 1.0))
            throw ConfigError(where + ": mock probabilities must lie in [0,1]");
    if (r.accuracy + r.hallucination_rate + r.blank_rate > 1.0 + 1e-12)
        throw ConfigError(where + ": accuracy + hallucination_rate + blank_rate exceeds 1");
}

constexpr std::array<std::string_view, 6> kFreeTextRelations = {
    "{E1} has an agreement with {E2}", "{E1} holds a stake in {E2}",  "{E1} is a board member of {E2}",
    "{E1} is a division of {E2}",      "{E1} is a supplier to {E2}", "{E1} is mentioned together with {E2}",
};

} // namespace

const MockRates& MockProfile::rates_for(prompting::PromptVariant v) const
{
    auto it = per_variant.find(v);
    return it == per_variant.end() ? rates : it->second;
}

void MockProfile::validate() const
{
    check_rates(rates, "mock profile");
    for (const auto& [v, r] : per_variant)
        check_rates(r, "mock profile/" + std::string(prompting::to_string(v)));
    if (seconds_per_call < 0)
        throw ConfigError("mock profile: seconds_per_call must be >= 0");
}

void BackendConfig::validate() const
{
    if (name.empty())
        throw ConfigError("backend without a name");
    if (!(temperature >= 0.0 && temperature <= 2.0))
        throw ConfigError("backend " + name + ": temperature must lie in [0,2]");
    if (max_parallel < 1)
        throw ConfigError("backend " + name + ": max_parallel must be >= 1");
    if (retry.max_attempts < 1 || retry.backoff_seconds < 0)
        throw ConfigError("backend " + name + ": invalid retry policy");
    if (const auto* mock = std::get_if<MockProfile>(&transport))
        mock->validate();
    else if (std::get<HttpTransport>(transport).endpoint.empty())
        throw ConfigError("backend " + name + ": http transport without endpoint");
}

MockAnnotator::MockAnnotator(MockProfile profile, GoldLookup gold)
    : profile_(std::move(profile)), gold_(std::move(gold))
{
    profile_.validate();
}

Completion MockAnnotator::complete(const prompting::RenderedPrompt& prompt, const std::vector<prompting::Message>&,
                                   const CallContext& ctx)
{
    const auto gold = gold_ ? gold_(prompt.instance_id) : std::nullopt;
    if (!gold)
        throw ConfigError("mock backend needs a gold label for instance " + prompt.instance_id);
    const auto gold_it = std::find(prompt.option_order.begin(), prompt.option_order.end(), *gold);
    if (gold_it == prompt.option_order.end())
        throw ValidationError("instance " + prompt.instance_id + ": gold label not among prompt options");
    const auto gold_idx = static_cast<std::size_t>(gold_it - prompt.option_order.begin());

    std::uint64_t key = mix64(profile_.seed);
    const auto cfg_seed = ctx.config && ctx.config->seed ? static_cast<std::uint64_t>(*ctx.config->seed)
                                                         : ~std::uint64_t{0};
    key = hash_combine(key, cfg_seed);
    key = hash_combine(key, fnv1a64(prompt.instance_id));
    key = hash_combine(key, static_cast<std::uint64_t>(prompt.variant));
    key = hash_combine(key, std::bit_cast<std::uint64_t>(ctx.config ? ctx.config->temperature : 0.0));
    key = hash_combine(key, static_cast<std::uint64_t>(ctx.run_index));
    SplitMix64 rng(key);

    const auto& r = profile_.rates_for(prompt.variant);
    const double u = rng.uniform();

    Completion c;
    c.latency = profile_.seconds_per_call;
    if (u < r.accuracy) {
        c.text = prompt.option_texts[gold_idx];
    } else if (u < r.accuracy + r.hallucination_rate) {
        const auto tpl = kFreeTextRelations[rng.below(kFreeTextRelations.size())];
        c.text = text::replace_all(text::replace_all(std::string(tpl), "{E1}", prompt.e1), "{E2}", prompt.e2);
    } else if (u < r.accuracy + r.hallucination_rate + r.blank_rate) {
        c.text.clear();
    } else {
        std::size_t wrong = gold_idx;
        if (auto cf = profile_.confusion.find(*gold); cf != profile_.confusion.end()) {
            auto it = std::find(prompt.option_order.begin(), prompt.option_order.end(), cf->second);
            if (it != prompt.option_order.end())
                wrong = static_cast<std::size_t>(it - prompt.option_order.begin());
        }
        if (wrong == gold_idx && prompt.option_order.size() > 1) {
            wrong = rng.below(prompt.option_order.size() - 1);
            if (wrong >= gold_idx)
                ++wrong;
        }
        c.text = prompt.option_texts[wrong];
    }
    return c;
}

std::unique_ptr<Annotator> make_annotator(const BackendConfig& config, GoldLookup gold)
{
    config.validate();
    if (const auto* mock = std::get_if<MockProfile>(&config.transport))
        return std::make_unique<MockAnnotator>(*mock, std::move(gold));
    return std::make_unique<HttpAnnotator>(std::get<HttpTransport>(config.transport));
}

} // namespace relanno::backends
