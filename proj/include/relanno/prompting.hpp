#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relanno/dataset.hpp"

// Deterministic rendering of the six prompt variants and their per-backend part ordering.
namespace relanno::prompting {

enum class PromptVariant { simple, full_instruction, one_shot, five_shot, one_shot_cot, five_shot_cot };

inline constexpr std::array<PromptVariant, 6> kAllVariants = {
    PromptVariant::simple,   PromptVariant::full_instruction, PromptVariant::one_shot,
    PromptVariant::five_shot, PromptVariant::one_shot_cot,     PromptVariant::five_shot_cot};

enum class PromptCategory { zero_shot, few_shot, few_shot_cot };

std::string_view to_string(PromptVariant v);
PromptVariant parse_variant(std::string_view s);
std::string_view to_string(PromptCategory c);
PromptCategory category(PromptVariant v);
std::size_t exemplar_count(PromptVariant v);

struct Exemplar {
    std::string pair_type;
    std::string marked_sentence;
    std::string answer;
    std::optional<std::string> reasoning;
};

class ExemplarBank {
public:
    void add(const std::string& pair_type, PromptVariant v, std::vector<Exemplar> exemplars);
    /// Exemplars for (pair, variant); throws ValidationError naming both when missing or
    /// when the count does not match the variant.
    const std::vector<Exemplar>& lookup(const std::string& pair_type, PromptVariant v) const;
    bool contains(const std::string& pair_type, PromptVariant v) const;

    static ExemplarBank parse(std::string_view json_text);
    static ExemplarBank load(const std::filesystem::path& path);

private:
    std::map<std::pair<std::string, PromptVariant>, std::vector<Exemplar>> entries_;
};

/// Fills every (pair, few-shot variant) missing from `base` with generated exemplars, so
/// synthetic datasets can exercise all six variants. Generated exemplars are clearly artificial.
ExemplarBank synthetic_exemplars(const dataset::SchemaMap& schemas, const ExemplarBank& base = {});

enum class PromptPart { system_role, instruction, exemplars, sentence, options };

std::string_view to_string(PromptPart p);
PromptPart parse_part(std::string_view s);

struct RenderedPrompt {
    std::string instance_id;
    PromptVariant variant = PromptVariant::simple;
    /// Canonical text: instruction, exemplars, sentence, options.
    std::string text;
    /// option_order[i] is the canonical label displayed as option i+1.
    std::vector<std::string> option_order;
    /// Rendered option text, same indexing as option_order.
    std::vector<std::string> option_texts;
    std::uint64_t shuffle_seed = 0;
    std::string e1;
    std::string e2;
    std::map<PromptPart, std::string> parts;
};

/// Fisher-Yates over SplitMix64 keyed on hash(seed, instance_id).
std::vector<std::string> shuffle_options(const std::vector<std::string>& labels, std::uint64_t seed,
                                         std::string_view instance_id);

/// Renders with an explicit option order (must be a permutation of the schema labels).
RenderedPrompt render_prompt(const dataset::Instance& inst, const dataset::RelationSchema& schema,
                             PromptVariant variant, const ExemplarBank& bank,
                             std::vector<std::string> option_order, std::uint64_t seed);

RenderedPrompt build_prompt(const dataset::Instance& inst, const dataset::RelationSchema& schema,
                            PromptVariant variant, const ExemplarBank& bank, std::uint64_t seed);

/// Per-backend ordering of prompt parts for each prompt category.
class StyleBook {
public:
    struct Style {
        std::string system_role;
        std::map<PromptCategory, std::vector<PromptPart>> order;
    };

    /// gpt4, palm2 and mpt_instruct orderings.
    static StyleBook defaults();
    static StyleBook parse(std::string_view json_text);
    static StyleBook load(const std::filesystem::path& path);

    void add(std::string name, Style style);
    const Style& style(std::string_view name) const;
    bool contains(std::string_view name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, Style, std::less<>> styles_;
};

std::vector<PromptPart> backend_composition(PromptVariant variant, std::string_view style,
                                            const StyleBook& book = StyleBook::defaults());

struct Message {
    std::string role;   // "system" or "user"
    std::string content;
};

/// Prompt parts laid out for a backend style. System-role parts become system messages,
/// runs of other parts are joined into user messages.
std::vector<Message> compose_messages(const RenderedPrompt& prompt, std::string_view style,
                                      const StyleBook& book = StyleBook::defaults());

/// All messages joined as one text block, the unit that input tokens/chars are counted over.
std::string flatten(const std::vector<Message>& messages);

} // namespace relanno::prompting
