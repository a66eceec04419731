#include "relanno/prompting.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "relanno/error.hpp"
#include "relanno/hash.hpp"

namespace relanno::prompting {

using nlohmann::json;

namespace {

constexpr std::string_view kFewShotInstruction =
    "Select the statement that best describes the relation in the example sentence below. Ignore any "
    "grammatical errors. If there are multiple options, please choose the one that is clearest and most "
    "obvious from the sentence.";

constexpr std::string_view kOptionsHeader = "Please choose the MOST appropriate relation from the following options:";

constexpr std::string_view kSystemRole =
    "You are an AI assistant and relation extraction checker. You read the prompt, note where the entities "
    "in question are and determine the relation between them. Once done, please select from option which "
    "best suite the relation.";

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw NotFoundError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sentence_part(PromptVariant v, const dataset::RelationSchema& schema, const std::string& marked,
                          const std::string& e1, const std::string& e2)
{
    switch (v) {
    case PromptVariant::simple:
        return "In the context of this sentence: " + marked + " Note the location of the " + e1 + " and " + e2 +
               " as highlighted to help determine the relation given the listed options below.";
    case PromptVariant::full_instruction: {
        const auto& group = schema.relation_group.empty() ? schema.pair_type : schema.relation_group;
        return "Select " + group + " relationship described in one sentence. Given a single sentence: " + marked +
               " With 2 highlighted phrases: " + e1 + " and " + e2 +
               ". Select a multiple choice answer from options below, which best describes the relation between " +
               e1 + " and " + e2 + ".";
    }
    default:
        return "Following the example above, read through this sentence: " + marked + " Given the location of the " +
               e1 + " and " + e2 + " as highlighted, choose an answer from listed options below.";
    }
}

std::string exemplar_part(const std::vector<Exemplar>& exemplars, bool cot)
{
    std::string out;
    for (std::size_t i = 0; i < exemplars.size(); ++i) {
        const auto n = std::to_string(i + 1);
        if (i)
            out += '\n';
        out += "Example Sentence " + n + ": " + exemplars[i].marked_sentence + "\n";
        out += "Answer to Example " + n + ": " + exemplars[i].answer;
        if (cot)
            out += "\n" + exemplars[i].reasoning.value_or("");
    }
    return out;
}

std::string options_part(const std::vector<std::string>& texts)
{
    std::string out(kOptionsHeader);
    for (std::size_t i = 0; i < texts.size(); ++i)
        out += "\n" + std::to_string(i + 1) + ". " + texts[i];
    return out;
}

PromptCategory parse_category(std::string_view s)
{
    if (s == "zero_shot")
        return PromptCategory::zero_shot;
    if (s == "few_shot")
        return PromptCategory::few_shot;
    if (s == "few_shot_cot")
        return PromptCategory::few_shot_cot;
    throw ValidationError("unknown prompt category '" + std::string(s) + "'");
}

void validate_order(const std::string& style, PromptCategory c, const std::vector<PromptPart>& order)
{
    const auto options = std::count(order.begin(), order.end(), PromptPart::options);
    const auto sentence = std::count(order.begin(), order.end(), PromptPart::sentence);
    if (options != 1 || sentence != 1)
        throw ValidationError("style " + style + "/" + std::string(to_string(c)) +
                              ": composition needs exactly one options part and one sentence part");
    if (c != PromptCategory::zero_shot && std::count(order.begin(), order.end(), PromptPart::exemplars) != 1)
        throw ValidationError("style " + style + "/" + std::string(to_string(c)) + ": few-shot needs exemplars");
}

} // namespace

std::string_view to_string(PromptVariant v)
{
    switch (v) {
    case PromptVariant::simple: return "simple";
    case PromptVariant::full_instruction: return "full_instruction";
    case PromptVariant::one_shot: return "one_shot";
    case PromptVariant::five_shot: return "five_shot";
    case PromptVariant::one_shot_cot: return "one_shot_cot";
    case PromptVariant::five_shot_cot: return "five_shot_cot";
    }
    return "?";
}

PromptVariant parse_variant(std::string_view s)
{
    for (auto v : kAllVariants)
        if (to_string(v) == s)
            return v;
    throw ValidationError("unknown prompt variant '" + std::string(s) + "'");
}

std::string_view to_string(PromptCategory c)
{
    switch (c) {
    case PromptCategory::zero_shot: return "zero_shot";
    case PromptCategory::few_shot: return "few_shot";
    case PromptCategory::few_shot_cot: return "few_shot_cot";
    }
    return "?";
}

PromptCategory category(PromptVariant v)
{
    switch (v) {
    case PromptVariant::simple:
    case PromptVariant::full_instruction: return PromptCategory::zero_shot;
    case PromptVariant::one_shot:
    case PromptVariant::five_shot: return PromptCategory::few_shot;
    default: return PromptCategory::few_shot_cot;
    }
}

std::size_t exemplar_count(PromptVariant v)
{
    switch (v) {
    case PromptVariant::one_shot:
    case PromptVariant::one_shot_cot: return 1;
    case PromptVariant::five_shot:
    case PromptVariant::five_shot_cot: return 5;
    default: return 0;
    }
}

std::string_view to_string(PromptPart p)
{
    switch (p) {
    case PromptPart::system_role: return "system_role";
    case PromptPart::instruction: return "instruction";
    case PromptPart::exemplars: return "exemplars";
    case PromptPart::sentence: return "sentence";
    case PromptPart::options: return "options";
    }
    return "?";
}

PromptPart parse_part(std::string_view s)
{
    for (auto p : {PromptPart::system_role, PromptPart::instruction, PromptPart::exemplars, PromptPart::sentence,
                   PromptPart::options})
        if (to_string(p) == s)
            return p;
    throw ValidationError("unknown prompt part '" + std::string(s) + "'");
}

// ---- exemplar bank ----

void ExemplarBank::add(const std::string& pair_type, PromptVariant v, std::vector<Exemplar> exemplars)
{
    const auto key = std::string(pair_type) + "/" + std::string(to_string(v));
    if (exemplar_count(v) == 0)
        throw ValidationError("exemplar bank " + key + ": zero-shot variants take no exemplars");
    if (exemplars.size() != exemplar_count(v))
        throw ValidationError("exemplar bank " + key + ": expected " + std::to_string(exemplar_count(v)) +
                              " exemplars, got " + std::to_string(exemplars.size()));
    for (const auto& e : exemplars) {
        if (e.pair_type != pair_type)
            throw ValidationError("exemplar bank " + key + ": exemplar pair type " + e.pair_type);
        if (category(v) == PromptCategory::few_shot_cot && (!e.reasoning || e.reasoning->empty()))
            throw ValidationError("exemplar bank " + key + ": chain-of-thought exemplar without reasoning");
    }
    entries_[{pair_type, v}] = std::move(exemplars);
}

bool ExemplarBank::contains(const std::string& pair_type, PromptVariant v) const
{
    return entries_.count({pair_type, v}) > 0;
}

const std::vector<Exemplar>& ExemplarBank::lookup(const std::string& pair_type, PromptVariant v) const
{
    auto it = entries_.find({pair_type, v});
    if (it == entries_.end())
        throw ValidationError("missing exemplars for (" + pair_type + ", " + std::string(to_string(v)) + ")");
    return it->second;
}

ExemplarBank ExemplarBank::parse(std::string_view json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("exemplar bank: ") + e.what());
    }
    ExemplarBank bank;
    for (auto& [pair, by_variant] : doc.items()) {
        for (auto& [vname, list] : by_variant.items()) {
            const auto v = parse_variant(vname);
            std::vector<Exemplar> exemplars;
            for (const auto& e : list) {
                Exemplar ex;
                ex.pair_type = pair;
                ex.marked_sentence = e.at("sentence").get<std::string>();
                ex.answer = e.at("answer").get<std::string>();
                if (e.contains("reasoning"))
                    ex.reasoning = e["reasoning"].get<std::string>();
                exemplars.push_back(std::move(ex));
            }
            bank.add(pair, v, std::move(exemplars));
        }
    }
    return bank;
}

ExemplarBank ExemplarBank::load(const std::filesystem::path& path) { return parse(read_file(path)); }

// ---- rendering ----

std::vector<std::string> shuffle_options(const std::vector<std::string>& labels, std::uint64_t seed,
                                         std::string_view instance_id)
{
    std::vector<std::string> out = labels;
    SplitMix64 rng(hash_combine(mix64(seed), fnv1a64(instance_id)));
    for (std::size_t i = out.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(out[i - 1], out[j]);
    }
    return out;
}

RenderedPrompt render_prompt(const dataset::Instance& inst, const dataset::RelationSchema& schema,
                             PromptVariant variant, const ExemplarBank& bank, std::vector<std::string> option_order,
                             std::uint64_t seed)
{
    {
        auto sorted_order = option_order;
        auto sorted_labels = schema.labels;
        std::sort(sorted_order.begin(), sorted_order.end());
        std::sort(sorted_labels.begin(), sorted_labels.end());
        if (sorted_order != sorted_labels)
            throw ValidationError("instance " + inst.id + ": option order is not a permutation of schema labels");
    }

    RenderedPrompt p;
    p.instance_id = inst.id;
    p.variant = variant;
    p.shuffle_seed = seed;
    p.e1 = inst.e1.surface;
    p.e2 = inst.e2.surface;
    p.option_order = std::move(option_order);
    for (const auto& label : p.option_order)
        p.option_texts.push_back(schema.render_option(label, p.e1, p.e2));

    const auto marked = dataset::mark_entities(inst);
    const auto cat = category(variant);
    if (cat != PromptCategory::zero_shot) {
        p.parts[PromptPart::instruction] = std::string(kFewShotInstruction);
        p.parts[PromptPart::exemplars] =
            exemplar_part(bank.lookup(inst.pair_type, variant), cat == PromptCategory::few_shot_cot);
    }
    p.parts[PromptPart::sentence] = sentence_part(variant, schema, marked, p.e1, p.e2);
    p.parts[PromptPart::options] = options_part(p.option_texts);

    for (auto part : {PromptPart::instruction, PromptPart::exemplars, PromptPart::sentence, PromptPart::options}) {
        auto it = p.parts.find(part);
        if (it == p.parts.end())
            continue;
        if (!p.text.empty())
            p.text += "\n\n";
        p.text += it->second;
    }
    return p;
}

RenderedPrompt build_prompt(const dataset::Instance& inst, const dataset::RelationSchema& schema,
                            PromptVariant variant, const ExemplarBank& bank, std::uint64_t seed)
{
    return render_prompt(inst, schema, variant, bank, shuffle_options(schema.labels, seed, inst.id), seed);
}

// ---- styles ----

StyleBook StyleBook::defaults()
{
    using P = PromptPart;
    StyleBook book;
    book.add("gpt4", Style{std::string(kSystemRole),
                           {{PromptCategory::zero_shot, {P::sentence, P::options, P::system_role}},
                            {PromptCategory::few_shot, {P::instruction, P::exemplars, P::sentence, P::options, P::system_role}},
                            {PromptCategory::few_shot_cot,
                             {P::instruction, P::exemplars, P::sentence, P::options, P::system_role}}}});
    book.add("palm2", Style{std::string(kSystemRole),
                            {{PromptCategory::zero_shot, {P::system_role, P::sentence, P::options}},
                             {PromptCategory::few_shot, {P::system_role, P::instruction, P::exemplars, P::sentence, P::options}},
                             {PromptCategory::few_shot_cot,
                              {P::instruction, P::exemplars, P::sentence, P::options, P::system_role}}}});
    // MPT's system role doubles as its instruction, so plain few-shot has no separate instruction part.
    book.add("mpt_instruct", Style{std::string(kSystemRole),
                                   {{PromptCategory::zero_shot, {P::system_role, P::sentence, P::options}},
                                    {PromptCategory::few_shot, {P::system_role, P::exemplars, P::sentence, P::options}},
                                    {PromptCategory::few_shot_cot,
                                     {P::instruction, P::exemplars, P::sentence, P::options, P::system_role}}}});
    return book;
}

StyleBook StyleBook::parse(std::string_view json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("style file: ") + e.what());
    }
    StyleBook book;
    for (auto& [name, body] : doc.items()) {
        Style s;
        s.system_role = body.value("system_role", std::string(kSystemRole));
        for (auto& [key, list] : body.items()) {
            if (key == "system_role")
                continue;
            std::vector<PromptPart> order;
            for (const auto& part : list)
                order.push_back(parse_part(part.get<std::string>()));
            s.order[parse_category(key)] = std::move(order);
        }
        book.add(name, std::move(s));
    }
    return book;
}

StyleBook StyleBook::load(const std::filesystem::path& path) { return parse(read_file(path)); }

void StyleBook::add(std::string name, Style style)
{
    for (auto c : {PromptCategory::zero_shot, PromptCategory::few_shot, PromptCategory::few_shot_cot}) {
        auto it = style.order.find(c);
        if (it == style.order.end())
            throw ValidationError("style " + name + ": no ordering for " + std::string(to_string(c)));
        validate_order(name, c, it->second);
    }
    styles_[std::move(name)] = std::move(style);
}

const StyleBook::Style& StyleBook::style(std::string_view name) const
{
    auto it = styles_.find(name);
    if (it == styles_.end())
        throw ConfigError("unknown backend style '" + std::string(name) + "'");
    return it->second;
}

bool StyleBook::contains(std::string_view name) const { return styles_.find(name) != styles_.end(); }

std::vector<std::string> StyleBook::names() const
{
    std::vector<std::string> out;
    for (const auto& [n, _] : styles_)
        out.push_back(n);
    return out;
}

std::vector<PromptPart> backend_composition(PromptVariant variant, std::string_view style, const StyleBook& book)
{
    return book.style(style).order.at(category(variant));
}

std::vector<Message> compose_messages(const RenderedPrompt& prompt, std::string_view style, const StyleBook& book)
{
    const auto& st = book.style(style);
    std::vector<Message> out;
    for (auto part : st.order.at(category(prompt.variant))) {
        if (part == PromptPart::system_role) {
            out.push_back({"system", st.system_role});
            continue;
        }
        auto it = prompt.parts.find(part);
        if (it == prompt.parts.end())
            continue;
        if (out.empty() || out.back().role != "user")
            out.push_back({"user", it->second});
        else
            out.back().content += "\n\n" + it->second;
    }
    return out;
}

std::string flatten(const std::vector<Message>& messages)
{
    std::string out;
    for (const auto& m : messages) {
        if (!out.empty())
            out += "\n\n";
        out += m.content;
    }
    return out;
}

} // namespace relanno::prompting
