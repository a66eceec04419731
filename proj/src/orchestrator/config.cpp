#include "relanno/config.hpp"

#include <fstream>
#include <sstream>

#include "relanno/error.hpp"

namespace relanno::orchestrator {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw NotFoundError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path resolve(const fs::path& base, const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; }

std::optional<fs::path> optional_path(const json& j, const char* key, const fs::path& base)
{
    if (!j.contains(key) || j[key].is_null())
        return std::nullopt;
    return resolve(base, j[key].get<std::string>());
}

backends::MockRates rates_from_json(const json& j, const backends::MockRates& fallback = {})
{
    backends::MockRates r = fallback;
    r.accuracy = j.value("accuracy", r.accuracy);
    r.hallucination_rate = j.value("hallucination_rate", r.hallucination_rate);
    r.blank_rate = j.value("blank_rate", r.blank_rate);
    return r;
}

} // namespace

backends::MockProfile mock_profile_from_json(const json& j)
{
    backends::MockProfile p;
    p.rates = rates_from_json(j);
    if (j.contains("per_variant"))
        for (auto& [v, r] : j["per_variant"].items())
            p.per_variant.emplace(prompting::parse_variant(v), rates_from_json(r, p.rates));
    if (j.contains("confusion"))
        p.confusion = j["confusion"].get<std::map<std::string, std::string>>();
    p.seed = j.value("seed", std::uint64_t{0});
    p.seconds_per_call = j.value("seconds_per_call", 1.0);
    return p;
}

backends::BackendConfig backend_from_json(const json& j)
{
    backends::BackendConfig c;
    try {
        c.name = j.at("name").get<std::string>();
        c.style = j.value("style", c.style);
        if (j.contains("mock")) {
            c.transport = mock_profile_from_json(j["mock"]);
        } else if (j.contains("http")) {
            const auto& h = j["http"];
            backends::HttpTransport t;
            t.endpoint = h.at("endpoint").get<std::string>();
            t.auth_env = h.value("auth_env", "");
            t.model = h.value("model", "");
            t.timeout_seconds = h.value("timeout_seconds", t.timeout_seconds);
            c.transport = t;
        } else {
            throw ConfigError("backend " + c.name + ": needs a \"mock\" or \"http\" transport");
        }
        c.temperature = j.value("temperature", c.temperature);
        if (j.contains("seed") && !j["seed"].is_null())
            c.seed = j["seed"].get<std::int64_t>();
        c.max_parallel = j.value("max_parallel", c.max_parallel);
        if (j.contains("retry")) {
            c.retry.max_attempts = j["retry"].value("max_attempts", c.retry.max_attempts);
            c.retry.backoff_seconds = j["retry"].value("backoff_seconds", c.retry.backoff_seconds);
        }
        c.pricing = j.value("pricing", "");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("backend entry: ") + e.what());
    }
    c.validate();
    return c;
}

const backends::BackendConfig& Config::backend(const std::string& name) const
{
    for (const auto& b : backends)
        if (b.name == name)
            return b;
    std::string known;
    for (const auto& b : backends)
        known += (known.empty() ? "" : ", ") + b.name;
    throw ConfigError("unknown backend '" + name + "' (configured: " + known + ")");
}

Config Config::parse(std::string_view json_text, const fs::path& base_dir)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    Config c;
    try {
        c.dataset = resolve(base_dir, j.at("dataset").get<std::string>());
        c.schemas = resolve(base_dir, j.at("schemas").get<std::string>());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.exemplars = optional_path(j, "exemplars", base_dir);
    c.synthetic_exemplars = j.value("synthetic_exemplars", false);
    c.similarity = optional_path(j, "similarity", base_dir);
    c.styles = optional_path(j, "styles", base_dir);
    c.lexicon = optional_path(j, "lexicon", base_dir);
    c.pricing = optional_path(j, "pricing", base_dir);
    c.runs_dir = resolve(base_dir, j.value("runs_dir", "runs"));
    if (j.contains("backends"))
        for (const auto& b : j["backends"]) {
            c.backends.push_back(backend_from_json(b));
            for (std::size_t i = 0; i + 1 < c.backends.size(); ++i)
                if (c.backends[i].name == c.backends.back().name)
                    throw ConfigError("duplicate backend name " + c.backends.back().name);
        }
    return c;
}

Config Config::load(const fs::path& path)
{
    return parse(read_file(path), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

Workspace Workspace::open(Config config)
{
    Workspace w;
    const auto schemas = dataset::load_schemas(config.schemas);
    w.dataset = dataset::load_dataset(config.dataset, schemas);
    if (config.exemplars)
        w.exemplars = prompting::ExemplarBank::load(*config.exemplars);
    if (config.synthetic_exemplars)
        w.exemplars = prompting::synthetic_exemplars(schemas, w.exemplars);
    w.styles = config.styles ? prompting::StyleBook::load(*config.styles) : prompting::StyleBook::defaults();
    w.lexicon = config.lexicon ? parsing::StyleLexicon::load(*config.lexicon) : parsing::StyleLexicon::defaults();
    w.similarity = config.similarity ? aggregation::SimilarityBook::load(*config.similarity, schemas)
                                     : aggregation::SimilarityBook::identity(schemas);
    w.pricing = config.pricing ? costing::PricingBook::load(*config.pricing) : costing::PricingBook::defaults();
    for (const auto& b : config.backends) {
        w.styles.style(b.style);
        if (!b.pricing.empty())
            w.pricing.get(b.pricing);
    }
    w.config = std::move(config);
    return w;
}

} // namespace relanno::orchestrator
