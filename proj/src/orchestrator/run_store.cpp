#include "relanno/run_store.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

#include "relanno/error.hpp"

namespace relanno::store {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void fsync_path(const fs::path& p)
{
    int fd = ::open(p.c_str(), O_RDONLY);
    if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
    }
}

ordered_json rates_json(const backends::MockRates& r)
{
    return {{"accuracy", r.accuracy}, {"hallucination_rate", r.hallucination_rate}, {"blank_rate", r.blank_rate}};
}

} // namespace

ordered_json to_json(const backends::RawResponse& r)
{
    ordered_json j;
    j["instance_id"] = r.instance_id;
    j["backend"] = r.backend;
    j["variant"] = prompting::to_string(r.variant);
    j["temperature"] = r.temperature;
    j["run_index"] = r.run_index;
    j["shuffle_seed"] = r.shuffle_seed;
    j["option_order"] = r.option_order;
    j["option_texts"] = r.option_texts;
    j["e1"] = r.e1;
    j["e2"] = r.e2;
    j["text"] = r.text;
    j["input_tokens"] = r.input_tokens;
    j["output_tokens"] = r.output_tokens;
    j["input_chars"] = r.input_chars;
    j["output_chars"] = r.output_chars;
    j["latency"] = r.latency;
    j["attempts"] = r.attempts;
    return j;
}

backends::RawResponse response_from_json(const json& j)
{
    backends::RawResponse r;
    r.instance_id = j.at("instance_id").get<std::string>();
    r.backend = j.at("backend").get<std::string>();
    r.variant = prompting::parse_variant(j.at("variant").get<std::string>());
    r.temperature = j.at("temperature").get<double>();
    r.run_index = j.at("run_index").get<int>();
    r.shuffle_seed = j.value("shuffle_seed", std::uint64_t{0});
    r.option_order = j.at("option_order").get<std::vector<std::string>>();
    r.option_texts = j.value("option_texts", std::vector<std::string>{});
    r.e1 = j.value("e1", "");
    r.e2 = j.value("e2", "");
    r.text = j.at("text").get<std::string>();
    r.input_tokens = j.value("input_tokens", std::size_t{0});
    r.output_tokens = j.value("output_tokens", std::size_t{0});
    r.input_chars = j.value("input_chars", std::size_t{0});
    r.output_chars = j.value("output_chars", std::size_t{0});
    r.latency = j.value("latency", 0.0);
    r.attempts = j.value("attempts", 1);
    return r;
}

ordered_json to_json(const RunManifest& m)
{
    ordered_json j;
    j["run_id"] = m.run_id;
    j["backend"] = m.backend;
    j["variant"] = prompting::to_string(m.variant);
    j["temperature"] = m.temperature;
    j["seed"] = m.seed ? ordered_json(*m.seed) : ordered_json(nullptr);
    j["run_index"] = m.run_index;
    j["dataset_fingerprint"] = m.dataset_fingerprint;
    j["totals"] = {{"instances", m.totals.instances},         {"input_tokens", m.totals.input_tokens},
                   {"output_tokens", m.totals.output_tokens}, {"input_chars", m.totals.input_chars},
                   {"output_chars", m.totals.output_chars},   {"wall_seconds", m.totals.wall_seconds}};
    j["records"] = "records.jsonl";
    j["created_at"] = m.created_at;
    return j;
}

RunManifest manifest_from_json(const json& j)
{
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.backend = ordered_json::parse(j.at("backend").dump());
    m.variant = prompting::parse_variant(j.at("variant").get<std::string>());
    m.temperature = j.at("temperature").get<double>();
    if (j.contains("seed") && !j["seed"].is_null())
        m.seed = j["seed"].get<std::int64_t>();
    m.run_index = j.at("run_index").get<int>();
    m.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
    const auto& t = j.at("totals");
    m.totals.instances = t.at("instances").get<std::size_t>();
    m.totals.input_tokens = t.at("input_tokens").get<std::size_t>();
    m.totals.output_tokens = t.at("output_tokens").get<std::size_t>();
    m.totals.input_chars = t.at("input_chars").get<std::size_t>();
    m.totals.output_chars = t.at("output_chars").get<std::size_t>();
    m.totals.wall_seconds = t.at("wall_seconds").get<double>();
    m.created_at = j.value("created_at", "");
    return m;
}

ordered_json to_json(const backends::BackendConfig& c)
{
    ordered_json j;
    j["name"] = c.name;
    j["style"] = c.style;
    if (const auto* mock = std::get_if<backends::MockProfile>(&c.transport)) {
        ordered_json m = rates_json(mock->rates);
        if (!mock->per_variant.empty()) {
            ordered_json pv = ordered_json::object();
            for (const auto& [v, r] : mock->per_variant)
                pv[std::string(prompting::to_string(v))] = rates_json(r);
            m["per_variant"] = pv;
        }
        if (!mock->confusion.empty())
            m["confusion"] = mock->confusion;
        m["seed"] = mock->seed;
        m["seconds_per_call"] = mock->seconds_per_call;
        j["mock"] = m;
    } else {
        const auto& h = std::get<backends::HttpTransport>(c.transport);
        j["http"] = {{"endpoint", h.endpoint},
                     {"auth_env", h.auth_env},
                     {"model", h.model},
                     {"timeout_seconds", h.timeout_seconds}};
    }
    j["temperature"] = c.temperature;
    j["seed"] = c.seed ? ordered_json(*c.seed) : ordered_json(nullptr);
    j["max_parallel"] = c.max_parallel;
    j["retry"] = {{"max_attempts", c.retry.max_attempts}, {"backoff_seconds", c.retry.backoff_seconds}};
    j["pricing"] = c.pricing;
    return j;
}

std::string make_run_id(const backends::BackendConfig& c, prompting::PromptVariant v, int run_index)
{
    char temp[32];
    std::snprintf(temp, sizeof temp, "%g", c.temperature);
    std::string id = c.name + "__" + std::string(prompting::to_string(v)) + "__t" + temp;
    if (c.seed)
        id += "__s" + std::to_string(*c.seed);
    return id + "__r" + std::to_string(run_index);
}

namespace {

// An interrupted write can leave a partial last line; cut it so the next append starts clean.
void drop_torn_tail(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    if (body.empty() || body.back() == '\n')
        return;
    const auto nl = body.rfind('\n');
    fs::resize_file(p, nl == std::string::npos ? 0 : nl + 1);
}

} // namespace

RunStore::RunStore(fs::path dir) : dir_(std::move(dir))
{
    fs::create_directories(dir_);
    if (fs::exists(records_path())) {
        drop_torn_tail(records_path());
        for (const auto& r : load_records(dir_))
            persisted_.insert(r.instance_id);
    }
}

void RunStore::append(const backends::RawResponse& r)
{
    if (contains(r.instance_id))
        throw ValidationError("run store " + dir_.string() + " already holds instance " + r.instance_id);
    {
        std::ofstream out(records_path(), std::ios::app | std::ios::binary);
        if (!out)
            throw ValidationError("cannot write " + records_path().string());
        out << to_json(r).dump() << '\n';
        out.flush();
        if (!out)
            throw ValidationError("write failed for " + records_path().string());
    }
    persisted_.insert(r.instance_id);
}

void RunStore::write_manifest(const RunManifest& m)
{
    fsync_path(records_path());
    const auto tmp = dir_ / "manifest.json.tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << to_json(m).dump(2) << '\n';
        if (!out)
            throw ValidationError("cannot write " + tmp.string());
    }
    fsync_path(tmp);
    fs::rename(tmp, manifest_path());
}

bool RunStore::has_manifest() const { return fs::exists(manifest_path()); }

std::vector<backends::RawResponse> load_records(const fs::path& dir)
{
    std::vector<backends::RawResponse> out;
    std::ifstream in(dir / "records.jsonl", std::ios::binary);
    if (!in)
        return out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        try {
            out.push_back(response_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            // a torn final line from an interrupted append is dropped; anything else is corruption
            if (in.peek() == std::char_traits<char>::eof())
                break;
            throw ValidationError((dir / "records.jsonl").string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

RunData load_run(const fs::path& dir)
{
    const auto mpath = dir / "manifest.json";
    if (!fs::exists(mpath))
        throw NotFoundError("run " + dir.string() + " has no manifest (incomplete or missing)");
    std::ifstream in(mpath);
    std::ostringstream ss;
    ss << in.rdbuf();
    RunData d;
    d.dir = dir;
    try {
        d.manifest = manifest_from_json(json::parse(ss.str()));
    } catch (const json::exception& e) {
        throw ValidationError(mpath.string() + ": " + e.what());
    }
    d.records = load_records(dir);
    return d;
}

} // namespace relanno::store
