#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <mutex>
#include <thread>

#include "relanno/backends.hpp"
#include "relanno/error.hpp"
#include "relanno/run_store.hpp"

namespace relanno::backends {

namespace {

std::string iso_utc(std::time_t t)
{
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Mock runs stamp a reproducible time: SOURCE_DATE_EPOCH when set, else the epoch.
std::string creation_time(bool virtual_clock)
{
    if (!virtual_clock)
        return iso_utc(std::time(nullptr));
    const char* sde = std::getenv("SOURCE_DATE_EPOCH");
    return iso_utc(sde ? static_cast<std::time_t>(std::strtoll(sde, nullptr, 10)) : 0);
}

} // namespace

std::uint64_t run_seed(const BackendConfig& config)
{
    return config.seed ? static_cast<std::uint64_t>(*config.seed) : 0;
}

RawResponse annotate_one(const prompting::RenderedPrompt& prompt, const BackendConfig& config, Annotator& annotator,
                         int run_index, const AnnotateOptions& opts)
{
    const auto& styles = opts.styles ? *opts.styles : prompting::StyleBook::defaults();
    const auto messages = prompting::compose_messages(prompt, config.style, styles);
    const auto input = prompting::flatten(messages);

    CallContext ctx{&config, run_index};
    auto completion = annotator.complete(prompt, messages, ctx);

    const auto& count_tokens = opts.tokenizer ? opts.tokenizer : Tokenizer(token_count);
    RawResponse r;
    r.instance_id = prompt.instance_id;
    r.backend = config.name;
    r.variant = prompt.variant;
    r.temperature = config.temperature;
    r.run_index = run_index;
    r.shuffle_seed = prompt.shuffle_seed;
    r.option_order = prompt.option_order;
    r.option_texts = prompt.option_texts;
    r.e1 = prompt.e1;
    r.e2 = prompt.e2;
    r.text = std::move(completion.text);
    r.input_tokens = count_tokens(input);
    r.output_tokens = count_tokens(r.text);
    r.input_chars = char_count(input);
    r.output_chars = char_count(r.text);
    r.latency = completion.latency;
    r.attempts = completion.attempts;
    return r;
}

store::RunManifest run_annotation(const dataset::Dataset& ds, const prompting::ExemplarBank& bank,
                                  const BackendConfig& config, prompting::PromptVariant variant, int run_index,
                                  store::RunStore& out, Annotator& annotator, const RunOptions& opts)
{
    config.validate();
    if (out.has_manifest())
        return store::load_run(out.dir()).manifest;

    const auto seed = run_seed(config);
    std::vector<const dataset::Instance*> pending;
    for (const auto& inst : ds.instances)
        if (!out.contains(inst.id))
            pending.push_back(&inst);
    bool interrupted = false;
    if (opts.stop_after && *opts.stop_after < pending.size()) {
        pending.resize(*opts.stop_after);
        interrupted = true;
    }

    std::vector<std::optional<RawResponse>> results(pending.size());
    std::vector<bool> done(pending.size(), false);
    std::size_t failures = 0;
    int max_attempts = 0;
    std::mutex mu;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};

    const auto started = std::chrono::steady_clock::now();
    auto worker = [&] {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= pending.size())
                return;
            const auto& inst = *pending[i];
            std::optional<RawResponse> r;
            try {
                const auto prompt = prompting::build_prompt(inst, ds.schema_for(inst), variant, bank, seed);
                r = annotate_one(prompt, config, annotator, run_index, opts.annotate);
            } catch (const TransportError& e) {
                std::lock_guard lk(mu);
                std::cerr << "[annotate] " << config.name << " instance " << inst.id << " failed: " << e.what() << "\n";
                ++failures;
                max_attempts = std::max(max_attempts, e.attempts());
            } catch (const std::exception& e) {
                std::lock_guard lk(mu);
                std::cerr << "[annotate] " << config.name << " instance " << inst.id << " failed: " << e.what() << "\n";
                ++failures;
            }
            {
                std::lock_guard lk(mu);
                results[i] = std::move(r);
                done[i] = true;
            }
            cv.notify_one();
        }
    };

    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(config.max_parallel), pending.size());
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < n_threads; ++t)
        threads.emplace_back(worker);

    // Single writer: flush the completed prefix in instance order.
    std::vector<std::size_t> skipped;
    for (std::size_t written = 0; written < pending.size(); ++written) {
        std::unique_lock lk(mu);
        cv.wait(lk, [&] { return done[written]; });
        auto r = std::move(results[written]);
        lk.unlock();
        if (r)
            out.append(*r);
    }
    threads.clear();

    if (failures > 0)
        throw TransportError(config.name + ": " + std::to_string(failures) + " of " + std::to_string(pending.size()) +
                                 " instances failed; run left incomplete for resume",
                             max_attempts);
    if (interrupted)
        throw std::runtime_error("run interrupted after " + std::to_string(pending.size()) + " records");

    store::RunManifest m;
    m.run_id = store::make_run_id(config, variant, run_index);
    m.backend = store::to_json(config);
    m.variant = variant;
    m.temperature = config.temperature;
    m.seed = config.seed;
    m.run_index = run_index;
    m.dataset_fingerprint = ds.fingerprint;

    double simulated = 0.0;
    for (const auto& r : store::load_records(out.dir())) {
        ++m.totals.instances;
        m.totals.input_tokens += r.input_tokens;
        m.totals.output_tokens += r.output_tokens;
        m.totals.input_chars += r.input_chars;
        m.totals.output_chars += r.output_chars;
        simulated += r.latency;
    }
    if (config.is_mock())
        m.totals.wall_seconds = simulated / config.max_parallel;
    else
        m.totals.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    m.created_at = creation_time(config.is_mock());
    out.write_manifest(m);
    return m;
}

} // namespace relanno::backends
