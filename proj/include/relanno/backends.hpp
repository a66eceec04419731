#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "relanno/dataset.hpp"
#include "relanno/prompting.hpp"

namespace relanno::store {
class RunStore;
struct RunManifest;
} // namespace relanno::store

// Annotator transports (remote HTTP, scripted mock) and the run executor.
namespace relanno::backends {

struct MockRates {
    double accuracy = 1.0;
    double hallucination_rate = 0.0;
    double blank_rate = 0.0;
};

struct MockProfile {
    MockRates rates;
    /// Per-variant overrides of `rates`.
    std::map<prompting::PromptVariant, MockRates> per_variant;
    /// gold label -> preferred wrong label.
    std::map<std::string, std::string> confusion;
    std::uint64_t seed = 0;
    /// Simulated latency per call; mock runs use a virtual clock.
    double seconds_per_call = 1.0;

    const MockRates& rates_for(prompting::PromptVariant v) const;
    void validate() const;
};

struct HttpTransport {
    std::string endpoint;   // scheme://host[:port]/path
    std::string auth_env;   // env var holding the bearer token; empty for no auth
    std::string model;
    double timeout_seconds = 60.0;
};

struct RetryPolicy {
    int max_attempts = 3;
    double backoff_seconds = 1.0;   // doubled after every failed attempt
};

struct BackendConfig {
    std::string name;
    std::string style = "gpt4";
    std::variant<HttpTransport, MockProfile> transport;
    double temperature = 0.2;
    std::optional<std::int64_t> seed;
    int max_parallel = 1;
    RetryPolicy retry;
    std::string pricing;

    bool is_mock() const { return std::holds_alternative<MockProfile>(transport); }
    void validate() const;
};

struct RawResponse {
    std::string instance_id;
    std::string backend;
    prompting::PromptVariant variant = prompting::PromptVariant::simple;
    double temperature = 0.0;
    int run_index = 1;
    std::uint64_t shuffle_seed = 0;
    std::vector<std::string> option_order;
    std::vector<std::string> option_texts;
    std::string e1;
    std::string e2;
    std::string text;
    std::size_t input_tokens = 0;
    std::size_t output_tokens = 0;
    std::size_t input_chars = 0;
    std::size_t output_chars = 0;
    double latency = 0.0;
    int attempts = 1;
};

// ---- counting ----

using Tokenizer = std::function<std::size_t(std::string_view)>;

/// Unicode scalar values.
std::size_t char_count(std::string_view text);

/// Default approximation: maximal runs of word characters (letters, digits, underscore,
/// any non-ASCII) count one token each; every other non-space character is its own token.
std::size_t token_count(std::string_view text);

// ---- transports ----

/// Context of one call, passed to transports alongside the composed messages.
struct CallContext {
    const BackendConfig* config = nullptr;
    int run_index = 1;
};

struct Completion {
    std::string text;
    double latency = 0.0;
    int attempts = 1;
};

class Annotator {
public:
    virtual ~Annotator() = default;
    virtual Completion complete(const prompting::RenderedPrompt& prompt,
                                const std::vector<prompting::Message>& messages, const CallContext& ctx) = 0;
};

using GoldLookup = std::function<std::optional<std::string>(std::string_view instance_id)>;

/// Scripted stand-in for a commercial model. Each call draws once from a SplitMix64 stream
/// keyed on (profile seed, config seed, instance, variant, temperature, run index):
/// gold option with probability `accuracy`, free-text relation with `hallucination_rate`,
/// empty output with `blank_rate`, otherwise a wrong option.
class MockAnnotator : public Annotator {
public:
    MockAnnotator(MockProfile profile, GoldLookup gold);
    Completion complete(const prompting::RenderedPrompt& prompt, const std::vector<prompting::Message>& messages,
                        const CallContext& ctx) override;

private:
    MockProfile profile_;
    GoldLookup gold_;
};

/// POSTs {model, messages, temperature[, seed]} as JSON and reads the first completion.
class HttpAnnotator : public Annotator {
public:
    explicit HttpAnnotator(HttpTransport transport);
    Completion complete(const prompting::RenderedPrompt& prompt, const std::vector<prompting::Message>& messages,
                        const CallContext& ctx) override;

    /// Request body for `messages`, exposed for tests of the wire format.
    static std::string request_body(const HttpTransport& t, const std::vector<prompting::Message>& messages,
                                    double temperature, std::optional<std::int64_t> seed);
    /// Completion text from a response body (chat choices, text choices, or a bare content field).
    static std::string extract_text(std::string_view body);

private:
    HttpTransport transport_;
};

/// Annotator for `config`. Mock transports need the gold lookup.
std::unique_ptr<Annotator> make_annotator(const BackendConfig& config, GoldLookup gold = {});

struct AnnotateOptions {
    const prompting::StyleBook* styles = nullptr;   // defaults when null
    Tokenizer tokenizer;                            // token_count when empty
};

RawResponse annotate_one(const prompting::RenderedPrompt& prompt, const BackendConfig& config, Annotator& annotator,
                         int run_index, const AnnotateOptions& opts = {});

struct RunOptions {
    AnnotateOptions annotate;
    /// Stop after this many new records without writing the manifest (interrupt simulation).
    std::optional<std::size_t> stop_after;
};

/// Shuffle seed for a run: the config seed, or 0 when the backend takes none.
std::uint64_t run_seed(const BackendConfig& config);

/// Annotates every instance not yet in `out`, persisting records in instance order, and
/// writes the manifest last. Failed instances are logged and leave the manifest absent;
/// the call then throws TransportError.
store::RunManifest run_annotation(const dataset::Dataset& ds, const prompting::ExemplarBank& bank,
                                  const BackendConfig& config, prompting::PromptVariant variant, int run_index,
                                  store::RunStore& out, Annotator& annotator, const RunOptions& opts = {});

} // namespace relanno::backends
