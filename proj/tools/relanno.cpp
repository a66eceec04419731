#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relanno/error.hpp"
#include "relanno/pipeline.hpp"
#include "relanno/review.hpp"
#include "relanno/review_server.hpp"

namespace fs = std::filesystem;
using namespace relanno;
using namespace relanno::orchestrator;

namespace {

ReviewServer* g_server = nullptr;

void on_signal(int)
{
    if (g_server)
        g_server->stop();
}

void emit(const std::string& content, const std::string& out)
{
    if (out.empty() || out == "-")
        std::cout << content;
    else
        write_file(out, content);
}

/// --runs entries plus every completed run directory under --runs-from, sorted by name.
std::vector<fs::path> collect_runs(const std::vector<std::string>& runs, const std::string& runs_from)
{
    std::vector<fs::path> out(runs.begin(), runs.end());
    if (!runs_from.empty()) {
        if (!fs::is_directory(runs_from))
            throw NotFoundError("runs directory " + runs_from + " does not exist");
        std::vector<fs::path> found;
        for (const auto& e : fs::directory_iterator(runs_from))
            if (e.is_directory() && fs::exists(e.path() / "manifest.json"))
                found.push_back(e.path());
        std::sort(found.begin(), found.end());
        out.insert(out.end(), found.begin(), found.end());
    }
    if (out.empty())
        throw ValidationError("no runs given (use --runs or --runs-from)");
    return out;
}

std::vector<prompting::PromptVariant> variants_from(const std::string& s)
{
    if (s == "all")
        return {prompting::kAllVariants.begin(), prompting::kAllVariants.end()};
    std::vector<prompting::PromptVariant> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        out.push_back(prompting::parse_variant(s.substr(start, comma - start)));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"relanno: LLM relation annotation, agreement, RelIndex aggregation and expert triage"};
    app.require_subcommand(1);

    std::string config_path = "relanno.json";
    app.add_option("-c,--config", config_path, "configuration file")->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "write a synthetic dataset, schemas and a mock-backend config");
    std::size_t synth_n = 200;
    std::uint64_t synth_seed = 1;
    std::string synth_dir = "demo";
    bool synth_table4 = false;
    synth->add_option("-n,--instances", synth_n, "instance count (round-robin over pairs)")->capture_default_str();
    synth->add_option("--seed", synth_seed, "generator seed")->capture_default_str();
    synth->add_option("-o,--out-dir", synth_dir, "output directory")->capture_default_str();
    synth->add_flag("--table4", synth_table4, "use the per-pair counts of the evaluation slice (3598 instances)");

    // annotate
    auto* annotate_cmd = app.add_subcommand("annotate", "run one backend over the dataset");
    AnnotateRequest req;
    std::string variant_arg = "full_instruction";
    std::vector<double> temps;
    std::vector<int> run_indices;
    std::string out_dir;
    annotate_cmd->add_option("-b,--backend", req.backend, "backend name from the config")->required();
    annotate_cmd->add_option("-v,--variant", variant_arg, "prompt variant, comma list, or 'all'")->capture_default_str();
    annotate_cmd->add_option("-t,--temp", temps, "temperature override (repeatable)");
    annotate_cmd->add_option("-s,--seed", req.seed, "seed override");
    annotate_cmd->add_option("-r,--run-index", run_indices, "run index (repeatable, default 1)");
    annotate_cmd->add_option("-j,--max-parallel", req.max_parallel, "in-flight request limit");
    annotate_cmd->add_option("-o,--out", out_dir, "run directory (single run only)");

    // shared run selection
    std::vector<std::string> runs;
    std::string runs_from;
    std::string out;
    auto add_runs = [&](CLI::App* c) {
        c->add_option("--runs", runs, "run directories");
        c->add_option("--runs-from", runs_from, "take every completed run under this directory");
        c->add_option("-o,--out", out, "output file (default stdout)");
    };

    auto* aggregate_cmd = app.add_subcommand("aggregate", "RelIndex vote over a panel of runs");
    add_runs(aggregate_cmd);

    auto* evaluate_cmd = app.add_subcommand("evaluate", "micro-F1/accuracy report against gold labels");
    add_runs(evaluate_cmd);
    std::string mode_arg = "all_classes";
    bool ensemble = false;
    evaluate_cmd->add_option("--mode", mode_arg, "all_classes or exclude_no_relation")->capture_default_str();
    evaluate_cmd->add_flag("--ensemble", ensemble, "add a majority-vote ensemble of all given runs");

    auto* agreement_cmd = app.add_subcommand("agreement", "Cohen and Fleiss kappa between runs");
    add_runs(agreement_cmd);

    auto* curve_cmd = app.add_subcommand("curve", "coverage-accuracy curve from a votes file");
    std::string votes_path;
    std::vector<double> steps;
    curve_cmd->add_option("--votes", votes_path, "votes file from aggregate")->required();
    curve_cmd->add_option("--steps", steps, "coverage fractions (default 0.05..1.00)");
    curve_cmd->add_option("-o,--out", out, "CSV output (default stdout)");

    auto* triage_cmd = app.add_subcommand("triage", "split votes into auto-accepted and an expert queue");
    std::optional<double> coverage, threshold;
    std::string review_dir = "review";
    triage_cmd->add_option("--votes", votes_path, "votes file from aggregate")->required();
    auto* cov_opt = triage_cmd->add_option("--coverage", coverage, "auto-accept the top fraction by RelIndex");
    triage_cmd->add_option("--threshold", threshold, "auto-accept RelIndex >= threshold")->excludes(cov_opt);
    triage_cmd->add_option("--review-dir", review_dir, "review queue directory")->capture_default_str();
    triage_cmd->add_option("-o,--out", out, "triage split file (default stdout)");

    auto* cost_cmd = app.add_subcommand("cost", "annotation cost and time");
    add_runs(cost_cmd);
    std::optional<std::size_t> cost_n;
    double avg_in = 0, avg_out = 0, avg_sec = 0;
    std::string pricing_name, unit_arg = "tokens";
    cost_cmd->add_option("-n,--instances", cost_n, "price explicit averages instead of runs");
    cost_cmd->add_option("--avg-input", avg_in, "average input units per instance");
    cost_cmd->add_option("--avg-output", avg_out, "average output units per instance");
    cost_cmd->add_option("--avg-seconds", avg_sec, "average seconds per instance");
    cost_cmd->add_option("--pricing", pricing_name, "pricing model name");
    cost_cmd->add_option("--unit", unit_arg, "tokens or chars")->capture_default_str();

    auto* serve_cmd = app.add_subcommand("serve", "review API and static UI");
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string ui_dir;
    serve_cmd->add_option("--review-dir", review_dir, "review queue directory")->capture_default_str();
    serve_cmd->add_option("--host", host)->capture_default_str();
    serve_cmd->add_option("--port", port)->capture_default_str();
    serve_cmd->add_option("--ui-dir", ui_dir, "static UI assets served at /");

    auto* export_cmd = app.add_subcommand("export", "dataset with expert decisions over auto labels");
    export_cmd->add_option("--review-dir", review_dir, "review queue directory")->capture_default_str();
    export_cmd->add_option("-o,--out", out, "output JSONL (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) {
            const auto schemas = dataset::default_schemas();
            dataset::Dataset ds;
            if (synth_table4) {
                dataset::SynthOptions o;
                o.seed = synth_seed;
                o.per_pair = {{"ORG-GPE", 710}, {"ORG-ORG", 913}, {"ORG-DATE", 554},
                              {"ORG-MONEY", 281}, {"PER-ORG", 485}, {"PER-TITLE", 655}};
                ds = dataset::synthesize(schemas, o);
            } else {
                ds = dataset::synthesize(schemas, synth_n, synth_seed);
            }
            const fs::path dir = synth_dir;
            write_file(dir / "dataset.jsonl", dataset::serialize_dataset(ds));
            write_file(dir / "schemas.json", dataset::serialize_schemas(schemas));
            nlohmann::ordered_json cfg;
            cfg["dataset"] = "dataset.jsonl";
            cfg["schemas"] = "schemas.json";
            cfg["synthetic_exemplars"] = true;
            cfg["runs_dir"] = "runs";
            cfg["backends"] = demo_backends();
            write_file(dir / "relanno.json", cfg.dump(2) + "\n");
            std::cerr << "wrote " << ds.instances.size() << " instances and a config to " << dir.string() << "\n";
            return 0;
        }

        if (serve_cmd->parsed()) {
            ReviewStore store(review_dir);
            ReviewServer server(store, ui_dir.empty() ? std::nullopt : std::optional<fs::path>(ui_dir));
            const int bound = server.bind(host, port);
            if (bound < 0) {
                std::cerr << "cannot bind " << host << ":" << port << "\n";
                return 2;
            }
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "serving " << review_dir << " on http://" << host << ":" << bound << "\n";
            server.run();
            return 0;
        }

        if (export_cmd->parsed()) {
            emit(ReviewStore(review_dir).export_jsonl(), out);
            return 0;
        }

        if (curve_cmd->parsed()) {
            // curve needs gold labels, so it still reads the dataset from the config
            const auto ws = Workspace::open(Config::load(config_path));
            const auto votes = load_votes(votes_path);
            emit(curve_csv(aggregation::coverage_curve(votes, ws.dataset, steps.empty() ? aggregation::default_steps() : steps)),
                 out);
            return 0;
        }

        if (cost_cmd->parsed() && cost_n) {
            const auto book = fs::exists(config_path) ? Workspace::open(Config::load(config_path)).pricing
                                                      : costing::PricingBook::defaults();
            const auto& pricing = book.get(pricing_name.empty() ? "gpt4" : pricing_name);
            costing::UsageStats s{*cost_n, avg_in, avg_out, avg_sec,
                                  unit_arg == "chars" ? costing::Unit::chars : costing::Unit::tokens};
            const auto e = costing::estimate_cost(s, pricing);
            nlohmann::ordered_json j;
            j["pricing"] = pricing.name;
            j["instances"] = s.n;
            j["cost"] = e.cost;
            j["hours"] = e.hours;
            j["currency"] = pricing.currency;
            j["reference"] = reference_cost_report();
            emit(j.dump(2) + "\n", out);
            return 0;
        }

        const auto ws = Workspace::open(Config::load(config_path));

        if (annotate_cmd->parsed()) {
            const auto variants = variants_from(variant_arg);
            if (temps.empty())
                temps.push_back(ws.config.backend(req.backend).temperature);
            if (run_indices.empty())
                run_indices.push_back(1);
            const std::size_t total = variants.size() * temps.size() * run_indices.size();
            if (!out_dir.empty() && total != 1)
                throw ValidationError("--out names a single run directory but " + std::to_string(total) +
                                      " runs were requested");
            for (auto v : variants)
                for (double t : temps)
                    for (int r : run_indices) {
                        auto one = req;
                        one.variant = v;
                        one.temperature = t;
                        one.run_index = r;
                        if (!out_dir.empty())
                            one.out = out_dir;
                        std::cout << annotate(ws, one).string() << "\n";
                    }
            return 0;
        }

        if (triage_cmd->parsed()) {
            const auto policy = threshold ? aggregation::TriagePolicy::threshold(*threshold)
                                          : aggregation::TriagePolicy::coverage(coverage.value_or(0.65));
            const auto votes = load_votes(votes_path);
            const auto split = aggregation::triage(votes, policy);
            ReviewStore::create(review_dir, ws.dataset, votes, split);
            emit(triage_to_json(split, policy).dump(1) + "\n", out);
            std::cerr << split.auto_accepted.size() << " auto-accepted, " << split.expert_queue.size()
                      << " queued for review in " << review_dir << "\n";
            return 0;
        }

        const auto loaded = load_checked_runs(collect_runs(runs, runs_from), ws);

        if (aggregate_cmd->parsed()) {
            const auto panel = make_panel(loaded);
            const auto votes = aggregation::relindex_vote_panel(panel, ws.dataset, ws.similarity);
            emit(votes_to_json(panel, votes).dump(1) + "\n", out);
        } else if (evaluate_cmd->parsed()) {
            emit(evaluate_report(ws, loaded, metrics::parse_eval_mode(mode_arg), ensemble).dump(2) + "\n", out);
        } else if (agreement_cmd->parsed()) {
            emit(agreement_report(loaded).dump(2) + "\n", out);
        } else if (cost_cmd->parsed()) {
            emit(cost_report(ws, loaded).dump(2) + "\n", out);
        }
        return 0;
    } catch (const TransportError& e) {
        std::cerr << "error: " << e.what() << " (attempts: " << e.attempts() << ")\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
