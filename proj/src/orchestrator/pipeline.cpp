#include "relanno/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "relanno/error.hpp"

namespace relanno::orchestrator {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

void write_file(const fs::path& path, const std::string& content)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    const auto tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out)
            throw ValidationError("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw NotFoundError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

parsing::AnnotationRecord parse_record(const backends::RawResponse& r, const parsing::StyleLexicon& lexicon)
{
    parsing::AnnotationRecord rec;
    rec.instance_id = r.instance_id;
    rec.backend = r.backend;
    rec.variant = r.variant;
    rec.temperature = r.temperature;
    rec.run_index = r.run_index;
    rec.raw = r.text;
    rec.option_order = r.option_order;
    rec.parsed = parsing::parse_response(r.text, parsing::OptionSet{r.option_order, r.option_texts, r.e1, r.e2}, lexicon);
    return rec;
}

LoadedRun load_checked_run(const fs::path& dir, const Workspace& ws)
{
    LoadedRun run;
    run.data = store::load_run(dir);
    if (run.data.manifest.dataset_fingerprint != ws.dataset.fingerprint)
        throw ValidationError("run " + dir.string() + " was produced from a different dataset (fingerprint " +
                              run.data.manifest.dataset_fingerprint.substr(0, 12) + "... vs " +
                              ws.dataset.fingerprint.substr(0, 12) + "...)");
    std::vector<std::string> unknown;
    for (const auto& r : run.data.records) {
        if (!ws.dataset.find(r.instance_id))
            unknown.push_back(r.instance_id);
        run.records.push_back(parse_record(r, ws.lexicon));
    }
    if (!unknown.empty())
        throw NotFoundError("run " + dir.string() + " has " + std::to_string(unknown.size()) +
                            " record(s) for instances not in the dataset, e.g. " + unknown.front());
    return run;
}

std::vector<LoadedRun> load_checked_runs(const std::vector<fs::path>& dirs, const Workspace& ws)
{
    std::vector<LoadedRun> out;
    std::vector<std::string> missing;
    for (const auto& d : dirs)
        if (!fs::exists(d / "manifest.json"))
            missing.push_back(d.string());
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing)
            list += (list.empty() ? "" : ", ") + m;
        throw NotFoundError("missing or incomplete runs: " + list);
    }
    for (const auto& d : dirs)
        out.push_back(load_checked_run(d, ws));
    return out;
}

backends::BackendConfig resolve_backend(const Workspace& ws, const AnnotateRequest& req)
{
    auto c = ws.config.backend(req.backend);
    if (req.temperature)
        c.temperature = *req.temperature;
    if (req.seed)
        c.seed = *req.seed;
    if (req.max_parallel)
        c.max_parallel = *req.max_parallel;
    c.validate();
    ws.styles.style(c.style);
    return c;
}

fs::path annotate(const Workspace& ws, const AnnotateRequest& req, backends::Annotator* annotator)
{
    const auto config = resolve_backend(ws, req);
    const auto dir = req.out ? *req.out : ws.config.runs_dir / store::make_run_id(config, req.variant, req.run_index);
    store::RunStore out(dir);
    if (out.has_manifest()) {
        const auto m = store::load_run(dir).manifest;
        if (m.dataset_fingerprint != ws.dataset.fingerprint)
            throw ValidationError("run " + dir.string() + " exists for a different dataset");
        return dir;
    }

    std::unique_ptr<backends::Annotator> owned;
    if (!annotator) {
        const auto* ds = &ws.dataset;
        owned = backends::make_annotator(config, [ds](std::string_view id) -> std::optional<std::string> {
            const auto* inst = ds->find(std::string(id));
            return inst ? inst->gold_label : std::nullopt;
        });
        annotator = owned.get();
    }
    backends::RunOptions opts;
    opts.annotate.styles = &ws.styles;
    opts.stop_after = req.stop_after;
    backends::run_annotation(ws.dataset, ws.exemplars, config, req.variant, req.run_index, out, *annotator, opts);
    return dir;
}

ordered_json to_json(const parsing::ParsedLabel& p)
{
    ordered_json j;
    switch (p.kind) {
    case parsing::ParsedLabel::Kind::label:
        j["kind"] = "label";
        j["label"] = p.label;
        break;
    case parsing::ParsedLabel::Kind::blank:
        j["kind"] = "blank";
        break;
    case parsing::ParsedLabel::Kind::hallucination:
        j["kind"] = "hallucination";
        j["text"] = p.text;
        j["style"] = p.style ? ordered_json(*p.style) : ordered_json(nullptr);
        break;
    }
    return j;
}

parsing::ParsedLabel parsed_from_json(const json& j)
{
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "label")
        return parsing::ParsedLabel::make_label(j.at("label").get<std::string>());
    if (kind == "blank")
        return parsing::ParsedLabel::make_blank();
    if (kind == "hallucination") {
        std::optional<std::string> style;
        if (j.contains("style") && !j["style"].is_null())
            style = j["style"].get<std::string>();
        return parsing::ParsedLabel::make_hallucination(j.value("text", ""), style);
    }
    throw ValidationError("unknown outcome kind " + kind);
}

ordered_json to_json(const metrics::MetricReport& r)
{
    ordered_json j;
    j["micro_f1"] = r.micro_f1;
    j["accuracy"] = r.accuracy;
    ordered_json pp = ordered_json::object();
    for (const auto& [pair, s] : r.per_pair)
        pp[pair] = {{"n", s.n},
                    {"micro_f1", s.micro_f1},
                    {"accuracy", s.accuracy},
                    {"precision", s.precision},
                    {"recall", s.recall},
                    {"tp", s.tp},
                    {"fp", s.fp},
                    {"fn", s.fn}};
    j["per_pair"] = pp;
    return j;
}

metrics::LabelVector crowd_majority(const dataset::Dataset& ds)
{
    metrics::LabelVector v;
    for (const auto& inst : ds.instances) {
        if (inst.crowd_labels.empty())
            throw ValidationError("instance " + inst.id + " has no crowd labels");
        std::vector<parsing::ParsedLabel> votes;
        for (const auto& l : inst.crowd_labels)
            votes.push_back(parsing::ParsedLabel::make_label(l));
        v.push_back(inst.id, parsing::ParsedLabel::make_label(
                                 aggregation::majority_vote(votes, ds.schema_for(inst).labels).label));
    }
    return v;
}

namespace {

std::string negative_label(const dataset::Dataset& ds)
{
    return ds.schemas.empty() ? "no_other" : ds.schemas.begin()->second.no_relation_label;
}

ordered_json hallucination_share(const std::vector<parsing::AnnotationRecord>& records, const dataset::Dataset& ds)
{
    try {
        return metrics::hallucination_rate(records, ds, negative_label(ds));
    } catch (const ValidationError&) {
        return nullptr;
    }
}

} // namespace

ordered_json evaluate_report(const Workspace& ws, const std::vector<LoadedRun>& runs, metrics::EvalMode mode,
                             bool ensemble)
{
    struct Group {
        std::string backend;
        prompting::PromptVariant variant;
        double temperature;
        std::vector<const LoadedRun*> runs;
    };
    std::vector<Group> groups;
    for (const auto& r : runs) {
        const auto& m = r.data.manifest;
        const auto backend = m.backend.value("name", "");
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
            return g.backend == backend && g.variant == m.variant && g.temperature == m.temperature;
        });
        if (it == groups.end())
            groups.push_back({backend, m.variant, m.temperature, {&r}});
        else
            it->runs.push_back(&r);
    }

    ordered_json rows = ordered_json::array();
    for (const auto& g : groups) {
        ordered_json row;
        row["annotator"] = g.backend;
        row["variant"] = prompting::to_string(g.variant);
        row["temperature"] = g.temperature;
        ordered_json run_list = ordered_json::array();
        std::vector<metrics::MetricReport> reports;
        for (const auto* r : g.runs) {
            auto rep = metrics::evaluate(metrics::label_vector(r->records), ws.dataset, mode);
            ordered_json rj;
            rj["run_id"] = r->id();
            rj["run_index"] = r->data.manifest.run_index;
            rj["report"] = to_json(rep);
            rj["hallucination_rate_negative"] = hallucination_share(r->records, ws.dataset);
            run_list.push_back(rj);
            reports.push_back(std::move(rep));
        }
        row["runs"] = run_list;
        row["average"] = to_json(metrics::average_runs(reports));
        rows.push_back(row);
    }

    ordered_json out;
    out["mode"] = metrics::to_string(mode);
    out["instances"] = ws.dataset.instances.size();
    out["rows"] = rows;
    ordered_json baselines = ordered_json::array();
    const bool has_crowd = !ws.dataset.instances.empty() &&
                           std::all_of(ws.dataset.instances.begin(), ws.dataset.instances.end(),
                                       [](const dataset::Instance& i) { return !i.crowd_labels.empty(); });
    if (has_crowd)
        baselines.push_back({{"annotator", "crowd_majority"},
                             {"report", to_json(metrics::evaluate(crowd_majority(ws.dataset), ws.dataset, mode))}});
    if (ensemble && runs.size() >= 2) {
        const auto panel = make_panel(runs);
        baselines.push_back(
            {{"annotator", "ensemble_majority"},
             {"panel", panel.annotators},
             {"report", to_json(metrics::evaluate(aggregation::majority_vote_panel(panel, ws.dataset), ws.dataset, mode))}});
    }
    out["baselines"] = baselines;
    return out;
}

ordered_json agreement_report(const std::vector<LoadedRun>& runs)
{
    if (runs.size() < 2)
        throw ValidationError("agreement needs at least 2 runs");
    std::vector<metrics::LabelVector> raters;
    std::vector<std::string> names;
    for (const auto& r : runs) {
        auto v = metrics::label_vector(r.records);
        // align every rater on the first rater's id order
        if (!raters.empty()) {
            std::map<std::string, parsing::ParsedLabel> by_id;
            for (std::size_t i = 0; i < v.size(); ++i)
                by_id.emplace(v.ids[i], v.outcomes[i]);
            metrics::LabelVector aligned;
            for (const auto& id : raters.front().ids) {
                auto it = by_id.find(id);
                if (it == by_id.end())
                    throw NotFoundError("run " + r.id() + " has no record for " + id);
                aligned.push_back(id, it->second);
            }
            if (by_id.size() != aligned.size())
                throw ValidationError("run " + r.id() + " covers different instances than " + names.front());
            v = std::move(aligned);
        }
        raters.push_back(std::move(v));
        names.push_back(r.id());
    }
    ordered_json pairs = ordered_json::array();
    for (std::size_t a = 0; a < raters.size(); ++a)
        for (std::size_t b = a + 1; b < raters.size(); ++b)
            pairs.push_back({{"a", names[a]}, {"b", names[b]}, {"kappa", metrics::cohen_kappa(raters[a], raters[b])}});
    ordered_json out;
    out["raters"] = names;
    out["instances"] = raters.front().size();
    out["cohen"] = pairs;
    out["fleiss"] = metrics::fleiss_kappa(metrics::rating_matrix(raters));
    return out;
}

aggregation::Panel make_panel(const std::vector<LoadedRun>& runs)
{
    aggregation::Panel p;
    for (const auto& r : runs)
        p.add(r.id(), metrics::label_vector(r.records));
    return p;
}

ordered_json votes_to_json(const aggregation::Panel& panel, const std::vector<aggregation::VoteResult>& votes)
{
    ordered_json list = ordered_json::array();
    for (const auto& v : votes) {
        ordered_json j;
        j["instance_id"] = v.instance_id;
        j["pair_type"] = v.pair_type;
        j["selected"] = v.selected;
        j["rel_index"] = v.rel_index;
        ordered_json confid = ordered_json::object();
        for (const auto& [l, c] : v.confid)
            confid[l] = c;
        j["confid"] = confid;
        ordered_json as = ordered_json::array();
        for (const auto& a : v.assessments)
            as.push_back({{"annotator", a.annotator}, {"outcome", to_json(a.outcome)}});
        j["assessments"] = as;
        list.push_back(j);
    }
    return {{"panel", panel.annotators}, {"votes", list}};
}

std::vector<aggregation::VoteResult> votes_from_json(const json& j)
{
    std::vector<aggregation::VoteResult> out;
    try {
        for (const auto& v : j.at("votes")) {
            aggregation::VoteResult r;
            r.instance_id = v.at("instance_id").get<std::string>();
            r.pair_type = v.at("pair_type").get<std::string>();
            r.selected = v.at("selected").get<std::string>();
            r.rel_index = v.at("rel_index").get<double>();
            for (auto& [l, c] : v.at("confid").items())
                r.confid.emplace(l, c.get<double>());
            for (const auto& a : v.at("assessments"))
                r.assessments.push_back({a.at("annotator").get<std::string>(), parsed_from_json(a.at("outcome"))});
            out.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("votes file: ") + e.what());
    }
    return out;
}

std::vector<aggregation::VoteResult> load_votes(const fs::path& path)
{
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return votes_from_json(j);
}

std::string curve_csv(const std::vector<aggregation::CurvePoint>& points)
{
    std::string out = "coverage,count,accuracy\n";
    char buf[96];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%.4f,%zu,%.17g\n", p.coverage, p.count, p.accuracy);
        out += buf;
    }
    return out;
}

ordered_json triage_to_json(const aggregation::TriageSplit& split, const aggregation::TriagePolicy& policy)
{
    ordered_json j;
    j["policy"] = {{"kind", policy.kind == aggregation::TriagePolicy::Kind::coverage ? "coverage" : "threshold"},
                   {"value", policy.value}};
    j["auto"] = split.auto_accepted;
    j["expert_queue"] = split.expert_queue;
    return j;
}

costing::UsageStats usage_stats(const store::RunData& run, const costing::PricingModel& pricing)
{
    costing::UsageStats s;
    s.unit = std::holds_alternative<costing::PerChar>(pricing.kind) ? costing::Unit::chars : costing::Unit::tokens;
    s.n = run.records.size();
    if (s.n == 0)
        return s;
    double in = 0, out = 0, sec = 0;
    for (const auto& r : run.records) {
        in += static_cast<double>(s.unit == costing::Unit::chars ? r.input_chars : r.input_tokens);
        out += static_cast<double>(s.unit == costing::Unit::chars ? r.output_chars : r.output_tokens);
        sec += r.latency;
    }
    const double n = static_cast<double>(s.n);
    s.avg_input = in / n;
    s.avg_output = out / n;
    s.avg_seconds = sec / n;
    return s;
}

ordered_json cost_report(const Workspace& ws, const std::vector<LoadedRun>& runs)
{
    ordered_json list = ordered_json::array();
    for (const auto& r : runs) {
        ordered_json j;
        j["run_id"] = r.id();
        const auto pricing_name = r.data.manifest.backend.value("pricing", "");
        if (pricing_name.empty()) {
            j["pricing"] = nullptr;
            list.push_back(j);
            continue;
        }
        const auto& pricing = ws.pricing.get(pricing_name);
        const auto s = usage_stats(r.data, pricing);
        const auto e = costing::estimate_cost(s, pricing);
        std::vector<costing::RecordUsage> per;
        for (const auto& rec : r.data.records) {
            const bool chars = s.unit == costing::Unit::chars;
            per.push_back({static_cast<double>(chars ? rec.input_chars : rec.input_tokens),
                           static_cast<double>(chars ? rec.output_chars : rec.output_tokens), rec.latency});
        }
        const auto exact = costing::estimate_cost_exact(per, s.unit, pricing);
        j["pricing"] = pricing_name;
        j["kind"] = pricing.kind_name();
        j["instances"] = s.n;
        j["unit"] = s.unit == costing::Unit::chars ? "chars" : "tokens";
        j["avg_input"] = s.avg_input;
        j["avg_output"] = s.avg_output;
        j["avg_seconds"] = s.avg_seconds;
        j["cost"] = e.cost;
        j["cost_exact"] = exact.cost;
        j["hours"] = e.hours;
        j["currency"] = pricing.currency;
        list.push_back(j);
    }
    ordered_json out;
    out["runs"] = list;
    out["human_baseline"] = {{"instances", ws.dataset.instances.size()},
                             {"seconds_per_instance", 45.0},
                             {"hourly_wage", 7.25},
                             {"cost", costing::human_baseline(ws.dataset.instances.size(), 45.0, 7.25)}};
    out["reference"] = reference_cost_report();
    return out;
}

ordered_json reference_cost_report()
{
    const auto book = costing::PricingBook::defaults();
    const std::size_t n = 3598;
    auto est = [&](const char* pricing, double in, double out, double sec, costing::Unit unit) {
        return costing::estimate_cost({n, in, out, sec, unit}, book.get(pricing));
    };
    const auto g_lo = est("gpt4", 191, 17, 0, costing::Unit::tokens);
    const auto g_hi = est("gpt4", 441, 17, 0, costing::Unit::tokens);
    const auto p_lo = est("palm2", 814, 298, 0, costing::Unit::chars);
    const auto p_hi = est("palm2", 1954, 147, 0, costing::Unit::chars);
    const auto m_lo = est("mpt_p3_2xlarge", 0, 0, 0.96, costing::Unit::tokens);
    const auto m_hi = est("mpt_p3_2xlarge", 0, 0, 1.81, costing::Unit::tokens);

    ordered_json j;
    j["instances"] = n;
    j["gpt4"] = {{"low", g_lo.cost}, {"high", g_hi.cost}, {"published", "$24-51"}};
    j["palm2"] = {{"low", p_lo.cost},
                  {"high", p_hi.cost},
                  {"published", "$5-9"},
                  {"note", "the published range does not follow from the published character averages"}};
    j["mpt_instruct"] = {{"low", m_lo.cost},
                         {"high", m_hi.cost},
                         {"published", "$29-55"},
                         {"note", "computed with the configurable p3.2xlarge hourly rate; the published range is "
                                  "about ten times higher and is not reproducible from the stated inputs"}};
    j["human"] = {{"cost", costing::human_baseline(n, 45.0, 7.25)},
                  {"published", 389.0},
                  {"note", "3598 x 45 s x $7.25/h = $326.07; the published $389 cannot be derived from the stated "
                           "inputs and is reported for reference only"}};
    return j;
}

} // namespace relanno::orchestrator
