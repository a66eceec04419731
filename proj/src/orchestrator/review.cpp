#include "relanno/review.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

#include "relanno/error.hpp"
#include "relanno/hash.hpp"
#include "relanno/pipeline.hpp"

namespace relanno::orchestrator {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string now_utc()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ordered_json span_json(const dataset::EntitySpan& s)
{
    return {{"surface", s.surface}, {"start", s.start}, {"end", s.end}};
}

dataset::EntitySpan span_from(const json& j)
{
    return {j.at("surface").get<std::string>(), j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
}

ordered_json decision_json(const ExpertDecision& d)
{
    ordered_json j;
    j["label"] = d.label;
    j["reviewer"] = d.reviewer;
    j["timestamp"] = d.timestamp;
    j["seq"] = d.seq;
    j["supersedes"] = d.supersedes ? ordered_json(*d.supersedes) : ordered_json(nullptr);
    return j;
}

void append_durably(const fs::path& path, const std::string& line)
{
    const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
    if (fd < 0)
        throw ValidationError("cannot open decision log " + path.string());
    std::size_t done = 0;
    while (done < line.size()) {
        const auto n = ::write(fd, line.data() + done, line.size() - done);
        if (n <= 0) {
            ::close(fd);
            throw ValidationError("write to decision log failed");
        }
        done += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
}

} // namespace

ordered_json to_json(const ReviewItem& item)
{
    ordered_json j;
    j["instance_id"] = item.instance_id;
    j["pair_type"] = item.pair_type;
    j["sentence"] = item.sentence;
    j["marked_sentence"] = item.marked_sentence;
    j["e1"] = span_json(item.e1);
    j["e2"] = span_json(item.e2);
    ordered_json opts = ordered_json::array();
    for (const auto& o : item.options)
        opts.push_back({{"label", o.label}, {"text", o.text}});
    j["options"] = opts;
    ordered_json as = ordered_json::array();
    for (const auto& a : item.assessments)
        as.push_back({{"annotator", a.annotator}, {"outcome", to_json(a.outcome)}});
    j["assessments"] = as;
    ordered_json confid = ordered_json::object();
    for (const auto& [l, c] : item.confid)
        confid[l] = c;
    j["confid"] = confid;
    j["rel_index"] = item.rel_index;
    j["selected"] = item.selected;
    j["queued"] = item.queued;
    j["decision"] = item.decision ? decision_json(*item.decision) : ordered_json(nullptr);
    return j;
}

ordered_json to_json(const Progress& p)
{
    ordered_json j;
    j["total"] = p.total;
    j["reviewed"] = p.reviewed;
    j["auto_accepted"] = p.auto_accepted;
    j["mean_rel_index_remaining"] =
        p.mean_rel_index_remaining ? ordered_json(*p.mean_rel_index_remaining) : ordered_json(nullptr);
    return j;
}

void ReviewStore::create(const fs::path& dir, const dataset::Dataset& ds,
                         const std::vector<aggregation::VoteResult>& votes, const aggregation::TriageSplit& split)
{
    std::set<std::string> queued(split.expert_queue.begin(), split.expert_queue.end());
    std::map<std::string, const aggregation::VoteResult*> by_id;
    for (const auto& v : votes)
        by_id.emplace(v.instance_id, &v);

    ordered_json items = ordered_json::array();
    for (const auto& inst : ds.instances) {
        auto it = by_id.find(inst.id);
        if (it == by_id.end())
            throw NotFoundError("no vote for instance " + inst.id);
        const auto& v = *it->second;
        const auto& schema = ds.schema_for(inst);
        ReviewItem item;
        item.instance_id = inst.id;
        item.pair_type = inst.pair_type;
        item.sentence = inst.sentence;
        item.marked_sentence = dataset::mark_entities(inst);
        item.e1 = inst.e1;
        item.e2 = inst.e2;
        for (const auto& l : schema.labels)
            item.options.push_back({l, schema.render_option(l, inst.e1.surface, inst.e2.surface)});
        item.assessments = v.assessments;
        item.confid = v.confid;
        item.rel_index = v.rel_index;
        item.selected = v.selected;
        item.queued = queued.count(inst.id) > 0;
        items.push_back(to_json(item));
    }
    if (by_id.size() != ds.instances.size())
        throw ValidationError("votes cover instances outside the dataset");

    fs::create_directories(dir);
    write_file(dir / "schemas.json", dataset::serialize_schemas(ds.schemas));
    write_file(dir / "dataset.jsonl", dataset::serialize_dataset(ds));
    write_file(dir / "items.json", ordered_json{{"queue", split.expert_queue}, {"items", items}}.dump(1) + "\n");
    write_file(dir / "decisions.jsonl", "");
}

ReviewStore::ReviewStore(fs::path dir) : dir_(std::move(dir))
{
    if (!fs::exists(dir_ / "items.json"))
        throw NotFoundError("no review queue in " + dir_.string() + " (run triage first)");
    const auto schemas = dataset::parse_schemas(read_file(dir_ / "schemas.json"));
    ds_ = dataset::parse_dataset(read_file(dir_ / "dataset.jsonl"), schemas);

    const auto doc = json::parse(read_file(dir_ / "items.json"));
    for (const auto& j : doc.at("items")) {
        ReviewItem item;
        item.instance_id = j.at("instance_id").get<std::string>();
        item.pair_type = j.at("pair_type").get<std::string>();
        item.sentence = j.at("sentence").get<std::string>();
        item.marked_sentence = j.at("marked_sentence").get<std::string>();
        item.e1 = span_from(j.at("e1"));
        item.e2 = span_from(j.at("e2"));
        for (const auto& o : j.at("options"))
            item.options.push_back({o.at("label").get<std::string>(), o.at("text").get<std::string>()});
        for (const auto& a : j.at("assessments"))
            item.assessments.push_back({a.at("annotator").get<std::string>(), parsed_from_json(a.at("outcome"))});
        for (auto& [l, c] : j.at("confid").items())
            item.confid.emplace(l, c.get<double>());
        item.rel_index = j.at("rel_index").get<double>();
        item.selected = j.at("selected").get<std::string>();
        item.queued = j.at("queued").get<bool>();
        index_.emplace(item.instance_id, items_.size());
        items_.push_back(std::move(item));
    }
    for (const auto& id : doc.at("queue")) {
        auto it = index_.find(id.get<std::string>());
        if (it == index_.end())
            throw ValidationError("review queue names unknown instance " + id.get<std::string>());
        queue_order_.push_back(it->second);
    }

    std::ifstream log(dir_ / "decisions.jsonl");
    std::string line;
    while (std::getline(log, line)) {
        if (line.empty())
            continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error&) {
            break;   // torn tail from a crash mid-append
        }
        ExpertDecision d;
        d.label = j.at("label").get<std::string>();
        d.reviewer = j.at("reviewer").get<std::string>();
        d.timestamp = j.at("timestamp").get<std::string>();
        d.seq = j.at("seq").get<std::size_t>();
        bool superseded = false;
        apply(d, j.at("instance_id").get<std::string>(), superseded);
        next_seq_ = std::max(next_seq_, d.seq + 1);
    }
}

void ReviewStore::apply(const ExpertDecision& d, const std::string& instance_id, bool& superseded)
{
    auto it = index_.find(instance_id);
    if (it == index_.end())
        throw NotFoundError("unknown instance " + instance_id);
    auto& item = items_[it->second];
    ExpertDecision copy = d;
    superseded = item.decision.has_value();
    if (superseded)
        copy.supersedes = item.decision->seq;
    item.decision = std::move(copy);
}

std::vector<ReviewItem> ReviewStore::queue(std::size_t limit) const
{
    std::lock_guard lk(mu_);
    std::vector<ReviewItem> out;
    for (auto idx : queue_order_) {
        if (out.size() >= limit)
            break;
        if (!items_[idx].decision)
            out.push_back(items_[idx]);
    }
    return out;
}

std::optional<ReviewItem> ReviewStore::item(const std::string& id) const
{
    std::lock_guard lk(mu_);
    auto it = index_.find(id);
    if (it == index_.end())
        return std::nullopt;
    return items_[it->second];
}

DecisionOutcome ReviewStore::decide(const std::string& instance_id, const std::string& label, const std::string& reviewer)
{
    std::lock_guard lk(mu_);
    auto it = index_.find(instance_id);
    if (it == index_.end())
        throw NotFoundError("unknown instance " + instance_id);
    const auto& item = items_[it->second];
    const bool valid = std::any_of(item.options.begin(), item.options.end(),
                                   [&](const ReviewOption& o) { return o.label == label; });
    if (!valid)
        throw ValidationError("label '" + label + "' is not an option for " + instance_id);

    ExpertDecision d;
    d.label = label;
    d.reviewer = reviewer.empty() ? "anonymous" : reviewer;
    d.timestamp = now_utc();
    d.seq = next_seq_++;
    if (item.decision)
        d.supersedes = item.decision->seq;

    ordered_json j;
    j["seq"] = d.seq;
    j["instance_id"] = instance_id;
    j["label"] = d.label;
    j["reviewer"] = d.reviewer;
    j["timestamp"] = d.timestamp;
    j["supersedes"] = d.supersedes ? ordered_json(*d.supersedes) : ordered_json(nullptr);
    append_durably(dir_ / "decisions.jsonl", j.dump() + "\n");

    DecisionOutcome out;
    apply(d, instance_id, out.superseded);
    out.decision = *items_[it->second].decision;
    for (auto idx : queue_order_)
        out.remaining += !items_[idx].decision;
    return out;
}

Progress ReviewStore::progress() const
{
    std::lock_guard lk(mu_);
    Progress p;
    p.total = queue_order_.size();
    p.auto_accepted = items_.size() - queue_order_.size();
    double sum = 0.0;
    std::size_t remaining = 0;
    for (auto idx : queue_order_) {
        if (items_[idx].decision) {
            ++p.reviewed;
        } else {
            sum += items_[idx].rel_index;
            ++remaining;
        }
    }
    if (remaining)
        p.mean_rel_index_remaining = sum / static_cast<double>(remaining);
    return p;
}

dataset::Dataset ReviewStore::merged() const
{
    std::lock_guard lk(mu_);
    auto out = ds_;
    for (auto& inst : out.instances) {
        auto it = index_.find(inst.id);
        if (it == index_.end())
            continue;
        const auto& item = items_[it->second];
        inst.gold_label = item.decision ? item.decision->label : item.selected;
    }
    out.fingerprint = sha256_hex(dataset::serialize_dataset(out));
    return out;
}

std::string ReviewStore::export_jsonl() const { return dataset::serialize_dataset(merged()); }

} // namespace relanno::orchestrator
