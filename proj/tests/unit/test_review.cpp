#include <doctest.h>

#include <thread>

#include <httplib.h>

#include "oracles.hpp"
#include "relanno/error.hpp"
#include "relanno/review.hpp"
#include "relanno/review_server.hpp"
#include "workspace.hpp"

using namespace relanno;
using namespace relanno::orchestrator;
using nlohmann::json;

namespace {

/// 100-instance workspace, a three-model panel, and a review directory triaged at 65% coverage.
struct ReviewFixture {
    oracle::TempDir tmp{"review"};
    Workspace ws = fixtures::make_workspace(tmp.path(), 100, 17);
    std::vector<aggregation::VoteResult> votes;
    aggregation::TriageSplit split;
    std::filesystem::path dir = tmp.path() / "review";

    ReviewFixture()
    {
        std::vector<std::filesystem::path> runs;
        for (const char* b : {"gpt4-mock", "palm2-mock", "mpt-mock"}) {
            AnnotateRequest req;
            req.backend = b;
            req.variant = prompting::PromptVariant::five_shot;
            runs.push_back(annotate(ws, req));
        }
        auto panel = make_panel(load_checked_runs(runs, ws));
        votes = aggregation::relindex_vote_panel(panel, ws.dataset, ws.similarity);
        split = aggregation::triage(votes, aggregation::TriagePolicy::coverage(0.65));
        ReviewStore::create(dir, ws.dataset, votes, split);
    }

    std::string other_label(const std::string& id) const
    {
        const auto* inst = ws.dataset.find(id);
        const auto& v = *std::find_if(votes.begin(), votes.end(), [&](auto& x) { return x.instance_id == id; });
        for (const auto& l : ws.dataset.schema_for(*inst).labels)
            if (l != v.selected)
                return l;
        return v.selected;
    }
};

std::map<std::string, std::string> labels_of(const std::string& jsonl)
{
    std::map<std::string, std::string> out;
    std::istringstream in(jsonl);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) {
            auto j = json::parse(line);
            out[j["id"]] = j["gold_label"];
        }
    return out;
}

} // namespace

TEST_SUITE("review") {

TEST_CASE("store: queue, decisions, replay and export")
{
    ReviewFixture f;
    ReviewStore store(f.dir);
    auto p = store.progress();
    CHECK(p.total == 35);
    CHECK(p.reviewed == 0);
    CHECK(p.auto_accepted == 65);
    REQUIRE(p.mean_rel_index_remaining.has_value());

    auto q = store.queue(100);
    REQUIRE(q.size() == 35);
    for (std::size_t i = 1; i < q.size(); ++i)
        CHECK((q[i - 1].rel_index < q[i].rel_index ||
               (q[i - 1].rel_index == q[i].rel_index && q[i - 1].instance_id < q[i].instance_id)));
    CHECK(q[0].options.size() == f.ws.dataset.schema_for(*f.ws.dataset.find(q[0].instance_id)).labels.size());
    CHECK(q[0].assessments.size() == 3);
    CHECK(q[0].marked_sentence.find("**") != std::string::npos);

    const auto auto_labels = labels_of(store.export_jsonl());
    const std::string first = q[0].instance_id;
    const std::string second = q[1].instance_id;
    const auto l1 = f.other_label(first);

    auto d = store.decide(first, l1, "expert-a");
    CHECK(d.remaining == 34);
    CHECK_FALSE(d.superseded);
    CHECK(store.progress().reviewed == 1);
    CHECK(store.queue(1)[0].instance_id == second);

    // confirming the auto label is a decision but not an override
    store.decide(second, store.item(second)->selected, "");
    CHECK(store.item(second)->decision->reviewer == "anonymous");

    // a second decision on the same item supersedes the first
    auto again = store.decide(first, store.item(first)->selected, "expert-b");
    CHECK(again.superseded);
    CHECK(again.decision.supersedes == std::optional<std::size_t>(d.decision.seq));
    const auto l1b = f.other_label(first);
    store.decide(first, l1b, "expert-b");
    CHECK(store.progress().reviewed == 2);

    CHECK_THROWS_AS(store.decide("nope", l1, "x"), NotFoundError);
    CHECK_THROWS_AS(store.decide(first, "not_a_label", "x"), ValidationError);

    const auto exported = labels_of(store.export_jsonl());
    std::vector<std::string> changed;
    for (const auto& [id, label] : exported)
        if (auto_labels.at(id) != label)
            changed.push_back(id);
    CHECK(changed == std::vector<std::string>{first});

    ReviewStore reopened(f.dir);
    CHECK(reopened.progress().reviewed == 2);
    CHECK(reopened.item(first)->decision->label == l1b);
    CHECK(reopened.export_jsonl() == store.export_jsonl());
}

TEST_CASE("api over loopback")
{
    ReviewFixture f;
    ReviewStore store(f.dir);
    ReviewServer server(store);
    const int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread th([&] { server.run(); });
    httplib::Client cli("127.0.0.1", port);
    cli.set_connection_timeout(5);

    httplib::Result res;
    for (int i = 0; i < 50 && !(res = cli.Get("/api/progress")); ++i)
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    REQUIRE(res);
    CHECK(json::parse(res->body)["total"] == 35);

    res = cli.Get("/api/queue?limit=3");
    REQUIRE(res);
    auto q = json::parse(res->body);
    REQUIRE(q.size() == 3);
    const std::string id = q[0]["instance_id"];

    CHECK(cli.Get("/api/queue?limit=abc")->status == 400);
    CHECK(cli.Get("/api/items/" + id)->status == 200);
    CHECK(cli.Get("/api/items/missing")->status == 404);

    auto post = [&](const json& body) { return cli.Post("/api/decision", body.dump(), "application/json"); };
    CHECK(post({{"instance_id", "missing"}, {"label", "no_other"}})->status == 404);
    CHECK(post({{"instance_id", id}, {"label", "nonsense"}})->status == 422);
    CHECK(cli.Post("/api/decision", "{oops", "application/json")->status == 400);

    res = post({{"instance_id", id}, {"label", f.other_label(id)}, {"reviewer", "r1"}});
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["remaining"] == 34);
    CHECK(json::parse(cli.Get("/api/progress")->body)["reviewed"] == 1);

    // walk the rest of the queue
    for (;;) {
        auto next = json::parse(cli.Get("/api/queue?limit=1")->body);
        if (next.empty())
            break;
        post({{"instance_id", next[0]["instance_id"]}, {"label", next[0]["selected"]}, {"reviewer", "r1"}});
    }
    CHECK(json::parse(cli.Get("/api/queue")->body) == json::array());
    auto prog = json::parse(cli.Get("/api/progress")->body);
    CHECK(prog["reviewed"] == 35);
    CHECK(prog["mean_rel_index_remaining"].is_null());

    res = cli.Get("/api/export");
    REQUIRE(res);
    CHECK(labels_of(res->body).size() == 100);
    CHECK(cli.Get("/")->status == 200);

    server.stop();
    th.join();
}

}
