#include "relanno/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "relanno/error.hpp"
#include "relanno/hash.hpp"
#include "relanno/text.hpp"

namespace relanno::dataset {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw NotFoundError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

EntitySpan span_from_json(const json& j)
{
    EntitySpan s;
    s.surface = j.at("surface").get<std::string>();
    s.start = j.at("start").get<std::size_t>();
    s.end = j.at("end").get<std::size_t>();
    return s;
}

ordered_json span_to_json(const EntitySpan& s)
{
    ordered_json j;
    j["surface"] = s.surface;
    j["start"] = s.start;
    j["end"] = s.end;
    return j;
}

void check_span(const Instance& inst, const EntitySpan& span, std::string_view which, std::size_t len)
{
    if (!(span.start < span.end && span.end <= len))
        throw ValidationError("instance " + inst.id + ": " + std::string(which) + " span [" +
                              std::to_string(span.start) + "," + std::to_string(span.end) +
                              ") out of range for sentence of length " + std::to_string(len));
    if (text::slice(inst.sentence, span.start, span.end) != span.surface)
        throw ValidationError("instance " + inst.id + ": " + std::string(which) + " surface '" + span.surface +
                              "' does not match sentence text at [" + std::to_string(span.start) + "," +
                              std::to_string(span.end) + ")");
}

} // namespace

bool RelationSchema::has_label(std::string_view label) const
{
    return std::find(labels.begin(), labels.end(), label) != labels.end();
}

std::string RelationSchema::render_option(const std::string& label, std::string_view e1, std::string_view e2) const
{
    auto it = templates.find(label);
    if (it == templates.end())
        throw ValidationError("schema " + pair_type + ": no template for label " + label);
    return text::replace_all(text::replace_all(it->second, "{E1}", e1), "{E2}", e2);
}

void RelationSchema::validate() const
{
    if (labels.empty())
        throw ValidationError("schema " + pair_type + ": empty label list");
    std::set<std::string> seen;
    for (const auto& l : labels) {
        if (!seen.insert(l).second)
            throw ValidationError("schema " + pair_type + ": duplicate label " + l);
        auto it = templates.find(l);
        if (it == templates.end())
            throw ValidationError("schema " + pair_type + ": missing template for " + l);
        if (it->second.find("{E1}") == std::string::npos || it->second.find("{E2}") == std::string::npos)
            throw ValidationError("schema " + pair_type + ": template for " + l + " must reference {E1} and {E2}");
    }
    if (templates.size() != labels.size())
        throw ValidationError("schema " + pair_type + ": template for unknown label");
    if (!has_label(no_relation_label))
        throw ValidationError("schema " + pair_type + ": no_relation_label '" + no_relation_label + "' not in labels");
}

const RelationSchema& Dataset::schema_for(const Instance& inst) const
{
    auto it = schemas.find(inst.pair_type);
    if (it == schemas.end())
        throw ValidationError("instance " + inst.id + ": no schema for pair type " + inst.pair_type);
    return it->second;
}

const Instance* Dataset::find(std::string_view id) const
{
    for (const auto& inst : instances)
        if (inst.id == id)
            return &inst;
    return nullptr;
}

Dataset Dataset::subset(const std::vector<std::string>& ids) const
{
    std::unordered_set<std::string> want(ids.begin(), ids.end());
    Dataset out;
    out.schemas = schemas;
    for (const auto& inst : instances)
        if (want.count(inst.id))
            out.instances.push_back(inst);
    out.fingerprint = sha256_hex(serialize_dataset(out));
    return out;
}

SchemaMap parse_schemas(std::string_view json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("schema file: ") + e.what());
    }
    SchemaMap out;
    for (auto& [pair, body] : doc.items()) {
        RelationSchema s;
        s.pair_type = pair;
        try {
            s.labels = body.at("labels").get<std::vector<std::string>>();
            s.templates = body.at("templates").get<std::map<std::string, std::string>>();
            s.no_relation_label = body.at("no_relation_label").get<std::string>();
            s.relation_group = body.value("relation_group", std::string{});
        } catch (const json::exception& e) {
            throw ValidationError("schema " + pair + ": " + e.what());
        }
        s.validate();
        out.emplace(pair, std::move(s));
    }
    return out;
}

SchemaMap load_schemas(const std::filesystem::path& path) { return parse_schemas(read_file(path)); }

std::string serialize_schemas(const SchemaMap& schemas)
{
    ordered_json doc = ordered_json::object();
    for (const auto& [pair, s] : schemas) {
        ordered_json body;
        body["labels"] = s.labels;
        ordered_json tpl = ordered_json::object();
        for (const auto& l : s.labels)
            tpl[l] = s.templates.at(l);
        body["templates"] = tpl;
        body["no_relation_label"] = s.no_relation_label;
        if (!s.relation_group.empty())
            body["relation_group"] = s.relation_group;
        doc[pair] = body;
    }
    return doc.dump(2) + "\n";
}

void validate_instance(const Instance& inst, const SchemaMap& schemas)
{
    if (inst.id.empty())
        throw ValidationError("instance with empty id");
    auto it = schemas.find(inst.pair_type);
    if (it == schemas.end())
        throw ValidationError("instance " + inst.id + ": unknown pair type " + inst.pair_type);
    const auto len = text::code_points(inst.sentence);
    check_span(inst, inst.e1, "e1", len);
    check_span(inst, inst.e2, "e2", len);
    if (inst.e1.start < inst.e2.end && inst.e2.start < inst.e1.end)
        throw ValidationError("instance " + inst.id + ": e1 and e2 spans overlap");
    const auto& schema = it->second;
    if (inst.gold_label && !schema.has_label(*inst.gold_label))
        throw ValidationError("instance " + inst.id + ": gold label " + *inst.gold_label + " not in schema " +
                              inst.pair_type);
    for (const auto& c : inst.crowd_labels)
        if (!schema.has_label(c))
            throw ValidationError("instance " + inst.id + ": crowd label " + c + " not in schema " + inst.pair_type);
}

Dataset parse_dataset(std::string_view jsonl, const SchemaMap& schemas)
{
    Dataset d;
    d.schemas = schemas;
    std::unordered_set<std::string> ids;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < jsonl.size()) {
        auto nl = jsonl.find('\n', pos);
        auto line = jsonl.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? jsonl.size() : nl + 1;
        ++line_no;
        if (text::is_blank(line))
            continue;

        Instance inst;
        try {
            auto j = json::parse(line);
            inst.id = j.at("id").get<std::string>();
            inst.sentence = j.at("sentence").get<std::string>();
            inst.e1 = span_from_json(j.at("e1"));
            inst.e2 = span_from_json(j.at("e2"));
            inst.pair_type = j.at("pair_type").get<std::string>();
            if (j.contains("gold_label") && !j["gold_label"].is_null())
                inst.gold_label = j["gold_label"].get<std::string>();
            if (j.contains("crowd_labels"))
                inst.crowd_labels = j["crowd_labels"].get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw ValidationError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
        validate_instance(inst, schemas);
        if (!ids.insert(inst.id).second)
            throw ValidationError("instance " + inst.id + ": duplicate id (line " + std::to_string(line_no) + ")");
        d.instances.push_back(std::move(inst));
    }
    d.fingerprint = sha256_hex(jsonl);
    return d;
}

Dataset load_dataset(const std::filesystem::path& path, const SchemaMap& schemas)
{
    return parse_dataset(read_file(path), schemas);
}

Dataset load_dataset(const std::filesystem::path& path, const std::filesystem::path& schema_path)
{
    return load_dataset(path, load_schemas(schema_path));
}

std::string serialize_instance(const Instance& inst)
{
    ordered_json j;
    j["id"] = inst.id;
    j["sentence"] = inst.sentence;
    j["e1"] = span_to_json(inst.e1);
    j["e2"] = span_to_json(inst.e2);
    j["pair_type"] = inst.pair_type;
    if (inst.gold_label)
        j["gold_label"] = *inst.gold_label;
    if (!inst.crowd_labels.empty())
        j["crowd_labels"] = inst.crowd_labels;
    return j.dump();
}

std::string serialize_dataset(const Dataset& d)
{
    std::string out;
    for (const auto& inst : d.instances) {
        out += serialize_instance(inst);
        out += '\n';
    }
    return out;
}

std::string mark_entities(const Instance& inst)
{
    struct Insert {
        std::size_t at;
        std::string_view marker;
    };
    const std::string_view s = inst.sentence;
    std::vector<Insert> inserts = {
        {text::byte_offset(s, inst.e1.start), "**"},
        {text::byte_offset(s, inst.e1.end), "**"},
        {text::byte_offset(s, inst.e2.start), "__"},
        {text::byte_offset(s, inst.e2.end), "__"},
    };
    // Adjacent spans share a boundary; the closing marker of the earlier span goes first.
    std::stable_sort(inserts.begin(), inserts.end(), [&](const Insert& a, const Insert& b) { return a.at < b.at; });
    if (inst.e2.end == inst.e1.start) {
        for (std::size_t i = 0; i + 1 < inserts.size(); ++i)
            if (inserts[i].at == inserts[i + 1].at && inserts[i].marker == "**")
                std::swap(inserts[i], inserts[i + 1]);
    }

    std::string out;
    out.reserve(s.size() + 8);
    std::size_t cursor = 0;
    for (const auto& ins : inserts) {
        out.append(s.substr(cursor, ins.at - cursor));
        out.append(ins.marker);
        cursor = ins.at;
    }
    out.append(s.substr(cursor));
    return out;
}

std::map<std::string, std::size_t> counts_by_pair(const Dataset& d)
{
    std::map<std::string, std::size_t> out;
    for (const auto& inst : d.instances)
        ++out[inst.pair_type];
    return out;
}

} // namespace relanno::dataset
