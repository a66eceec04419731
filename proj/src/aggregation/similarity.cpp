#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "relanno/aggregation.hpp"
#include "relanno/error.hpp"

namespace relanno::aggregation {

SimilarityMatrix::SimilarityMatrix(std::string pair_type, std::vector<std::string> labels)
    : pair_type_(std::move(pair_type)), labels_(std::move(labels)), sim_(labels_.size() * labels_.size(), 0.0)
{
    for (std::size_t i = 0; i < labels_.size(); ++i)
        sim_[i * labels_.size() + i] = 1.0;
}

bool SimilarityMatrix::has_label(std::string_view l) const
{
    for (const auto& x : labels_)
        if (x == l)
            return true;
    return false;
}

std::size_t SimilarityMatrix::index(std::string_view l) const
{
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == l)
            return i;
    throw ValidationError("label '" + std::string(l) + "' is not in the similarity matrix for " + pair_type_);
}

void SimilarityMatrix::set(std::string_view a, std::string_view b, double value)
{
    const auto i = index(a), j = index(b);
    sim_[i * labels_.size() + j] = value;
    sim_[j * labels_.size() + i] = value;
}

double SimilarityMatrix::operator()(std::string_view a, std::string_view b) const { return at(index(a), index(b)); }

SimilarityMatrix SimilarityMatrix::scaled(double c) const
{
    auto out = *this;
    for (auto& v : out.sim_)
        v *= c;
    return out;
}

void SimilarityMatrix::validate() const
{
    const auto n = labels_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (at(i, i) != 1.0)
            throw ValidationError("similarity " + pair_type_ + ": sim(" + labels_[i] + "," + labels_[i] + ") must be 1");
        for (std::size_t j = 0; j < n; ++j) {
            const double v = at(i, j);
            if (!(v >= 0.0 && v <= 1.0))
                throw ValidationError("similarity " + pair_type_ + ": sim(" + labels_[i] + "," + labels_[j] +
                                      ") outside [0,1]");
            if (v != at(j, i))
                throw ValidationError("similarity " + pair_type_ + ": not symmetric for " + labels_[i] + "/" +
                                      labels_[j]);
        }
    }
}

SimilarityBook SimilarityBook::identity(const dataset::SchemaMap& schemas)
{
    SimilarityBook b;
    for (const auto& [pair, schema] : schemas)
        b.put(SimilarityMatrix(pair, schema.labels));
    return b;
}

SimilarityBook SimilarityBook::parse(std::string_view json_text, const dataset::SchemaMap& schemas)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("similarity file: ") + e.what());
    }
    if (!doc.is_object())
        throw ValidationError("similarity file: expected an object keyed by pair type");

    auto book = identity(schemas);
    for (auto& [pair, rows] : doc.items()) {
        auto it = book.matrices_.find(pair);
        if (it == book.matrices_.end())
            throw ValidationError("similarity file: unknown pair type " + pair);
        auto& m = it->second;
        std::map<std::pair<std::string, std::string>, double> given;
        for (auto& [a, cols] : rows.items()) {
            if (!m.has_label(a))
                throw ValidationError("similarity file: " + pair + " has no label " + a);
            for (auto& [b, v] : cols.items()) {
                if (!m.has_label(b))
                    throw ValidationError("similarity file: " + pair + " has no label " + b);
                if (!v.is_number())
                    throw ValidationError("similarity file: " + pair + "/" + a + "/" + b + " is not a number");
                given[{a, b}] = v.get<double>();
            }
        }
        for (const auto& [key, v] : given) {
            auto rev = given.find({key.second, key.first});
            if (rev != given.end() && rev->second != v)
                throw ValidationError("similarity file: " + pair + " gives different values for " + key.first + "/" +
                                      key.second + " and its mirror");
            m.set(key.first, key.second, v);
        }
        m.validate();
    }
    return book;
}

SimilarityBook SimilarityBook::load(const std::filesystem::path& path, const dataset::SchemaMap& schemas)
{
    std::ifstream in(path);
    if (!in)
        throw NotFoundError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), schemas);
}

void SimilarityBook::put(SimilarityMatrix m)
{
    auto key = m.pair_type();
    matrices_.insert_or_assign(std::move(key), std::move(m));
}

const SimilarityMatrix& SimilarityBook::for_pair(const std::string& pair_type) const
{
    auto it = matrices_.find(pair_type);
    if (it == matrices_.end())
        throw NotFoundError("no similarity matrix for pair type " + pair_type);
    return it->second;
}

} // namespace relanno::aggregation
