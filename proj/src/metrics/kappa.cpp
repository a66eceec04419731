#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "detail.hpp"
#include "relanno/error.hpp"

namespace relanno::metrics {

LabelVector label_vector(const std::vector<parsing::AnnotationRecord>& records)
{
    LabelVector v;
    for (const auto& r : records)
        v.push_back(r.instance_id, r.parsed);
    return v;
}

std::vector<std::string> categories(const LabelVector& v)
{
    std::vector<std::string> out;
    out.reserve(v.size());
    for (const auto& o : v.outcomes)
        out.push_back(o.category());
    return out;
}

double cohen_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b)
{
    if (a.size() != b.size())
        throw ValidationError("cohen_kappa: vectors differ in length (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    if (a.empty())
        throw ValidationError("cohen_kappa: empty vectors");

    const auto n = static_cast<long long>(a.size());
    long long agree = 0;
    std::map<std::string, std::pair<long long, long long>> marg;
    for (std::size_t i = 0; i < a.size(); ++i) {
        agree += a[i] == b[i];
        ++marg[a[i]].first;
        ++marg[b[i]].second;
    }
    long long chance = 0;
    for (const auto& [cat, m] : marg)
        chance += m.first * m.second;
    if (chance == n * n)
        return 1.0;
    const double po = static_cast<double>(agree) / n;
    const double pe = static_cast<double>(chance) / (static_cast<double>(n) * n);
    return (po - pe) / (1.0 - pe);
}

double cohen_kappa(const LabelVector& a, const LabelVector& b)
{
    if (a.size() == b.size() && a.ids.size() == a.size() && b.ids.size() == b.size() && a.ids != b.ids)
        throw ValidationError("cohen_kappa: vectors are not aligned on the same instance ids");
    return cohen_kappa(categories(a), categories(b));
}

namespace detail {

std::size_t check_ratings(const RatingMatrix& ratings)
{
    if (ratings.empty())
        throw ValidationError("fleiss_kappa: no items");
    const auto width = ratings.front().size();
    long long n = -1;
    for (std::size_t i = 0; i < ratings.size(); ++i) {
        if (ratings[i].size() != width)
            throw ValidationError("fleiss_kappa: row " + std::to_string(i) + " has a different category count");
        long long sum = 0;
        for (int c : ratings[i]) {
            if (c < 0)
                throw ValidationError("fleiss_kappa: negative count in row " + std::to_string(i));
            sum += c;
        }
        if (n < 0)
            n = sum;
        else if (sum != n)
            throw ValidationError("fleiss_kappa: row " + std::to_string(i) + " sums to " + std::to_string(sum) +
                                  ", expected " + std::to_string(n));
    }
    if (n < 2)
        throw ValidationError("fleiss_kappa: need at least 2 raters per item");
    return static_cast<std::size_t>(n);
}

double fleiss_from_sums(const FleissSums& s, std::size_t items)
{
    const double n = static_cast<double>(s.raters);
    const double N = static_cast<double>(items);
    const double p_bar = (static_cast<double>(s.agree) - N * n) / (N * n * (n - 1.0));
    long long pe_num = 0;
    const long long total = static_cast<long long>(items) * static_cast<long long>(s.raters);
    for (long long c : s.column)
        pe_num += c * c;
    if (pe_num == total * total)
        return 1.0;
    const double pe = static_cast<double>(pe_num) / (static_cast<double>(total) * total);
    return (p_bar - pe) / (1.0 - pe);
}

} // namespace detail

double fleiss_kappa(const RatingMatrix& ratings)
{
    detail::FleissSums s;
    s.raters = detail::check_ratings(ratings);
    const std::size_t k = ratings.front().size();
    s.column.assign(k, 0);
    long long* col = s.column.data();
    long long agree = 0;
    const auto items = static_cast<long long>(ratings.size());

#pragma omp parallel for reduction(+ : agree) reduction(+ : col[:k]) schedule(static)
    for (long long i = 0; i < items; ++i) {
        const auto& row = ratings[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < k; ++j) {
            const long long c = row[j];
            agree += c * c;
            col[j] += c;
        }
    }
    s.agree = agree;
    return detail::fleiss_from_sums(s, ratings.size());
}

RatingMatrix rating_matrix(const std::vector<LabelVector>& raters)
{
    if (raters.size() < 2)
        throw ValidationError("rating_matrix: need at least 2 raters");
    const auto& ids = raters.front().ids;
    std::set<std::string> cats;
    std::vector<std::unordered_map<std::string, std::string>> by_id(raters.size());
    for (std::size_t r = 0; r < raters.size(); ++r) {
        const auto& v = raters[r];
        if (v.ids.size() != v.outcomes.size())
            throw ValidationError("rating_matrix: rater " + std::to_string(r) + " has misaligned ids");
        for (std::size_t i = 0; i < v.size(); ++i) {
            auto cat = v.outcomes[i].category();
            cats.insert(cat);
            by_id[r].emplace(v.ids[i], std::move(cat));
        }
        if (by_id[r].size() != ids.size())
            throw ValidationError("rating_matrix: rater " + std::to_string(r) + " covers " +
                                  std::to_string(by_id[r].size()) + " ids, expected " + std::to_string(ids.size()));
    }
    const std::vector<std::string> cat_list(cats.begin(), cats.end());
    RatingMatrix m(ids.size(), std::vector<int>(cat_list.size(), 0));
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t r = 0; r < raters.size(); ++r) {
            auto it = by_id[r].find(ids[i]);
            if (it == by_id[r].end())
                throw NotFoundError("rating_matrix: rater " + std::to_string(r) + " has no outcome for " + ids[i]);
            const auto j = std::lower_bound(cat_list.begin(), cat_list.end(), it->second) - cat_list.begin();
            ++m[i][static_cast<std::size_t>(j)];
        }
    return m;
}

} // namespace relanno::metrics
