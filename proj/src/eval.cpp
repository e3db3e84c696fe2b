#include "tsr/eval.hpp"

#include "tsr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace tsr {

namespace {

std::vector<int> effective_order(const Ranking& r, bool include_self) {
    if (include_self) return r.order;
    std::vector<int> out;
    out.reserve(r.order.size());
    for (int g : r.order)
        if (g != r.query) out.push_back(g);
    return out;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace

double bulls_eye(const std::vector<Ranking>& results, const std::vector<std::string>& labels,
                 int class_size, bool include_self) {
    if (results.empty()) return 0.0;
    const int window = 2 * class_size;
    long hits = 0;
    for (const Ranking& r : results) {
        const std::vector<int> order = effective_order(r, include_self);
        if (int(order.size()) < window)
            throw RankingTooShort("ranking for query " + std::to_string(r.query) + " has " +
                                  std::to_string(order.size()) + " entries; bulls-eye needs " +
                                  std::to_string(window));
        for (int k = 0; k < window; ++k)
            if (labels[order[k]] == labels[r.query]) ++hits;
    }
    return 100.0 * double(hits) / (double(results.size()) * class_size);
}

std::vector<int> top_n_consistency(const std::vector<Ranking>& results,
                                   const std::vector<std::string>& labels, int n_max,
                                   bool include_self) {
    std::vector<int> counts(n_max, 0);
    for (const Ranking& r : results) {
        const std::vector<int> order = effective_order(r, include_self);
        if (int(order.size()) < n_max)
            throw RankingTooShort("ranking for query " + std::to_string(r.query) + " has " +
                                  std::to_string(order.size()) + " entries; top-N needs " +
                                  std::to_string(n_max));
        for (int n = 0; n < n_max; ++n)
            if (labels[order[n]] == labels[r.query]) ++counts[n];
    }
    return counts;
}

std::vector<std::pair<double, double>> precision_recall(const std::vector<Ranking>& results,
                                                        const std::vector<std::string>& labels,
                                                        int class_size, bool include_self) {
    std::vector<std::pair<double, double>> curve(class_size);
    for (int k = 0; k < class_size; ++k) curve[k] = {double(k + 1) / class_size, 0.0};
    if (results.empty()) return curve;

    for (const Ranking& r : results) {
        const std::vector<int> order = effective_order(r, include_self);
        const int relevant = include_self ? class_size : class_size - 1;
        // position (1-based) of the h-th same-class hit
        std::vector<int> hit_pos;
        hit_pos.reserve(relevant);
        for (std::size_t i = 0; i < order.size() && int(hit_pos.size()) < relevant; ++i)
            if (labels[order[i]] == labels[r.query]) hit_pos.push_back(int(i) + 1);
        for (int k = 0; k < class_size; ++k) {
            const int needed = std::max(1, int(std::ceil(double(k + 1) / class_size * relevant)));
            if (needed <= int(hit_pos.size()))
                curve[k].second += double(needed) / hit_pos[needed - 1];
        }
    }
    for (auto& [recall, precision] : curve) precision /= double(results.size());
    return curve;
}

std::string format_report(const BenchmarkReport& report) {
    std::ostringstream out;
    out << "dataset: " << report.dataset << "\n";
    out << "mode: " << report.mode << "\n";
    out << "queries: " << report.queries << "\n";
    out << "class-size: " << report.class_size << "\n";
    out << "bulls-eye: " << fixed(report.bulls_eye, 2) << "%\n";
    out << "top-n:";
    for (std::size_t i = 0; i < report.top_n.size(); ++i)
        out << " " << (i + 1) << ":" << report.top_n[i];
    out << "\n";
    out << "pr-curve:";
    for (const auto& [r, p] : report.pr_curve)
        out << " (" << fixed(r, 4) << "," << fixed(p, 4) << ")";
    out << "\n";
    out << "fallbacks: " << report.fallback_count << "\n";
    if (!report.worst_queries.empty()) {
        out << "worst:";
        for (const auto& [id, rate] : report.worst_queries)
            out << " " << id << "=" << fixed(rate, 3);
        out << "\n";
    }
    return out.str();
}

std::string top_n_csv(const BenchmarkReport& report) {
    std::ostringstream out;
    out << "n,count\n";
    for (std::size_t i = 0; i < report.top_n.size(); ++i)
        out << (i + 1) << "," << report.top_n[i] << "\n";
    return out.str();
}

std::string pr_csv(const BenchmarkReport& report) {
    std::ostringstream out;
    out << "recall,precision\n";
    for (const auto& [r, p] : report.pr_curve) out << fixed(r, 6) << "," << fixed(p, 6) << "\n";
    return out.str();
}

std::string bulls_eye_csv(const BenchmarkReport& report) {
    std::ostringstream out;
    out << "dataset,mode,queries,class_size,bulls_eye\n";
    out << report.dataset << "," << report.mode << "," << report.queries << ","
        << report.class_size << "," << fixed(report.bulls_eye, 4) << "\n";
    return out.str();
}

} // namespace tsr
