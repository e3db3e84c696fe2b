#pragma once

#include "tsr/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace tsr {

// One ranked retrieval list. order holds gallery indices, best first; the
// query is itself a gallery index (self-retrieval included or dropped by the
// metric, per convention flags below).
struct Ranking {
    int query = 0;
    std::vector<int> order;
};

// Percentage of same-class shapes found in the top 2C ranks over all queries.
// include_self keeps the query in its own ranking (MPEG-7 convention).
double bulls_eye(const std::vector<Ranking>& results, const std::vector<std::string>& labels,
                 int class_size, bool include_self = true);

// count[N-1] = number of queries whose N-th retrieved shape shares the
// query's class. Self-retrievals are dropped first (Kimia convention) unless
// include_self.
std::vector<int> top_n_consistency(const std::vector<Ranking>& results,
                                   const std::vector<std::string>& labels, int n_max = 10,
                                   bool include_self = false);

// Mean precision at recall levels {1/C, ..., C/C}, averaged over queries.
std::vector<std::pair<double, double>> precision_recall(const std::vector<Ranking>& results,
                                                        const std::vector<std::string>& labels,
                                                        int class_size, bool include_self = true);

struct BenchmarkReport {
    std::string dataset;
    std::string mode;
    int queries = 0;
    int class_size = 0;
    double bulls_eye = 0.0;
    std::vector<int> top_n;                           // N = 1..10
    std::vector<std::pair<double, double>> pr_curve;  // (recall, precision)
    int fallback_count = 0;
    std::vector<std::pair<std::string, double>> worst_queries; // (id, top-2C hit rate)
    double build_seconds = 0.0;  // stderr diagnostics only, never serialized
    double query_seconds = 0.0;
};

// Human-readable summary (no timings, so reruns are byte-identical).
std::string format_report(const BenchmarkReport& report);

// CSV emitters, one metric per file.
std::string top_n_csv(const BenchmarkReport& report);
std::string pr_csv(const BenchmarkReport& report);
std::string bulls_eye_csv(const BenchmarkReport& report);

} // namespace tsr
