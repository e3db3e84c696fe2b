#include "tsr/errors.hpp"
#include "tsr/eval.hpp"
#include "tsr/parallel.hpp"
#include "tsr/pipeline.hpp"
#include "tsr/preprocess.hpp"
#include "tsr/shapeio.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <unordered_map>

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw tsr::DataError("cannot write " + path.string());
    out << content;
}

// ---------------------------------------------------------------- convert

struct ConvertArgs {
    std::string dataset, out;
    int threshold = 128;
    bool strict = false;
};

int run_convert(const ConvertArgs& a) {
    tsr::LoadReport report;
    tsr::Gallery gallery = tsr::load_dataset(a.dataset, tsr::LabelRule::PrefixBeforeLastDash,
                                             a.strict, &report, a.threshold);
    std::filesystem::create_directories(a.out);
    for (const tsr::BinaryShape& s : gallery.shapes)
        tsr::save_pgm(s, std::filesystem::path(a.out) / (s.id + ".pgm"));
    for (const auto& f : report.failures)
        std::cerr << "skipped " << f.file << ": " << f.error << "\n";
    std::cerr << "converted " << gallery.shapes.size() << " shapes\n";
    return 0;
}

// ------------------------------------------------------------------ build

struct BuildArgs {
    std::string dataset, out;
    tsr::BuildConfig config;
    bool strict = false;
    int threads = 0;
};

int run_build(const BuildArgs& a) {
    tsr::set_thread_count(a.threads);
    tsr::Gallery gallery = tsr::load_dataset(a.dataset, tsr::LabelRule::PrefixBeforeLastDash,
                                             a.strict, nullptr, a.config.binarize_threshold);
    const auto start = Clock::now();
    tsr::BuildReport report;
    tsr::RetrievalIndex index = tsr::build_index(gallery, a.config, a.strict, &report);
    for (const auto& f : report.failures)
        std::cerr << "dropped " << f.id << ": " << f.error << "\n";
    tsr::save_index(index, a.out);
    std::cerr << "indexed " << index.gallery_size() << " shapes into "
              << index.config.cluster_count << " clusters in " << fixed(seconds_since(start), 1)
              << "s\n";
    return 0;
}

// ------------------------------------------------------------------ query

struct QueryArgs {
    std::string index_path, image;
    std::string mode = "tsr";
    int top = 10;
    int threads = 0;
    std::string scatter;
};

int run_query(const QueryArgs& a) {
    tsr::set_thread_count(a.threads);
    tsr::RetrievalIndex index = tsr::load_index(a.index_path);
    tsr::BinaryShape shape = tsr::load_shape(a.image, index.config.binarize_threshold);
    const auto start = Clock::now();
    tsr::QueryResult result = tsr::query(index, shape, tsr::parse_query_mode(a.mode));
    std::cerr << "query in " << fixed(seconds_since(start), 2) << "s";
    if (result.used_fallback) std::cerr << " (relevant set was empty; kept the best cluster)";
    std::cerr << "\n";

    const bool has_cost = !result.cluster_cost.empty();
    const int limit = std::min<int>(a.top, int(result.ranking.size()));
    for (int r = 0; r < limit; ++r) {
        const auto& [g, score] = result.ranking[r];
        const int cluster = index.clusters.assignment[g];
        std::cout << (r + 1) << " " << index.ids[g] << " " << fixed(score, 6) << " " << cluster
                  << " " << (has_cost ? fixed(result.cluster_cost[cluster], 4) : "-") << "\n";
    }

    if (!a.scatter.empty()) {
        if (!has_cost)
            throw tsr::UsageError("--scatter needs a tsr mode; '" + a.mode +
                                  "' skips cluster filtering");
        std::ostringstream csv;
        csv << "cluster,neg_log_prf,neg_log_pknn,cost,relevant\n";
        const double floor = index.config.prob_floor;
        for (std::size_t c = 0; c < result.p_rf.size(); ++c) {
            const double lrf = -std::log(std::max(result.p_rf[c], floor));
            const double lknn = -std::log(std::max(result.p_knn[c], floor));
            const bool rel = std::find(result.relevant_clusters.begin(),
                                       result.relevant_clusters.end(),
                                       int(c)) != result.relevant_clusters.end();
            csv << c << "," << fixed(lrf, 6) << "," << fixed(lknn, 6) << ","
                << fixed(result.cluster_cost[c], 6) << "," << (rel ? 1 : 0) << "\n";
        }
        write_file(a.scatter, csv.str());
    }
    return 0;
}

// -------------------------------------------------------------- benchmark

struct BenchmarkArgs {
    std::string index_path, dataset;
    std::string mode = "tsr";
    std::string out = ".";
    std::string metric = "all";
    std::string self_inclusion = "auto";
    int threads = 0;
};

int run_benchmark(const BenchmarkArgs& a) {
    tsr::set_thread_count(a.threads);
    tsr::RetrievalIndex index = tsr::load_index(a.index_path);
    tsr::Gallery gallery = tsr::load_dataset(a.dataset, tsr::LabelRule::PrefixBeforeLastDash, true,
                                             nullptr, index.config.binarize_threshold);

    std::unordered_map<std::string, int> position;
    for (int i = 0; i < index.gallery_size(); ++i) position[index.ids[i]] = i;

    // uniform class size, from the index labels
    std::map<std::string, int> class_counts;
    for (const auto& label : index.labels) ++class_counts[label];
    int class_size = class_counts.empty() ? 0 : class_counts.begin()->second;
    for (const auto& [label, count] : class_counts)
        if (count != class_size)
            throw tsr::UsageError("class sizes are not uniform ('" + label + "' has " +
                                  std::to_string(count) + ", expected " +
                                  std::to_string(class_size) + ")");

    const tsr::QueryMode mode = tsr::parse_query_mode(a.mode);
    std::vector<tsr::Ranking> rankings;
    rankings.reserve(gallery.shapes.size());
    int fallbacks = 0;
    std::vector<std::pair<std::string, double>> hit_rates;
    const auto start = Clock::now();
    for (const tsr::BinaryShape& shape : gallery.shapes) {
        auto it = position.find(shape.id);
        if (it == position.end())
            throw tsr::UsageError("query '" + shape.id + "' is not part of the index");
        tsr::QueryResult qr = tsr::query(index, shape, mode);
        tsr::Ranking r;
        r.query = it->second;
        r.order.reserve(qr.ranking.size());
        for (const auto& [g, score] : qr.ranking) r.order.push_back(g);
        if (qr.used_fallback) ++fallbacks;
        int hits = 0;
        const int window = std::min<int>(2 * class_size, int(r.order.size()));
        for (int k = 0; k < window; ++k)
            if (index.labels[r.order[k]] == index.labels[r.query]) ++hits;
        hit_rates.emplace_back(shape.id, class_size > 0 ? double(hits) / class_size : 0.0);
        rankings.push_back(std::move(r));
    }
    const double query_time = seconds_since(start);
    std::cerr << rankings.size() << " queries in " << fixed(query_time, 1) << "s\n";

    auto inclusion = [&](bool metric_default) {
        if (a.self_inclusion == "include") return true;
        if (a.self_inclusion == "exclude") return false;
        return metric_default;
    };

    tsr::BenchmarkReport report;
    report.dataset = std::filesystem::path(a.dataset).filename().string();
    if (report.dataset.empty())
        report.dataset = std::filesystem::path(a.dataset).parent_path().filename().string();
    report.mode = a.mode;
    report.queries = int(rankings.size());
    report.class_size = class_size;
    report.bulls_eye = tsr::bulls_eye(rankings, index.labels, class_size, inclusion(true));
    report.top_n = tsr::top_n_consistency(rankings, index.labels, 10, inclusion(false));
    report.pr_curve = tsr::precision_recall(rankings, index.labels, class_size, inclusion(true));
    report.fallback_count = fallbacks;
    std::stable_sort(hit_rates.begin(), hit_rates.end(), [](const auto& x, const auto& y) {
        return x.second < y.second || (x.second == y.second && x.first < y.first);
    });
    hit_rates.resize(std::min<std::size_t>(5, hit_rates.size()));
    report.worst_queries = std::move(hit_rates);
    report.query_seconds = query_time;

    const std::string text = tsr::format_report(report);
    std::cout << text;
    std::filesystem::create_directories(a.out);
    const std::filesystem::path dir(a.out);
    write_file(dir / "report.txt", text);
    if (a.metric == "all" || a.metric == "bulls-eye")
        write_file(dir / "bulls_eye.csv", tsr::bulls_eye_csv(report));
    if (a.metric == "all" || a.metric == "topn")
        write_file(dir / "topn.csv", tsr::top_n_csv(report));
    if (a.metric == "all" || a.metric == "pr") write_file(dir / "pr.csv", tsr::pr_csv(report));
    return 0;
}

// ------------------------------------------------------------------ dumps

int run_dump_features(const std::string& index_path, const std::string& out) {
    tsr::RetrievalIndex index = tsr::load_index(index_path);
    std::ostringstream csv;
    csv << "id,turning,ends,t_junctions,cross_junctions,haar_2v,haar_2h,haar_3v,haar_3h,"
           "haar_diag,aspect,circularity,symmetry,solidity\n";
    for (int i = 0; i < index.gallery_size(); ++i) {
        csv << index.ids[i];
        for (double v : index.global_features[i]) csv << "," << fixed(v, 6);
        csv << "\n";
    }
    if (out.empty()) std::cout << csv.str();
    else write_file(out, csv.str());
    return 0;
}

int run_dump_clusters(const std::string& index_path, const std::string& out) {
    tsr::RetrievalIndex index = tsr::load_index(index_path);
    std::vector<char> training(index.gallery_size(), 0);
    for (const auto& [idx, label] : index.clusters.training) training[idx] = 1;
    std::ostringstream csv;
    csv << "id,cluster,is_medoid,is_training\n";
    for (int i = 0; i < index.gallery_size(); ++i) {
        const int c = index.clusters.assignment[i];
        csv << index.ids[i] << "," << c << "," << (index.clusters.medoids[c] == i ? 1 : 0) << ","
            << int(training[i]) << "\n";
    }
    if (out.empty()) std::cout << csv.str();
    else write_file(out, csv.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-stage silhouette retrieval"};
    app.require_subcommand(1);

    ConvertArgs convert_args;
    auto* convert = app.add_subcommand("convert", "batch-convert images to PGM");
    convert->add_option("--dataset", convert_args.dataset, "input directory")->required();
    convert->add_option("--out", convert_args.out, "output directory")->required();
    convert->add_option("--threshold", convert_args.threshold, "binarization threshold");
    convert->add_flag("--strict", convert_args.strict, "fail on the first unreadable file");

    BuildArgs build_args;
    auto* build = app.add_subcommand("build", "build a retrieval index from a dataset directory");
    build->add_option("--dataset", build_args.dataset, "dataset directory")->required();
    build->add_option("--out", build_args.out, "index output path")->required();
    build->add_option("--M", build_args.config.cluster_count, "cluster count")->required();
    build->add_option("--epsilon", build_args.config.epsilon, "relevance threshold");
    build->add_option("--K", build_args.config.knn_count,
                      "neighbor count for the indirect assignment (0 = 1.5N/M)");
    build->add_option("--seed", build_args.config.seed, "master seed");
    build->add_option("--raster", build_args.config.raster, "normalization raster size");
    build->add_option("--n", build_args.config.descriptor.samples, "contour sample points");
    build->add_option("--trees", build_args.config.forest.trees_per_group, "trees per forest group");
    build->add_option("--iters", build_args.config.diffusion_iters, "diffusion iterations");
    build->add_option("--threshold", build_args.config.binarize_threshold,
                      "binarization threshold");
    build->add_option("--threads", build_args.threads, "worker threads (0 = all cores)")
        ->envname("TSR_THREADS");
    build->add_flag("--strict", build_args.strict, "fail on the first bad shape");

    QueryArgs query_args;
    auto* query = app.add_subcommand("query", "rank gallery shapes against a query image");
    query->add_option("index", query_args.index_path, "index file")->required();
    query->add_option("image", query_args.image, "query image")->required();
    query->add_option("--mode", query_args.mode, "tsr | tsr+dp | local-only | local+dp");
    query->add_option("--top", query_args.top, "result count");
    query->add_option("--scatter", query_args.scatter, "write per-cluster cost scatter CSV here");
    query->add_option("--threads", query_args.threads, "worker threads (0 = all cores)")
        ->envname("TSR_THREADS");

    BenchmarkArgs bench_args;
    auto* bench = app.add_subcommand("benchmark", "run retrieval metrics over a labeled dataset");
    bench->add_option("index", bench_args.index_path, "index file")->required();
    bench->add_option("--dataset", bench_args.dataset, "labeled dataset directory")->required();
    bench->add_option("--mode", bench_args.mode, "tsr | tsr+dp | local-only | local+dp");
    bench->add_option("--out", bench_args.out, "report directory");
    bench->add_option("--metric", bench_args.metric, "all | bulls-eye | topn | pr");
    bench->add_option("--self-inclusion", bench_args.self_inclusion,
                      "auto | include | exclude (auto: bulls-eye includes, top-N excludes)");
    bench->add_option("--threads", bench_args.threads, "worker threads (0 = all cores)")
        ->envname("TSR_THREADS");

    std::string dump_index, dump_out;
    auto* dumpf = app.add_subcommand("dump-features", "write per-shape global features as CSV");
    dumpf->add_option("index", dump_index, "index file")->required();
    dumpf->add_option("--out", dump_out, "output file (default stdout)");

    std::string dumpc_index, dumpc_out;
    auto* dumpc = app.add_subcommand("dump-clusters", "write cluster membership as CSV");
    dumpc->add_option("index", dumpc_index, "index file")->required();
    dumpc->add_option("--out", dumpc_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(convert)) return run_convert(convert_args);
        if (app.got_subcommand(build)) return run_build(build_args);
        if (app.got_subcommand(query)) return run_query(query_args);
        if (app.got_subcommand(bench)) return run_benchmark(bench_args);
        if (app.got_subcommand(dumpf)) return run_dump_features(dump_index, dump_out);
        if (app.got_subcommand(dumpc)) return run_dump_clusters(dumpc_index, dumpc_out);
        return 1;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const tsr::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const tsr::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
