#include "tsr/pipeline.hpp"

#include "tsr/diffusion.hpp"
#include "tsr/errors.hpp"
#include "tsr/parallel.hpp"
#include "tsr/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tsr {

QueryMode parse_query_mode(const std::string& name) {
    if (name == "tsr") return QueryMode::Tsr;
    if (name == "tsr+dp") return QueryMode::TsrDp;
    if (name == "local-only") return QueryMode::LocalOnly;
    if (name == "local+dp") return QueryMode::LocalDp;
    throw UsageError("unknown query mode '" + name +
                     "' (expected tsr, tsr+dp, local-only or local+dp)");
}

std::string to_string(QueryMode mode) {
    switch (mode) {
    case QueryMode::Tsr: return "tsr";
    case QueryMode::TsrDp: return "tsr+dp";
    case QueryMode::LocalOnly: return "local-only";
    case QueryMode::LocalDp: return "local+dp";
    }
    return "tsr";
}

RelevantClusterSet fallback(RelevantClusterSet set) {
    if (!set.clusters.empty() || set.cost.empty()) return set;
    int best = 0;
    for (int c = 1; c < int(set.cost.size()); ++c)
        if (set.cost[c] < set.cost[best]) best = c;
    set.clusters.push_back(best);
    set.used_fallback = true;
    return set;
}

namespace {

struct ShapeArtifacts {
    bool ok = false;
    std::string error;
    SkeletonFeature fs;
    WaveletFeature fw;
    GeometricFeature fg;
    LocalDescriptor desc;
};

ShapeArtifacts process_shape(const BinaryShape& shape, const BuildConfig& config) {
    ShapeArtifacts a;
    const BinaryShape filled = fill_holes(shape);
    const NormalizedShape norm = normalize(filled, config.raster);
    const Contour contour = extract_contour(norm);
    const Contour smoothed = smooth_contour(contour, config.descriptor.smooth_sigma);

    const RawFeatures raw = extract_raw_features(norm, smoothed, config.prune_branch_frac,
                                                 config.turn_angle_deg);
    a.fs = raw.skeleton;
    a.fw = raw.wavelet;
    a.fg = raw.geometric;

    const ContourSamples samples = sample_contour(smoothed, config.descriptor.samples);
    const InnerGeometry geom = inner_distances(norm, samples);
    a.desc = build_descriptor(geom, config.descriptor);
    a.ok = true;
    return a;
}

std::vector<std::pair<int, double>> rank_ascending(const std::vector<int>& candidates,
                                                   const std::vector<double>& distance) {
    std::vector<int> order(candidates);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return distance[a] < distance[b] || (distance[a] == distance[b] && a < b);
    });
    std::vector<std::pair<int, double>> out;
    out.reserve(order.size());
    for (int g : order) out.emplace_back(g, 1.0 / (1.0 + distance[g]));
    return out;
}

std::vector<std::pair<int, double>> rank_descending(const std::vector<int>& candidates,
                                                    const std::vector<double>& similarity) {
    std::vector<int> order(candidates);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return similarity[a] > similarity[b] || (similarity[a] == similarity[b] && a < b);
    });
    std::vector<std::pair<int, double>> out;
    out.reserve(order.size());
    for (int g : order) out.emplace_back(g, similarity[g]);
    return out;
}

// gallery distances extended with the query as the last row/column
Matrix extended_distances(const Matrix& dist, const std::vector<double>& qd) {
    const int n = dist.rows;
    Matrix ext(n + 1, n + 1, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ext(i, j) = dist(i, j);
    for (int j = 0; j < n; ++j) {
        ext(n, j) = qd[j];
        ext(j, n) = qd[j];
    }
    return ext;
}

} // namespace

RetrievalIndex build_index(const Gallery& gallery, BuildConfig config, bool strict,
                           BuildReport* report) {
    const int total = int(gallery.shapes.size());
    if (total == 0) throw EmptyGallery("gallery '" + gallery.source + "' has no shapes");
    if (config.cluster_count < 1)
        throw InvalidM("cluster count must be at least 1, got " +
                       std::to_string(config.cluster_count));

    std::vector<ShapeArtifacts> artifacts(total);
    parallel_for(std::size_t(total), [&](std::size_t i) {
        try {
            artifacts[i] = process_shape(gallery.shapes[i], config);
        } catch (const Error& e) {
            artifacts[i].ok = false;
            artifacts[i].error = e.what();
        }
    });

    RetrievalIndex index;
    std::vector<SkeletonFeature> skeletons;
    std::vector<WaveletFeature> wavelets;
    std::vector<GeometricFeature> geometrics;
    for (int i = 0; i < total; ++i) {
        if (!artifacts[i].ok) {
            if (strict)
                throw DataError(gallery.shapes[i].id + ": " + artifacts[i].error);
            if (report) report->failures.push_back({gallery.shapes[i].id, artifacts[i].error});
            continue;
        }
        index.ids.push_back(gallery.shapes[i].id);
        index.labels.push_back(gallery.shapes[i].label);
        skeletons.push_back(artifacts[i].fs);
        wavelets.push_back(artifacts[i].fw);
        geometrics.push_back(artifacts[i].fg);
        index.descriptors.push_back(std::move(artifacts[i].desc));
    }
    const int n = index.gallery_size();
    if (n == 0) throw EmptyGallery("no shape in '" + gallery.source + "' survived preprocessing");
    if (config.cluster_count > n)
        throw InvalidM("cluster count " + std::to_string(config.cluster_count) +
                       " exceeds usable gallery size " + std::to_string(n));
    if (config.knn_count <= 0)
        config.knn_count =
            std::max(1, int(std::lround(1.5 * double(n) / config.cluster_count)));
    index.config = config;

    index.scaling = compute_scaling(skeletons);
    index.global_features.resize(n);
    for (int i = 0; i < n; ++i)
        index.global_features[i] =
            global_feature(skeletons[i], wavelets[i], geometrics[i], index.scaling);

    index.distances = distance_matrix(index.descriptors, config.descriptor);
    index.clusters = spectral_cluster(index.distances, config.cluster_count, config.seed);

    std::vector<GlobalFeature> train_x;
    std::vector<int> train_y;
    for (const auto& [shape_idx, label] : index.clusters.training) {
        train_x.push_back(index.global_features[shape_idx]);
        train_y.push_back(label);
    }
    index.forest = train_forest(train_x, train_y, config.cluster_count, config.forest, config.seed);

    index.relevance = Matrix(n, config.cluster_count, 0.0);
    parallel_for(std::size_t(n), [&](std::size_t i) {
        const std::vector<double> p = predict_prf(index.forest, index.global_features[i]);
        for (int c = 0; c < config.cluster_count; ++c) index.relevance(int(i), c) = p[c];
    });
    return index;
}

QueryResult query(const RetrievalIndex& index, const BinaryShape& shape, QueryMode mode) {
    const int n = index.gallery_size();
    if (n == 0) throw EmptyGallery("index has no gallery shapes");
    if (int(index.descriptors.size()) != n || index.distances.rows != n ||
        int(index.clusters.assignment.size()) != n || index.relevance.rows != n)
        throw IncompatibleIndex("index sections disagree on the gallery size");

    const BuildConfig& cfg = index.config;
    QueryResult result;
    result.query_id = shape.id;
    result.mode = mode;

    // query-side preprocessing mirrors the build
    const BinaryShape filled = fill_holes(shape);
    const NormalizedShape norm = normalize(filled, cfg.raster);
    const Contour contour = extract_contour(norm);
    const Contour smoothed = smooth_contour(contour, cfg.descriptor.smooth_sigma);
    const ContourSamples samples = sample_contour(smoothed, cfg.descriptor.samples);
    const InnerGeometry geom = inner_distances(norm, samples);
    const LocalDescriptor qdesc = build_descriptor(geom, cfg.descriptor);

    const std::vector<double> qd = distances_to_gallery(qdesc, index.descriptors, cfg.descriptor);

    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);

    if (mode == QueryMode::LocalOnly) {
        result.ranking = rank_ascending(all, qd);
        result.included_count = n;
        return result;
    }
    if (mode == QueryMode::LocalDp) {
        const Matrix ext = extended_distances(index.distances, qd);
        const Matrix aff = affinity_from_distance(ext, cfg.kernel_k);
        const Matrix w = lcdp(aff, cfg.knn_w, cfg.diffusion_iters);
        std::vector<double> sim(n);
        for (int j = 0; j < n; ++j) sim[j] = w(n, j);
        result.ranking = rank_descending(all, sim);
        result.included_count = n;
        return result;
    }

    // Stage I: irrelevant cluster filtering
    const RawFeatures raw =
        extract_raw_features(norm, smoothed, cfg.prune_branch_frac, cfg.turn_angle_deg);
    const GlobalFeature qfeat = global_feature(raw.skeleton, raw.wavelet, raw.geometric,
                                               index.scaling);
    result.p_rf = predict_prf(index.forest, qfeat);
    int k = cfg.knn_count > 0
                ? cfg.knn_count
                : std::max(1, int(std::lround(1.5 * double(n) / cfg.cluster_count)));
    result.p_knn = pknn_from_distances(qd, index.relevance, k);
    RelevantClusterSet set =
        fallback(relevant_clusters(result.p_rf, result.p_knn, cfg.epsilon, cfg.prob_floor));
    result.relevant_clusters = set.clusters;
    result.cluster_cost = set.cost;
    result.used_fallback = set.used_fallback;

    std::vector<bool> relevant(cfg.cluster_count, false);
    for (int c : set.clusters) relevant[c] = true;
    std::vector<int> members, excluded;
    for (int i = 0; i < n; ++i)
        (relevant[index.clusters.assignment[i]] ? members : excluded).push_back(i);

    // Stage II: matching and ranking inside the relevant clusters
    if (mode == QueryMode::Tsr) {
        result.ranking = rank_ascending(members, qd);
    } else {
        const Matrix ext = extended_distances(index.distances, qd);
        const Matrix aff = affinity_from_distance(ext, cfg.kernel_k);
        std::vector<int> subset(members);
        subset.push_back(n); // the query rides along as the last element
        const Matrix w = constrained_lcdp(aff, subset, cfg.knn_w, cfg.diffusion_iters);
        const int qpos = int(subset.size()) - 1;
        std::vector<double> sim(n, 0.0);
        for (int j = 0; j < qpos; ++j) sim[subset[j]] = w(qpos, j);
        result.ranking = rank_descending(members, sim);
    }
    result.included_count = int(result.ranking.size());
    // excluded shapes trail the ranking (raw local distance order) so
    // fixed-window metrics always have enough entries
    const auto tail = rank_ascending(excluded, qd);
    result.ranking.insert(result.ranking.end(), tail.begin(), tail.end());
    return result;
}

} // namespace tsr
