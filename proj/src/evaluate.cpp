#include <cdl/evaluate.hpp>

#include <array>
#include <map>

namespace cdl {

namespace {

// Shared per-space similarity cache so each combination fuses precomputed
// matrices instead of re-encoding the test set.
class SimilarityCache {
public:
    SimilarityCache(const CdlModel& model, const Matrix& features, Candidates candidates)
        : model_(model), features_(features), candidates_(candidates) {}

    const SimilarityMatrix& get(Space space) {
        auto it = cache_.find(space);
        if (it == cache_.end()) {
            it = cache_.emplace(space, similarities(model_, features_, space, candidates_)).first;
        }
        return it->second;
    }

    std::vector<int> predict(const SpaceSet& combo) {
        std::vector<SimilarityMatrix> parts;
        for (Space space : combo.spaces()) parts.push_back(get(space));
        return argmax_classes(fuse(parts));
    }

private:
    const CdlModel& model_;
    const Matrix& features_;
    Candidates candidates_;
    std::map<Space, SimilarityMatrix> cache_;
};

}  // namespace

EvalReport evaluate_zsl(const CdlModel& model, const Matrix& test_features,
                        const std::vector<int>& labels,
                        const std::vector<SpaceSet>& combos,
                        const std::vector<std::string>& unseen_names) {
    if (combos.empty()) throw ValueError("evaluate_zsl: no space combinations requested");
    model.check_fitted();

    std::vector<int> registry;
    for (Index l = 0; l < model.unseen_prototypes.cols(); ++l) {
        registry.push_back(static_cast<int>(l));
    }

    EvalReport report;
    report.mode = "zsl";
    report.class_names = unseen_names;
    report.unseen_test_count = test_features.cols();

    SimilarityCache cache(model, test_features, Candidates::Unseen);
    for (const auto& combo : combos) {
        EvalReport::Entry entry;
        entry.spaces = combo.name();
        entry.accuracy = per_class_top1(cache.predict(combo), labels, registry);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

EvalReport evaluate_gzsl(const CdlModel& model,
                         const Matrix& unseen_features, const std::vector<int>& unseen_labels,
                         const Matrix& seen_features, const std::vector<int>& seen_labels,
                         const std::vector<SpaceSet>& combos,
                         const std::vector<std::string>& seen_names,
                         const std::vector<std::string>& unseen_names) {
    if (combos.empty()) throw ValueError("evaluate_gzsl: no space combinations requested");
    model.check_fitted();

    const Index seen = model.seen_prototypes.cols();
    const Index unseen = model.unseen_prototypes.cols();
    std::vector<int> registry;
    for (Index k = 0; k < seen + unseen; ++k) registry.push_back(static_cast<int>(k));

    // Unseen classes sit after the seen registry in the joint candidate set.
    std::vector<int> shifted_unseen = unseen_labels;
    for (int& label : shifted_unseen) label += static_cast<int>(seen);

    EvalReport report;
    report.mode = "gzsl";
    report.class_names = seen_names;
    report.class_names.insert(report.class_names.end(), unseen_names.begin(),
                              unseen_names.end());
    report.unseen_test_count = unseen_features.cols();
    report.seen_test_count = seen_features.cols();

    SimilarityCache unseen_cache(model, unseen_features, Candidates::Both);
    SimilarityCache seen_cache(model, seen_features, Candidates::Both);
    for (const auto& combo : combos) {
        EvalReport::Entry entry;
        entry.spaces = combo.name();
        entry.unseen = per_class_top1(unseen_cache.predict(combo), shifted_unseen, registry);
        entry.seen = per_class_top1(seen_cache.predict(combo), seen_labels, registry);
        entry.hmean = harmonic_mean(entry.unseen.overall, entry.seen.overall);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace cdl
