#include <cdl/recognition.hpp>

#include <cdl/solvers.hpp>

#include <cctype>
#include <sstream>

namespace cdl {

namespace {

Matrix normalized_columns(const Matrix& m) {
    Matrix out = m;
    for (Index j = 0; j < out.cols(); ++j) {
        const double norm = out.col(j).norm();
        if (norm > 0.0) {
            out.col(j) /= norm;
        } else {
            out.col(j).setZero();
        }
    }
    return out;
}

// queries and prototypes are column collections in the same space.
Matrix cosine_scores(const Matrix& queries, const Matrix& prototypes) {
    return normalized_columns(queries).transpose() * normalized_columns(prototypes);
}

Matrix stack_columns(const Matrix& first, const Matrix& second) {
    Matrix out(first.rows(), first.cols() + second.cols());
    out.leftCols(first.cols()) = first;
    out.rightCols(second.cols()) = second;
    return out;
}

std::vector<int> registry_for(Candidates candidates, Index seen, Index unseen) {
    std::vector<int> ids;
    switch (candidates) {
        case Candidates::Unseen:
            for (Index l = 0; l < unseen; ++l) ids.push_back(static_cast<int>(l));
            break;
        case Candidates::Seen:
            for (Index k = 0; k < seen; ++k) ids.push_back(static_cast<int>(k));
            break;
        case Candidates::Both:
            for (Index k = 0; k < seen + unseen; ++k) ids.push_back(static_cast<int>(k));
            break;
    }
    return ids;
}

}  // namespace

SpaceSet::SpaceSet(std::initializer_list<Space> spaces) {
    if (spaces.size() == 0) throw ValueError("space set must not be empty");
    for (Space s : spaces) {
        bool& flag = s == Space::Visual ? visual_ : s == Space::Aligned ? aligned_ : semantic_;
        if (flag) throw ValueError("space set contains a duplicate space");
        flag = true;
    }
}

SpaceSet SpaceSet::parse(const std::string& text) {
    SpaceSet set;
    for (char raw : text) {
        const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
        if (c == '+' || c == ' ' || c == ',') continue;
        bool* flag = nullptr;
        if (c == 'v') flag = &set.visual_;
        else if (c == 'a') flag = &set.aligned_;
        else if (c == 's') flag = &set.semantic_;
        if (flag == nullptr) {
            throw ValueError("unknown space '" + std::string(1, raw) + "' in '" + text +
                             "' (expected letters from v, a, s)");
        }
        if (*flag) throw ValueError("duplicate space in '" + text + "'");
        *flag = true;
    }
    if (!set.visual_ && !set.aligned_ && !set.semantic_) {
        throw ValueError("space set '" + text + "' is empty");
    }
    return set;
}

std::vector<SpaceSet> SpaceSet::all_subsets() {
    return {SpaceSet{Space::Visual},
            SpaceSet{Space::Aligned},
            SpaceSet{Space::Semantic},
            SpaceSet{Space::Visual, Space::Aligned},
            SpaceSet{Space::Visual, Space::Semantic},
            SpaceSet{Space::Aligned, Space::Semantic},
            SpaceSet{Space::Visual, Space::Aligned, Space::Semantic}};
}

bool SpaceSet::contains(Space space) const {
    switch (space) {
        case Space::Visual: return visual_;
        case Space::Aligned: return aligned_;
        case Space::Semantic: return semantic_;
    }
    return false;
}

std::vector<Space> SpaceSet::spaces() const {
    std::vector<Space> out;
    if (visual_) out.push_back(Space::Visual);
    if (aligned_) out.push_back(Space::Aligned);
    if (semantic_) out.push_back(Space::Semantic);
    return out;
}

std::string SpaceSet::name() const {
    std::string out;
    if (visual_) out += 'v';
    if (aligned_) out += 'a';
    if (semantic_) out += 's';
    return out;
}

double cosine_similarity(const Vector& a, const Vector& b) {
    detail::ensure_same(a.size(), b.size(), "first vector length", "second vector length",
                        "cosine_similarity");
    const double denom = a.norm() * b.norm();
    return denom > 0.0 ? a.dot(b) / denom : 0.0;
}

SimilarityMatrix similarities(const CdlModel& model, const Matrix& test_features,
                              Space space, Candidates candidates) {
    model.check_fitted();
    detail::ensure_nonempty(test_features, "test_features", "similarities");
    detail::ensure_finite(test_features, "test_features", "similarities");
    detail::ensure_same(test_features.rows(), model.visual_dict.rows(),
                        "test feature rows", "visual dictionary rows", "similarities");

    const Index seen = model.seen_prototypes.cols();
    const Index unseen = model.unseen_prototypes.cols();

    const auto pick = [&](const Matrix& seen_protos, const Matrix& unseen_protos) {
        switch (candidates) {
            case Candidates::Unseen: return unseen_protos;
            case Candidates::Seen: return seen_protos;
            case Candidates::Both: return stack_columns(seen_protos, unseen_protos);
        }
        throw ValueError("similarities: invalid candidate set");
    };

    SimilarityMatrix out;
    out.class_ids = registry_for(candidates, seen, unseen);
    switch (space) {
        case Space::Visual:
            out.scores = cosine_scores(
                test_features, pick(model.seen_prototypes, model.unseen_prototypes));
            break;
        case Space::Aligned: {
            const Matrix codes = ridge_encode(model.visual_dict, test_features, model.hp.gamma);
            out.scores = cosine_scores(codes, pick(model.seen_codes, model.unseen_codes));
            break;
        }
        case Space::Semantic: {
            const Matrix codes = ridge_encode(model.visual_dict, test_features, model.hp.gamma);
            const Matrix semantic_queries = model.semantic_dict * codes;
            out.scores = cosine_scores(semantic_queries,
                                       pick(model.seen_semantics, model.unseen_semantics));
            break;
        }
    }
    return out;
}

SimilarityMatrix fuse(const std::vector<SimilarityMatrix>& sims) {
    if (sims.empty()) throw ValueError("fuse: no similarity matrices given");
    SimilarityMatrix out = sims.front();
    for (std::size_t i = 1; i < sims.size(); ++i) {
        const auto& s = sims[i];
        detail::ensure_same(s.scores.rows(), out.scores.rows(), "sample rows",
                            "first matrix sample rows", "fuse");
        detail::ensure_same(s.scores.cols(), out.scores.cols(), "class columns",
                            "first matrix class columns", "fuse");
        if (s.class_ids != out.class_ids) {
            std::ostringstream os;
            os << "fuse: matrix " << i << " has a different class registry";
            throw ValueError(os.str());
        }
        out.scores += s.scores;
    }
    return out;
}

std::vector<int> argmax_classes(const SimilarityMatrix& sims) {
    if (sims.scores.cols() != static_cast<Index>(sims.class_ids.size())) {
        throw DimensionError("argmax_classes: registry size does not match score columns");
    }
    std::vector<int> predictions(static_cast<std::size_t>(sims.scores.rows()));
    for (Index i = 0; i < sims.scores.rows(); ++i) {
        Index best = 0;
        double best_score = sims.scores(i, 0);
        for (Index j = 1; j < sims.scores.cols(); ++j) {
            if (sims.scores(i, j) > best_score) {  // ties keep the lower index
                best_score = sims.scores(i, j);
                best = j;
            }
        }
        predictions[static_cast<std::size_t>(i)] = sims.class_ids[static_cast<std::size_t>(best)];
    }
    return predictions;
}

std::vector<int> predict(const CdlModel& model, const Matrix& test_features,
                         const SpaceSet& spaces, Candidates candidates) {
    std::vector<SimilarityMatrix> sims;
    for (Space space : spaces.spaces()) {
        sims.push_back(similarities(model, test_features, space, candidates));
    }
    return argmax_classes(fuse(sims));
}

}  // namespace cdl
