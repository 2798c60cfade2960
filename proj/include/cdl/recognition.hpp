#pragma once

#include <cdl/model.hpp>
#include <cdl/types.hpp>

#include <string>
#include <vector>

namespace cdl {

enum class Space { Visual, Aligned, Semantic };

/// Non-empty subset of the three recognition spaces, canonical order v, a, s.
class SpaceSet {
public:
    SpaceSet(std::initializer_list<Space> spaces);

    /// Accepts forms like "v", "va", "v+a", "vas" (case-insensitive); rejects
    /// empty sets, duplicates, and unknown letters.
    static SpaceSet parse(const std::string& text);

    /// All 7 non-empty subsets: v, a, s, va, vs, as, vas.
    static std::vector<SpaceSet> all_subsets();

    bool contains(Space space) const;
    std::vector<Space> spaces() const;  // canonical order
    std::string name() const;           // "va" etc.

    friend bool operator==(const SpaceSet&, const SpaceSet&) = default;

private:
    SpaceSet() = default;
    bool visual_ = false;
    bool aligned_ = false;
    bool semantic_ = false;
};

enum class Candidates { Unseen, Seen, Both };

/// Rows are test samples, columns are candidate classes. class_ids maps each
/// column to a class id of the evaluation registry: unseen-only and seen-only
/// registries use their own 0-based ids; for Candidates::Both the seen classes
/// keep 0..K-1 and unseen class l becomes K + l.
struct SimilarityMatrix {
    Matrix scores;
    std::vector<int> class_ids;
};

/// a.b / (|a||b|); 0 when either norm is 0.
double cosine_similarity(const Vector& a, const Vector& b);

/// Cosine similarities of the test samples to the class prototypes of the
/// requested space. Visual compares the features themselves; aligned encodes
/// the features through the visual dictionary with the model's gamma ridge;
/// semantic maps those codes through the semantic dictionary.
SimilarityMatrix similarities(const CdlModel& model, const Matrix& test_features,
                              Space space, Candidates candidates);

/// Entrywise sum; shapes and class registries must match.
SimilarityMatrix fuse(const std::vector<SimilarityMatrix>& sims);

/// Argmax class per row of the fused matrix; ties go to the lowest class
/// index in registry order.
std::vector<int> argmax_classes(const SimilarityMatrix& sims);

/// Nearest-prototype prediction over the fused similarities of the selected
/// spaces. Returns one class id per test column.
std::vector<int> predict(const CdlModel& model, const Matrix& test_features,
                         const SpaceSet& spaces, Candidates candidates);

}  // namespace cdl
