#pragma once

#include <cdl/matrix_io.hpp>
#include <cdl/types.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace cdl {

// A zero-shot recognition dataset: labeled visual features for the seen
// classes, per-class semantic vectors for both seen and unseen classes, and
// optional test splits. Matrices store one sample or one class per column.
struct Dataset {
    Matrix train_features;          // d x n_s
    std::vector<int> train_labels;  // seen-class ids, one per training column
    Matrix seen_semantics;          // m x K
    Matrix unseen_semantics;        // m x L

    std::vector<std::string> seen_class_names;    // K entries
    std::vector<std::string> unseen_class_names;  // L entries

    // Optional test splits (empty when absent).
    Matrix test_unseen_features;          // d x n_tu
    std::vector<int> test_unseen_labels;  // unseen-class ids
    Matrix test_seen_features;            // d x n_ts
    std::vector<int> test_seen_labels;    // seen-class ids

    // Seen classes held out as pseudo-unseen during hyperparameter search.
    std::vector<std::string> validation_class_names;

    Index feature_dim() const { return train_features.rows(); }
    Index semantic_dim() const { return seen_semantics.rows(); }
    Index seen_classes() const { return static_cast<Index>(seen_class_names.size()); }
    Index unseen_classes() const { return static_cast<Index>(unseen_class_names.size()); }
    Index train_samples() const { return train_features.cols(); }
    bool has_unseen_test() const { return test_unseen_features.size() > 0; }
    bool has_seen_test() const { return test_seen_features.size() > 0; }

    /// Re-checks every structural invariant; throws DataError. Idempotent.
    void validate() const;
};

// Manifest format: "key = value" lines, '#' comments, paths relative to the
// manifest file. Keys:
//   features, labels, semantics_seen, semantics_unseen,
//   seen_classes, unseen_classes                    (required)
//   test_unseen_features, test_unseen_labels        (optional, paired)
//   test_seen_features, test_seen_labels            (optional, paired)
//   validation_classes                              (optional)
Dataset load_dataset(const std::filesystem::path& manifest);

/// Writes the manifest plus all referenced files into the manifest's
/// directory. Matrix files use the requested format.
void save_dataset(const Dataset& data, const std::filesystem::path& manifest,
                  MatrixFormat format = MatrixFormat::Text);

/// Scales every feature column to unit Euclidean norm (zero columns kept).
void normalize_feature_columns(Matrix& features);

/// Derives the hyperparameter-search split: validation classes become the
/// pseudo-unseen set (with their training samples as the unseen test split)
/// and the remaining seen classes form the new training set.
Dataset make_validation_split(const Dataset& data);

}  // namespace cdl
