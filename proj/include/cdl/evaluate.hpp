#pragma once

#include <cdl/metrics.hpp>
#include <cdl/model.hpp>
#include <cdl/recognition.hpp>

#include <string>
#include <vector>

namespace cdl {

/// Zero-shot evaluation: candidates are the unseen classes, one report entry
/// per requested space combination. `unseen_names` indexes the class ids.
EvalReport evaluate_zsl(const CdlModel& model, const Matrix& test_features,
                        const std::vector<int>& labels,
                        const std::vector<SpaceSet>& combos,
                        const std::vector<std::string>& unseen_names);

/// Generalized zero-shot evaluation over the joint candidate set: unseen test
/// labels are shifted past the seen registry, ts/tr are the per-class
/// accuracies of the two test splits, H their harmonic mean.
EvalReport evaluate_gzsl(const CdlModel& model,
                         const Matrix& unseen_features, const std::vector<int>& unseen_labels,
                         const Matrix& seen_features, const std::vector<int>& seen_labels,
                         const std::vector<SpaceSet>& combos,
                         const std::vector<std::string>& seen_names,
                         const std::vector<std::string>& unseen_names);

}  // namespace cdl
