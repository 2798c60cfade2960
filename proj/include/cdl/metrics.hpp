#pragma once

#include <cdl/types.hpp>

#include <map>
#include <string>
#include <vector>

namespace cdl {

struct PerClassAccuracy {
    double overall = 0.0;             // unweighted mean over classes present in truth
    std::map<int, double> per_class;  // class id -> top-1 accuracy
    std::map<int, int> class_counts;  // class id -> sample count
};

/// Average per-class top-1 accuracy. Classes in the registry that never occur
/// in `truth` are excluded from the mean.
PerClassAccuracy per_class_top1(const std::vector<int>& predicted,
                                const std::vector<int>& truth,
                                const std::vector<int>& registry);

/// 2 ts tr / (ts + tr); 0 when both are 0. Inputs must lie in [0, 1].
double harmonic_mean(double ts, double tr);

// Evaluation summary for one run. For "zsl" every entry carries the unseen
// accuracy; for "gzsl" it carries the unseen (ts) and seen (tr) accuracies and
// their harmonic mean over the joint candidate set.
struct EvalReport {
    struct Entry {
        std::string spaces;  // "v", "va", ...
        PerClassAccuracy accuracy;  // zsl
        PerClassAccuracy unseen;    // gzsl ts
        PerClassAccuracy seen;      // gzsl tr
        double hmean = 0.0;         // gzsl H
    };

    std::string mode;  // "zsl" | "gzsl"
    std::vector<Entry> entries;
    std::vector<std::string> class_names;  // evaluation registry, index = class id
    Index unseen_test_count = 0;
    Index seen_test_count = 0;
};

}  // namespace cdl
