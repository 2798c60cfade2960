#include <cdl/metrics.hpp>

#include <set>
#include <sstream>

namespace cdl {

PerClassAccuracy per_class_top1(const std::vector<int>& predicted,
                                const std::vector<int>& truth,
                                const std::vector<int>& registry) {
    if (predicted.size() != truth.size()) {
        std::ostringstream os;
        os << "per_class_top1: " << predicted.size() << " predictions for "
           << truth.size() << " truth labels";
        throw DimensionError(os.str());
    }
    if (truth.empty()) throw ValueError("per_class_top1: no truth labels given");

    const std::set<int> known(registry.begin(), registry.end());
    std::map<int, int> counts;
    std::map<int, int> correct;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!known.count(truth[i])) {
            std::ostringstream os;
            os << "per_class_top1: truth label " << truth[i] << " at position " << i
               << " is not in the class registry";
            throw ValueError(os.str());
        }
        ++counts[truth[i]];
        if (predicted[i] == truth[i]) ++correct[truth[i]];
    }

    PerClassAccuracy result;
    double sum = 0.0;
    for (const auto& [cls, count] : counts) {
        const double acc = static_cast<double>(correct[cls]) / static_cast<double>(count);
        result.per_class[cls] = acc;
        result.class_counts[cls] = count;
        sum += acc;
    }
    result.overall = sum / static_cast<double>(counts.size());
    return result;
}

double harmonic_mean(double ts, double tr) {
    if (!(ts >= 0.0 && ts <= 1.0)) throw ValueError("harmonic_mean: ts must lie in [0, 1]");
    if (!(tr >= 0.0 && tr <= 1.0)) throw ValueError("harmonic_mean: tr must lie in [0, 1]");
    const double sum = ts + tr;
    return sum > 0.0 ? 2.0 * ts * tr / sum : 0.0;
}

}  // namespace cdl
