#pragma once

#include <cdl/dataset.hpp>
#include <cdl/types.hpp>

#include <cstdint>

namespace cdl {

// Synthetic recovery instance with known ground truth. Semantics are exact
// dictionary reconstructions (C = D2* Z*) and every sample is its class
// prototype column plus isotropic Gaussian noise of the stated level, so a
// perfect fit exists at noise 0.
struct PlantedInstance {
    Matrix visual_dict;        // d x K, unit-norm columns
    Matrix semantic_dict;      // m x K, unit-norm columns
    Matrix seen_codes;         // K x K, identity plus jitter
    Matrix unseen_codes;       // K x L, distinct one-hot columns plus jitter
    Matrix seen_prototypes;    // d x K
    Matrix unseen_prototypes;  // d x L
    Dataset dataset;           // with train, test-unseen, and test-seen splits
    double noise = 0.0;
};

struct PlantedParams {
    Index feature_dim = 8;
    Index semantic_dim = 6;
    Index seen_classes = 5;
    Index unseen_classes = 3;   // must not exceed seen_classes
    Index samples_per_class = 20;
    double noise = 0.0;
    double code_jitter = 0.1;   // off-pattern code mass
    Index unseen_mixing = 1;    // atoms per unseen class; > 1 puts unseen
                                // classes between seen ones (domain shift)
    std::uint64_t seed = 0;
};

/// Deterministic in `seed`.
PlantedInstance generate_planted(const PlantedParams& params);

}  // namespace cdl
