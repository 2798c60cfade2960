#pragma once

#include <cdl/dataset.hpp>
#include <cdl/solvers.hpp>
#include <cdl/types.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cdl {

struct Hyperparams {
    double lambda = 1.0;  // weight of the semantic term in the coupled code fits
    double alpha = 1.0;   // weight of the unseen-class adaptation loss
    double beta = 1.0;    // weight of the sample-fit term for seen prototypes
    double gamma = 0.01;  // ridge used when encoding test samples

    std::optional<Index> bases;  // dictionary size; defaults to the seen-class count
    int max_iters = 100;
    double rel_tol = 1e-7;       // outer-loop stop on relative loss decrease
    double ridge_eps = kDefaultRidgeEps;

    void validate() const;
    Index bases_or(Index seen_classes) const { return bases.value_or(seen_classes); }
};

enum class Variant {
    Full,                         // "CDL": full alternating optimization
    InitOnly,                     // "NA": stop after initialization
    NoAdaptation,                 // "CDL-Ad": unseen-class loss dropped (alpha = 0)
    FixedPrototypes,              // "CDL-Pr": seen prototypes pinned to class means
    NoAdaptationFixedPrototypes,  // "CDL-Ad-Pr": both restrictions
};

Variant variant_from_name(const std::string& name);
const char* variant_name(Variant variant);
std::vector<Variant> all_variants();

struct LossParts {
    double total = 0.0;
    double seen_align = 0.0;      // seen prototype/semantic reconstruction
    double unseen_align = 0.0;    // unseen counterpart (adaptation)
    double prototype_fit = 0.0;   // sample-to-prototype fit
};

struct TrainingTrace {
    struct Iteration {
        // Total loss after each of the six update steps of one cycle; steps a
        // variant skips repeat the previous value.
        std::array<double, 6> step_total{};
        LossParts end;
    };

    LossParts initial;  // after initialization
    std::vector<Iteration> iterations;
    bool converged = false;

    Index iterations_run() const { return static_cast<Index>(iterations.size()); }
};

// Learned state. Dimensions: d visual, m semantic, K seen classes, L unseen
// classes, n_b dictionary atoms.
struct CdlModel {
    Matrix seen_prototypes;    // d x K
    Matrix unseen_prototypes;  // d x L
    Matrix visual_dict;        // d x n_b, columns in the unit ball
    Matrix semantic_dict;      // m x n_b, columns in the unit ball
    Matrix seen_codes;         // n_b x K
    Matrix unseen_codes;       // n_b x L
    Matrix seen_semantics;     // m x K (copy of the dataset semantics)
    Matrix unseen_semantics;   // m x L

    Hyperparams hp;            // effective values used in training
    Variant variant = Variant::Full;
    bool normalized_features = false;  // features were column-normalized before fitting
    TrainingTrace trace;

    bool fitted() const { return visual_dict.size() > 0; }
    void check_fitted() const {
        if (!fitted()) throw ValueError("model is not fitted");
    }
    /// Structural consistency of all stored matrices; throws on violation.
    void check_consistent() const;
};

/// Loss of the full objective at the model's current state:
///   seen_align    = ||P_s - D1 Z_s||^2 + lambda ||C_s - D2 Z_s||^2
///   unseen_align  = ||P_u - D1 Z_u||^2 + lambda ||C_u - D2 Z_u||^2
///   prototype_fit = ||X - P_s H||^2
///   total         = seen_align + alpha * unseen_align + beta * prototype_fit
LossParts loss(const CdlModel& model, const Matrix& samples, const Matrix& indicator);

/// K x n indicator with H(k, i) = 1 iff sample i has label k.
Matrix one_hot(const std::vector<int>& labels, Index classes);

/// Per-class mean of the sample columns, one column per class in registry
/// order. Every class must own at least one sample.
Matrix class_means(const Matrix& samples, const std::vector<int>& labels, Index classes);

/// Builds the starting model: unseen codes from seen/unseen semantic cosine
/// similarities (dictionary-sized alternative draw when bases != K), then the
/// semantic dictionary, seen codes, seen prototypes (class means), visual
/// dictionary, and unseen prototypes, each from the corresponding solver.
CdlModel initialize(const Dataset& data, const Hyperparams& hp, std::uint64_t seed);

/// One optimization cycle over the six block updates, honoring the model's
/// variant. Returns the total loss after each step and throws InternalError
/// if any step increases the total loss beyond rounding slack.
std::array<double, 6> run_cycle(CdlModel& model, const Matrix& samples,
                                const Matrix& indicator);

/// initialize + alternating cycles until the relative loss decrease drops
/// below rel_tol or max_iters is reached. Deterministic for a fixed seed.
CdlModel fit(const Dataset& data, const Hyperparams& hp, Variant variant,
             std::uint64_t seed);

}  // namespace cdl
