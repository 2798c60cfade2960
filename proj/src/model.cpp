#include <cdl/model.hpp>

#include <cdl/rng.hpp>

#include <cmath>
#include <sstream>

namespace cdl {

namespace {

// Rounding slack for the per-step monotonicity guard.
double monotone_slack(double reference) { return 1e-8 * reference + 1e-12; }

bool adapts_unseen(Variant v) {
    return v == Variant::Full || v == Variant::FixedPrototypes;
}

bool prototypes_fixed(Variant v) {
    return v == Variant::FixedPrototypes || v == Variant::NoAdaptationFixedPrototypes;
}

Hyperparams effective_hyperparams(const Hyperparams& hp, Variant variant) {
    Hyperparams eff = hp;
    if (!adapts_unseen(variant) && variant != Variant::InitOnly) eff.alpha = 0.0;
    return eff;
}

}  // namespace

void Hyperparams::validate() const {
    if (lambda < 0.0) throw ValueError("hyperparams: lambda must be >= 0");
    if (alpha < 0.0) throw ValueError("hyperparams: alpha must be >= 0");
    if (beta < 0.0) throw ValueError("hyperparams: beta must be >= 0");
    if (!(gamma > 0.0)) throw ValueError("hyperparams: gamma must be > 0");
    if (bases && *bases < 1) throw ValueError("hyperparams: bases must be >= 1");
    if (max_iters < 1) throw ValueError("hyperparams: max_iters must be >= 1");
    if (rel_tol < 0.0) throw ValueError("hyperparams: rel_tol must be >= 0");
    if (ridge_eps < 0.0) throw ValueError("hyperparams: ridge_eps must be >= 0");
}

Variant variant_from_name(const std::string& name) {
    if (name == "CDL") return Variant::Full;
    if (name == "NA") return Variant::InitOnly;
    if (name == "CDL-Ad") return Variant::NoAdaptation;
    if (name == "CDL-Pr") return Variant::FixedPrototypes;
    if (name == "CDL-Ad-Pr") return Variant::NoAdaptationFixedPrototypes;
    throw ValueError("unknown variant '" + name +
                     "' (expected CDL, NA, CDL-Ad, CDL-Pr, or CDL-Ad-Pr)");
}

const char* variant_name(Variant variant) {
    switch (variant) {
        case Variant::Full: return "CDL";
        case Variant::InitOnly: return "NA";
        case Variant::NoAdaptation: return "CDL-Ad";
        case Variant::FixedPrototypes: return "CDL-Pr";
        case Variant::NoAdaptationFixedPrototypes: return "CDL-Ad-Pr";
    }
    throw ValueError("invalid variant value");
}

std::vector<Variant> all_variants() {
    return {Variant::Full, Variant::InitOnly, Variant::NoAdaptation,
            Variant::FixedPrototypes, Variant::NoAdaptationFixedPrototypes};
}

void CdlModel::check_consistent() const {
    check_fitted();
    const std::string ctx = "model";
    detail::ensure_same(seen_prototypes.rows(), visual_dict.rows(),
                        "seen prototype rows", "visual dictionary rows", ctx);
    detail::ensure_same(unseen_prototypes.rows(), visual_dict.rows(),
                        "unseen prototype rows", "visual dictionary rows", ctx);
    detail::ensure_same(seen_semantics.rows(), semantic_dict.rows(),
                        "seen semantic rows", "semantic dictionary rows", ctx);
    detail::ensure_same(unseen_semantics.rows(), semantic_dict.rows(),
                        "unseen semantic rows", "semantic dictionary rows", ctx);
    detail::ensure_same(visual_dict.cols(), semantic_dict.cols(),
                        "visual dictionary atoms", "semantic dictionary atoms", ctx);
    detail::ensure_same(seen_codes.rows(), visual_dict.cols(),
                        "seen code rows", "dictionary atoms", ctx);
    detail::ensure_same(unseen_codes.rows(), visual_dict.cols(),
                        "unseen code rows", "dictionary atoms", ctx);
    detail::ensure_same(seen_codes.cols(), seen_prototypes.cols(),
                        "seen code columns", "seen prototype columns", ctx);
    detail::ensure_same(unseen_codes.cols(), unseen_prototypes.cols(),
                        "unseen code columns", "unseen prototype columns", ctx);
    detail::ensure_same(seen_semantics.cols(), seen_prototypes.cols(),
                        "seen semantic columns", "seen prototype columns", ctx);
    detail::ensure_same(unseen_semantics.cols(), unseen_prototypes.cols(),
                        "unseen semantic columns", "unseen prototype columns", ctx);
    for (Index j = 0; j < visual_dict.cols(); ++j) {
        if (visual_dict.col(j).squaredNorm() > 1.0 + 1e-9 ||
            semantic_dict.col(j).squaredNorm() > 1.0 + 1e-9) {
            std::ostringstream os;
            os << "model: dictionary column " << j << " violates the unit-ball constraint";
            throw InternalError(os.str());
        }
    }
}

LossParts loss(const CdlModel& model, const Matrix& samples, const Matrix& indicator) {
    model.check_fitted();
    const std::string ctx = "loss";
    detail::ensure_same(samples.rows(), model.seen_prototypes.rows(),
                        "sample rows", "prototype rows", ctx);
    detail::ensure_same(indicator.rows(), model.seen_prototypes.cols(),
                        "indicator rows", "seen prototype columns", ctx);
    detail::ensure_same(indicator.cols(), samples.cols(),
                        "indicator columns", "sample columns", ctx);

    const auto& hp = model.hp;
    LossParts parts;
    parts.seen_align =
        (model.seen_prototypes - model.visual_dict * model.seen_codes).squaredNorm() +
        hp.lambda * (model.seen_semantics - model.semantic_dict * model.seen_codes).squaredNorm();
    parts.unseen_align =
        (model.unseen_prototypes - model.visual_dict * model.unseen_codes).squaredNorm() +
        hp.lambda *
            (model.unseen_semantics - model.semantic_dict * model.unseen_codes).squaredNorm();
    parts.prototype_fit = (samples - model.seen_prototypes * indicator).squaredNorm();
    parts.total = parts.seen_align + hp.alpha * parts.unseen_align +
                  hp.beta * parts.prototype_fit;
    return parts;
}

Matrix one_hot(const std::vector<int>& labels, Index classes) {
    if (labels.empty()) throw ValueError("one_hot: no labels given");
    if (classes < 1) throw ValueError("one_hot: classes must be >= 1");
    Matrix indicator = Matrix::Zero(classes, static_cast<Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int label = labels[i];
        if (label < 0 || label >= classes) {
            std::ostringstream os;
            os << "one_hot: label " << label << " at position " << i
               << " is outside [0, " << classes << ")";
            throw ValueError(os.str());
        }
        indicator(label, static_cast<Index>(i)) = 1.0;
    }
    return indicator;
}

Matrix class_means(const Matrix& samples, const std::vector<int>& labels, Index classes) {
    detail::ensure_nonempty(samples, "samples", "class_means");
    detail::ensure_same(static_cast<Index>(labels.size()), samples.cols(),
                        "label count", "sample columns", "class_means");
    if (classes < 1) throw ValueError("class_means: classes must be >= 1");

    Matrix means = Matrix::Zero(samples.rows(), classes);
    std::vector<Index> counts(static_cast<std::size_t>(classes), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int label = labels[i];
        if (label < 0 || label >= classes) {
            std::ostringstream os;
            os << "class_means: label " << label << " at position " << i
               << " is outside [0, " << classes << ")";
            throw ValueError(os.str());
        }
        means.col(label) += samples.col(static_cast<Index>(i));
        ++counts[static_cast<std::size_t>(label)];
    }
    for (Index k = 0; k < classes; ++k) {
        if (counts[static_cast<std::size_t>(k)] == 0) {
            std::ostringstream os;
            os << "class_means: class " << k << " has no samples";
            throw ValueError(os.str());
        }
        means.col(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
    }
    return means;
}

CdlModel initialize(const Dataset& data, const Hyperparams& hp, std::uint64_t seed) {
    hp.validate();
    data.validate();

    const Index seen = data.seen_classes();
    const Index unseen = data.unseen_classes();
    const Index atoms = hp.bases_or(seen);

    CdlModel model;
    model.hp = hp;
    model.seen_semantics = data.seen_semantics;
    model.unseen_semantics = data.unseen_semantics;

    // Unseen codes: per-class cosine similarity to the seen classes in the
    // semantic space when the dictionary is class-sized, otherwise a random
    // draw with unit-norm columns.
    if (atoms == seen) {
        model.unseen_codes.resize(atoms, unseen);
        for (Index l = 0; l < unseen; ++l) {
            const auto target = data.unseen_semantics.col(l);
            const double target_norm = target.norm();
            for (Index k = 0; k < seen; ++k) {
                const auto ref = data.seen_semantics.col(k);
                const double denom = target_norm * ref.norm();
                model.unseen_codes(k, l) = denom > 0.0 ? target.dot(ref) / denom : 0.0;
            }
        }
    } else {
        Rng rng(seed);
        model.unseen_codes = rng.uniform_matrix(atoms, unseen);
        for (Index l = 0; l < unseen; ++l) {
            const double norm = model.unseen_codes.col(l).norm();
            if (norm > 0.0) model.unseen_codes.col(l) /= norm;
        }
    }

    model.semantic_dict =
        solve_dictionary({{data.unseen_semantics, model.unseen_codes, 1.0}}).dictionary;
    // Seen codes from the semantic term alone.
    model.seen_codes = solve_joint_code(model.semantic_dict, model.semantic_dict,
                                        data.seen_semantics, data.seen_semantics, 0.0,
                                        hp.ridge_eps);
    model.seen_prototypes = class_means(data.train_features, data.train_labels, seen);
    model.visual_dict =
        solve_dictionary({{model.seen_prototypes, model.seen_codes, 1.0}}).dictionary;
    model.unseen_prototypes = model.visual_dict * model.unseen_codes;

    const Matrix indicator = one_hot(data.train_labels, seen);
    model.trace.initial = loss(model, data.train_features, indicator);
    return model;
}

std::array<double, 6> run_cycle(CdlModel& model, const Matrix& samples,
                                const Matrix& indicator) {
    model.check_fitted();
    const auto& hp = model.hp;
    const bool fixed_prototypes = prototypes_fixed(model.variant);
    const bool adapt = adapts_unseen(model.variant);

    double previous = loss(model, samples, indicator).total;
    std::array<double, 6> after{};
    int step = 0;

    // Installs a candidate block value only when it does not increase the
    // total loss. Exact block solves always improve it in exact arithmetic;
    // the revert covers near-degenerate instances where the ridge bias or
    // rounding along a nearly dead dictionary direction would tick it up.
    const auto apply = [&](Matrix CdlModel::* field, Matrix candidate, const char* name) {
        Matrix saved = std::move(model.*field);
        model.*field = std::move(candidate);
        double current = loss(model, samples, indicator).total;
        if (current > previous) {
            model.*field = std::move(saved);
            current = previous;
        }
        if (current > previous + monotone_slack(previous)) {
            std::ostringstream os;
            os << "run_cycle: " << name << " increased the total loss from "
               << previous << " to " << current;
            throw InternalError(os.str());
        }
        after[static_cast<std::size_t>(step++)] = current;
        previous = current;
    };
    const auto skip = [&]() {
        after[static_cast<std::size_t>(step++)] = previous;
    };

    // (1) seen prototypes
    if (!fixed_prototypes) {
        apply(&CdlModel::seen_prototypes,
              solve_prototype(model.visual_dict * model.seen_codes, samples, indicator,
                              hp.beta),
              "seen prototype update");
    } else {
        skip();
    }

    // (2) seen codes
    apply(&CdlModel::seen_codes,
          solve_joint_code(model.visual_dict, model.semantic_dict, model.seen_prototypes,
                           model.seen_semantics, hp.lambda, hp.ridge_eps),
          "seen code update");

    // (3) visual dictionary
    {
        std::vector<DictionaryTarget> targets;
        targets.push_back({model.seen_prototypes, model.seen_codes, 1.0});
        if (hp.alpha > 0.0) {
            targets.push_back({model.unseen_prototypes, model.unseen_codes, hp.alpha});
        }
        apply(&CdlModel::visual_dict, solve_dictionary(targets, &model.visual_dict).dictionary,
              "visual dictionary update");
    }

    // (4) semantic dictionary
    {
        std::vector<DictionaryTarget> targets;
        targets.push_back({model.seen_semantics, model.seen_codes, 1.0});
        if (hp.alpha > 0.0) {
            targets.push_back({model.unseen_semantics, model.unseen_codes, hp.alpha});
        }
        apply(&CdlModel::semantic_dict,
              solve_dictionary(targets, &model.semantic_dict).dictionary,
              "semantic dictionary update");
    }

    // (5) unseen codes
    if (adapt) {
        apply(&CdlModel::unseen_codes,
              solve_joint_code(model.visual_dict, model.semantic_dict,
                               model.unseen_prototypes, model.unseen_semantics, hp.lambda,
                               hp.ridge_eps),
              "unseen code update");
    } else {
        skip();
    }

    // (6) unseen prototypes
    if (adapt) {
        apply(&CdlModel::unseen_prototypes, model.visual_dict * model.unseen_codes,
              "unseen prototype update");
    } else {
        skip();
    }

    return after;
}

CdlModel fit(const Dataset& data, const Hyperparams& hp, Variant variant,
             std::uint64_t seed) {
    const Hyperparams eff = effective_hyperparams(hp, variant);
    CdlModel model = initialize(data, eff, seed);
    model.variant = variant;
    if (variant == Variant::InitOnly) return model;

    const Matrix indicator = one_hot(data.train_labels, data.seen_classes());
    const Matrix& samples = data.train_features;

    double previous = model.trace.initial.total;
    for (int iter = 0; iter < eff.max_iters; ++iter) {
        TrainingTrace::Iteration record;
        record.step_total = run_cycle(model, samples, indicator);
        record.end = loss(model, samples, indicator);
        model.trace.iterations.push_back(record);

        const double decrease = previous - record.end.total;
        const bool stop = decrease < eff.rel_tol * previous + 1e-300;
        previous = record.end.total;
        if (stop) {
            model.trace.converged = true;
            break;
        }
    }

    if (!adapts_unseen(variant)) {
        // The adaptation steps never ran; derive the unseen state once from
        // the learned dictionaries so recognition has prototypes to use.
        model.unseen_codes = solve_joint_code(model.semantic_dict, model.semantic_dict,
                                              model.unseen_semantics, model.unseen_semantics,
                                              0.0, eff.ridge_eps);
        model.unseen_prototypes = model.visual_dict * model.unseen_codes;
    }

    model.check_consistent();
    return model;
}

}  // namespace cdl
