#include <cdl/planted.hpp>

#include <cdl/rng.hpp>

#include <cstdio>
#include <sstream>

namespace cdl {

namespace {

Matrix unit_norm_gaussian(Rng& rng, Index rows, Index cols) {
    Matrix m = rng.gaussian_matrix(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        double norm = m.col(j).norm();
        while (norm == 0.0) {  // astronomically unlikely, but keep the invariant
            for (Index i = 0; i < rows; ++i) m(i, j) = rng.gaussian();
            norm = m.col(j).norm();
        }
        m.col(j) /= norm;
    }
    return m;
}

// prototypes column per class, samples_per_class noisy copies each,
// class-major order.
void sample_around(Rng& rng, const Matrix& prototypes, Index samples_per_class,
                   double noise, Matrix& features, std::vector<int>& labels) {
    const Index classes = prototypes.cols();
    features.resize(prototypes.rows(), classes * samples_per_class);
    labels.clear();
    Index col = 0;
    for (Index k = 0; k < classes; ++k) {
        for (Index s = 0; s < samples_per_class; ++s, ++col) {
            features.col(col) = prototypes.col(k);
            if (noise > 0.0) {
                features.col(col) += noise * rng.gaussian_matrix(prototypes.rows(), 1);
            }
            labels.push_back(static_cast<int>(k));
        }
    }
}

std::string numbered(const char* prefix, Index i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%03lld", prefix, static_cast<long long>(i));
    return buf;
}

}  // namespace

PlantedInstance generate_planted(const PlantedParams& params) {
    if (params.feature_dim < 1 || params.semantic_dim < 1 || params.seen_classes < 1 ||
        params.unseen_classes < 1 || params.samples_per_class < 1) {
        throw ValueError("generate_planted: all counts must be >= 1");
    }
    if (params.unseen_classes > params.seen_classes) {
        std::ostringstream os;
        os << "generate_planted: unseen_classes (" << params.unseen_classes
           << ") must not exceed seen_classes (" << params.seen_classes
           << "), the one-hot code construction needs distinct atoms";
        throw ValueError(os.str());
    }
    if (params.noise < 0.0) throw ValueError("generate_planted: noise must be >= 0");
    if (params.code_jitter < 0.0) throw ValueError("generate_planted: code_jitter must be >= 0");
    if (params.unseen_mixing < 1 || params.unseen_mixing > params.seen_classes) {
        throw ValueError("generate_planted: unseen_mixing must lie in [1, seen_classes]");
    }

    Rng rng(params.seed);
    PlantedInstance inst;
    inst.noise = params.noise;

    const Index seen = params.seen_classes;
    const Index unseen = params.unseen_classes;

    inst.visual_dict = unit_norm_gaussian(rng, params.feature_dim, seen);
    inst.semantic_dict = unit_norm_gaussian(rng, params.semantic_dim, seen);

    inst.seen_codes = Matrix::Identity(seen, seen);
    inst.seen_codes += params.code_jitter * rng.uniform_matrix(seen, seen);

    // Each unseen class gets a distinct leading atom; extra mixing atoms are
    // drawn per class so the class sits between seen classes.
    const std::vector<Index> atom_of = rng.permutation(seen);
    inst.unseen_codes = params.code_jitter * rng.uniform_matrix(seen, unseen);
    for (Index l = 0; l < unseen; ++l) {
        inst.unseen_codes(atom_of[static_cast<std::size_t>(l)], l) += 1.0;
        if (params.unseen_mixing > 1) {
            const std::vector<Index> extra = rng.permutation(seen);
            Index added = 0;
            for (Index e = 0; e < seen && added + 1 < params.unseen_mixing; ++e) {
                if (extra[static_cast<std::size_t>(e)] == atom_of[static_cast<std::size_t>(l)]) {
                    continue;
                }
                inst.unseen_codes(extra[static_cast<std::size_t>(e)], l) += 0.7;
                ++added;
            }
        }
    }

    inst.seen_prototypes = inst.visual_dict * inst.seen_codes;
    inst.unseen_prototypes = inst.visual_dict * inst.unseen_codes;

    Dataset& data = inst.dataset;
    data.seen_semantics = inst.semantic_dict * inst.seen_codes;
    data.unseen_semantics = inst.semantic_dict * inst.unseen_codes;
    for (Index k = 0; k < seen; ++k) data.seen_class_names.push_back(numbered("seen", k));
    for (Index l = 0; l < unseen; ++l) data.unseen_class_names.push_back(numbered("unseen", l));

    sample_around(rng, inst.seen_prototypes, params.samples_per_class, params.noise,
                  data.train_features, data.train_labels);
    sample_around(rng, inst.unseen_prototypes, params.samples_per_class, params.noise,
                  data.test_unseen_features, data.test_unseen_labels);
    sample_around(rng, inst.seen_prototypes, params.samples_per_class, params.noise,
                  data.test_seen_features, data.test_seen_labels);

    data.validate();
    return inst;
}

}  // namespace cdl
