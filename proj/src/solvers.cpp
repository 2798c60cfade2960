#include <cdl/solvers.hpp>

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <sstream>

namespace cdl {

namespace {

using detail::ensure_finite;
using detail::ensure_nonempty;
using detail::ensure_same;

// LDLT solve for a symmetric positive semi-definite normal matrix, with a
// pivot-based rank check so rank deficiency surfaces as an error instead of
// NaNs. `ridge_hint` selects the advice attached to the error message.
Matrix solve_normal_equations(const Matrix& gram, const Matrix& rhs,
                              const std::string& context, bool ridge_hint) {
    Eigen::LDLT<Matrix> ldlt(gram);
    const auto& pivots = ldlt.vectorD();
    const double pivot_max = pivots.maxCoeff();
    const double threshold = pivot_max * static_cast<double>(gram.rows()) *
                             std::numeric_limits<double>::epsilon();
    const bool deficient = ldlt.info() != Eigen::Success || !(pivot_max > 0.0) ||
                           pivots.minCoeff() <= threshold;
    if (deficient) {
        std::string msg = context + ": singular system, the normal matrix is rank-deficient";
        if (ridge_hint) msg += "; set ridge_eps > 0 to regularize";
        throw SingularSystemError(msg);
    }
    Matrix solution = ldlt.solve(rhs);
    if (!solution.allFinite()) {
        throw SingularSystemError(context + ": singular system, solve produced non-finite values");
    }
    return solution;
}

}  // namespace

Matrix solve_joint_code(const Matrix& dict_primary, const Matrix& dict_coupled,
                        const Matrix& target_primary, const Matrix& target_coupled,
                        double coupled_weight, double ridge_eps) {
    const std::string ctx = "solve_joint_code";
    ensure_nonempty(dict_primary, "dict_primary", ctx);
    ensure_nonempty(dict_coupled, "dict_coupled", ctx);
    ensure_nonempty(target_primary, "target_primary", ctx);
    ensure_nonempty(target_coupled, "target_coupled", ctx);
    ensure_same(dict_primary.cols(), dict_coupled.cols(),
                "dict_primary columns", "dict_coupled columns", ctx);
    ensure_same(dict_primary.rows(), target_primary.rows(),
                "dict_primary rows", "target_primary rows", ctx);
    ensure_same(dict_coupled.rows(), target_coupled.rows(),
                "dict_coupled rows", "target_coupled rows", ctx);
    ensure_same(target_primary.cols(), target_coupled.cols(),
                "target_primary columns", "target_coupled columns", ctx);
    if (coupled_weight < 0.0) throw ValueError(ctx + ": coupled_weight must be >= 0");
    if (ridge_eps < 0.0) throw ValueError(ctx + ": ridge_eps must be >= 0");
    ensure_finite(dict_primary, "dict_primary", ctx);
    ensure_finite(dict_coupled, "dict_coupled", ctx);
    ensure_finite(target_primary, "target_primary", ctx);
    ensure_finite(target_coupled, "target_coupled", ctx);

    Matrix gram = dict_primary.transpose() * dict_primary;
    Matrix rhs = dict_primary.transpose() * target_primary;
    if (coupled_weight > 0.0) {
        gram.noalias() += coupled_weight * (dict_coupled.transpose() * dict_coupled);
        rhs.noalias() += coupled_weight * (dict_coupled.transpose() * target_coupled);
    }
    gram.diagonal().array() += ridge_eps;
    return solve_normal_equations(gram, rhs, ctx, ridge_eps == 0.0);
}

Matrix solve_prototype(const Matrix& code_reconstruction, const Matrix& samples,
                       const Matrix& indicator, double beta) {
    const std::string ctx = "solve_prototype";
    ensure_nonempty(code_reconstruction, "code_reconstruction", ctx);
    ensure_nonempty(samples, "samples", ctx);
    ensure_nonempty(indicator, "indicator", ctx);
    ensure_same(code_reconstruction.rows(), samples.rows(),
                "code_reconstruction rows", "samples rows", ctx);
    ensure_same(indicator.rows(), code_reconstruction.cols(),
                "indicator rows", "code_reconstruction columns", ctx);
    ensure_same(indicator.cols(), samples.cols(), "indicator columns", "samples columns", ctx);
    if (beta < 0.0) throw ValueError(ctx + ": beta must be >= 0");
    ensure_finite(code_reconstruction, "code_reconstruction", ctx);
    ensure_finite(samples, "samples", ctx);

    // Validate one-hot columns and accumulate per-class sample counts.
    Vector counts = Vector::Zero(indicator.rows());
    for (Index i = 0; i < indicator.cols(); ++i) {
        Index ones = 0;
        for (Index k = 0; k < indicator.rows(); ++k) {
            const double v = indicator(k, i);
            if (v == 1.0) {
                ++ones;
                counts[k] += 1.0;
            } else if (v != 0.0) {
                std::ostringstream os;
                os << ctx << ": indicator column " << i << " is not one-hot (entry "
                   << k << " = " << v << ")";
                throw ValueError(os.str());
            }
        }
        if (ones != 1) {
            std::ostringstream os;
            os << ctx << ": indicator column " << i << " is not one-hot (" << ones
               << " entries set)";
            throw ValueError(os.str());
        }
    }

    Matrix prototypes = code_reconstruction;
    if (beta > 0.0) {
        prototypes.noalias() += beta * (samples * indicator.transpose());
    }
    // Indicator Gram is diag(counts); the normal matrix I + beta*diag(counts)
    // inverts as a per-column scale.
    for (Index k = 0; k < prototypes.cols(); ++k) {
        prototypes.col(k) /= 1.0 + beta * counts[k];
    }
    return prototypes;
}

DictionaryResult solve_dictionary(const std::vector<DictionaryTarget>& targets,
                                  const Matrix* start, const DictionaryOptions& options) {
    const std::string ctx = "solve_dictionary";
    if (targets.empty()) throw ValueError(ctx + ": no targets given");
    const Index rows = targets.front().prototypes.rows();
    const Index atoms = targets.front().codes.rows();
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& t = targets[i];
        const std::string which = "target " + std::to_string(i);
        ensure_nonempty(t.prototypes, which + " prototypes", ctx);
        ensure_nonempty(t.codes, which + " codes", ctx);
        ensure_same(t.prototypes.rows(), rows, which + " prototype rows", "target 0 prototype rows", ctx);
        ensure_same(t.codes.rows(), atoms, which + " code rows", "target 0 code rows", ctx);
        ensure_same(t.prototypes.cols(), t.codes.cols(),
                    which + " prototype columns", which + " code columns", ctx);
        if (t.weight < 0.0) throw ValueError(ctx + ": " + which + " has negative weight");
        ensure_finite(t.prototypes, which + " prototypes", ctx);
        ensure_finite(t.codes, which + " codes", ctx);
        weight_sum += t.weight;
    }
    if (weight_sum <= 0.0) throw ValueError(ctx + ": all target weights are zero");

    //   objective(D) = const - 2 tr(D' cross) + tr(D' D gram)
    // with gram = sum_i w_i Z_i Z_i' and cross = sum_i w_i P_i Z_i'.
    Matrix gram = Matrix::Zero(atoms, atoms);
    Matrix cross = Matrix::Zero(rows, atoms);
    double const_term = 0.0;
    for (const auto& t : targets) {
        if (t.weight == 0.0) continue;
        gram.noalias() += t.weight * (t.codes * t.codes.transpose());
        cross.noalias() += t.weight * (t.prototypes * t.codes.transpose());
        const_term += t.weight * t.prototypes.squaredNorm();
    }

    DictionaryResult result;
    if (start != nullptr) {
        ensure_same(start->rows(), rows, "start rows", "target prototype rows", ctx);
        ensure_same(start->cols(), atoms, "start columns", "code rows", ctx);
        ensure_finite(*start, "start", ctx);
        result.dictionary = *start;
        // Clamp the start into the feasible set.
        for (Index j = 0; j < atoms; ++j) {
            const double norm2 = result.dictionary.col(j).squaredNorm();
            if (norm2 > 1.0) result.dictionary.col(j) /= std::sqrt(norm2);
        }
    } else {
        result.dictionary = Matrix::Zero(rows, atoms);
    }

    for (Index j = 0; j < atoms; ++j) {
        if (gram(j, j) <= 0.0) result.unused_atoms.push_back(j);
    }

    Matrix& dict = result.dictionary;
    const auto objective = [&]() {
        return const_term - 2.0 * dict.cwiseProduct(cross).sum() +
               dict.cwiseProduct(dict * gram).sum();
    };

    double previous = objective();
    Vector column(rows);
    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        for (Index j = 0; j < atoms; ++j) {
            const double diag = gram(j, j);
            if (diag <= 0.0) continue;  // unused atom, keep the start value
            column = dict.col(j) + (cross.col(j) - dict * gram.col(j)) / diag;
            const double norm2 = column.squaredNorm();
            if (norm2 > 1.0) column /= std::sqrt(norm2);
            dict.col(j) = column;
        }
        ++result.sweeps;
        const double current = objective();
        const double decrease = previous - current;
        previous = current;
        if (decrease < options.rel_tol * std::max(std::abs(current), 1e-300)) break;
    }

    double residual = 0.0;
    for (const auto& t : targets) {
        if (t.weight == 0.0) continue;
        residual += t.weight * (t.prototypes - dict * t.codes).squaredNorm();
    }
    result.objective = residual;
    return result;
}

Matrix ridge_encode(const Matrix& dict, const Matrix& samples, double gamma) {
    const std::string ctx = "ridge_encode";
    ensure_nonempty(dict, "dict", ctx);
    ensure_nonempty(samples, "samples", ctx);
    ensure_same(dict.rows(), samples.rows(), "dict rows", "samples rows", ctx);
    if (!(gamma > 0.0)) throw ValueError(ctx + ": gamma must be > 0");
    ensure_finite(dict, "dict", ctx);
    ensure_finite(samples, "samples", ctx);

    Matrix gram = dict.transpose() * dict;
    gram.diagonal().array() += gamma;
    return solve_normal_equations(gram, dict.transpose() * samples, ctx, false);
}

}  // namespace cdl
