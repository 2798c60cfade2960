#pragma once

#include <cdl/types.hpp>

#include <vector>

namespace cdl {

inline constexpr double kDefaultRidgeEps = 1e-10;

// ---------------------------------------------------------------------------
// Least-squares building blocks shared by every model update. All solvers are
// deterministic (fixed sweep order, no randomized pivoting) and reject
// non-finite inputs; outputs are guaranteed finite.
// ---------------------------------------------------------------------------

/// Minimizes ||target_primary - dict_primary * Z||^2
///           + coupled_weight * ||target_coupled - dict_coupled * Z||^2
/// over the shared code matrix Z via the normal equations
///   (D1'D1 + w D2'D2 + ridge_eps I) Z = D1'P + w D2'C.
/// ridge_eps only guards solvability; with ridge_eps = 0 a rank-deficient
/// normal matrix raises SingularSystemError.
Matrix solve_joint_code(const Matrix& dict_primary, const Matrix& dict_coupled,
                        const Matrix& target_primary, const Matrix& target_coupled,
                        double coupled_weight, double ridge_eps = kDefaultRidgeEps);

/// Minimizes ||P - code_reconstruction||^2 + beta ||samples - P * indicator||^2
/// over the prototype matrix P. Indicator columns must be one-hot, so the
/// indicator Gram is diagonal with per-class sample counts and the solution is
///   P = (code_reconstruction + beta * samples * indicator') / (1 + beta * count)
/// applied column-wise.
Matrix solve_prototype(const Matrix& code_reconstruction, const Matrix& samples,
                       const Matrix& indicator, double beta);

/// One reconstruction task for solve_dictionary: weight * ||prototypes - D * codes||^2.
struct DictionaryTarget {
    Eigen::Ref<const Matrix> prototypes;  // r x n_i
    Eigen::Ref<const Matrix> codes;       // n_b x n_i
    double weight = 1.0;
};

struct DictionaryOptions {
    double rel_tol = 1e-9;  // stop when the per-sweep objective decrease falls below this, relative
    int max_sweeps = 500;
};

struct DictionaryResult {
    Matrix dictionary;                // r x n_b, every column inside the unit ball
    std::vector<Index> unused_atoms;  // columns with no code mass, left at their start value
    int sweeps = 0;
    double objective = 0.0;           // sum_i weight_i * ||P_i - D Z_i||^2 at the returned D
};

/// Minimizes sum_i weight_i * ||P_i - D * Z_i||^2 subject to ||column_j(D)||_2^2 <= 1.
/// Block coordinate descent over columns: the unconstrained column minimizer is
/// closed-form from the residual and the per-column quadratic is isotropic, so
/// projecting it onto the unit ball is the exact constrained block update. The
/// objective never increases across sweeps. Columns whose code row is zero in
/// every target are left at the start value (zero unless `start` is given) and
/// reported in unused_atoms.
DictionaryResult solve_dictionary(const std::vector<DictionaryTarget>& targets,
                                  const Matrix* start = nullptr,
                                  const DictionaryOptions& options = {});

/// Minimizes ||samples - dict * Z||^2 + gamma ||Z||^2, gamma > 0, via
/// (D'D + gamma I) Z = D' * samples.
Matrix ridge_encode(const Matrix& dict, const Matrix& samples, double gamma);

}  // namespace cdl
