#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "patchproc/model.hpp"

namespace patchproc {

/// One way an individual of some type can leave the embedded chain: with `probability` it is
/// replaced by `offspring[j]` individuals of type j.
struct OffspringOutcome {
    std::string label;
    double probability = 0.0;
    std::vector<int> offspring;
};

/// Offspring distributions of a multitype branching process, one finite outcome list per type.
/// The generating function of type i is f_i(u) = sum over outcomes of p * prod_j u_j^{r_j}.
class OffspringPgf {
public:
    OffspringPgf(std::vector<std::string> type_names, std::vector<std::vector<OffspringOutcome>> outcomes);

    std::size_t types() const { return names_.size(); }
    const std::vector<std::string>& type_names() const { return names_; }
    const std::vector<OffspringOutcome>& outcomes(std::size_t type) const { return outcomes_[type]; }

    double evaluate(std::size_t type, std::span<const double> u) const;
    std::vector<double> evaluate(std::span<const double> u) const;

private:
    std::vector<std::string> names_;
    std::vector<std::vector<OffspringOutcome>> outcomes_;
};

/// Branching approximation at the DFE: susceptibles are frozen at S = beta/mu and each infectious
/// individual acts independently. Types are the model's infectious classes in state order.
OffspringPgf offspring_pgf_at_dfe(const ModelSpec& model);

/// M(i, j) = expected number of type-j offspring of a type-i individual.
struct ExpectationMatrix {
    Eigen::MatrixXd m;
};

ExpectationMatrix expectation_matrix(const OffspringPgf& pgf);

/// Primitive iff some power up to the Wielandt bound (k-1)^2+1 is entrywise positive.
bool is_primitive(const ExpectationMatrix& M);
/// Smallest p with M^p > 0, or 0 when M is not primitive.
int primitivity_exponent(const ExpectationMatrix& M);

/// Perron root by power iteration on M + I (aperiodic whenever M is irreducible), stopping at
/// 1e-12 relative change. Throws NumericalError after 1e5 iterations.
double spectral_radius(const ExpectationMatrix& M);

enum class ExtinctionMethod { ClosedForm, Iteration };

struct ExtinctionVector {
    std::vector<double> q;
    ExtinctionMethod method = ExtinctionMethod::Iteration;
    std::int64_t iterations = 0;
    double residual = 0.0;  ///< sup-norm of F(q) - q
};

/// Iterates u <- F(u) from u = 0 until the sup-norm step is below `tol`; the iterates increase
/// monotonically to the minimal fixed point. Throws NumericalError when max_iter is exceeded.
ExtinctionVector extinction_iterate(const OffspringPgf& pgf, double tol = 1e-12, std::int64_t max_iter = 1'000'000);

/// Closed-form (q1, q2) for the single-patch models, types (I, V).
ExtinctionVector extinction_closed_form(const ParamSet1P& params);

/// Extinction probability from z0 initial individuals: prod q_i^{z0_i}.
double p0(const ExtinctionVector& q, std::span<const std::int64_t> z0);

/// Infectious components of a full model state, in type order.
std::vector<std::int64_t> infectious_counts(const ModelSpec& model, std::span<const std::int64_t> x);

nlohmann::json extinction_report(const ModelSpec& model, const ExtinctionVector& q);

}  // namespace patchproc
