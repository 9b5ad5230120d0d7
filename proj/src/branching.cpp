#include "patchproc/branching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "patchproc/error.hpp"
#include "patchproc/reproduction.hpp"

namespace patchproc {

OffspringPgf::OffspringPgf(std::vector<std::string> type_names, std::vector<std::vector<OffspringOutcome>> outcomes)
    : names_(std::move(type_names)), outcomes_(std::move(outcomes))
{
    if (names_.empty() || outcomes_.size() != names_.size()) {
        throw ValidationError("offspring pgf needs one outcome list per type");
    }
    for (std::size_t i = 0; i < outcomes_.size(); ++i) {
        double total = 0.0;
        for (const auto& o : outcomes_[i]) {
            if (o.probability < 0.0 || o.probability > 1.0) {
                throw ValidationError("offspring probability outside [0, 1] for type " + names_[i]);
            }
            if (o.offspring.size() != names_.size()) {
                throw ValidationError("offspring vector has the wrong length for type " + names_[i]);
            }
            total += o.probability;
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw ValidationError("offspring probabilities of type " + names_[i] + " do not sum to 1");
        }
    }
}

double OffspringPgf::evaluate(std::size_t type, std::span<const double> u) const
{
    double f = 0.0;
    for (const auto& o : outcomes_[type]) {
        double term = o.probability;
        for (std::size_t j = 0; j < o.offspring.size(); ++j) {
            for (int r = 0; r < o.offspring[j]; ++r) term *= u[j];
        }
        f += term;
    }
    return f;
}

std::vector<double> OffspringPgf::evaluate(std::span<const double> u) const
{
    if (u.size() != types()) throw ValidationError("pgf argument has the wrong length");
    std::vector<double> f(types());
    for (std::size_t i = 0; i < types(); ++i) f[i] = evaluate(i, u);
    return f;
}

std::vector<std::int64_t> infectious_counts(const ModelSpec& model, std::span<const std::int64_t> x)
{
    model.check_state(x);
    std::vector<std::int64_t> z;
    for (auto i : model.infectious_idx()) z.push_back(x[i]);
    return z;
}

OffspringPgf offspring_pgf_at_dfe(const ModelSpec& model)
{
    const auto& inf = model.infectious_idx();
    RealVec base(model.dim(), 0.0);
    if (model.params()) {
        base = dfe(*model.params());
    } else if (inf.size() != model.dim()) {
        throw ValidationError("unsupported model family for the branching approximation");
    }

    std::vector<std::string> names;
    std::vector<std::vector<OffspringOutcome>> outcomes;
    for (std::size_t t = 0; t < inf.size(); ++t) {
        names.push_back(model.state_names()[inf[t]]);

        // A lone individual of this type in an otherwise disease-free population. Every reaction
        // that changes the infectious classes ends its life in the embedded chain; it is replaced
        // by itself plus the reaction's change to the infectious classes.
        RealVec x = base;
        x[inf[t]] = 1.0;
        std::vector<OffspringOutcome> list;
        double total = 0.0;
        for (const auto& r : model.reactions()) {
            const bool touches = std::any_of(inf.begin(), inf.end(), [&](auto i) { return r.stoichiometry[i] != 0; });
            if (!touches) continue;
            const double a = r.rate_at(std::span<const double>(x));
            if (a <= 0.0) continue;
            OffspringOutcome o;
            o.label = r.label;
            o.probability = a;
            o.offspring.assign(inf.size(), 0);
            o.offspring[t] = 1;
            for (std::size_t j = 0; j < inf.size(); ++j) o.offspring[j] += r.stoichiometry[inf[j]];
            if (std::any_of(o.offspring.begin(), o.offspring.end(), [](int v) { return v < 0; })) {
                throw ValidationError("reaction '" + r.label + "' is not a branching event");
            }
            total += a;
            list.push_back(std::move(o));
        }
        if (list.empty()) throw ValidationError("type " + names.back() + " has no events at the DFE");
        for (auto& o : list) o.probability /= total;
        outcomes.push_back(std::move(list));
    }
    return OffspringPgf(std::move(names), std::move(outcomes));
}

ExpectationMatrix expectation_matrix(const OffspringPgf& pgf)
{
    const auto k = static_cast<Eigen::Index>(pgf.types());
    ExpectationMatrix M{Eigen::MatrixXd::Zero(k, k)};
    for (Eigen::Index i = 0; i < k; ++i) {
        for (const auto& o : pgf.outcomes(static_cast<std::size_t>(i))) {
            for (Eigen::Index j = 0; j < k; ++j) M.m(i, j) += o.probability * o.offspring[j];
        }
    }
    return M;
}

int primitivity_exponent(const ExpectationMatrix& M)
{
    const auto k = M.m.rows();
    if (k == 0 || M.m.cols() != k) throw ValidationError("expectation matrix must be square");
    using Bool = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
    const Bool pattern = (M.m.array() > 0.0).cast<int>();
    Bool power = pattern;
    const int bound = static_cast<int>((k - 1) * (k - 1) + 1);
    for (int p = 1; p <= bound; ++p) {
        if ((power.array() > 0).all()) return p;
        power = ((power * pattern).array() > 0).cast<int>();
    }
    return 0;
}

bool is_primitive(const ExpectationMatrix& M)
{
    return primitivity_exponent(M) > 0;
}

double spectral_radius(const ExpectationMatrix& M)
{
    const auto k = M.m.rows();
    if (k == 0 || M.m.cols() != k) throw ValidationError("expectation matrix must be square");
    if ((M.m.array() < 0.0).any()) throw ValidationError("expectation matrix must be nonnegative");
    const Eigen::MatrixXd A = M.m + Eigen::MatrixXd::Identity(k, k);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(k) / static_cast<double>(k);
    double lambda = 0.0;
    for (int iter = 0; iter < 100'000; ++iter) {
        Eigen::VectorXd w = A * v;
        const double next = w.lpNorm<Eigen::Infinity>() / v.lpNorm<Eigen::Infinity>();
        v = w / w.lpNorm<Eigen::Infinity>();
        if (iter > 0 && std::abs(next - lambda) <= 1e-12 * next) return next - 1.0;
        lambda = next;
    }
    throw NumericalError("spectral radius power iteration did not converge in 100000 steps");
}

namespace {

double sup_distance(std::span<const double> a, std::span<const double> b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

ExtinctionVector extinction_iterate(const OffspringPgf& pgf, double tol, std::int64_t max_iter)
{
    if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
    const std::vector<double> zero(pgf.types(), 0.0);
    const auto at_zero = pgf.evaluate(zero);
    if (std::any_of(at_zero.begin(), at_zero.end(), [](double v) { return v <= 0.0; })) {
        throw ValidationError("pgf is singular: F(0) must be positive in every component");
    }
    std::vector<double> u = zero;
    for (std::int64_t it = 1; it <= max_iter; ++it) {
        auto next = pgf.evaluate(u);
        const double step = sup_distance(next, u);
        u = std::move(next);
        if (step < tol) {
            ExtinctionVector q;
            q.q = u;
            q.method = ExtinctionMethod::Iteration;
            q.iterations = it;
            q.residual = sup_distance(pgf.evaluate(u), u);
            return q;
        }
    }
    throw NumericalError("pgf iteration exceeded " + std::to_string(max_iter) +
                         " iterations (near-critical process?)");
}

ExtinctionVector extinction_closed_form(const ParamSet1P& p)
{
    p.validate();
    const double s = p.beta / p.mu;
    const double a = p.alpha, d = p.delta, w = p.omega;
    double q1 = 0.0, q2 = 0.0;
    if (const auto* sat = std::get_if<Saturating>(&p.foi)) {
        const double d1 = sat->m1 / (sat->a1 + 1.0);
        const double d2 = sat->m2 / (sat->a2 + 1.0);
        const double lead = a * d2 - d1 * (s * d2 + w);
        const double disc = lead * lead + d * d2 * d2 * (d + 2.0 * a + 2.0 * s * d1) + 2.0 * d * w * d1 * d2;
        q1 = (a * d2 + d * d2 + w * d1 + s * d1 * d2 - std::sqrt(disc)) / (2.0 * s * d1 * d2);
        q2 = w / (w + s * d2 * (1.0 - q1));
    } else {
        const double lead = a - (w + s);
        q1 = (a + d + w + s - std::sqrt(lead * lead + d * (d + 2.0 * (a + w + s)))) / (2.0 * s);
        q2 = w / (w + s * (1.0 - q1));
    }
    // the smaller quadratic root leaves the unit square when the process is not supercritical
    if (!(q1 < 1.0)) q1 = q2 = 1.0;
    ExtinctionVector q;
    q.q = {q1, q2};
    q.method = ExtinctionMethod::ClosedForm;
    const auto pgf = offspring_pgf_at_dfe(build_one_patch(p));
    q.residual = sup_distance(pgf.evaluate(q.q), q.q);
    return q;
}

double p0(const ExtinctionVector& q, std::span<const std::int64_t> z0)
{
    if (z0.size() != q.q.size()) {
        throw ValidationError("initial infectious vector has length " + std::to_string(z0.size()) + ", expected " +
                              std::to_string(q.q.size()));
    }
    double p = 1.0;
    for (std::size_t i = 0; i < z0.size(); ++i) {
        if (z0[i] < 0) throw ValidationError("initial infectious counts must be nonnegative");
        p *= std::pow(q.q[i], static_cast<double>(z0[i]));
    }
    return p;
}

nlohmann::json extinction_report(const ModelSpec& model, const ExtinctionVector& q)
{
    nlohmann::json j;
    j["family"] = family_name(model.family());
    if (model.params()) {
        j["params"] = params_to_json(*model.params());
        j["r0"] = r0(*model.params());
    }
    j["q"] = q.q;
    j["method"] = q.method == ExtinctionMethod::ClosedForm ? "closed_form" : "iterate";
    j["residual"] = q.residual;
    j["iters"] = q.iterations;
    j["spectral_radius"] = spectral_radius(expectation_matrix(offspring_pgf_at_dfe(model)));
    return j;
}

}  // namespace patchproc
