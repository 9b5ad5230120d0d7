#include "patchproc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "patchproc/error.hpp"
#include "patchproc/reproduction.hpp"

namespace patchproc {

namespace {

constexpr std::int64_t kMaxBox = 40'000'000;

class Box {
public:
    explicit Box(const std::vector<std::int64_t>& caps) : caps_(caps), stride_(caps.size())
    {
        std::int64_t size = 1;
        for (std::size_t j = caps.size(); j-- > 0;) {
            stride_[j] = size;
            if (caps[j] < 0) throw ValidationError("caps must be nonnegative");
            if (size > kMaxBox / (caps[j] + 1)) throw ValidationError("oracle state-space overflow (cap box too large)");
            size *= caps[j] + 1;
        }
        size_ = size;
    }

    std::int64_t size() const { return size_; }

    bool inside(std::span<const std::int64_t> x) const
    {
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (x[j] < 0 || x[j] > caps_[j]) return false;
        }
        return true;
    }

    std::int64_t index(std::span<const std::int64_t> x) const
    {
        std::int64_t k = 0;
        for (std::size_t j = 0; j < x.size(); ++j) k += x[j] * stride_[j];
        return k;
    }

    void decode(std::int64_t k, std::span<std::int64_t> x) const
    {
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] = k / stride_[j];
            k %= stride_[j];
        }
    }

private:
    std::vector<std::int64_t> caps_;
    std::vector<std::int64_t> stride_;
    std::int64_t size_ = 0;
};

}  // namespace

OracleBracket truncated_oracle(const ModelSpec& model, const StateVec& init, const std::vector<std::int64_t>& caps,
                               std::optional<std::int64_t> outbreak_threshold)
{
    model.check_state(init);
    if (caps.size() != model.dim()) throw ValidationError("caps must have one entry per state component");
    const std::int64_t threshold = outbreak_threshold.value_or(std::numeric_limits<std::int64_t>::max());
    if (threshold < 1) throw ValidationError("outbreak threshold must be positive");

    const auto& inf = model.infectious_idx();
    auto infectious_total = [&](std::span<const std::int64_t> x) {
        std::int64_t t = 0;
        for (auto i : inf) t += x[i];
        return t;
    };
    auto transient = [&](std::span<const std::int64_t> x) {
        const auto t = infectious_total(x);
        return t > 0 && t < threshold;
    };

    {
        const auto t0 = infectious_total(init);
        if (t0 == 0) return {1.0, 1.0, 0};
        if (t0 >= threshold) return {0.0, 0.0, 0};
    }

    const Box box(caps);
    if (!box.inside(init)) throw ValidationError("initial state lies outside the oracle caps");

    const auto n = model.dim();
    std::vector<std::int32_t> slot(static_cast<std::size_t>(box.size()), -1);
    std::vector<std::int64_t> states;
    StateVec x(n);
    for (std::int64_t k = 0; k < box.size(); ++k) {
        box.decode(k, x);
        if (!transient(x)) continue;
        if (static_cast<std::int64_t>(states.size()) >= kOracleMaxStates) {
            throw ValidationError("oracle state-space overflow: more than " + std::to_string(kOracleMaxStates) +
                                  " transient states");
        }
        slot[static_cast<std::size_t>(k)] = static_cast<std::int32_t>(states.size());
        states.push_back(k);
    }

    const auto m = static_cast<Eigen::Index>(states.size());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(states.size() * (model.reactions().size() + 1));
    Eigen::VectorXd to_extinct = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd to_cap = Eigen::VectorXd::Zero(m);
    StateVec y(n);
    for (Eigen::Index row = 0; row < m; ++row) {
        box.decode(states[static_cast<std::size_t>(row)], x);
        double out_rate = 0.0;
        for (const auto& r : model.reactions()) {
            const double a = r.rate_at(std::span<const std::int64_t>(x));
            if (a <= 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) y[j] = x[j] + r.stoichiometry[j];
            out_rate += a;
            // absorption is decided before the caps, so a jump onto the threshold is never truncated
            const auto total = infectious_total(y);
            if (total == 0) {
                to_extinct(row) += a;
            } else if (total >= threshold) {
                continue;
            } else if (!box.inside(y)) {
                to_cap(row) += a;
            } else {
                triplets.emplace_back(row, slot[static_cast<std::size_t>(box.index(y))], -a);
            }
        }
        triplets.emplace_back(row, row, out_rate);
    }

    Eigen::SparseMatrix<double> A(m, m);
    A.setFromTriplets(triplets.begin(), triplets.end());
    A.makeCompressed();
    // Preconditioned BiCGSTAB is far cheaper than a direct factorization on the larger boxes;
    // the direct solver is the fallback when it stalls.
    // `lower` is the probability of extinction inside the box, `escape` of leaving it first
    Eigen::VectorXd lower, escape;
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> iterative;
    iterative.preconditioner().setDroptol(1e-6);
    iterative.preconditioner().setFillfactor(4);
    iterative.setTolerance(1e-14);
    iterative.setMaxIterations(5000);
    iterative.compute(A);
    bool solved = iterative.info() == Eigen::Success;
    if (solved) {
        lower = iterative.solve(to_extinct);
        solved = iterative.info() == Eigen::Success;
    }
    if (solved) {
        escape = iterative.solve(to_cap);
        solved = iterative.info() == Eigen::Success;
    }
    if (!solved) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> direct;
        direct.compute(A);
        if (direct.info() != Eigen::Success) throw NumericalError("oracle linear system is singular");
        lower = direct.solve(to_extinct);
        escape = direct.solve(to_cap);
        if (direct.info() != Eigen::Success) throw NumericalError("oracle linear solve failed");
    }

    const auto i0 = slot[static_cast<std::size_t>(box.index(init))];
    OracleBracket b;
    b.lower = std::clamp(lower(i0), 0.0, 1.0);
    b.upper = std::clamp(b.lower + std::max(escape(i0), 0.0), b.lower, 1.0);
    b.states = m;
    return b;
}

std::vector<std::int64_t> default_caps(const ModelSpec& model, std::int64_t outbreak_threshold)
{
    std::vector<std::int64_t> caps(model.dim(), std::max<std::int64_t>(outbreak_threshold - 1, 0));
    if (!model.params()) return caps;
    const auto base = dfe(*model.params());
    const auto& inf = model.infectious_idx();
    for (std::size_t j = 0; j < model.dim(); ++j) {
        if (std::find(inf.begin(), inf.end(), j) != inf.end()) continue;
        caps[j] = static_cast<std::int64_t>(std::ceil(base[j] + 10.0 * std::sqrt(base[j]) + 10.0));
    }
    return caps;
}

}  // namespace patchproc
