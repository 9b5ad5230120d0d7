#include <cmath>
#include <random>

#include "doctest.h"
#include "patchproc/branching.hpp"
#include "patchproc/error.hpp"
#include "patchproc/reproduction.hpp"

using namespace patchproc;

namespace {

const ParamSet1P kMassAction{4.0, 0.05, 3.3, 1.3, 4.0, MassAction{}};
const ParamSet1P kSaturating{4.0, 0.05, 3.3, 1.3, 4.0, Saturating{3.0, 2.5, 3.0, 2.0}};
const ParamSet2P kTwoPatch{4.0, 0.05, 2.4, 0.04, 3.3, 1.3, 4.0, 3.0};

double prob(const OffspringPgf& pgf, std::size_t type, std::string_view label)
{
    for (const auto& o : pgf.outcomes(type)) {
        if (o.label == label) return o.probability;
    }
    return 0.0;
}

double sup(const std::vector<double>& a, const std::vector<double>& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

ParamSet1P random_one_patch(std::mt19937_64& gen, bool saturating)
{
    std::uniform_real_distribution<double> u(0.1, 5.0);
    ParamSet1P p{u(gen), u(gen) / 10.0, u(gen), u(gen), u(gen), MassAction{}};
    if (saturating) p.foi = Saturating{u(gen), u(gen), u(gen), u(gen)};
    return p;
}

ParamSet2P random_two_patch(std::mt19937_64& gen)
{
    std::uniform_real_distribution<double> u(0.1, 5.0);
    return {u(gen), u(gen) / 10.0, u(gen), u(gen) / 10.0, u(gen), u(gen), u(gen), u(gen)};
}

}  // namespace

TEST_CASE("one-patch offspring distributions")
{
    const auto pgf = offspring_pgf_at_dfe(build_one_patch(kMassAction));
    REQUIRE(pgf.types() == 2);
    CHECK(pgf.type_names() == std::vector<std::string>{"I", "V"});
    CHECK(prob(pgf, 0, "Death of I") == doctest::Approx(0.03901).epsilon(1e-3));
    CHECK(prob(pgf, 0, "Shedding of V") == doctest::Approx(0.01537).epsilon(1e-3));
    CHECK(prob(pgf, 0, "Infection") == doctest::Approx(0.94563).epsilon(1e-4));
    CHECK(prob(pgf, 0, "Infection") == doctest::Approx(80.0 / 84.6).epsilon(1e-14));
    CHECK(prob(pgf, 1, "Clearance of V") == doctest::Approx(4.0 / 84.0).epsilon(1e-14));
    CHECK(pgf.outcomes(0).size() == 3);
    CHECK(pgf.outcomes(1).size() == 2);

    const auto sat = offspring_pgf_at_dfe(build_one_patch(kSaturating));
    const double d1 = 3.0 / 4.0, d2 = 2.5 / 3.0;
    CHECK(prob(sat, 0, "Infection") == doctest::Approx(80 * d1 / (3.3 + 1.3 + 80 * d1)).epsilon(1e-14));
    CHECK(prob(sat, 1, "Infection") == doctest::Approx(80 * d2 / (4.0 + 80 * d2)).epsilon(1e-14));
}

TEST_CASE("two-patch offspring distributions")
{
    const auto pgf = offspring_pgf_at_dfe(build_two_patch(kTwoPatch));
    REQUIRE(pgf.types() == 4);
    CHECK(prob(pgf, 1, "Diffusion of V1") == doctest::Approx(3.0 / 87.0).epsilon(1e-14));
    CHECK(prob(pgf, 1, "Diffusion of V1") == doctest::Approx(0.03448).epsilon(1e-3));
    CHECK(prob(pgf, 3, "Diffusion of V2") == doctest::Approx(3.0 / 67.0).epsilon(1e-14));
}

TEST_CASE("pgfs are normalized")
{
    std::mt19937_64 gen(5);
    for (int i = 0; i < 200; ++i) {
        for (const auto& p : {ParamSet(random_one_patch(gen, false)), ParamSet(random_one_patch(gen, true)),
                              ParamSet(random_two_patch(gen))}) {
            const auto pgf = offspring_pgf_at_dfe(build_model(p));
            const std::vector<double> ones(pgf.types(), 1.0);
            for (double f : pgf.evaluate(ones)) CHECK(std::abs(f - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("pgf construction errors")
{
    CHECK_THROWS_AS(OffspringPgf({"A"}, {{{"x", 0.6, {0}}, {"y", 0.3, {2}}}}), ValidationError);
    CHECK_THROWS_AS(OffspringPgf({"A"}, {{{"x", 1.2, {0}}, {"y", -0.2, {2}}}}), ValidationError);
    CHECK_THROWS_AS(OffspringPgf({"A", "B"}, {{{"x", 1.0, {0, 0}}}}), ValidationError);
    // Always exactly one offspring: F(0) = 0, a singular process.
    const OffspringPgf singular({"A"}, {{{"x", 1.0, {1}}}});
    CHECK_THROWS_AS(extinction_iterate(singular), ValidationError);
    const OffspringPgf ok({"A"}, {{{"x", 0.5, {0}}, {"y", 0.5, {2}}}});
    CHECK_THROWS_AS(extinction_iterate(ok, 0.0), ValidationError);
    // Critical: convergence to 1 is too slow for a small iteration cap.
    CHECK_THROWS_AS(extinction_iterate(ok, 1e-12, 100), NumericalError);
}

TEST_CASE("expectation matrices")
{
    const auto M = expectation_matrix(offspring_pgf_at_dfe(build_one_patch(kMassAction)));
    CHECK(M.m(0, 0) == doctest::Approx(1.90662).epsilon(1e-5));
    CHECK(M.m(0, 1) == doctest::Approx(0.01537).epsilon(1e-3));
    CHECK(M.m(1, 0) == doctest::Approx(0.95238).epsilon(1e-5));
    CHECK(M.m(1, 1) == doctest::Approx(0.95238).epsilon(1e-5));
    CHECK(M.m(0, 0) == doctest::Approx((1.3 + 160.0) / 84.6).epsilon(1e-14));

    // Larger root of the characteristic polynomial.
    const double tr = M.m.trace(), det = M.m.determinant();
    const double rho = 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
    CHECK(spectral_radius(M) == doctest::Approx(rho).epsilon(1e-10));
    CHECK(spectral_radius(M) == doctest::Approx(1.92172).epsilon(1e-5));

    const OffspringPgf death({"I"}, {{{"Death of I", 1.0, {0}}}});
    const auto D = expectation_matrix(death);
    CHECK(D.m.rows() == 1);
    CHECK(D.m(0, 0) == 0.0);
}

TEST_CASE("primitivity")
{
    const auto M = expectation_matrix(offspring_pgf_at_dfe(build_two_patch(kTwoPatch)));
    CHECK(is_primitive(M));
    CHECK(primitivity_exponent(M) == 3);
    const ExpectationMatrix I{Eigen::MatrixXd::Identity(2, 2)};
    CHECK_FALSE(is_primitive(I));
    const auto one = expectation_matrix(offspring_pgf_at_dfe(build_one_patch(kMassAction)));
    CHECK(primitivity_exponent(one) == 1);
    const ExpectationMatrix bad{Eigen::MatrixXd::Constant(2, 2, -1.0)};
    CHECK_THROWS_AS(spectral_radius(bad), ValidationError);
}

TEST_CASE("closed-form extinction probabilities")
{
    const auto ma = extinction_closed_form(kMassAction);
    CHECK(ma.q[0] == doctest::Approx(0.0406).epsilon(1e-3));
    CHECK(ma.q[1] == doctest::Approx(0.0495).epsilon(1e-3));
    CHECK(std::abs(ma.q[0] * ma.q[1] - 0.0020) < 5e-5);
    CHECK(ma.residual < 1e-10);

    const auto sat = extinction_closed_form(kSaturating);
    CHECK(std::abs(sat.q[0] - 0.0538) < 5e-5);
    CHECK(std::abs(sat.q[1] - 0.0596) < 5e-5);
    CHECK(std::abs(sat.q[0] * sat.q[1] - 0.0032) < 5e-5);
    CHECK(sat.residual < 1e-10);

    // With m = 1 and a -> 0 the saturating rates reduce to mass action.
    ParamSet1P lim = kMassAction;
    lim.foi = Saturating{1.0, 1.0, 1e-9, 1e-9};
    CHECK(std::abs(extinction_closed_form(lim).q[0] - ma.q[0]) < 1e-6);
}

TEST_CASE("iteration matches the closed forms and known two-patch values")
{
    for (const auto& p : {kMassAction, kSaturating}) {
        const auto it = extinction_iterate(offspring_pgf_at_dfe(build_one_patch(p)));
        CHECK(sup(it.q, extinction_closed_form(p).q) < 1e-10);
    }
    const auto q = extinction_iterate(offspring_pgf_at_dfe(build_two_patch(kTwoPatch)));
    CHECK(q.residual < 1e-12);
    CHECK(std::abs(q.q[0] - 0.0406) < 5e-5);
    CHECK(std::abs(q.q[1] - 0.0501) < 5e-5);
    CHECK(std::abs(q.q[2] - 0.0538) < 5e-5);
    // Independent fixed-point iteration of the four pgfs written out by hand.
    CHECK(q.q[3] == doctest::Approx(0.0650827587).epsilon(1e-9));
}

TEST_CASE("subcritical processes go extinct")
{
    ParamSet1P p = kMassAction;
    p.beta = 0.1;
    p.mu = 1.0;
    const auto q = extinction_iterate(offspring_pgf_at_dfe(build_one_patch(p)));
    CHECK(std::abs(q.q[0] - 1.0) < 1e-10);
    CHECK(std::abs(q.q[1] - 1.0) < 1e-10);
    const auto cf = extinction_closed_form(p);
    CHECK(std::abs(cf.q[0] - 1.0) < 1e-10);
}

TEST_CASE("extinction vector properties on random supercritical parameters")
{
    std::mt19937_64 gen(17);
    int checked = 0;
    while (checked < 200) {
        const bool saturating = checked % 2 == 1;
        const auto p = random_one_patch(gen, saturating);
        const auto pgf = offspring_pgf_at_dfe(build_one_patch(p));
        if (spectral_radius(expectation_matrix(pgf)) < 1.05) continue;
        ++checked;
        const auto it = extinction_iterate(pgf);
        CHECK(it.residual < 1e-10);
        CHECK(sup(it.q, extinction_closed_form(p).q) < 1e-10);

        // monotone iterates
        std::vector<double> u(2, 0.0);
        for (int n = 0; n < 50; ++n) {
            const auto next = pgf.evaluate(u);
            CHECK(next[0] >= u[0]);
            CHECK(next[1] >= u[1]);
            u = next;
        }
        // minimality: any other start in [0,1)^2 converges to a fixed point >= q
        std::uniform_real_distribution<double> start(0.0, 0.999);
        std::vector<double> v{start(gen), start(gen)};
        for (int n = 0; n < 5000; ++n) v = pgf.evaluate(v);
        CHECK(v[0] >= it.q[0] - 1e-10);
        CHECK(v[1] >= it.q[1] - 1e-10);
    }
}

TEST_CASE("criticality sign agreement")
{
    std::mt19937_64 gen(23);
    for (int i = 0; i < 1000; ++i) {
        const auto a = random_one_patch(gen, false);
        const double ra = spectral_radius(expectation_matrix(offspring_pgf_at_dfe(build_one_patch(a))));
        CHECK((ra < 1.0) == (r0(a) < 1.0));
        const auto b = random_two_patch(gen);
        const double rb = spectral_radius(expectation_matrix(offspring_pgf_at_dfe(build_two_patch(b))));
        CHECK((rb < 1.0) == (r0(b) < 1.0));
    }
}

TEST_CASE("saturating criticality follows the branching-rate threshold")
{
    // The branching process sees infection rates m_i/(a_i+1) (one infectious individual present),
    // while R0 uses the linearization m_i/a_i. Its threshold is R0 with that substitution.
    std::mt19937_64 gen(29);
    int disagreements = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto p = random_one_patch(gen, true);
        const auto& s = std::get<Saturating>(p.foi);
        const double sbar = p.beta / p.mu;
        const double r_branch = sbar * (s.m1 / (s.a1 + 1) * p.omega + p.delta * s.m2 / (s.a2 + 1)) / (p.alpha * p.omega);
        const double rho = spectral_radius(expectation_matrix(offspring_pgf_at_dfe(build_one_patch(p))));
        CHECK((rho < 1.0) == (r_branch < 1.0));
        CHECK(r_branch <= r0(p));
        if ((rho < 1.0) != (r0(p) < 1.0)) ++disagreements;
    }
    MESSAGE("saturating parameter sets with sign(1-rho) != sign(1-R0): " << disagreements << " of 1000");
}

TEST_CASE("p0")
{
    ExtinctionVector q;
    q.q = {0.0406, 0.0495};
    const std::vector<std::int64_t> zero{0, 0}, both{1, 1};
    CHECK(p0(q, zero) == 1.0);
    CHECK(std::abs(p0(q, both) - 0.0020) < 5e-5);
    const std::vector<std::int64_t> three{1, 1, 0};
    CHECK_THROWS_AS(p0(q, three), ValidationError);
    ExtinctionVector q4;
    q4.q = {0.0406, 0.0501, 0.0538, 0.0650};
    const std::vector<std::int64_t> last{0, 0, 0, 1};
    CHECK(p0(q4, last) == doctest::Approx(0.0650));
}

TEST_CASE("extinction report")
{
    const auto m = build_one_patch(kMassAction);
    const auto j = extinction_report(m, extinction_closed_form(kMassAction));
    for (const char* key : {"family", "params", "q", "method", "residual", "iters", "r0", "spectral_radius"}) {
        CHECK(j.contains(key));
    }
    CHECK(j["method"] == "closed_form");
    CHECK(j["family"] == "one_patch_ma");
}
