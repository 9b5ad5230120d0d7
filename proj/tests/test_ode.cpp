#include <cmath>
#include <sstream>

#include "doctest.h"
#include "patchproc/error.hpp"
#include "patchproc/ode.hpp"
#include "patchproc/reproduction.hpp"

using namespace patchproc;

namespace {

const ParamSet1P kDemo{12.0, 0.05, 3.3, 1.3, 4.0, MassAction{}};
const ParamSet2P kTwoPatch{4.0, 0.05, 2.4, 0.04, 3.3, 1.3, 4.0, 3.0};

}  // namespace

TEST_CASE("the DFE is a constant trajectory")
{
    for (const auto& p : {ParamSet(kDemo), ParamSet(kTwoPatch)}) {
        const auto m = build_model(p);
        const auto y0 = dfe(p);
        const double abs_tol = 1e-10;
        const auto traj = integrate(m, y0, 50.0, 1e-8, abs_tol);
        for (const auto& y : traj.states) {
            for (std::size_t j = 0; j < y.size(); ++j) CHECK(std::abs(y[j] - y0[j]) < abs_tol);
        }
    }
}

TEST_CASE("trajectory shape")
{
    const auto m = build_one_patch(kDemo);
    const RealVec y0{240.0, 1.0, 0.0};
    const auto traj = integrate(m, y0, 40.0, 1e-8, 1e-10);
    CHECK(traj.times.size() >= 201);
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == doctest::Approx(40.0));
    for (std::size_t i = 1; i < traj.times.size(); ++i) CHECK(traj.times[i] > traj.times[i - 1]);
    for (const auto& y : traj.states) {
        for (double v : y) CHECK(v >= -1e-9);
    }
    // R0 > 1: the infection invades from a single infected.
    CHECK(traj.states[5][1] > 1.0);
}

TEST_CASE("halving the tolerances moves the final state by less than the coarse tolerance")
{
    const auto m = build_two_patch(kTwoPatch);
    const RealVec y0{80.0, 1.0, 0.0, 60.0, 0.0, 0.0};
    const double rel = 1e-7, abs = 1e-9;
    // the invasion phase amplifies local errors; compare once the trajectory has settled
    const auto coarse = integrate(m, y0, 300.0, rel, abs).final_state();
    const auto fine = integrate(m, y0, 300.0, rel / 2, abs / 2).final_state();
    for (std::size_t j = 0; j < coarse.size(); ++j) {
        CHECK(std::abs(coarse[j] - fine[j]) < rel * std::max(1.0, std::abs(fine[j])));
    }
}

TEST_CASE("invalid inputs are rejected")
{
    const auto m = build_one_patch(kDemo);
    const RealVec y0{240.0, 1.0, 0.0};
    CHECK_THROWS_AS(integrate(m, y0, 0.0, 1e-8, 1e-10), ValidationError);
    CHECK_THROWS_AS(integrate(m, y0, 10.0, 0.0, 1e-10), ValidationError);
    CHECK_THROWS_AS(integrate(m, y0, 10.0, 1e-8, 0.5), ValidationError);
    CHECK_THROWS_AS(integrate(m, RealVec{240.0, -1.0, 0.0}, 10.0, 1e-8, 1e-10), ValidationError);
    CHECK_THROWS_AS(integrate(m, RealVec{240.0, 1.0}, 10.0, 1e-8, 1e-10), ValidationError);
}

TEST_CASE("vector field is the stoichiometry-weighted sum of rates")
{
    const auto m = build_one_patch(kDemo);
    const RealVec y{10.0, 2.0, 3.0};
    const auto f = vector_field(m, y);
    CHECK(f[0] == doctest::Approx(10.0 * (12.0 - 0.05 * 10.0) - 10.0 * 5.0));
    CHECK(f[1] == doctest::Approx(10.0 * 5.0 - 3.3 * 2.0));
    CHECK(f[2] == doctest::Approx(1.3 * 2.0 - 4.0 * 3.0));
}

TEST_CASE("trajectory CSV")
{
    const auto m = build_one_patch(kDemo);
    const auto traj = integrate(m, RealVec{240.0, 1.0, 0.0}, 1.0, 1e-8, 1e-10);
    std::ostringstream os;
    write_trajectory_csv(os, m, traj);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "t,S,I,V");
    std::size_t lines = 0;
    for (std::string line; std::getline(is, line);) ++lines;
    CHECK(lines == traj.times.size());
}
