#include "patchproc/powerlaw.hpp"

#include <cmath>

#include "patchproc/error.hpp"

namespace patchproc {

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw ValidationError("fit: x and y have different lengths");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    const auto n = lx.size();
    if (n < 2) throw ValidationError("fit: need at least 2 points with x > 0 and y > 0");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx <= 1e-300) throw ValidationError("fit: degenerate x values (all equal)");

    PowerLawFit fit;
    fit.lambda = sxy / sxx;
    fit.b = std::exp(my - fit.lambda * mx);
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (my + fit.lambda * (lx[i] - mx));
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    fit.points = n;
    return fit;
}

}  // namespace patchproc
