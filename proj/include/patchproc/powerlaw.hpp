#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace patchproc {

/// y = b * x^lambda fitted by ordinary least squares on (ln x, ln y).
struct PowerLawFit {
    double b = 0.0;
    double lambda = 0.0;
    double r_squared = 0.0;  ///< of the log-log regression; 1 when all ln y coincide
    std::size_t points = 0;  ///< points actually used (x > 0 and y > 0)
};

/// Points with x <= 0 or y <= 0 are skipped. Throws ValidationError with fewer than two usable
/// points or when every usable x is the same.
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

}  // namespace patchproc
