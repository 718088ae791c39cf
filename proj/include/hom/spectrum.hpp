#ifndef HOM_SPECTRUM_HPP
#define HOM_SPECTRUM_HPP

#include <cmath>

#include <Eigen/Core>

#include "hom/error.hpp"

namespace hom
{
// Intensities sampled on a uniform energy grid (µeV).
struct Spectrum
{
    Eigen::VectorXd energies;
    Eigen::VectorXd intensities;

    Eigen::Index size() const { return energies.size(); }
    double step() const { return (energies(size() - 1) - energies(0)) / double(size() - 1); }
    double span() const { return energies(size() - 1) - energies(0); }

    void validate() const
    {
        require(energies.size() == intensities.size(), ErrorCode::InvalidArgument,
                "spectrum energies/intensities length mismatch");
        require(size() >= 8, ErrorCode::InvalidArgument, "spectrum needs at least 8 points");
        const double h = step();
        require(std::isfinite(h) && h > 0, ErrorCode::InvalidArgument, "spectrum energies must be increasing");
        for (Eigen::Index i = 0; i < size(); ++i) {
            require(std::isfinite(energies(i)) && std::isfinite(intensities(i)), ErrorCode::NonFinite,
                    "spectrum contains non-finite values");
            require(std::abs(energies(i) - (energies(0) + h * double(i))) <= 1e-6 * h, ErrorCode::InvalidArgument,
                    "spectrum energy grid is not uniform");
            require(intensities(i) >= 0, ErrorCode::InvalidArgument, "spectrum intensities must be non-negative");
        }
    }
};

} // namespace hom

#endif // HOM_SPECTRUM_HPP
