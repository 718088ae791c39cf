#ifndef HOM_UNITS_HPP
#define HOM_UNITS_HPP

// Canonical unit set: energies in µeV, times in ps, fields in kV/cm.

namespace hom
{
template <typename Scalar = double>
struct PhysicalConstants
{
    // Reduced Planck constant in µeV·ps.
    static constexpr Scalar hbar = Scalar(658.2119569);
};

inline constexpr double kHbar = PhysicalConstants<double>::hbar;

// FWHM / sigma of a Gaussian, 2·sqrt(2·ln 2).
inline constexpr double kGaussianFwhmPerSigma = 2.3548200450309493820;

} // namespace hom

#endif // HOM_UNITS_HPP
