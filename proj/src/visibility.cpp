#include "hom/visibility.hpp"

#include "hom/fitting.hpp"

namespace hom
{
double curve_fwhm(const VisibilityCurve<double>& curve)
{
    return fit_lorentzian_peak(curve).params.fwhm;
}

} // namespace hom
