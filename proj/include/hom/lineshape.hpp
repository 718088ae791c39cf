#ifndef HOM_LINESHAPE_HPP
#define HOM_LINESHAPE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <Eigen/Core>

#include "hom/error.hpp"
#include "hom/units.hpp"

namespace hom
{
enum class LineshapeKind
{
    Lorentzian,
    Gaussian,
    Voigt,
};

// Spectral profile. Widths are full widths at half maximum, all in µeV.
// `amplitude` is the peak height above `offset`.
template <typename Scalar>
struct LineshapeParams
{
    LineshapeKind kind = LineshapeKind::Lorentzian;
    Scalar center = 0;
    Scalar lorentzian_fwhm = 0;
    Scalar gaussian_fwhm = 0;
    Scalar amplitude = 1;
    Scalar offset = 0;

    void validate() const
    {
        using std::isfinite;
        require(isfinite(center) && isfinite(lorentzian_fwhm) && isfinite(gaussian_fwhm) &&
                    isfinite(amplitude) && isfinite(offset),
                ErrorCode::NonFinite, "lineshape parameters must be finite");
        require(lorentzian_fwhm >= 0 && gaussian_fwhm >= 0, ErrorCode::InvalidArgument,
                "lineshape widths must be non-negative");
        require(amplitude > 0, ErrorCode::InvalidArgument, "lineshape amplitude must be positive");
        require(offset >= 0, ErrorCode::InvalidArgument, "lineshape offset must be non-negative");
        switch (kind) {
        case LineshapeKind::Lorentzian:
            require(gaussian_fwhm == 0 && lorentzian_fwhm > 0, ErrorCode::InvalidArgument,
                    "Lorentzian profile needs lorentzian_fwhm > 0 and gaussian_fwhm = 0");
            break;
        case LineshapeKind::Gaussian:
            require(lorentzian_fwhm == 0 && gaussian_fwhm > 0, ErrorCode::InvalidArgument,
                    "Gaussian profile needs gaussian_fwhm > 0 and lorentzian_fwhm = 0");
            break;
        case LineshapeKind::Voigt:
            require(lorentzian_fwhm > 0 && gaussian_fwhm > 0, ErrorCode::InvalidArgument,
                    "Voigt profile needs both widths > 0");
            break;
        }
    }
};

template <typename Scalar>
LineshapeParams<Scalar> lorentzian(Scalar center, Scalar fwhm, Scalar amplitude = 1, Scalar offset = 0)
{
    return {LineshapeKind::Lorentzian, center, fwhm, Scalar(0), amplitude, offset};
}

template <typename Scalar>
LineshapeParams<Scalar> gaussian(Scalar center, Scalar fwhm, Scalar amplitude = 1, Scalar offset = 0)
{
    return {LineshapeKind::Gaussian, center, Scalar(0), fwhm, amplitude, offset};
}

template <typename Scalar>
LineshapeParams<Scalar> voigt(Scalar center, Scalar lorentzian_fwhm, Scalar gaussian_fwhm, Scalar amplitude = 1,
                              Scalar offset = 0)
{
    return {LineshapeKind::Voigt, center, lorentzian_fwhm, gaussian_fwhm, amplitude, offset};
}

namespace detail
{
inline void require_finite(double x)
{
    require(std::isfinite(x), ErrorCode::NonFinite, "non-finite energy");
}

template <typename Scalar>
Scalar lorentzian_shape(Scalar dx, Scalar fwhm)
{
    const Scalar hw = fwhm / 2;
    return hw * hw / (dx * dx + hw * hw);
}

template <typename Scalar>
Scalar gaussian_shape(Scalar dx, Scalar fwhm)
{
    return std::exp(-4 * std::numbers::ln2_v<Scalar> * dx * dx / (fwhm * fwhm));
}

// Coefficients of Weideman's rational series for the Faddeeva function,
// w(z) = 2 p(Z) / (L - iz)^2 + 1 / (sqrt(pi) (L - iz)),  Z = (L + iz) / (L - iz).
// Stored highest degree first for Horner evaluation.
template <int N>
struct WeidemanSeries
{
    long double L;
    std::array<long double, N> coeffs;

    WeidemanSeries()
    {
        constexpr int M = 2 * N;
        constexpr int M2 = 2 * M;
        const long double pi = std::numbers::pi_v<long double>;
        L = std::sqrt(N / std::sqrt(2.0L));

        // f sampled at t = L tan(theta/2) with a leading zero, then fftshift-ed.
        std::array<long double, M2> f{};
        f[0] = 0;
        for (int k = -M + 1; k <= M - 1; ++k) {
            const long double t = L * std::tan(k * pi / M / 2);
            f[k + M] = std::exp(-t * t) * (L * L + t * t);
        }
        std::array<long double, M2> shifted{};
        for (int i = 0; i < M2; ++i)
            shifted[i] = f[(i + M2 / 2) % M2];

        // Real part of the DFT, bins 1..N.
        for (int j = 1; j <= N; ++j) {
            long double re = 0;
            for (int n = 0; n < M2; ++n)
                re += shifted[n] * std::cos(2 * pi * j * n / M2);
            coeffs[N - j] = re / M2;
        }
    }
};

} // namespace detail

// Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im z >= 0.
template <typename Scalar>
std::complex<Scalar> faddeeva(std::complex<Scalar> z)
{
    using C = std::complex<Scalar>;
    static const detail::WeidemanSeries<40> series;
    const Scalar L = static_cast<Scalar>(series.L);
    const C iz(-z.imag(), z.real());
    const C denom = C(L) - iz;
    const C Z = (C(L) + iz) / denom;
    C p(0);
    for (long double c : series.coeffs)
        p = p * Z + C(static_cast<Scalar>(c));
    return Scalar(2) * p / (denom * denom) + C(Scalar(1) / std::sqrt(std::numbers::pi_v<Scalar>)) / denom;
}

template <typename Scalar>
Scalar eval_lorentzian(Scalar energy, const LineshapeParams<Scalar>& params)
{
    detail::require_finite(energy);
    require(params.kind == LineshapeKind::Lorentzian, ErrorCode::InvalidArgument, "expected a Lorentzian profile");
    return params.amplitude * detail::lorentzian_shape(energy - params.center, params.lorentzian_fwhm) +
           params.offset;
}

template <typename Scalar>
Scalar eval_gaussian(Scalar energy, const LineshapeParams<Scalar>& params)
{
    detail::require_finite(energy);
    require(params.kind == LineshapeKind::Gaussian, ErrorCode::InvalidArgument, "expected a Gaussian profile");
    return params.amplitude * detail::gaussian_shape(energy - params.center, params.gaussian_fwhm) + params.offset;
}

// Lorentzian ⊗ Gaussian, scaled so the peak equals `amplitude`. Either width
// may be zero (reduces to the other profile); `kind` is not consulted.
template <typename Scalar>
Scalar eval_voigt(Scalar energy, const LineshapeParams<Scalar>& params)
{
    detail::require_finite(energy);
    const Scalar gl = params.lorentzian_fwhm;
    const Scalar gg = params.gaussian_fwhm;
    require(gl > 0 || gg > 0, ErrorCode::InvalidArgument, "Voigt profile with both widths zero");
    const Scalar dx = energy - params.center;
    if (gg == 0)
        return params.amplitude * detail::lorentzian_shape(dx, gl) + params.offset;
    if (gl == 0)
        return params.amplitude * detail::gaussian_shape(dx, gg) + params.offset;

    const Scalar scale = gg / Scalar(kGaussianFwhmPerSigma) * std::numbers::sqrt2_v<Scalar>;
    const Scalar y = gl / 2 / scale;
    const Scalar peak = faddeeva(std::complex<Scalar>(0, y)).real();
    const Scalar value = faddeeva(std::complex<Scalar>(std::abs(dx) / scale, y)).real();
    return params.amplitude * value / peak + params.offset;
}

template <typename Scalar>
Scalar eval_lineshape(Scalar energy, const LineshapeParams<Scalar>& params)
{
    switch (params.kind) {
    case LineshapeKind::Lorentzian: return eval_lorentzian(energy, params);
    case LineshapeKind::Gaussian: return eval_gaussian(energy, params);
    case LineshapeKind::Voigt: return eval_voigt(energy, params);
    }
    return Scalar(0);
}

template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1>
eval_lineshape(const Eigen::ArrayBase<Derived>& energies, const LineshapeParams<typename Derived::Scalar>& params)
{
    using Scalar = typename Derived::Scalar;
    return energies.derived().unaryExpr([&](Scalar e) { return eval_lineshape(e, params); });
}

// Full width at half maximum of the profile shape (offset excluded).
template <typename Scalar>
Scalar profile_fwhm(const LineshapeParams<Scalar>& params)
{
    if (params.gaussian_fwhm == 0)
        return params.lorentzian_fwhm;
    if (params.lorentzian_fwhm == 0)
        return params.gaussian_fwhm;
    LineshapeParams<Scalar> shape = params;
    shape.center = 0;
    shape.amplitude = 1;
    shape.offset = 0;
    Scalar lo = std::max(params.lorentzian_fwhm, params.gaussian_fwhm) / 2 * Scalar(0.999);
    Scalar hi = (params.lorentzian_fwhm + params.gaussian_fwhm) / 2 * Scalar(1.001);
    for (int i = 0; i < 200 && hi - lo > std::numeric_limits<Scalar>::epsilon() * hi; ++i) {
        const Scalar mid = (lo + hi) / 2;
        (eval_voigt(mid, shape) > Scalar(0.5) ? lo : hi) = mid;
    }
    return lo + hi;
}

// Coherence time (ps) of a Lorentzian line of the given FWHM (µeV): 2ħ/Γ.
template <typename Scalar>
Scalar coherence_time_from_lorentzian(Scalar fwhm)
{
    require(std::isfinite(fwhm) && fwhm > 0, ErrorCode::InvalidArgument, "Lorentzian FWHM must be positive");
    return 2 * PhysicalConstants<Scalar>::hbar / fwhm;
}

template <typename Scalar>
Scalar lorentzian_from_coherence_time(Scalar tau_c)
{
    require(std::isfinite(tau_c) && tau_c > 0, ErrorCode::InvalidArgument, "coherence time must be positive");
    return 2 * PhysicalConstants<Scalar>::hbar / tau_c;
}

// Standard deviation of the Gaussian spectral jitter behind a Gaussian FWHM.
template <typename Scalar>
Scalar jitter_sigma_from_gaussian(Scalar fwhm)
{
    require(std::isfinite(fwhm) && fwhm >= 0, ErrorCode::InvalidArgument, "Gaussian FWHM must be non-negative");
    return fwhm / Scalar(kGaussianFwhmPerSigma);
}

} // namespace hom

#endif // HOM_LINESHAPE_HPP
