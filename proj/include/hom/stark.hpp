#ifndef HOM_STARK_HPP
#define HOM_STARK_HPP

#include <cmath>
#include <optional>
#include <string>

#include "hom/error.hpp"

namespace hom
{
// Quadratic Stark map E(F) = e0 + p·F + β·F², energies in µeV, fields in kV/cm.
template <typename Scalar>
struct StarkParams
{
    Scalar e0 = 0;
    Scalar dipole_p = 0;
    Scalar polarizability_beta = 0;
    Scalar field_min = -500;
    Scalar field_max = 0;

    void validate() const
    {
        using std::isfinite;
        require(isfinite(e0) && isfinite(dipole_p) && isfinite(polarizability_beta) && isfinite(field_min) &&
                    isfinite(field_max),
                ErrorCode::NonFinite, "Stark parameters must be finite");
        require(field_min < field_max, ErrorCode::InvalidArgument, "Stark field window is empty");
    }

    bool in_window(Scalar field) const { return field >= field_min && field <= field_max; }
};

template <typename Scalar>
Scalar energy_at_field(const StarkParams<Scalar>& params, Scalar field)
{
    require(std::isfinite(field), ErrorCode::NonFinite, "field must be finite");
    if (!params.in_window(field))
        fail(ErrorCode::OutOfWindow, "field " + std::to_string(field) + " kV/cm outside the allowed window");
    return params.e0 + field * (params.dipole_p + params.polarizability_beta * field);
}

// Field that puts the line at `target`. When both roots of the parabola lie in
// the window the one closer to flat band (smaller |F|) is returned.
template <typename Scalar>
Scalar field_for_energy(const StarkParams<Scalar>& params, Scalar target)
{
    require(std::isfinite(target), ErrorCode::NonFinite, "target energy must be finite");
    const Scalar a = params.polarizability_beta;
    const Scalar b = params.dipole_p;
    const Scalar c = params.e0 - target;

    std::optional<Scalar> r1;
    std::optional<Scalar> r2;
    if (a == 0) {
        if (b == 0) {
            if (c != 0)
                fail(ErrorCode::NoRealRoot, "energy does not depend on field and differs from target");
            r1 = Scalar(0);
        } else {
            r1 = -c / b;
        }
    } else {
        const Scalar disc = b * b - 4 * a * c;
        if (disc < 0)
            fail(ErrorCode::NoRealRoot, "target energy lies beyond the extremum of the Stark parabola");
        // Cancellation-free pair of roots.
        const Scalar q = -(b + std::copysign(std::sqrt(disc), b)) / 2;
        if (q == 0) {
            r1 = Scalar(0);
        } else {
            r1 = q / a;
            r2 = c / q;
        }
    }

    std::optional<Scalar> best;
    for (const auto& r : {r1, r2}) {
        if (r && params.in_window(*r) && (!best || std::abs(*r) < std::abs(*best)))
            best = r;
    }
    if (!best)
        fail(ErrorCode::OutOfWindow, "no field inside the window reaches the target energy");
    return *best;
}

template <typename Scalar>
struct TuningResult
{
    Scalar field = 0;
    // Energy left between the tuned line and the fixed line at `field`.
    Scalar residual_detuning = 0;
};

// Tunes an emitter onto the (fixed) energy of a reference emitter.
template <typename Scalar>
TuningResult<Scalar> tune_pair(Scalar fixed_energy, const StarkParams<Scalar>& tunable)
{
    const Scalar field = field_for_energy(tunable, fixed_energy);
    return {field, energy_at_field(tunable, field) - fixed_energy};
}

} // namespace hom

#endif // HOM_STARK_HPP
