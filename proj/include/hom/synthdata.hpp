#ifndef HOM_SYNTHDATA_HPP
#define HOM_SYNTHDATA_HPP

#include <cstdint>
#include <limits>

#include "hom/correlation.hpp"
#include "hom/lineshape.hpp"
#include "hom/spectrum.hpp"

namespace hom
{
// xoshiro256** 1.0 (Blackman & Vigna), state filled from the seed with
// splitmix64. The integer stream is identical on every platform.
class Xoshiro256StarStar
{
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256StarStar(std::uint64_t seed);

    result_type operator()();

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Standard normal via Box-Muller, two uniforms per draw, no cached spare.
    double normal();

private:
    std::uint64_t s_[4];
};

enum class NoiseModel
{
    // Expected bin counts, no sampling.
    None,
    // Event-by-event sampling; bin counts carry counting noise.
    Poisson,
};

struct SynthConfig
{
    std::uint64_t seed = 1;
    std::int64_t n_events = 100000;
    double window = 8000;     // full histogram span (ps), centred on zero
    double bin_width = 32;    // ps
    NoiseModel noise_model = NoiseModel::Poisson;

    void validate() const;
};

// Bin centres of the histogram: an odd number of bins, one centred on zero,
// covering at most `window`.
Vector<double> histogram_bin_centers(const SynthConfig& cfg);

// Coincidence histogram drawn from the density ∝ ideal trace. Delays are
// drawn by inverse CDF of the piecewise-linear trace over the window widened
// by 8σ of the detector response on each side (so jitter scatters events into
// the edge bins as well as out of them), then blurred by Gaussian detector
// jitter and binned. Events landing outside the window are dropped.
// This shapes a histogram; it does not simulate a photon stream.
CorrelationTrace<double> sample_coincidences(const CorrelationTrace<double>& ideal, const DetectorResponse<double>& det,
                                             const SynthConfig& cfg);

// Model spectrum on `n_points` samples spanning `span` µeV around the centre,
// each multiplied by (1 + relative_noise·N(0,1)) and clipped at zero.
Spectrum make_spectrum(const LineshapeParams<double>& params, int n_points, double span, double relative_noise,
                       std::uint64_t seed);

} // namespace hom

#endif // HOM_SYNTHDATA_HPP
