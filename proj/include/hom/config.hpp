#ifndef HOM_CONFIG_HPP
#define HOM_CONFIG_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hom/correlation.hpp"
#include "hom/stark.hpp"
#include "hom/visibility.hpp"

namespace hom
{
struct EmitterConfig
{
    std::string name;
    std::string label;  // free-form state label, e.g. "X-"
    EmitterModel<double> model;
    std::optional<StarkParams<double>> stark;
};

struct PairConfig
{
    std::string a;
    std::string b;
    std::optional<double> overlap_gamma;  // overrides the beamsplitter default
};

// Experiment description. Units are fixed by the JSON key suffixes:
// _ps, _ueV, _kVcm.
struct ExperimentConfig
{
    std::map<std::string, EmitterConfig> emitters;
    DetectorResponse<double> detector;
    BeamsplitterModel<double> beamsplitter;
    double grid_half_span = 16000;
    double grid_step = 2;
    double sweep_min = -30;
    double sweep_max = 30;
    double sweep_step = 0.5;
    double postselection_window = 0;
    std::vector<PairConfig> pairs;

    const EmitterConfig& emitter(const std::string& name) const;
    Vector<double> delay_grid() const { return make_delay_grid(grid_half_span, grid_step); }
    Vector<double> sweep_grid() const { return make_sweep_grid(sweep_min, sweep_max, sweep_step); }
    PostselectOptions<double> postselect(bool convolved) const;
    BeamsplitterModel<double> beamsplitter_for(const PairConfig& pair) const;
    // Configured pairs, or every unordered pair of distinct emitters if none.
    std::vector<PairConfig> table_pairs() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

} // namespace hom

#endif // HOM_CONFIG_HPP
