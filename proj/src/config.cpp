#include "hom/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "hom/lineshape.hpp"

namespace hom
{
namespace
{
using nlohmann::json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed)
{
    if (!obj.is_object())
        fail(ErrorCode::Parse, where + " must be a JSON object");
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            fail(ErrorCode::Parse, where + ": unknown key '" + item.key() + "'");
}

double number(const json& obj, const std::string& key, const std::string& where)
{
    if (!obj.contains(key))
        fail(ErrorCode::Parse, where + ": missing '" + key + "'");
    if (!obj.at(key).is_number())
        fail(ErrorCode::Parse, where + ": '" + key + "' must be a number");
    return obj.at(key).get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& where)
{
    return obj.contains(key) ? number(obj, key, where) : fallback;
}

StarkParams<double> parse_stark(const json& j, const std::string& where)
{
    check_keys(j, where, {"e0_ueV", "dipole_ueV_per_kVcm", "polarizability_ueV_per_kVcm2", "field_min_kVcm",
                          "field_max_kVcm"});
    StarkParams<double> s;
    s.e0 = number(j, "e0_ueV", where);
    s.dipole_p = number_or(j, "dipole_ueV_per_kVcm", 0, where);
    s.polarizability_beta = number_or(j, "polarizability_ueV_per_kVcm2", 0, where);
    s.field_min = number(j, "field_min_kVcm", where);
    s.field_max = number(j, "field_max_kVcm", where);
    s.validate();
    return s;
}

EmitterConfig parse_emitter(const std::string& name, const json& j)
{
    const std::string where = "emitter '" + name + "'";
    check_keys(j, where, {"tau_r_ps", "background_b", "tau_c_ps", "lorentzian_fwhm_ueV", "jitter_sigma_ueV",
                          "gaussian_fwhm_ueV", "center_energy_ueV", "intensity", "label", "stark"});
    EmitterConfig e;
    e.name = name;
    auto& m = e.model;
    m.tau_r = number(j, "tau_r_ps", where);
    m.background_b = number_or(j, "background_b", 0, where);

    if (j.contains("tau_c_ps") == j.contains("lorentzian_fwhm_ueV"))
        fail(ErrorCode::Parse, where + ": give exactly one of 'tau_c_ps' or 'lorentzian_fwhm_ueV'");
    m.tau_c = j.contains("tau_c_ps") ? number(j, "tau_c_ps", where)
                                     : coherence_time_from_lorentzian(number(j, "lorentzian_fwhm_ueV", where));

    if (j.contains("jitter_sigma_ueV") && j.contains("gaussian_fwhm_ueV"))
        fail(ErrorCode::Parse, where + ": give at most one of 'jitter_sigma_ueV' or 'gaussian_fwhm_ueV'");
    m.jitter_sigma = j.contains("gaussian_fwhm_ueV")
                         ? jitter_sigma_from_gaussian(number(j, "gaussian_fwhm_ueV", where))
                         : number_or(j, "jitter_sigma_ueV", 0, where);
    m.center_energy = number_or(j, "center_energy_ueV", 0, where);
    m.intensity = number_or(j, "intensity", 1, where);
    if (j.contains("label")) {
        if (!j.at("label").is_string())
            fail(ErrorCode::Parse, where + ": 'label' must be a string");
        e.label = j.at("label").get<std::string>();
    }
    if (j.contains("stark"))
        e.stark = parse_stark(j.at("stark"), where + " stark");
    m.validate();
    return e;
}

Polarization parse_polarization(const json& j, const std::string& where)
{
    if (!j.is_string())
        fail(ErrorCode::Parse, where + ": polarization must be a string");
    const auto s = j.get<std::string>();
    if (s == "parallel")
        return Polarization::Parallel;
    if (s == "orthogonal")
        return Polarization::Orthogonal;
    fail(ErrorCode::Parse, where + ": polarization must be 'parallel' or 'orthogonal'");
}

} // namespace

const EmitterConfig& ExperimentConfig::emitter(const std::string& name) const
{
    const auto it = emitters.find(name);
    if (it == emitters.end())
        fail(ErrorCode::InvalidArgument, "unknown emitter '" + name + "'");
    return it->second;
}

PostselectOptions<double> ExperimentConfig::postselect(bool convolved) const
{
    PostselectOptions<double> opts;
    opts.convolved = convolved;
    opts.window = postselection_window;
    opts.taus = delay_grid();
    return opts;
}

BeamsplitterModel<double> ExperimentConfig::beamsplitter_for(const PairConfig& pair) const
{
    BeamsplitterModel<double> bs = beamsplitter;
    if (pair.overlap_gamma)
        bs.overlap_gamma = *pair.overlap_gamma;
    bs.validate();
    return bs;
}

std::vector<PairConfig> ExperimentConfig::table_pairs() const
{
    if (!pairs.empty())
        return pairs;
    std::vector<PairConfig> all;
    for (auto i = emitters.begin(); i != emitters.end(); ++i)
        for (auto k = std::next(i); k != emitters.end(); ++k)
            all.push_back({i->first, k->first, std::nullopt});
    return all;
}

namespace
{
ExperimentConfig parse_config_impl(const std::string& json_text)
{
    json root;
    try {
        root = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::Parse, std::string("invalid JSON: ") + e.what());
    }
    check_keys(root, "config", {"emitters", "detector", "beamsplitter", "grid", "sweep", "postselection_window_ps",
                                "pairs"});
    ExperimentConfig cfg;

    if (!root.contains("emitters") || !root.at("emitters").is_object() || root.at("emitters").empty())
        fail(ErrorCode::Parse, "config: 'emitters' must be a non-empty object");
    for (const auto& item : root.at("emitters").items())
        cfg.emitters.emplace(item.key(), parse_emitter(item.key(), item.value()));

    if (root.contains("detector")) {
        const auto& d = root.at("detector");
        check_keys(d, "detector", {"fwhm_ps"});
        cfg.detector.fwhm = number(d, "fwhm_ps", "detector");
    }
    cfg.detector.validate();

    if (root.contains("beamsplitter")) {
        const auto& b = root.at("beamsplitter");
        check_keys(b, "beamsplitter", {"transmission", "overlap_gamma", "polarization"});
        cfg.beamsplitter.transmission = number_or(b, "transmission", 0.5, "beamsplitter");
        cfg.beamsplitter.overlap_gamma = number_or(b, "overlap_gamma", 1, "beamsplitter");
        if (b.contains("polarization"))
            cfg.beamsplitter.polarization = parse_polarization(b.at("polarization"), "beamsplitter");
    }
    cfg.beamsplitter.validate();

    if (root.contains("grid")) {
        const auto& g = root.at("grid");
        check_keys(g, "grid", {"half_span_ps", "step_ps"});
        cfg.grid_half_span = number_or(g, "half_span_ps", cfg.grid_half_span, "grid");
        cfg.grid_step = number_or(g, "step_ps", cfg.grid_step, "grid");
    }
    if (root.contains("sweep")) {
        const auto& s = root.at("sweep");
        check_keys(s, "sweep", {"min_ueV", "max_ueV", "step_ueV"});
        cfg.sweep_min = number_or(s, "min_ueV", cfg.sweep_min, "sweep");
        cfg.sweep_max = number_or(s, "max_ueV", cfg.sweep_max, "sweep");
        cfg.sweep_step = number_or(s, "step_ueV", cfg.sweep_step, "sweep");
    }
    cfg.postselection_window = number_or(root, "postselection_window_ps", 0, "config");

    if (root.contains("pairs")) {
        const auto& pairs = root.at("pairs");
        if (!pairs.is_array())
            fail(ErrorCode::Parse, "config: 'pairs' must be an array");
        for (const auto& p : pairs) {
            check_keys(p, "pair", {"a", "b", "overlap_gamma"});
            if (!p.contains("a") || !p.contains("b") || !p.at("a").is_string() || !p.at("b").is_string())
                fail(ErrorCode::Parse, "pair: 'a' and 'b' must be emitter names");
            PairConfig pc{p.at("a").get<std::string>(), p.at("b").get<std::string>(), std::nullopt};
            if (p.contains("overlap_gamma"))
                pc.overlap_gamma = number(p, "overlap_gamma", "pair");
            for (const auto* name : {&pc.a, &pc.b})
                if (!cfg.emitters.count(*name))
                    fail(ErrorCode::Parse, "pair references unknown emitter '" + *name + "'");
            cfg.pairs.push_back(pc);
        }
    }

    // Component invariants must hold after parsing.
    (void)cfg.delay_grid();
    (void)cfg.sweep_grid();
    for (const auto& p : cfg.pairs)
        (void)cfg.beamsplitter_for(p);
    require(std::isfinite(cfg.postselection_window) && cfg.postselection_window >= 0, ErrorCode::Parse,
            "config: postselection_window_ps must be non-negative");
    return cfg;
}
} // namespace

ExperimentConfig parse_config(const std::string& json_text)
{
    try {
        return parse_config_impl(json_text);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Parse)
            throw;
        // Invariant violations inside a component are reported as parse errors.
        fail(ErrorCode::Parse, e.what());
    }
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorCode::Io, "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace hom
