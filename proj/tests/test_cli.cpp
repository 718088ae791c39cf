#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "cli.hpp"
#include "hom/config.hpp"
#include "hom/csv_io.hpp"
#include "hom/lineshape.hpp"

using namespace hom;
namespace fs = std::filesystem;

namespace
{
struct Result
{
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "homtool");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

const std::string config = (fs::path(HOM_SOURCE_DIR) / "configs" / "dot1.json").string();

struct TempDir
{
    fs::path path;
    TempDir()
    {
        std::random_device rd;
        path = fs::temp_directory_path() / ("homtool_test_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}
} // namespace

TEST_CASE("table rows for the demo configuration")
{
    const auto r = run_cli({"table", "--config", config, "--csv"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"a", "b", "gamma", "g2_0_a", "g2_0_b", "visibility_raw",
                                              "visibility_ideal"});

    // DotA with Dot1.
    CHECK(rows[1][0] == "DotA");
    CHECK(std::stod(rows[1][3]) == 0.05);
    CHECK(std::stod(rows[1][4]) == 0.0);
    CHECK(std::stod(rows[1][6]) == doctest::Approx((0.5125 - 0.0125) / 0.5125).epsilon(1e-10));
    const auto cfg = load_config(config);
    const auto pair = cfg.table_pairs()[0];
    const double raw = postselected_visibility(cfg.emitter("DotA").model, cfg.emitter("Dot1").model,
                                               cfg.beamsplitter_for(pair), 0.0, cfg.detector, cfg.postselect(true));
    CHECK(std::stod(rows[1][5]) == raw);
    CHECK(std::stod(rows[1][5]) < std::stod(rows[1][6]));

    // DotA with itself: both arms carry background 0.05.
    // Orthogonal 0.5 + 2*0.25*0.05 = 0.525, parallel 0.025.
    CHECK(std::stod(rows[2][6]) == doctest::Approx((0.525 - 0.025) / 0.525).epsilon(1e-10));

    // Distinguishable photons.
    CHECK(std::stod(rows[3][2]) == 0.0);
    CHECK(std::stod(rows[3][5]) == 0.0);
    CHECK(std::stod(rows[3][6]) == 0.0);

    const auto aligned = run_cli({"table", "--config", config});
    CHECK(aligned.code == 0);
    CHECK(aligned.out.find("V_ideal") != std::string::npos);
    CHECK(aligned.out.find("0.9756") != std::string::npos);
}

TEST_CASE("exit codes")
{
    TempDir tmp;
    CHECK(run_cli({"table", "--config", "/nonexistent/config.json"}).code == 1);
    CHECK(run_cli({"lineshape-fit", "/nonexistent/spectrum.csv"}).code == 1);
    CHECK(run_cli({"table", "--config", config, "--bogus"}).code == 1);
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"--help"}).code == 0);

    {
        std::ofstream flat(tmp.file("flat.csv"));
        flat << "energy_ueV,intensity\n";
        for (int i = 0; i < 40; ++i)
            flat << i << ",2\n";
    }
    const auto r = run_cli({"lineshape-fit", tmp.file("flat.csv")});
    CHECK(r.code == 2);
    CHECK(r.err.find("DegenerateData") != std::string::npos);

    CHECK(run_cli({"stark", "--config", config, "--emitter", "Dot1", "--target", "1000000"}).code == 2);
    CHECK(run_cli({"stark", "--config", config, "--emitter", "Dot1"}).code == 1);
    CHECK(run_cli({"stark", "--config", config, "--emitter", "DotA", "--field", "0"}).code == 1);
    CHECK(run_cli({"g2", "--config", config, "--emitter", "Nobody"}).code == 1);
}

TEST_CASE("synthesised spectrum fits back through the command line")
{
    TempDir tmp;
    const auto s = run_cli({"synth", "spectrum", "--kind", "voigt", "--center", "0", "--lorentzian", "2.2",
                            "--gaussian", "6.8", "--points", "200", "--span", "60", "--noise", "0.02", "--seed", "3",
                            "-o", tmp.file("spec.csv")});
    REQUIRE(s.code == 0);
    CHECK(s.out.empty());
    const auto f = run_cli({"lineshape-fit", tmp.file("spec.csv"), "--kind", "voigt", "--weights", "relative",
                            "--residuals", tmp.file("res.csv")});
    REQUIRE(f.code == 0);
    const auto report = nlohmann::json::parse(f.out);
    CHECK(report["converged"].get<bool>());
    const double l = report["parameters"]["lorentzian_fwhm"]["value"].get<double>();
    const double g = report["parameters"]["gaussian_fwhm"]["value"].get<double>();
    CHECK(std::abs(l - 2.2) <= 0.05 * 2.2);
    CHECK(std::abs(g - 6.8) <= 0.05 * 6.8);
    CHECK(report["parameters"]["lorentzian_fwhm"]["stderr"].get<double>() > 0);
    CHECK(report["fwhm_ueV"].get<double>() == doctest::Approx(profile_fwhm(voigt(0.0, l, g))).epsilon(1e-9));

    std::ifstream res(tmp.file("res.csv"));
    const auto residuals = read_csv(res, {"energy_ueV", "residual"});
    CHECK(residuals.columns[0].size() == 200);

    CHECK(run_cli({"lineshape-fit", tmp.file("spec.csv"), "--weights", "bogus"}).code == 1);
    CHECK(run_cli({"synth", "spectrum", "--lorentzian", "2"}).code == 1);
}

TEST_CASE("trace outputs re-parse and synthetic histograms are deterministic")
{
    TempDir tmp;
    REQUIRE(run_cli({"g2", "--config", config, "--emitter", "DotA", "-o", tmp.file("g2.csv")}).code == 0);
    const auto g2 = read_trace_csv(fs::path(tmp.file("g2.csv")));
    CHECK(g2.size() == 16001);
    CHECK(g2.values(8000) > 0.05);

    const auto ideal = run_cli({"g2", "--config", config, "--emitter", "DotA", "--ideal"});
    REQUIRE(ideal.code == 0);
    std::istringstream ideal_in(ideal.out);
    CHECK(read_trace_csv(ideal_in).values(8000) == doctest::Approx(0.05).epsilon(1e-12));

    const auto hom = run_cli({"hom", "--config", config, "--a", "DotA", "--b", "Dot1", "--ideal", "--polarization",
                              "orthogonal"});
    REQUIRE(hom.code == 0);
    std::istringstream hom_in(hom.out);
    CHECK(read_trace_csv(hom_in).values(8000) == doctest::Approx(0.5125).epsilon(1e-12));

    const auto vis = run_cli({"visibility", "--config", config, "--a", "DotA", "--b", "Dot1", "--sweep", "-10:10:1"});
    REQUIRE(vis.code == 0);
    std::istringstream vis_in(vis.out);
    const auto curve = read_curve_csv(vis_in);
    CHECK(curve.size() == 21);
    CHECK(vis.out.find("# half_max_fwhm_ueV=") != std::string::npos);
    const auto at = run_cli({"visibility", "--config", config, "--a", "DotA", "--b", "Dot1", "--at", "0", "--ideal"});
    REQUIRE(at.code == 0);
    CHECK(nlohmann::json::parse(at.out)["visibility"].get<double>() ==
          doctest::Approx((0.5125 - 0.0125) / 0.5125).epsilon(1e-10));

    const std::vector<std::string> synth{"synth", "g2", "--config", config, "--emitter", "DotA", "--events", "20000",
                                         "--seed", "9", "--window", "6000"};
    const auto first = run_cli(synth);
    const auto second = run_cli(synth);
    REQUIRE(first.code == 0);
    CHECK(first.out == second.out);
    auto other = synth;
    other[9] = "10";
    CHECK(run_cli(other).out != first.out);

    const auto stark = run_cli({"stark", "--config", config, "--emitter", "Dot1", "--tune-to", "DotA"});
    REQUIRE(stark.code == 0);
    CHECK(nlohmann::json::parse(stark.out)["field_kVcm"].get<double>() == doctest::Approx(-50.0).epsilon(1e-3));
}
