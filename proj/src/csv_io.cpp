#include "hom/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hom
{
namespace
{
std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ','))
        cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

double parse_number(const std::string& cell, std::size_t line_no)
{
    double value = 0;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    if (!cell.empty() && *begin == '+')
        ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": not a number: '" + cell + "'");
    return value;
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorCode::Io, "cannot open " + path.string());
    return in;
}

void write_columns(std::ostream& out, const char* header, const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    out << header << '\n';
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out << format_number(a(i)) << ',' << format_number(b(i)) << '\n';
}

} // namespace

CsvColumns read_csv(std::istream& in, const std::vector<std::string>& expected_header)
{
    CsvColumns table;
    std::vector<std::vector<double>> rows;
    std::string raw;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        auto cells = split(line);
        if (!have_header) {
            if (cells != expected_header) {
                std::string want;
                for (const auto& h : expected_header)
                    want += (want.empty() ? "" : ",") + h;
                fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected header '" + want + "'");
            }
            table.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != expected_header.size())
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(expected_header.size()) + " columns");
        std::vector<double> row;
        for (const auto& c : cells)
            row.push_back(parse_number(c, line_no));
        rows.push_back(std::move(row));
    }
    if (!have_header)
        fail(ErrorCode::Parse, "missing CSV header");
    table.columns.assign(expected_header.size(), Eigen::VectorXd(static_cast<Eigen::Index>(rows.size())));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            table.columns[c](static_cast<Eigen::Index>(r)) = rows[r][c];
    return table;
}

std::string format_number(double value)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

Spectrum read_spectrum_csv(std::istream& in)
{
    auto table = read_csv(in, {"energy_ueV", "intensity"});
    Spectrum spec{std::move(table.columns[0]), std::move(table.columns[1])};
    spec.validate();
    return spec;
}

Spectrum read_spectrum_csv(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_spectrum_csv(in);
}

void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum)
{
    write_columns(out, "energy_ueV,intensity", spectrum.energies, spectrum.intensities);
}

CorrelationTrace<double> read_trace_csv(std::istream& in)
{
    auto table = read_csv(in, {"tau_ps", "g2"});
    CorrelationTrace<double> trace{std::move(table.columns[0]), std::move(table.columns[1])};
    trace.validate();
    return trace;
}

CorrelationTrace<double> read_trace_csv(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_trace_csv(in);
}

void write_trace_csv(std::ostream& out, const CorrelationTrace<double>& trace)
{
    write_columns(out, "tau_ps,g2", trace.taus, trace.values);
}

VisibilityCurve<double> read_curve_csv(std::istream& in)
{
    auto table = read_csv(in, {"detuning_ueV", "visibility"});
    VisibilityCurve<double> curve{std::move(table.columns[0]), std::move(table.columns[1])};
    curve.validate();
    return curve;
}

VisibilityCurve<double> read_curve_csv(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_curve_csv(in);
}

void write_curve_csv(std::ostream& out, const VisibilityCurve<double>& curve)
{
    write_columns(out, "detuning_ueV,visibility", curve.detunings, curve.visibilities);
}

} // namespace hom
