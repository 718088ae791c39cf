#ifndef HOM_CSV_IO_HPP
#define HOM_CSV_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hom/correlation.hpp"
#include "hom/spectrum.hpp"
#include "hom/visibility.hpp"

namespace hom
{
// Two-or-more column numeric CSV: one header line (required), `#` comment
// lines and blank lines ignored anywhere.
struct CsvColumns
{
    std::vector<std::string> header;
    std::vector<Eigen::VectorXd> columns;
};

CsvColumns read_csv(std::istream& in, const std::vector<std::string>& expected_header);

// Shortest decimal form that parses back to the same double.
std::string format_number(double value);

Spectrum read_spectrum_csv(std::istream& in);
Spectrum read_spectrum_csv(const std::filesystem::path& path);
void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum);

CorrelationTrace<double> read_trace_csv(std::istream& in);
CorrelationTrace<double> read_trace_csv(const std::filesystem::path& path);
void write_trace_csv(std::ostream& out, const CorrelationTrace<double>& trace);

VisibilityCurve<double> read_curve_csv(std::istream& in);
VisibilityCurve<double> read_curve_csv(const std::filesystem::path& path);
void write_curve_csv(std::ostream& out, const VisibilityCurve<double>& curve);

} // namespace hom

#endif // HOM_CSV_IO_HPP
