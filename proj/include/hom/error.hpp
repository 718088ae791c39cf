#ifndef HOM_ERROR_HPP
#define HOM_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace hom
{
enum class ErrorCode
{
    // Input / configuration problems.
    InvalidArgument,
    NonFinite,
    GridMismatch,
    Parse,
    Io,
    // Numerical failures.
    OutOfWindow,
    NoRealRoot,
    GridTooCoarse,
    SpanTooShort,
    SpanTooNarrow,
    WindowExceedsTrace,
    ZeroIntensity,
    NotConverged,
    DegenerateData,
    NonPhysical,
    NoPeak,
};

constexpr std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
    case ErrorCode::OutOfWindow: return "OutOfWindow";
    case ErrorCode::NoRealRoot: return "NoRealRoot";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::SpanTooShort: return "SpanTooShort";
    case ErrorCode::SpanTooNarrow: return "SpanTooNarrow";
    case ErrorCode::WindowExceedsTrace: return "WindowExceedsTrace";
    case ErrorCode::ZeroIntensity: return "ZeroIntensity";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::NonPhysical: return "NonPhysical";
    case ErrorCode::NoPeak: return "NoPeak";
    }
    return "Unknown";
}

// True for failures of a numerical procedure on otherwise well-formed input.
constexpr bool is_numerical(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::NonFinite:
    case ErrorCode::GridMismatch:
    case ErrorCode::Parse:
    case ErrorCode::Io:
        return false;
    default:
        return true;
    }
}

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const char* what)
{
    if (!condition)
        throw Error(code, what);
}

} // namespace hom

#endif // HOM_ERROR_HPP
