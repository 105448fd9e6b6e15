#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace memd
{

enum class ErrorCode
{
    LengthMismatch,
    NonFinite,
    RateInvalid,
    TooShort,
    InsufficientExtrema,
    TooFewKnots,
    DuplicateKnotIndex,
    BadScheme,
    TooFewDirections,
    DimensionMismatch,
    AllDirectionsDegenerate,
    WrongChannelCount,
    IndexOutOfRange,
    EmptyWindow,
    BadConfig,
    BadScenario,
    TooFewCrossings,
    ParseError,
    NonUniformSampling,
    WriteError,
};

constexpr std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::RateInvalid: return "RateInvalid";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::InsufficientExtrema: return "InsufficientExtrema";
    case ErrorCode::TooFewKnots: return "TooFewKnots";
    case ErrorCode::DuplicateKnotIndex: return "DuplicateKnotIndex";
    case ErrorCode::BadScheme: return "BadScheme";
    case ErrorCode::TooFewDirections: return "TooFewDirections";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::AllDirectionsDegenerate: return "AllDirectionsDegenerate";
    case ErrorCode::WrongChannelCount: return "WrongChannelCount";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::BadScenario: return "BadScenario";
    case ErrorCode::TooFewCrossings: return "TooFewCrossings";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonUniformSampling: return "NonUniformSampling";
    case ErrorCode::WriteError: return "WriteError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
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

} // namespace memd
