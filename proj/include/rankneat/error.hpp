#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rankneat {

enum class ErrorKind {
    InvalidArgument,
    Io,
    ParseError,
    DimensionMismatch,
    MissingSession,
    ConstantTrace,
    EmptyResult,
    DivisionByZero,
    EmptyDataset,
    BatchTooLarge,
    ExtinctPopulation,
    TooFewParticipants,
    TooFewValues,
    GridMismatch,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so the CLI can map it
// onto an exit code without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace rankneat
