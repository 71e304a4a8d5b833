#include "rankneat/error.hpp"

namespace rankneat {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Io: return "Io";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::MissingSession: return "MissingSession";
        case ErrorKind::ConstantTrace: return "ConstantTrace";
        case ErrorKind::EmptyResult: return "EmptyResult";
        case ErrorKind::DivisionByZero: return "DivisionByZero";
        case ErrorKind::EmptyDataset: return "EmptyDataset";
        case ErrorKind::BatchTooLarge: return "BatchTooLarge";
        case ErrorKind::ExtinctPopulation: return "ExtinctPopulation";
        case ErrorKind::TooFewParticipants: return "TooFewParticipants";
        case ErrorKind::TooFewValues: return "TooFewValues";
        case ErrorKind::GridMismatch: return "GridMismatch";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace rankneat
