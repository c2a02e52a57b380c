#include "umivr/error.hpp"

namespace umivr {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroVector: return "zero_vector";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::EmptyIndex: return "empty_index";
    case ErrorCode::DuplicateId: return "duplicate_id";
    case ErrorCode::UnknownId: return "unknown_id";
    case ErrorCode::Io: return "io";
    case ErrorCode::FormatVersionMismatch: return "format_version_mismatch";
    case ErrorCode::EmptyInput: return "empty_input";
    case ErrorCode::TooFewScores: return "too_few_scores";
    case ErrorCode::LengthMismatch: return "length_mismatch";
    case ErrorCode::NotADistribution: return "not_a_distribution";
    case ErrorCode::FrameTooSmall: return "frame_too_small";
    case ErrorCode::EmptyVideo: return "empty_video";
    case ErrorCode::TooFewPoints: return "too_few_points";
    case ErrorCode::UnboundPlaceholder: return "unbound_placeholder";
    case ErrorCode::BackendTimeout: return "backend_timeout";
    case ErrorCode::BackendRefusal: return "backend_refusal";
    case ErrorCode::BackendFailure: return "backend_failure";
    case ErrorCode::ParseFailure: return "parse_failure";
    case ErrorCode::EmptyGeneration: return "empty_generation";
    case ErrorCode::EmptyQuery: return "empty_query";
    case ErrorCode::WrongStatus: return "wrong_status";
    case ErrorCode::MissingAnswer: return "missing_answer";
    case ErrorCode::RoundOutOfRange: return "round_out_of_range";
    case ErrorCode::MissingTarget: return "missing_target";
    case ErrorCode::InvalidArgument: return "invalid_argument";
  }
  return "unknown";
}

}  // namespace umivr
