#include "netcvx/error.hpp"

namespace netcvx {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::UnknownEndpoint: return "UnknownEndpoint";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidBox: return "InvalidBox";
    case ErrorCode::UnknownEdge: return "UnknownEdge";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::RowDimensionMismatch: return "RowDimensionMismatch";
    case ErrorCode::UnknownAtom: return "UnknownAtom";
    case ErrorCode::UnsupportedComposite: return "UnsupportedComposite";
    case ErrorCode::UnboundedObjective: return "UnboundedObjective";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DuplicateBox: return "DuplicateBox";
    case ErrorCode::InvalidRho: return "InvalidRho";
    case ErrorCode::WarmStartDimMismatch: return "WarmStartDimMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::OddNodeCount: return "OddNodeCount";
    case ErrorCode::NotQuadratic: return "NotQuadratic";
    case ErrorCode::SingularSystem: return "SingularSystem";
  }
  return "Unknown";
}

}  // namespace netcvx
