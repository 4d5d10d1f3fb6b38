#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace hybridgaze
{

enum class ErrorCode
{
  InvalidLength,
  Dimension,
  WeightFloor,
  Singular,
  MissingCr,
  DegenerateCalibration,
  InvalidWindow,
  InvalidSegment,
  DegenerateDistribution,
  Schema,
  Io,
};

/// Library error. `index()` carries the offending sample or line when known.
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& what, std::optional<std::size_t> index = std::nullopt)
    : std::runtime_error(what), code_(code), index_(index)
  {
  }

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

  /// True for failures of the numerics rather than of the input data.
  bool numerical() const noexcept
  {
    return code_ == ErrorCode::Singular || code_ == ErrorCode::DegenerateCalibration ||
           code_ == ErrorCode::DegenerateDistribution;
  }

private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

} // namespace hybridgaze
