#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace perturbreg {

/// Failure categories raised by the library. Conditions that only flag a
/// result (q above the safety threshold, alpha below the grid step) are
/// reported through result fields instead.
enum class Errc {
  invalid_argument,
  dimension_mismatch,
  singular_system,
  q_out_of_range,
  degenerate_delta,
  degenerate_gram,
  biorthogonality_failed,
  window_too_narrow,
  unknown_example,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::singular_system: return "SingularSystem";
    case Errc::q_out_of_range: return "QOutOfRange";
    case Errc::degenerate_delta: return "DegenerateDelta";
    case Errc::degenerate_gram: return "DegenerateGram";
    case Errc::biorthogonality_failed: return "BiorthogonalityFailed";
    case Errc::window_too_narrow: return "WindowTooNarrow";
    case Errc::unknown_example: return "UnknownExample";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

namespace detail {

inline void require(bool condition, Errc code, const char* message) {
  if (!condition) throw Error(code, message);
}

}  // namespace detail
}  // namespace perturbreg
