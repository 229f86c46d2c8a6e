#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace medirl {

enum class ErrorCode {
  invalid_spec,
  invalid_gamma,
  index_out_of_range,
  point_out_of_bounds,
  width_mismatch,
  dimension_mismatch,
  non_finite_input,
  no_retained_forward,
  non_finite_gradient,
  io_error,
  corrupt_file,
  non_finite_rewards,
  invalid_distribution,
  empty_demo_set,
  ragged_lengths,
  length_mismatch,
  kind_mismatch,
  invalid_config,
  training_aborted,
  schema_error,
  non_monotone_timestamps,
  empty_test_set,
  variant_inapplicable,
  invalid_demo,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_spec: return "invalid-spec";
    case ErrorCode::invalid_gamma: return "invalid-gamma";
    case ErrorCode::index_out_of_range: return "index-out-of-range";
    case ErrorCode::point_out_of_bounds: return "point-out-of-bounds";
    case ErrorCode::width_mismatch: return "width-mismatch";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::non_finite_input: return "non-finite-input";
    case ErrorCode::no_retained_forward: return "no-retained-forward";
    case ErrorCode::non_finite_gradient: return "non-finite-gradient";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::corrupt_file: return "corrupt-file";
    case ErrorCode::non_finite_rewards: return "non-finite-rewards";
    case ErrorCode::invalid_distribution: return "invalid-distribution";
    case ErrorCode::empty_demo_set: return "empty-demo-set";
    case ErrorCode::ragged_lengths: return "ragged-lengths";
    case ErrorCode::length_mismatch: return "length-mismatch";
    case ErrorCode::kind_mismatch: return "kind-mismatch";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::training_aborted: return "training-aborted";
    case ErrorCode::schema_error: return "schema-error";
    case ErrorCode::non_monotone_timestamps: return "non-monotone-timestamps";
    case ErrorCode::empty_test_set: return "empty-test-set";
    case ErrorCode::variant_inapplicable: return "variant-inapplicable";
    case ErrorCode::invalid_demo: return "invalid-demo";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace medirl
