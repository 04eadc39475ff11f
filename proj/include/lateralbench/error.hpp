#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lateral {

// Every failure the library raises carries one of these codes so callers
// (CLI exit-code mapping, retry policies, tests) can react without string
// matching.
enum class errc {
  malformed_file,
  duplicate_id,
  label_out_of_range,
  missing_original,
  duplicate_variant,
  unknown_instance_id,
  duplicate_prediction,
  empty_corpus,
  empty_segment,
  choice_truncated_away,
  shape_mismatch,
  non_finite_loss,
  transport_error,
  auth_error,
  rate_limited,
  incomplete_sweep,
  plan_mismatch,
  io_error,
  bad_config,
};

std::string_view errc_name(errc code);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

inline std::string_view errc_name(errc code) {
  switch (code) {
    case errc::malformed_file: return "MalformedFile";
    case errc::duplicate_id: return "DuplicateId";
    case errc::label_out_of_range: return "LabelOutOfRange";
    case errc::missing_original: return "MissingOriginal";
    case errc::duplicate_variant: return "DuplicateVariant";
    case errc::unknown_instance_id: return "UnknownInstanceId";
    case errc::duplicate_prediction: return "DuplicatePrediction";
    case errc::empty_corpus: return "EmptyCorpus";
    case errc::empty_segment: return "EmptySegment";
    case errc::choice_truncated_away: return "ChoiceTruncatedAway";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::non_finite_loss: return "NonFiniteLoss";
    case errc::transport_error: return "TransportError";
    case errc::auth_error: return "AuthError";
    case errc::rate_limited: return "RateLimited";
    case errc::incomplete_sweep: return "IncompleteSweep";
    case errc::plan_mismatch: return "PlanMismatch";
    case errc::io_error: return "IoError";
    case errc::bad_config: return "BadConfig";
  }
  return "UnknownError";
}

}  // namespace lateral
