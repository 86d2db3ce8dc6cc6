#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace wildfire {

// Every failure the library reports carries a stable machine-readable code
// (the class name) next to the human message. The CLI maps InputError to exit
// code 2 and anything else to 1.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Bad data or bad usage supplied by the caller.
class InputError : public Error {
 public:
  using Error::Error;
};

#define WILDFIRE_DEFINE_ERROR(Name, Base)                                    \
  class Name : public Base {                                                 \
   public:                                                                   \
    explicit Name(const std::string& message) : Base(#Name, message) {}      \
  }

// geo
WILDFIRE_DEFINE_ERROR(EmptyStationSet, InputError);
WILDFIRE_DEFINE_ERROR(InvalidReportedCode, InputError);
WILDFIRE_DEFINE_ERROR(InvalidGeometry, InputError);

// ingest
WILDFIRE_DEFINE_ERROR(MalformedHeader, InputError);

// dataset
WILDFIRE_DEFINE_ERROR(NoFuelRecords, InputError);

// ml
WILDFIRE_DEFINE_ERROR(TooFewSamples, InputError);
WILDFIRE_DEFINE_ERROR(EmptySampleSet, InputError);
WILDFIRE_DEFINE_ERROR(DimensionMismatch, InputError);
WILDFIRE_DEFINE_ERROR(KTooLarge, InputError);
WILDFIRE_DEFINE_ERROR(DegenerateTarget, InputError);
WILDFIRE_DEFINE_ERROR(NegativeSize, InputError);
WILDFIRE_DEFINE_ERROR(UnsupportedVersion, InputError);
WILDFIRE_DEFINE_ERROR(CorruptModel, InputError);
WILDFIRE_DEFINE_ERROR(FeatureMismatch, InputError);

// realtime
WILDFIRE_DEFINE_ERROR(ProviderUnavailable, Error);
WILDFIRE_DEFINE_ERROR(IncompleteWindow, Error);
WILDFIRE_DEFINE_ERROR(UnknownCity, InputError);
WILDFIRE_DEFINE_ERROR(AllLocationsFailed, Error);

// service
WILDFIRE_DEFINE_ERROR(UnknownLayer, InputError);
WILDFIRE_DEFINE_ERROR(DateOutOfRange, InputError);

#undef WILDFIRE_DEFINE_ERROR

}  // namespace wildfire
