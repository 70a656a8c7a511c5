// Error codes shared across the library. Every recoverable failure carries
// one of these codes so callers (and the CLI) can map it to an exit status.

#ifndef MSCM_ERROR_HPP
#define MSCM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mscm {

enum class Errc {
  // input / io
  io_error,
  bad_image,
  unsupported_channels,
  no_records_found,
  // protocol
  dimension_mismatch,
  empty_model_set,
  missing_part,
  unpaired_cultivar,
  not_enough_classes,
  // numeric / geometric
  empty_foreground,
  degenerate_region,
  too_few_points,
  out_of_range,
  degenerate_chord,
  scale_too_fine,
  all_zero_signature,
  zero_statistic,
  shape_out_of_canvas,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

inline const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::io_error: return "IoError";
    case Errc::bad_image: return "BadImage";
    case Errc::unsupported_channels: return "UnsupportedChannels";
    case Errc::no_records_found: return "NoRecordsFound";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::empty_model_set: return "EmptyModelSet";
    case Errc::missing_part: return "MissingPart";
    case Errc::unpaired_cultivar: return "UnpairedCultivar";
    case Errc::not_enough_classes: return "NotEnoughClasses";
    case Errc::empty_foreground: return "EmptyForeground";
    case Errc::degenerate_region: return "DegenerateRegion";
    case Errc::too_few_points: return "TooFewPoints";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::degenerate_chord: return "DegenerateChord";
    case Errc::scale_too_fine: return "ScaleTooFine";
    case Errc::all_zero_signature: return "AllZeroSignature";
    case Errc::zero_statistic: return "ZeroStatistic";
    case Errc::shape_out_of_canvas: return "ShapeOutOfCanvas";
  }
  return "UnknownError";
}

}  // namespace mscm

#endif  // MSCM_ERROR_HPP
