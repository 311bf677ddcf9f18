#pragma once

#include <stdexcept>
#include <string>

namespace posthoc {

enum class Errc {
    EmptySupport,
    ZeroNullMass,
    NonpositiveTotalMass,
    DimensionMismatch,
    ScenarioNotFound,
    BadWeights,
    EmptyClass,
    RandomizationRequired,
    NotMonotoneInLR,
    NotBinary,
    Infeasible,
    Unbounded,
    DegenerateLosses,
    CannotCalibrate,
    ZeroMarginal,
    MultipleEffectiveLosses,
    ExperimentCheckFailed,
    InvalidArgument,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::EmptySupport: return "EmptySupport";
        case Errc::ZeroNullMass: return "ZeroNullMass";
        case Errc::NonpositiveTotalMass: return "NonpositiveTotalMass";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::ScenarioNotFound: return "ScenarioNotFound";
        case Errc::BadWeights: return "BadWeights";
        case Errc::EmptyClass: return "EmptyClass";
        case Errc::RandomizationRequired: return "RandomizationRequired";
        case Errc::NotMonotoneInLR: return "NotMonotoneInLR";
        case Errc::NotBinary: return "NotBinary";
        case Errc::Infeasible: return "Infeasible";
        case Errc::Unbounded: return "Unbounded";
        case Errc::DegenerateLosses: return "DegenerateLosses";
        case Errc::CannotCalibrate: return "CannotCalibrate";
        case Errc::ZeroMarginal: return "ZeroMarginal";
        case Errc::MultipleEffectiveLosses: return "MultipleEffectiveLosses";
        case Errc::ExperimentCheckFailed: return "ExperimentCheckFailed";
        case Errc::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Library-wide exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

}  // namespace posthoc
