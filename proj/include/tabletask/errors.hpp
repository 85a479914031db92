#pragma once

#include <stdexcept>
#include <string>

namespace tabletask {

/// Base class for all pipeline errors. `code()` is the stable machine name
/// used in reports and drop bookkeeping; `what()` carries the human detail.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(msg.empty() ? code : code + ": " + msg), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define TABLETASK_DEFINE_ERROR(Name)                                    \
    class Name : public Error {                                         \
    public:                                                             \
        explicit Name(const std::string& msg = "") : Error(#Name, msg) {} \
    }

// table-core
TABLETASK_DEFINE_ERROR(MalformedTable);
TABLETASK_DEFINE_ERROR(IndexOutOfRange);
TABLETASK_DEFINE_ERROR(UnknownColumn);
TABLETASK_DEFINE_ERROR(EmptySelection);

// corpus
TABLETASK_DEFINE_ERROR(NoTablesFound);
TABLETASK_DEFINE_ERROR(InsufficientTables);
TABLETASK_DEFINE_ERROR(DisjointnessViolation);

// synth
TABLETASK_DEFINE_ERROR(NoEligibleCell);
TABLETASK_DEFINE_ERROR(NoUniqueValue);
TABLETASK_DEFINE_ERROR(MissingTitle);
TABLETASK_DEFINE_ERROR(TitleLengthOutOfBounds);
TABLETASK_DEFINE_ERROR(InvalidK);
TABLETASK_DEFINE_ERROR(AxisTooSmall);
TABLETASK_DEFINE_ERROR(TooFewRows);
TABLETASK_DEFINE_ERROR(ParaphraseFailure);
TABLETASK_DEFINE_ERROR(NoApplicableProgram);
TABLETASK_DEFINE_ERROR(ManifestSchemaError);

// augment
TABLETASK_DEFINE_ERROR(NoTemplates);
TABLETASK_DEFINE_ERROR(UnsafeAugmentation);
TABLETASK_DEFINE_ERROR(ModelUnavailable);
TABLETASK_DEFINE_ERROR(GoldMismatch);
TABLETASK_DEFINE_ERROR(InsufficientExamples);

// builder
TABLETASK_DEFINE_ERROR(InsufficientCorpus);
TABLETASK_DEFINE_ERROR(ConfigError);

// model client
TABLETASK_DEFINE_ERROR(Transport);
TABLETASK_DEFINE_ERROR(Auth);
TABLETASK_DEFINE_ERROR(RateLimited);
TABLETASK_DEFINE_ERROR(ProviderError);

// eval
TABLETASK_DEFINE_ERROR(LengthMismatch);
TABLETASK_DEFINE_ERROR(AxisMismatch);

#undef TABLETASK_DEFINE_ERROR

} // namespace tabletask
