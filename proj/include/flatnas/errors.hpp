#pragma once

#include <stdexcept>
#include <string>

namespace flatnas {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define FLATNAS_DEFINE_ERROR(NAME)                                   \
    class NAME : public Error {                                      \
    public:                                                          \
        explicit NAME(const std::string& msg) : Error(#NAME ": " + msg) {} \
    }

FLATNAS_DEFINE_ERROR(InvalidParameter);
FLATNAS_DEFINE_ERROR(EnumerationCapExceeded);
FLATNAS_DEFINE_ERROR(SpaceMismatch);
FLATNAS_DEFINE_ERROR(ParseError);
FLATNAS_DEFINE_ERROR(ShapeMismatch);
FLATNAS_DEFINE_ERROR(NonFiniteLoss);
FLATNAS_DEFINE_ERROR(NonFiniteGradient);
FLATNAS_DEFINE_ERROR(ZeroVector);
FLATNAS_DEFINE_ERROR(LengthMismatch);
FLATNAS_DEFINE_ERROR(UndefinedCorrelation);
FLATNAS_DEFINE_ERROR(GenotypeSetMismatch);
FLATNAS_DEFINE_ERROR(EmptyHistory);
FLATNAS_DEFINE_ERROR(InfeasibleConfig);
FLATNAS_DEFINE_ERROR(UnknownSplit);
FLATNAS_DEFINE_ERROR(MissingOracle);
FLATNAS_DEFINE_ERROR(IoError);

#undef FLATNAS_DEFINE_ERROR

/// A scorer raised an error while evaluating one candidate; carries the
/// genotype string so long searches can report and continue.
class ScorerFailure : public Error {
public:
    ScorerFailure(std::string genotype, const std::string& msg)
        : Error("ScorerFailure [" + genotype + "]: " + msg), genotype_(std::move(genotype)) {}
    const std::string& genotype() const { return genotype_; }

private:
    std::string genotype_;
};

}  // namespace flatnas
