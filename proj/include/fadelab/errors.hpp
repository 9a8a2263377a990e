#pragma once

#include <stdexcept>
#include <string>

namespace fadelab {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside its mathematical domain (eta not in [0,1], moment order
// above N, odd matrix order, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Invalid model or configuration parameter (sigma <= 0, alpha <= 0, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// Requested quantity has no closed form for this family.
class NotAvailableError : public Error {
public:
    using Error::Error;
};

// Distribution degenerated to zero mass (all-zero density on the grid).
class DegenerateError : public Error {
public:
    using Error::Error;
};

// Post-selection removed all probability mass.
class EmptySelectionError : public Error {
public:
    using Error::Error;
};

// Empty sample list or zero trials where at least one is required.
class EmptyInputError : public Error {
public:
    using Error::Error;
};

// Requested truncation cannot certify the tail-bound tolerance.
class TruncationError : public Error {
public:
    using Error::Error;
};

// Operation needs finite-sample counts but only probabilities are present.
class CountsRequiredError : public Error {
public:
    using Error::Error;
};

// Attenuation grid of an ensemble is not complete/equidistant.
class IncompleteEnsembleError : public Error {
public:
    using Error::Error;
};

// Ingested data violates the file schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

// Missing or inconsistent run configuration (e.g. no Rytov mapping).
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace fadelab
