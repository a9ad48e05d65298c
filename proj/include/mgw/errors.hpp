#pragma once

#include <stdexcept>
#include <string>

namespace mgw {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input that violates a documented precondition (bad spec, bad forest, bad argument).
class ValidationError : public Error {
public:
    using Error::Error;
};

class StructuralError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ModeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class RangeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class LookupError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class IrreducibilityError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ClassificationError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class SupportError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ConsistencyError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// A sampling cap (vertices, tries, enumeration nodes) was hit.
class BudgetError : public Error {
public:
    using Error::Error;
};

}  // namespace mgw
