// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace sqlgrpo {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file (JSON, JSON-lines, config).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Schema or state violates a structural invariant.
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Random state generation cannot satisfy the schema's constraints.
class ConstraintError : public Error {
public:
    using Error::Error;
};

/// Input fails validation (dataset lines, config keys, CLI arguments).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss or gradient.
class DivergenceError : public Error {
public:
    using Error::Error;
};

} // namespace sqlgrpo
