#pragma once

// dslga/errors.hpp
//
// Exception hierarchy. Everything thrown by the library derives from
// dslga::Error so callers can catch one type at the process boundary.

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dslga {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A row that should have positive norm is (numerically) zero.
class ZeroVectorError : public Error {
 public:
  explicit ZeroVectorError(int row)
      : Error("zero-norm vector at row " + std::to_string(row)), row(row) {}
  int row;
};

// An identity index with no samples behind it.
class EmptyIdentityError : public Error {
 public:
  explicit EmptyIdentityError(int identity)
      : Error("identity " + std::to_string(identity) + " has no samples"),
        identity(identity) {}
  int identity;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class CostMatrixError : public Error {
 public:
  using Error::Error;
};

class EmptyMemoryError : public Error {
 public:
  using Error::Error;
};

class DegenerateStageError : public Error {
 public:
  using Error::Error;
};

class LabelError : public Error {
 public:
  using Error::Error;
};

// Value outside the mathematical domain of an operation (e.g. a
// probability not strictly inside (0,1)).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A joint identity that lacks samples in one modality.
class ModalityGapError : public Error {
 public:
  explicit ModalityGapError(int identity)
      : Error("identity " + std::to_string(identity) +
              " is missing one modality"),
        identity(identity) {}
  int identity;
};

// ---- file parsing ----

class FileError : public Error {
 public:
  using Error::Error;
};

class FileFormatError : public FileError {
 public:
  FileFormatError(const std::string& what, std::size_t byte_offset)
      : FileError(what + " (byte offset " + std::to_string(byte_offset) + ")"),
        offset(byte_offset) {}
  std::size_t offset;
};

class BadMagicError : public FileFormatError {
 public:
  using FileFormatError::FileFormatError;
};

class UnsupportedVersionError : public FileFormatError {
 public:
  using FileFormatError::FileFormatError;
};

class TruncatedPayloadError : public FileFormatError {
 public:
  using FileFormatError::FileFormatError;
};

class TrailingDataError : public FileFormatError {
 public:
  using FileFormatError::FileFormatError;
};

class NonFiniteError : public FileFormatError {
 public:
  using FileFormatError::FileFormatError;
};

class MetadataParseError : public FileError {
 public:
  MetadataParseError(const std::string& what, int line)
      : FileError(what + " (line " + std::to_string(line) + ")"), line(line) {}
  int line;
};

class RowCountMismatchError : public FileError {
 public:
  using FileError::FileError;
};

}  // namespace dslga
