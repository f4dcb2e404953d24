#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hopqg {

// Root of every error raised by the library. The CLI maps subclasses onto
// exit codes, so new failure classes should derive from one of the three
// families below rather than from Error directly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data: malformed files, unresolvable references, shape errors.
class DataError : public Error {
 public:
  using Error::Error;
};

// Caller misuse: an argument outside its documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Non-finite loss during optimisation.
class DivergenceDetected : public Error {
 public:
  using Error::Error;
};

class MalformedRecord : public DataError {
 public:
  MalformedRecord(std::size_t index, const std::string& reason)
      : DataError("malformed record " + std::to_string(index) + ": " + reason),
        index_(index),
        reason_(reason) {}
  std::size_t index() const { return index_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t index_;
  std::string reason_;
};

class DanglingSupportingFact : public DataError {
 public:
  DanglingSupportingFact(const std::string& title, std::size_t sentence_index)
      : DataError("supporting fact [" + title + ", " +
                  std::to_string(sentence_index) + "] does not resolve"),
        title_(title),
        sentence_index_(sentence_index) {}
  const std::string& title() const { return title_; }
  std::size_t sentence_index() const { return sentence_index_; }

 private:
  std::string title_;
  std::size_t sentence_index_;
};

class SequenceTooLong : public DataError {
 public:
  using DataError::DataError;
};

class SegmentationFailed : public DataError {
 public:
  using DataError::DataError;
};

class MissingHopAnswer : public InvalidArgument {
 public:
  MissingHopAnswer() : InvalidArgument("bridge sub-question needs a hop-1 answer") {}
};

class AmbiguousBridge : public DataError {
 public:
  using DataError::DataError;
};

class EmptyGraph : public DataError {
 public:
  EmptyGraph() : DataError("entity graph has no mentions") {}
};

class ShapeMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NonScalarOutput : public InvalidArgument {
 public:
  NonScalarOutput() : InvalidArgument("backward() requires a 1x1 output") {}
};

class EmptySpan : public InvalidArgument {
 public:
  EmptySpan() : InvalidArgument("entity span is empty") {}
};

class LabelMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class EmptyTarget : public InvalidArgument {
 public:
  EmptyTarget() : InvalidArgument("decoder target sequence is empty") {}
};

class NoChainEntities : public DataError {
 public:
  using DataError::DataError;
};

class LengthMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ScorerUnavailable : public Error {
 public:
  using Error::Error;
};

class IncomparableModels : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class InsufficientDistractors : public DataError {
 public:
  using DataError::DataError;
};

class CheckpointError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace hopqg
