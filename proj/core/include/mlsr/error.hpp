// Copyright 2026 The mlsreenact Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MLSR_ERROR_HPP_
#define MLSR_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace mlsr {

enum class ErrorKind {
  kInvalidInput,
  kShape,
  kDegenerate,
  kConfiguration,
  kFormat,
  kParse,
  kIo,
};

// Base of every exception thrown by the engine. The kind drives CLI exit
// codes and HTTP status mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& what)
      : Error(ErrorKind::kInvalidInput, what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what)
      : Error(ErrorKind::kShape, what) {}
};

// Collinear, coincident or otherwise rank-deficient point configurations.
class DegenerateConfigurationError : public Error {
 public:
  explicit DegenerateConfigurationError(const std::string& what)
      : Error(ErrorKind::kDegenerate, what) {}
};

class ConfigurationError : public Error {
 public:
  explicit ConfigurationError(const std::string& what)
      : Error(ErrorKind::kConfiguration, what) {}
};

// Binary/text file format violations. `field` names the offending entry.
class FormatError : public Error {
 public:
  FormatError(const std::string& field, const std::string& what)
      : Error(ErrorKind::kFormat, field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what)
      : Error(ErrorKind::kParse, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

// 0 success, 2 input/parse, 3 numerical/degeneracy, 4 I/O.
int exit_code_for(ErrorKind kind) noexcept;

}  // namespace mlsr

#endif  // MLSR_ERROR_HPP_
