// Copyright 2026 The wkws Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WKWS_ERROR_H_
#define WKWS_ERROR_H_

#include <stdexcept>
#include <string>

namespace wkws {

// Base of every error the toolkit throws. The CLI maps subclasses of
// ValidationError to exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated a precondition (bad argument, empty input, bad label).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Checkpoint / manifest content that does not match the expected layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Noise is silent under the keyword, so no finite gain realizes the SNR.
class DegenerateSnrError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace wkws

#endif  // WKWS_ERROR_H_
