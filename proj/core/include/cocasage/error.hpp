/*
 * Copyright 2026 The cocasage Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef COCASAGE_ERROR_HPP_
#define COCASAGE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace cocasage {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (dataset files, config, serialized reports).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Argument outside the documented domain of an operation.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite value produced during a forward pass.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Value type mismatch, e.g. a non-binary entry where 0/1 is required.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Dataset files could not be located on disk.
class DatasetError : public Error {
 public:
  using Error::Error;
};

}  // namespace cocasage

#endif  // COCASAGE_ERROR_HPP_
