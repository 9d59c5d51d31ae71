/*
 * Copyright 2026 The adlab Authors.
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

#ifndef ADLAB_ERROR_HPP_
#define ADLAB_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace adlab {

// Base class for every error raised by the library. Callers that only need
// to report a diagnostic catch this; callers that branch on the cause catch
// the subclasses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller input: violated preconditions, inconsistent configuration.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed on-disk data (dataset lines, embedding files, caches, stores).
class DataError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures (cannot open, cannot write).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace adlab

#endif  // ADLAB_ERROR_HPP_
