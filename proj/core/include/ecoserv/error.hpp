// Copyright 2026 The Ecoserv Authors
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

#ifndef ECOSERV_ERROR_HPP_
#define ECOSERV_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace ecoserv {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A referenced input (file, directory) does not exist or cannot be opened.
class MissingInputError : public Error {
 public:
  using Error::Error;
};

// Inputs exist but violate a documented precondition or file format.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Output could not be written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ecoserv

#endif  // ECOSERV_ERROR_HPP_
