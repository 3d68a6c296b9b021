// Copyright 2026 The exosim Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#ifndef EXOSIM_ERROR_HPP
#define EXOSIM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace exosim {

/// Base for every error the simulator raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad setup: duplicate task name, negative priority, invalid parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A request that is illegal for the target's current state.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Unknown task id or name.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace exosim

#endif  // EXOSIM_ERROR_HPP
