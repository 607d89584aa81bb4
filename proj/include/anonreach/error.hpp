// Copyright 2026 The anonreach Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace anonreach {

// Argument outside the mathematical domain of an operation (p outside [0,1],
// cap < 1, unknown group index, non-positive multiplier, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Scenario or experiment description that cannot be realized.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation only defined for non-overlapping groups was given overlapping
// ones.
class UnsupportedTopologyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Incremental state was driven out of order.
class InternalStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace anonreach
