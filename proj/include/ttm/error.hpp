// Copyright 2026 The ttm Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace ttm {

/// Base class of all errors thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or violated preconditions. CLI exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

/// Filesystem or encoding failures while reading/writing. CLI exit code 3.
struct IoError : Error {
    using Error::Error;
};

/// Corrupt or inconsistent persisted state (checkpoints, containers). CLI exit code 4.
struct StateError : Error {
    using Error::Error;
};

/// A query referenced something that does not exist (e.g. an unknown word). CLI exit code 5.
struct QueryError : Error {
    using Error::Error;
};

}  // namespace ttm
