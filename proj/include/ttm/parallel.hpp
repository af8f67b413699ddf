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

// Process-wide thread budget for the OpenMP kernels. Every kernel computes
// each output element independently, so results are bit-identical for any
// thread count (asserted by tests/test_kernels.cpp against the serial
// reference implementations).

namespace ttm::parallel {

/// Number of threads the OpenMP kernels may use. Defaults to the OpenMP
/// runtime's maximum.
int threads();

/// Clamped to at least 1. Thread count 1 routes through the serial kernels.
void set_threads(int n);

/// True when the parallel kernel variants should run.
bool enabled();

}  // namespace ttm::parallel
