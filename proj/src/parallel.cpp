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

#include "ttm/parallel.hpp"

#include <omp.h>

namespace ttm::parallel {

namespace {
int& thread_budget() {
    static int n = omp_get_max_threads();
    return n;
}
}  // namespace

int threads() { return thread_budget(); }

void set_threads(int n) { thread_budget() = n < 1 ? 1 : n; }

bool enabled() { return thread_budget() > 1; }

}  // namespace ttm::parallel
