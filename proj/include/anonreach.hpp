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

#include "anonreach/auction.hpp"
#include "anonreach/binomial.hpp"
#include "anonreach/config.hpp"
#include "anonreach/error.hpp"
#include "anonreach/harness.hpp"
#include "anonreach/measurement.hpp"
#include "anonreach/optimization.hpp"
#include "anonreach/population.hpp"
#include "anonreach/report.hpp"
#include "anonreach/rng.hpp"
#include "anonreach/simulation.hpp"
