// Copyright 2026 The shorlab Authors
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

#include "shorlab/random.hpp"
#include "shorlab/state_vector.hpp"
#include "shorlab/circuit.hpp"
#include "shorlab/noise.hpp"
#include "shorlab/shor.hpp"
#include "shorlab/analysis.hpp"
#include "shorlab/records.hpp"
