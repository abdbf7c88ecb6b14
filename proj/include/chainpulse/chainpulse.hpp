// Copyright 2026 The Chainpulse Authors
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

#include "chainpulse/basis.hpp"
#include "chainpulse/device_model.hpp"
#include "chainpulse/gate_fidelity.hpp"
#include "chainpulse/lbfgsb.hpp"
#include "chainpulse/objective.hpp"
#include "chainpulse/propagator.hpp"
#include "chainpulse/schedule_io.hpp"
#include "chainpulse/spectrum.hpp"
#include "chainpulse/synth.hpp"
