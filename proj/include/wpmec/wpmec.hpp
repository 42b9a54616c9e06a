// Copyright 2026 The wpmec Authors
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

#include "wpmec/baselines.hpp"
#include "wpmec/barrier.hpp"
#include "wpmec/dual.hpp"
#include "wpmec/ellipsoid.hpp"
#include "wpmec/errors.hpp"
#include "wpmec/lambert_w.hpp"
#include "wpmec/model.hpp"
#include "wpmec/oracle.hpp"
#include "wpmec/primal_recovery.hpp"
#include "wpmec/scenarios.hpp"
#include "wpmec/solver.hpp"
