// Copyright 2026 The gbdrl Authors
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

// Umbrella header.

#ifndef GBDRL_GBDRL_HPP_
#define GBDRL_GBDRL_HPP_

#include "gbdrl/brute_force.hpp"
#include "gbdrl/core.hpp"
#include "gbdrl/digest.hpp"
#include "gbdrl/gbd_engine.hpp"
#include "gbdrl/graph_encode.hpp"
#include "gbdrl/imitation.hpp"
#include "gbdrl/io.hpp"
#include "gbdrl/master.hpp"
#include "gbdrl/neuralnet.hpp"
#include "gbdrl/nlp_solver.hpp"
#include "gbdrl/problem.hpp"
#include "gbdrl/report.hpp"
#include "gbdrl/rl_train.hpp"
#include "gbdrl/verifier.hpp"

#endif  // GBDRL_GBDRL_HPP_
