// vuniq/vuniq.hpp

// Copyright 2026  The vuniq Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef VUNIQ_VUNIQ_HPP_
#define VUNIQ_VUNIQ_HPP_

#include "vuniq/backend.hpp"
#include "vuniq/baselines.hpp"
#include "vuniq/common.hpp"
#include "vuniq/dataset.hpp"
#include "vuniq/entropy.hpp"
#include "vuniq/experiment.hpp"
#include "vuniq/gaussian.hpp"
#include "vuniq/quantizer.hpp"
#include "vuniq/report.hpp"
#include "vuniq/rng.hpp"
#include "vuniq/synth.hpp"

#endif  // VUNIQ_VUNIQ_HPP_
