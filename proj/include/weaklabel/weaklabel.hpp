// Copyright 2026 The weaklabel Authors.
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

#include "weaklabel/calibration.hpp"
#include "weaklabel/datamodel.hpp"
#include "weaklabel/error.hpp"
#include "weaklabel/evaluation.hpp"
#include "weaklabel/generator_factory.hpp"
#include "weaklabel/generators.hpp"
#include "weaklabel/http_generator.hpp"
#include "weaklabel/language_model.hpp"
#include "weaklabel/manifest.hpp"
#include "weaklabel/merging.hpp"
#include "weaklabel/pipeline.hpp"
#include "weaklabel/segmentation.hpp"
#include "weaklabel/selection.hpp"
#include "weaklabel/serialization.hpp"
#include "weaklabel/simulation.hpp"
#include "weaklabel/textmetrics.hpp"
#include "weaklabel/unicode.hpp"
