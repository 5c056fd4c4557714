// Copyright 2026 The CBDNet-cpp Authors
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

#include "cbd/image.hpp"

namespace cbd {

/// Procedural clean "photograph": shaded gradient background, overlapping
/// flat and textured shapes, and a range of dark and bright regions. Stands
/// in for natural images when no clean corpus is at hand.
Image generate_scene(Rng& rng, int height, int width);

}  // namespace cbd
