// Copyright 2026 The Stainscope Authors. All Rights Reserved.
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

/// @file image_io.h
/// @brief PNG raster input/output.

#pragma once

#include <filesystem>

#include "stainscope/image.h"

namespace stainscope {

/// Reads an 8-bit PNG. Gray and gray+alpha decode to 1 channel unless
/// `force_rgb` is set; color and palette images always decode to RGB (alpha
/// is dropped against a white background).
Image read_image(const std::filesystem::path& path, bool force_rgb = true);

/// Writes a 1- or 3-channel image as PNG, creating parent directories.
void write_image(const std::filesystem::path& path, const Image& img);

Image mask_to_image(const BinaryMask& mask);

}  // namespace stainscope
