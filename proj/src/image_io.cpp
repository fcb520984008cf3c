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

#include "stainscope/image_io.h"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <string>

namespace stainscope {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

Image read_image(const std::filesystem::path& path, bool force_rgb) {
  const std::string ext = lower_extension(path);
  require(ext == ".png", ErrorKind::kIo,
          "unsupported raster format '" + ext + "' (only PNG is supported): " + path.string());
  require(std::filesystem::exists(path), ErrorKind::kIo, "file not found: " + path.string());

  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    fail(ErrorKind::kIo, "cannot decode PNG " + path.string() + ": " + image.message);
  }
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  const int channels = (gray && !force_rgb) ? 1 : 3;
  image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const int width = static_cast<int>(image.width);
  const int height = static_cast<int>(image.height);
  std::vector<uint8_t> buffer(PNG_IMAGE_SIZE(image));
  png_color background{255, 255, 255};
  if (!png_image_finish_read(&image, &background, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    fail(ErrorKind::kIo, "cannot decode PNG " + path.string() + ": " + image.message);
  }
  return Image(width, height, channels, std::move(buffer));
}

void write_image(const std::filesystem::path& path, const Image& img) {
  require(!img.empty(), ErrorKind::kInvalidInput, "cannot write an empty image");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.data().data(), 0, nullptr)) {
    fail(ErrorKind::kIo, "cannot write PNG " + path.string() + ": " + image.message);
  }
}

Image mask_to_image(const BinaryMask& mask) {
  Image out(mask.width(), mask.height(), 1);
  auto dst = out.data();
  const auto src = mask.bits();
  for (size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 255 : 0;
  return out;
}

}  // namespace stainscope
