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

#include "stainscope/log.h"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <memory>
#include <mutex>
#include <optional>
#include <string_view>

namespace stainscope::log {
namespace {

std::optional<spdlog::level::level_enum> env_level() {
  const char* env = std::getenv("STAINSCOPE_LOG");
  if (env == nullptr) return std::nullopt;
  const std::string_view v(env);
  if (v == "error") return spdlog::level::err;
  if (v == "warn") return spdlog::level::warn;
  if (v == "info") return spdlog::level::info;
  if (v == "debug") return spdlog::level::debug;
  return std::nullopt;
}

std::shared_ptr<spdlog::logger>& logger() {
  static std::shared_ptr<spdlog::logger> instance;
  static std::once_flag once;
  std::call_once(once, [] {
    instance = spdlog::stderr_color_mt("stainscope");
    instance->set_pattern("[%l] %v");
    instance->set_level(env_level().value_or(spdlog::level::warn));
  });
  return instance;
}

spdlog::level::level_enum to_spdlog(Level level) {
  switch (level) {
    case Level::kError: return spdlog::level::err;
    case Level::kWarn: return spdlog::level::warn;
    case Level::kInfo: return spdlog::level::info;
    case Level::kDebug: return spdlog::level::debug;
  }
  return spdlog::level::warn;
}

}  // namespace

void init_from_env() {
  if (const auto level = env_level()) logger()->set_level(*level);
}

void set_level(Level level) { logger()->set_level(to_spdlog(level)); }

void error(const std::string& message) { logger()->error(message); }
void warn(const std::string& message) { logger()->warn(message); }
void info(const std::string& message) { logger()->info(message); }
void debug(const std::string& message) { logger()->debug(message); }

}  // namespace stainscope::log
