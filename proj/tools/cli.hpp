/*
   Copyright 2026 The icx Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace icx::cli {

/// Runs one command line (without the program name). Returns the exit code:
/// 0 on success, 1 on usage or validation errors, 2 when a numerical guard
/// trips.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// Flat `key = value` lines; `#` starts a comment.
std::map<std::string, std::string> read_config(const std::string& path);

/// Shortest text with 17 significant digits, independent of the locale.
std::string format_double(double v);

}  // namespace icx::cli
