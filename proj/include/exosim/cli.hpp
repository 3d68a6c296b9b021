// Copyright 2026 The exosim Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#ifndef EXOSIM_CLI_HPP
#define EXOSIM_CLI_HPP

#include <iosfwd>
#include <span>
#include <string>

namespace exosim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;  ///< bad flags or scenario parse errors
inline constexpr int kExitWatchdog = 3;
inline constexpr int kExitHibernate = 4;

/// Entry point of the `exosim` tool. `args` excludes the program name.
int cli_main(std::span<const std::string> args, std::ostream& out,
             std::ostream& err);

}  // namespace exosim::cli

#endif  // EXOSIM_CLI_HPP
