/*
* Copyright (C) 2026 rdepi contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef RDEPI_CLI_HPP
#define RDEPI_CLI_HPP

#include <ostream>

namespace rdepi
{

enum ExitCode : int
{
    kExitOk = 0,
    kExitUsage = 1,
    kExitValidation = 2,
    kExitNumerical = 3,
};

/// Environment variable holding the worker thread count.
inline constexpr const char* kThreadsEnv = "RDEPI_NUM_THREADS";

/**
 * Entry point of the rdepi command line tool. Data goes to files or `out`,
 * diagnostics to `err`. Returns one of the ExitCode values.
 */
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Applies RDEPI_NUM_THREADS if set; returns false (and leaves threads alone) if it is malformed.
bool apply_thread_override();

} // namespace rdepi

#endif // RDEPI_CLI_HPP
