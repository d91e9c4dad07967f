// SPDX-License-Identifier: Apache-2.0
//
// mphy - physical-layer multicast transceiver designs and rate audits
// Copyright (C) 2026 The mphy authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "mphy/parallel.hpp"

#include <cstdlib>
#include <string>

namespace mphy
{

int worker_count()
{
    if (const char *env = std::getenv("MPHY_THREADS"))
    {
        try
        {
            const int n = std::stoi(env);
            if (n >= 1)
                return n;
        }
        catch (const std::exception &)
        {
        }
    }
    return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

} // namespace mphy
