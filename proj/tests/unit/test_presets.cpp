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
#include "rdepi/scenario_io.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace rdepi;

namespace
{

std::string golden_path(const std::string& name)
{
    return std::string(RDEPI_GOLDEN_DIR) + "/" + name;
}

// Set RDEPI_UPDATE_GOLDENS=1 to rewrite the files instead of comparing.
void check_golden(const std::string& name, const std::string& actual)
{
    const std::string path = golden_path(name);
    if (std::getenv("RDEPI_UPDATE_GOLDENS")) {
        std::ofstream(path, std::ios::binary) << actual;
        return;
    }
    std::ifstream in(path, std::ios::binary);
    ASSERT_TRUE(in) << "missing golden " << path;
    std::stringstream expected;
    expected << in.rdbuf();
    EXPECT_TRUE(expected.str() == actual) << "golden mismatch: " << path;
}

SimulateOptions quiet()
{
    SimulateOptions o;
    o.warn = [](const std::string&) {};
    return o;
}

class PresetRegression : public ::testing::TestWithParam<std::string>
{
};

} // namespace

TEST_P(PresetRegression, aggregate_csv_matches_golden)
{
    auto ts = simulate(preset(GetParam()), quiet());
    ASSERT_FALSE(ts.abort);
    check_golden(GetParam() + ".regions.csv", write_timeseries(ts).regions);
}

INSTANTIATE_TEST_SUITE_P(Presets, PresetRegression,
                         ::testing::Values("nanjing-ode", "corridor-1d", "jiangsu-2d", "sir-demo"),
                         [](const auto& info) {
                             std::string name = info.param;
                             std::replace(name.begin(), name.end(), '-', '_');
                             return name;
                         });

TEST(TestNanjingPreset, single_interior_peak_of_d)
{
    auto ts = simulate(preset("nanjing-ode"), quiet());
    auto d  = region_series(ts, "domain", kD);
    const auto peak = static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
    ASSERT_GT(peak, 0u);
    ASSERT_LT(peak, d.size() - 1);
    for (std::size_t k = 1; k <= peak; ++k) {
        EXPECT_GT(d[k], d[k - 1]) << "day " << k;
    }
    for (std::size_t k = peak + 1; k < d.size(); ++k) {
        EXPECT_LT(d[k], d[k - 1]) << "day " << k;
    }
}
