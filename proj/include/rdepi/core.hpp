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
#ifndef RDEPI_CORE_HPP
#define RDEPI_CORE_HPP

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rdepi
{

using Index = Eigen::Index;

/// Storage slots of one node: the seven live compartments followed by the two
/// cumulative death ledgers (deaths from I and from D).
enum Slot : int
{
    kS = 0,
    kQ,
    kE,
    kA,
    kI,
    kD,
    kR,
    kCumDeathI,
    kCumDeathD,
};

inline constexpr int kSlots = 9;
inline constexpr int kLiveSlots = 7;

inline constexpr std::array<std::string_view, kSlots> kSlotNames = {"S", "Q", "E", "A", "I",
                                                                     "D", "R", "cum_death_i", "cum_death_d"};

inline std::string_view slot_name(int slot)
{
    return kSlotNames.at(static_cast<std::size_t>(slot));
}

inline std::optional<Slot> slot_from_name(std::string_view name)
{
    for (int k = 0; k < kSlots; ++k) {
        if (kSlotNames[static_cast<std::size_t>(k)] == name) {
            return static_cast<Slot>(k);
        }
    }
    return std::nullopt;
}

template <typename Scalar>
using NodeState = Eigen::Matrix<Scalar, kSlots, 1>;

/// Per-node scalar array.
template <typename Scalar>
using NodeArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Column-major nodes x slots storage; each compartment is contiguous.
template <typename Scalar>
using FieldStorage = Eigen::Array<Scalar, Eigen::Dynamic, kSlots>;

struct Diagnostic
{
    std::string path;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Input rejected. Carries every problem found, not just the first.
class ValidationError : public std::runtime_error
{
public:
    explicit ValidationError(std::vector<Diagnostic> diagnostics)
        : std::runtime_error(format(diagnostics))
        , diagnostics_(std::move(diagnostics))
    {
    }

    ValidationError(std::string path, std::string message)
        : ValidationError(std::vector<Diagnostic>{{std::move(path), std::move(message)}})
    {
    }

    const std::vector<Diagnostic>& diagnostics() const
    {
        return diagnostics_;
    }

private:
    static std::string format(const std::vector<Diagnostic>& diagnostics)
    {
        std::string out;
        for (const auto& d : diagnostics) {
            if (!out.empty()) {
                out += "; ";
            }
            out += d.path.empty() ? d.message : d.path + ": " + d.message;
        }
        return out;
    }

    std::vector<Diagnostic> diagnostics_;
};

/// A state or stage value became NaN/inf.
class NonFiniteError : public std::runtime_error
{
public:
    NonFiniteError(Index node, int slot, std::int64_t step = -1, int stage = -1)
        : std::runtime_error(describe(node, slot, step, stage))
        , node_(node)
        , slot_(slot)
        , step_(step)
        , stage_(stage)
    {
    }

    Index node() const
    {
        return node_;
    }
    int slot() const
    {
        return slot_;
    }
    std::int64_t step() const
    {
        return step_;
    }
    int stage() const
    {
        return stage_;
    }

    NonFiniteError at_step(std::int64_t step) const
    {
        return NonFiniteError(node_, slot_, step, stage_);
    }

private:
    static std::string describe(Index node, int slot, std::int64_t step, int stage)
    {
        std::string msg = "non-finite value in compartment " + std::string(slot_name(slot)) + " at node " +
                          std::to_string(node);
        if (step >= 0) {
            msg += " during step " + std::to_string(step);
        }
        if (stage >= 0) {
            msg += " (stage " + std::to_string(stage + 1) + ")";
        }
        return msg;
    }

    Index node_;
    int slot_;
    std::int64_t step_;
    int stage_;
};

class UnsupportedOperation : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

/// Throws NonFiniteError naming the first offending entry (column-major scan).
template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& values, std::int64_t step = -1, int stage = -1)
{
    if (values.derived().allFinite()) {
        return;
    }
    for (Index c = 0; c < values.cols(); ++c) {
        for (Index r = 0; r < values.rows(); ++r) {
            using std::isfinite;
            if (!isfinite(values(r, c))) {
                throw NonFiniteError(r, static_cast<int>(c), step, stage);
            }
        }
    }
}

} // namespace rdepi

#endif // RDEPI_CORE_HPP
