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
#ifndef RDEPI_COMPARTMENT_MODEL_HPP
#define RDEPI_COMPARTMENT_MODEL_HPP

#include "rdepi/core.hpp"

#include <utility>

namespace rdepi
{

/**
 * Rate constants and diffusivities of the seven-compartment model.
 *
 * Rates are per day; the transmission rate theta multiplies densities directly
 * (mass action, not normalized by N). Diffusivities carry units of
 * length^2 / (person * day) because the diffusion term is scaled by the local
 * total population N. All values lie in [0, 1].
 */
template <typename Scalar = double>
struct ModelParams
{
    Scalar theta{0};      ///< transmission rate
    Scalar b{0};          ///< asymptomatic infectiousness discount
    Scalar c{0};          ///< S -> Q quarantine entry
    Scalar delta{0};      ///< Q -> S release
    Scalar epsilon{0};    ///< E progression
    Scalar frac_sympt{0}; ///< fraction of progressing E that becomes symptomatic
    Scalar g{0};          ///< A -> D
    Scalar beta_rec{0};   ///< A -> R
    Scalar j_rec{0};      ///< I -> R
    Scalar l_death{0};    ///< I death
    Scalar h1{0};         ///< I -> D hospitalization
    Scalar m_death{0};    ///< D death
    Scalar mu{0};         ///< D -> R
    Scalar nu_s{0};
    Scalar nu_e{0};
    Scalar nu_a{0};
    Scalar nu_i{0};

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

    static constexpr auto fields()
    {
        using P = ModelParams;
        return std::array<std::pair<std::string_view, Scalar P::*>, 17>{{
            {"theta", &P::theta},
            {"b", &P::b},
            {"c", &P::c},
            {"delta", &P::delta},
            {"epsilon", &P::epsilon},
            {"frac_sympt", &P::frac_sympt},
            {"g", &P::g},
            {"beta_rec", &P::beta_rec},
            {"j_rec", &P::j_rec},
            {"l_death", &P::l_death},
            {"h1", &P::h1},
            {"m_death", &P::m_death},
            {"mu", &P::mu},
            {"nu_s", &P::nu_s},
            {"nu_e", &P::nu_e},
            {"nu_a", &P::nu_a},
            {"nu_i", &P::nu_i},
        }};
    }

    /// Diffusivity of a slot; zero for the non-diffusing compartments.
    Scalar diffusivity(int slot) const
    {
        switch (slot) {
        case kS:
            return nu_s;
        case kE:
            return nu_e;
        case kA:
            return nu_a;
        case kI:
            return nu_i;
        default:
            return Scalar(0);
        }
    }

    Scalar max_diffusivity() const
    {
        using std::max;
        return max(max(nu_s, nu_e), max(nu_a, nu_i));
    }

    template <typename NewScalar>
    ModelParams<NewScalar> cast() const
    {
        ModelParams<NewScalar> out;
        const auto src = fields();
        const auto dst = ModelParams<NewScalar>::fields();
        for (std::size_t k = 0; k < src.size(); ++k) {
            out.*(dst[k].second) = static_cast<NewScalar>(this->*(src[k].second));
        }
        return out;
    }

    std::vector<Diagnostic> validate(const std::string& prefix = "params") const
    {
        std::vector<Diagnostic> out;
        for (const auto& [name, member] : fields()) {
            const Scalar v = this->*member;
            using std::isfinite;
            if (!isfinite(v) || v < Scalar(0) || v > Scalar(1)) {
                out.push_back({prefix + "." + std::string(name), "must lie in [0, 1]"});
            }
        }
        return out;
    }
};

template <typename Scalar = double>
struct SirParams
{
    Scalar beta{0};  ///< transmission, per person-day
    Scalar gamma{0}; ///< recovery, per day

    friend bool operator==(const SirParams&, const SirParams&) = default;

    std::vector<Diagnostic> validate(const std::string& prefix = "sir_params") const
    {
        std::vector<Diagnostic> out;
        using std::isfinite;
        if (!isfinite(beta) || beta < Scalar(0)) {
            out.push_back({prefix + ".beta", "must be finite and >= 0"});
        }
        if (!isfinite(gamma) || gamma < Scalar(0)) {
            out.push_back({prefix + ".gamma", "must be finite and >= 0"});
        }
        return out;
    }
};

template <typename Scalar>
using SirState = Eigen::Matrix<Scalar, 3, 1>;

namespace detail
{

template <typename Scalar, typename In, typename Out>
inline void reaction_kernel(const In& y, const ModelParams<Scalar>& p, Out&& dy)
{
    const Scalar s = y[kS], q = y[kQ], e = y[kE], a = y[kA], i = y[kI], d = y[kD];

    const Scalar incidence = p.theta * s * (i + p.b * a);
    const Scalar quarantine = p.c * s - p.delta * q;
    const Scalar to_a = p.epsilon * (Scalar(1) - p.frac_sympt) * e;
    const Scalar to_i = p.epsilon * p.frac_sympt * e;

    dy[kS] = -incidence - quarantine;
    dy[kQ] = quarantine;
    dy[kE] = incidence - (to_a + to_i);
    dy[kA] = to_a - p.g * a - p.beta_rec * a;
    dy[kI] = to_i - p.j_rec * i - p.l_death * i - p.h1 * i;
    dy[kD] = p.g * a + p.h1 * i - p.m_death * d - p.mu * d;
    dy[kR] = p.beta_rec * a + p.j_rec * i + p.mu * d;
    dy[kCumDeathI] = p.l_death * i;
    dy[kCumDeathD] = p.m_death * d;
}

template <typename Scalar, typename In, typename Out>
inline void sir_kernel(const In& y, const SirParams<Scalar>& p, Out&& dy)
{
    const Scalar infection = p.beta * y[0] * y[1];
    const Scalar recovery = p.gamma * y[1];
    dy[0] = -infection;
    dy[1] = infection - recovery;
    dy[2] = recovery;
}

template <typename Derived>
void require_finite_named(const Eigen::MatrixBase<Derived>& y, auto&& name_of)
{
    for (Index k = 0; k < y.size(); ++k) {
        using std::isfinite;
        if (!isfinite(y[k])) {
            throw ValidationError(std::string(name_of(k)), "non-finite value");
        }
    }
}

} // namespace detail

/**
 * Pointwise reaction terms (no diffusion) of the seven-compartment model plus
 * the two death ledgers.
 *
 * The E outflow splits exactly into the A and I inflows, and the nine
 * derivatives sum to zero, so the augmented total is conserved.
 */
template <typename Scalar>
NodeState<Scalar> reaction_rhs(const NodeState<Scalar>& y, const ModelParams<Scalar>& params)
{
    detail::require_finite_named(y, [](Index k) { return slot_name(static_cast<int>(k)); });
    NodeState<Scalar> dy;
    detail::reaction_kernel(y, params, dy);
    return dy;
}

template <typename Scalar>
SirState<Scalar> sir_rhs(const SirState<Scalar>& y, const SirParams<Scalar>& params)
{
    static constexpr std::array<std::string_view, 3> names = {"S", "I", "R"};
    detail::require_finite_named(y, [](Index k) { return names[static_cast<std::size_t>(k)]; });
    SirState<Scalar> dy;
    detail::sir_kernel(y, params, dy);
    return dy;
}

/// N = S + Q + E + A + I + D + R; ledger slots excluded.
template <typename Derived>
typename Derived::Scalar total_population(const Eigen::MatrixBase<Derived>& y)
{
    return y.template head<kLiveSlots>().sum();
}

} // namespace rdepi

#endif // RDEPI_COMPARTMENT_MODEL_HPP
