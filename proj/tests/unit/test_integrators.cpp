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
#include "rdepi/integrators.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <random>

using namespace rdepi;

namespace
{

GridPtr line(double extent, Index nodes)
{
    return std::make_shared<const Grid>(Grid::line(extent, nodes));
}

GridPtr rect(Index nx, Index ny)
{
    return std::make_shared<const Grid>(Grid::rect(1.0, nx, 1.0, ny));
}

CompartmentField<double> random_field(const GridPtr& g, std::mt19937_64& gen, double scale = 1.0)
{
    std::uniform_real_distribution<double> u(0.5, 1.5);
    CompartmentField<double> f(g);
    for (Index k = 0; k < g->size(); ++k) {
        for (int s = 0; s < kSlots; ++s) {
            f.values()(k, s) = scale * u(gen);
        }
    }
    return f;
}

RhsConfig<double> covid_config()
{
    RhsConfig<double> cfg;
    auto& p      = cfg.params;
    p.theta      = 0.3;
    p.b          = 0.5;
    p.c          = 0.06;
    p.delta      = 0.01;
    p.epsilon    = 0.25;
    p.frac_sympt = 0.6;
    p.g          = 0.2;
    p.beta_rec   = 0.1;
    p.j_rec      = 0.05;
    p.l_death    = 0.002;
    p.h1         = 0.3;
    p.m_death    = 0.002;
    p.mu         = 0.12;
    p.nu_s       = 0.001;
    p.nu_e       = 0.003;
    p.nu_a       = 0.003;
    p.nu_i       = 0.002;
    return cfg;
}

// Direct per-compartment transcription of one RK4 step of the nodal scheme,
// with N recomputed from each stage state.
FieldStorage<double> reference_rk4_nodal(const FieldStorage<double>& y, const Grid& grid,
                                         const ModelParams<double>& p, double dt)
{
    const Index n = y.rows();
    const double inv_h2 = 1.0 / (grid.spacing_x() * grid.spacing_x());
    auto f = [&](const FieldStorage<double>& u) {
        FieldStorage<double> du(n, kSlots);
        for (Index i = 0; i < n; ++i) {
            const Index l = i == 0 ? 1 : i - 1;
            const Index r = i == n - 1 ? n - 2 : i + 1;
            double N = 0;
            for (int s = 0; s < kLiveSlots; ++s) {
                N += u(i, s);
            }
            auto second = [&](int s) {
                return (u(r, s) - 2 * u(i, s) + u(l, s)) * inv_h2;
            };
            const double S = u(i, kS), Q = u(i, kQ), E = u(i, kE), A = u(i, kA), I = u(i, kI), D = u(i, kD);
            du(i, kS) = N * p.nu_s * second(kS) - p.theta * S * (I + p.b * A) - p.c * S + p.delta * Q;
            du(i, kQ) = p.c * S - p.delta * Q;
            du(i, kE) = N * p.nu_e * second(kE) + p.theta * S * (I + p.b * A) - p.epsilon * E;
            du(i, kA) = N * p.nu_a * second(kA) + p.epsilon * (1 - p.frac_sympt) * E - p.g * A - p.beta_rec * A;
            du(i, kI) = N * p.nu_i * second(kI) + p.epsilon * p.frac_sympt * E - p.j_rec * I - p.l_death * I -
                        p.h1 * I;
            du(i, kD) = p.g * A + p.h1 * I - p.m_death * D - p.mu * D;
            du(i, kR) = p.beta_rec * A + p.j_rec * I + p.mu * D;
            du(i, kCumDeathI) = p.l_death * I;
            du(i, kCumDeathD) = p.m_death * D;
        }
        return du;
    };
    const FieldStorage<double> k1 = f(y);
    const FieldStorage<double> k2 = f(y + 0.5 * dt * k1);
    const FieldStorage<double> k3 = f(y + 0.5 * dt * k2);
    const FieldStorage<double> k4 = f(y + dt * k3);
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
}

// Weighted symmetric Jacobian assembled densely, one probe per unknown.
Eigen::MatrixXd dense_weighted_symmetric_jacobian(const RhsConfig<double>& cfg, const CompartmentField<double>& y)
{
    const Grid& g  = y.grid();
    const Index nn = g.size();
    const Index n  = nn * kSlots;
    Eigen::MatrixXd j(n, n);
    const double eps = 1e-3;
    for (Index col = 0; col < n; ++col) {
        FieldStorage<double> plus = y.values(), minus = y.values();
        plus(col % nn, static_cast<int>(col / nn)) += eps;
        minus(col % nn, static_cast<int>(col / nn)) -= eps;
        const FieldStorage<double> diff = (full_rhs(0.0, plus, g, cfg) - full_rhs(0.0, minus, g, cfg)) / (2 * eps);
        for (Index row = 0; row < n; ++row) {
            j(row, col) = diff(row % nn, static_cast<int>(row / nn));
        }
    }
    Eigen::VectorXd w(n);
    for (Index k = 0; k < n; ++k) {
        w(k) = std::sqrt(g.weights()(k % nn));
    }
    Eigen::MatrixXd b = w.asDiagonal() * j * w.cwiseInverse().asDiagonal();
    return 0.5 * (b + b.transpose());
}

} // namespace

TEST(TestButcherTableau, classical_rk4_consistent)
{
    auto t = ButcherTableau<double>::classical_rk4();
    EXPECT_TRUE(t.consistent());
    EXPECT_DOUBLE_EQ(t.b.sum(), 1.0);
    t.b(0) = 0.2;
    EXPECT_FALSE(t.consistent());
}

TEST(TestExplicitRkStep, scalar_decay_hand_value)
{
    auto t = ButcherTableau<double>::classical_rk4();
    auto f = [](double, double y) {
        return -y;
    };
    EXPECT_NEAR(explicit_rk_step(t, f, 0.0, 1.0, 0.1), 0.9048375, 1e-12);
}

TEST(TestExplicitRkStep, stability_polynomial_conformance)
{
    auto t = ButcherTableau<double>::classical_rk4();
    for (double z : {-2.7, -1.0, -0.3, 0.05, 0.5, 1.2}) {
        auto f = [z](double, double y) {
            return z * y;
        };
        const double poly = 1 + z + z * z / 2 + z * z * z / 6 + z * z * z * z / 24;
        EXPECT_NEAR(explicit_rk_step(t, f, 0.0, 1.0, 1.0), poly, 1e-12);
    }
}

TEST(TestExplicitRkStep, stage_times_follow_abscissae)
{
    auto t = ButcherTableau<double>::classical_rk4();
    std::vector<double> times;
    std::vector<int> stages;
    auto f = [&](double tt, double, int j) {
        times.push_back(tt);
        stages.push_back(j);
        return 0.0;
    };
    explicit_rk_step(t, f, 2.0, 1.0, 0.5);
    EXPECT_EQ(times, (std::vector<double>{2.0, 2.25, 2.25, 2.5}));
    EXPECT_EQ(stages, (std::vector<int>{0, 1, 2, 3}));
}

TEST(TestFullRhs, no_diffusion_equals_pointwise_reaction)
{
    std::mt19937_64 gen(1);
    auto g   = line(1.0, 6);
    auto cfg = covid_config();
    cfg.params.nu_s = cfg.params.nu_e = cfg.params.nu_a = cfg.params.nu_i = 0;
    auto y  = random_field(g, gen);
    auto du = full_rhs(0.0, y, cfg);
    for (Index k = 0; k < g->size(); ++k) {
        auto ref = reaction_rhs(y.node(k), cfg.params);
        for (int s = 0; s < kSlots; ++s) {
            EXPECT_EQ(du(k, s), ref[s]);
        }
    }
}

TEST(TestFullRhs, uniform_field_has_no_diffusion_contribution)
{
    auto g   = rect(5, 4);
    auto cfg = covid_config();
    CompartmentField<double> y(g);
    for (int s = 0; s < kSlots; ++s) {
        y.compartment(s).setConstant(0.1 * (s + 1));
    }
    auto du  = full_rhs(0.0, y, cfg);
    auto ref = reaction_rhs(y.node(0), cfg.params);
    for (Index k = 0; k < g->size(); ++k) {
        for (int s = 0; s < kSlots; ++s) {
            EXPECT_NEAR(du(k, s), ref[s], 1e-15);
        }
    }
}

TEST(TestFullRhs, single_node_bump_in_exposed)
{
    auto g = line(2.0, 3);
    RhsConfig<double> cfg;
    cfg.form        = DiffusionForm::kNodal;
    cfg.params.nu_e = 0.5;
    CompartmentField<double> y(g);
    y.compartment(kR).setConstant(2.0);
    y.compartment(kE)(1) = 1.0;
    auto du = full_rhs(0.0, y, cfg);
    // N = (2, 3, 2), stencil of E = (2, -2, 2).
    EXPECT_DOUBLE_EQ(du(0, kE), 2.0 * 0.5 * 2.0);
    EXPECT_DOUBLE_EQ(du(1, kE), 3.0 * 0.5 * -2.0);
    EXPECT_DOUBLE_EQ(du(2, kE), 2.0 * 0.5 * 2.0);
    for (int s : {kS, kQ, kA, kI, kD, kR, kCumDeathI, kCumDeathD}) {
        EXPECT_EQ(du.col(s).abs().maxCoeff(), 0.0) << slot_name(s);
    }
}

TEST(TestFullRhs, flux_form_sums_to_zero_in_weighted_integral)
{
    std::mt19937_64 gen(3);
    auto cfg = covid_config();
    for (auto g : {line(1.0, 11), rect(6, 5)}) {
        auto y  = random_field(g, gen);
        auto du = full_rhs(0.0, y, cfg);
        double total = 0;
        for (int s = 0; s < kSlots; ++s) {
            total += discrete_integral(du.col(s), *g);
        }
        EXPECT_LE(std::abs(total), 1e-14 * du.abs().maxCoeff());
    }
}

TEST(TestFullRhs, non_finite_input_names_node_and_slot)
{
    auto g = line(1.0, 4);
    CompartmentField<double> y(g);
    y.values()(2, kI) = std::numeric_limits<double>::infinity();
    try {
        full_rhs(0.0, y, covid_config());
        FAIL();
    }
    catch (const NonFiniteError& e) {
        EXPECT_EQ(e.node(), 2);
        EXPECT_EQ(e.slot(), kI);
    }
}

TEST(TestRk4Step, matches_direct_stage_transcription)
{
    std::mt19937_64 gen(5);
    auto g   = line(1.0, 9);
    auto cfg = covid_config();
    cfg.form = DiffusionForm::kNodal;
    auto y   = random_field(g, gen);
    auto out = rk4_step(0.0, y, 0.05, cfg);
    auto ref = reference_rk4_nodal(y.values(), *g, cfg.params, 0.05);
    EXPECT_LE((out.values() - ref).abs().maxCoeff(), 1e-13 * ref.abs().maxCoeff());
}

TEST(TestRk4Step, zero_and_equilibrium_fields)
{
    auto g   = rect(4, 5);
    auto cfg = covid_config();
    CompartmentField<double> zero(g);
    EXPECT_EQ(rk4_step(0.0, zero, 0.1, cfg), zero);

    RhsConfig<double> diffusion_only;
    diffusion_only.params.nu_s = diffusion_only.params.nu_i = 0.4;
    CompartmentField<double> uniform(g);
    uniform.values().setConstant(3.25);
    auto out = rk4_step(0.0, uniform, 0.1, diffusion_only);
    EXPECT_LE((out.values() - uniform.values()).abs().maxCoeff(), 1e-15);
}

TEST(TestEulerStep, scalar_and_local_error)
{
    auto g = line(1.0, 3);
    RhsConfig<double> cfg;
    cfg.model     = ModelKind::kSir;
    cfg.sir.gamma = 1.0;
    CompartmentField<double> y(g);
    y.compartment(kI).setConstant(1.0);
    auto e = euler_step(0.0, y, 0.1, cfg);
    EXPECT_NEAR(e.values()(1, kI), 0.9, 1e-15);
    EXPECT_NEAR(e.values()(1, kR), 0.1, 1e-15);
    auto r = rk4_step(0.0, y, 0.1, cfg);
    EXPECT_NEAR(r.values()(1, kI), 0.9048375, 1e-12);

    CompartmentField<double> zero(g);
    EXPECT_EQ(euler_step(0.0, zero, 0.1, covid_config()), zero);
}

TEST(TestEulerStep, differs_from_rk4_at_second_order)
{
    std::mt19937_64 gen(9);
    auto g   = line(1.0, 7);
    auto cfg = covid_config();
    auto y   = random_field(g, gen);
    std::vector<double> gaps;
    for (double dt : {0.08, 0.04, 0.02, 0.01}) {
        gaps.push_back((euler_step(0.0, y, dt, cfg).values() - rk4_step(0.0, y, dt, cfg).values()).abs().maxCoeff());
    }
    for (std::size_t k = 1; k < gaps.size(); ++k) {
        EXPECT_NEAR(std::log2(gaps[k - 1] / gaps[k]), 2.0, 0.15);
    }
}

TEST(TestSolveTridiagonal, agrees_with_dense_solve)
{
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> u(-1, 1);
    for (Index n : {1, 2, 5, 40}) {
        NodeArray<double> lo(n), di(n), up(n), rhs(n);
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
        for (Index i = 0; i < n; ++i) {
            lo(i)  = u(gen);
            up(i)  = u(gen);
            di(i)  = 3.0 + u(gen);
            rhs(i) = u(gen);
            dense(i, i) = di(i);
            if (i > 0) {
                dense(i, i - 1) = lo(i);
            }
            if (i + 1 < n) {
                dense(i, i + 1) = up(i);
            }
        }
        Eigen::VectorXd expected = dense.partialPivLu().solve(rhs.matrix());
        auto x = solve_tridiagonal(lo, di, up, rhs);
        EXPECT_LE((x.matrix() - expected).cwiseAbs().maxCoeff(), 1e-13);
    }
    NodeArray<double> z = NodeArray<double>::Zero(3);
    EXPECT_THROW(solve_tridiagonal(z, z, z, z), ValidationError);
}

TEST(TestImexEulerStep, equals_euler_without_diffusion)
{
    std::mt19937_64 gen(17);
    auto g   = line(1.0, 8);
    auto cfg = covid_config();
    cfg.params.nu_s = cfg.params.nu_e = cfg.params.nu_a = cfg.params.nu_i = 0;
    auto y = random_field(g, gen);
    EXPECT_EQ(imex_euler_step(0.0, y, 0.3, cfg), euler_step(0.0, y, 0.3, cfg));
}

TEST(TestImexEulerStep, discrete_maximum_principle)
{
    std::mt19937_64 gen(19);
    RhsConfig<double> cfg;
    cfg.params.nu_s        = 1.0;
    cfg.params.nu_a        = 0.3;
    cfg.population.frozen  = 1.0;
    for (auto form : {DiffusionForm::kFlux, DiffusionForm::kNodal}) {
        cfg.form = form;
        for (int trial = 0; trial < 20; ++trial) {
            auto g  = line(1.0, 5 + trial);
            auto y  = random_field(g, gen);
            const double dt = std::pow(10.0, trial % 5 - 2);
            auto out = imex_euler_step(0.0, y, dt, cfg);
            for (int s : {kS, kA}) {
                EXPECT_LE(out.compartment(s).maxCoeff(), y.compartment(s).maxCoeff() + 1e-14);
                EXPECT_GE(out.compartment(s).minCoeff(), y.compartment(s).minCoeff() - 1e-14);
            }
        }
    }
}

TEST(TestImexEulerStep, two_d_unsupported)
{
    auto g = rect(4, 4);
    CompartmentField<double> y(g);
    EXPECT_THROW(imex_euler_step(0.0, y, 0.1, covid_config()), UnsupportedOperation);
    EXPECT_THROW(step(Integrator::kImex, 0.0, y, 0.1, covid_config()), UnsupportedOperation);
}

TEST(TestMaxStableDt, cap_without_diffusion_or_growth)
{
    auto g = line(1.0, 5);
    RhsConfig<double> cfg;
    CompartmentField<double> y(g);
    y.values().setConstant(1.0);
    auto b = max_stable_dt(cfg, y, -0.5, 3.0);
    EXPECT_EQ(b.bound, 3.0);
    EXPECT_TRUE(std::isinf(b.alpha_term));
    EXPECT_TRUE(std::isinf(b.cfl_term));
    EXPECT_EQ(max_stable_dt(cfg, y, 0.25, 10.0).bound, 4.0);
    EXPECT_THROW(max_stable_dt(cfg, y, 0.0, 0.0), ValidationError);
}

TEST(TestMaxStableDt, diffusion_limit_scaling)
{
    RhsConfig<double> cfg;
    cfg.params.nu_i = 0.01;
    auto coarse = line(1.0, 11);
    CompartmentField<double> y(coarse);
    y.compartment(kS).setConstant(2.0);
    const double base = max_stable_dt(cfg, y, 0.0, 100.0).cfl_term;
    EXPECT_NEAR(base, 2.785 / (4.0 * 2.0 * 0.01 * 100.0), 1e-12);

    CompartmentField<double> doubled(coarse);
    doubled.compartment(kS).setConstant(4.0);
    EXPECT_NEAR(max_stable_dt(cfg, doubled, 0.0, 100.0).cfl_term, base / 2, 1e-12);

    auto fine = line(1.0, 21);
    CompartmentField<double> refined(fine);
    refined.compartment(kS).setConstant(2.0);
    EXPECT_NEAR(max_stable_dt(cfg, refined, 0.0, 100.0).cfl_term, base / 4, 1e-12);

    EXPECT_NEAR(max_stable_dt(cfg, y, 0.0, 100.0, Integrator::kEuler).cfl_term, base * 2.0 / 2.785, 1e-12);
    EXPECT_TRUE(std::isinf(max_stable_dt(cfg, y, 0.0, 100.0, Integrator::kImex).cfl_term));
}

TEST(TestEstimateAlpha, matches_dense_eigensolve)
{
    std::mt19937_64 gen(23);
    auto cfg = covid_config();
    for (auto g : {line(1.0, 3), line(1.0, 7), rect(4, 3)}) {
        auto y = random_field(g, gen, 2.0);
        Eigen::MatrixXd dense = dense_weighted_symmetric_jacobian(cfg, y);
        Eigen::MatrixXd sparse = Eigen::MatrixXd(weighted_symmetric_jacobian(cfg, y));
        EXPECT_LE((dense - sparse).cwiseAbs().maxCoeff(), 1e-9);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
        const double expected = es.eigenvalues().maxCoeff();
        std::vector<CompartmentField<double>> samples{y};
        auto est = estimate_alpha(cfg, samples);
        EXPECT_TRUE(est.converged);
        EXPECT_NEAR(est.alpha, expected, 1e-6 * std::max(1.0, std::abs(expected)));
    }
}

TEST(TestEstimateAlpha, incidence_scale_grows_alpha)
{
    auto g   = line(1.0, 3);
    auto cfg = covid_config();
    cfg.params.nu_s = cfg.params.nu_e = cfg.params.nu_a = cfg.params.nu_i = 0;
    std::vector<double> alphas;
    for (double scale : {10.0, 100.0, 1000.0}) {
        CompartmentField<double> y(g);
        y.compartment(kS).setConstant(scale);
        y.compartment(kI).setConstant(scale);
        std::vector<CompartmentField<double>> samples{y};
        alphas.push_back(estimate_alpha(cfg, samples).alpha);
    }
    EXPECT_LT(alphas[0], alphas[1]);
    EXPECT_LT(alphas[1], alphas[2]);
    EXPECT_NEAR(alphas[2] / alphas[1], 10.0, 0.5);
}

TEST(TestEstimateAlpha, linear_decay_closed_form)
{
    // Symmetric part of the (I, R) block [[-g, 0], [g, 0]] has top eigenvalue g (sqrt(2) - 1) / 2.
    auto g = line(1.0, 3);
    RhsConfig<double> cfg;
    cfg.model     = ModelKind::kSir;
    cfg.sir.gamma = 0.4;
    CompartmentField<double> y(g);
    y.compartment(kI).setConstant(5.0);
    std::vector<CompartmentField<double>> samples{y};
    EXPECT_NEAR(estimate_alpha(cfg, samples).alpha, 0.4 * (std::sqrt(2.0) - 1) / 2, 1e-8);
}

TEST(TestEstimateAlpha, pure_neumann_diffusion_nonpositive)
{
    std::mt19937_64 gen(29);
    RhsConfig<double> cfg;
    cfg.params.nu_s       = 0.2;
    cfg.params.nu_e       = 0.1;
    cfg.population.frozen = 1.0;
    for (auto form : {DiffusionForm::kFlux, DiffusionForm::kNodal}) {
        cfg.form = form;
        for (auto g : {line(1.0, 17), rect(5, 6)}) {
            std::vector<CompartmentField<double>> samples{random_field(g, gen)};
            EXPECT_LE(estimate_alpha(cfg, samples).alpha, 1e-8);
        }
    }
}

TEST(TestEstimateAlpha, deterministic_and_requires_samples)
{
    std::mt19937_64 gen(31);
    auto g = line(1.0, 9);
    std::vector<CompartmentField<double>> samples{random_field(g, gen), random_field(g, gen)};
    auto a = estimate_alpha(covid_config(), samples);
    auto b = estimate_alpha(covid_config(), samples);
    EXPECT_EQ(a.alpha, b.alpha);
    EXPECT_EQ(a.per_sample.size(), 2u);
    EXPECT_THROW(estimate_alpha(covid_config(), std::span<const CompartmentField<double>>{}), ValidationError);
}
