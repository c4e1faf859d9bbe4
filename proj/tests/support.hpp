#pragma once

#include "tecell/butler_volmer.hpp"
#include "tecell/elliptic.hpp"
#include "tecell/mesh.hpp"
#include "tecell/params.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace tecell::testing {

inline double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline std::vector<double> stack(const PotentialPair& p)
{
    std::vector<double> v = p.phis;
    v.insert(v.end(), p.phie.begin(), p.phie.end());
    return v;
}

/// Mesh plus coefficient data and a frozen temperature, with everything
/// drawn from bounded ranges so H1-H7 hold.
struct Problem {
    Mesh mesh;
    PhysicalParams params;
    std::vector<double> u;
};

inline Mesh small_mesh(int cells)
{
    // anode : separator : cathode = 3 : 2 : 3 in cells; separator length kept below half the anode
    const int s = std::max(1, cells / 4);
    const int a = (cells - s) / 2;
    const int c = cells - s - a;
    return build_sandwich_mesh({1.0, 0.4, 1.0}, {a, s, c});
}

inline Problem random_problem(Mesh mesh, std::uint64_t seed, double current = 0.4)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    UniformData d;
    d.alpha = draw(0.3, 0.7);
    d.A_s = draw(0.5, 1.5);
    d.d1 = draw(0.1, 0.5);
    d.T_a = 2.0;
    d.u0 = 2.0;
    d.f_amplitude = draw(-0.5, 0.5);
    PhysicalParams p = make_params(mesh, d);
    for (auto& v : p.k)
        v = draw(0.5, 2.0);
    for (auto& v : p.sigma_e)
        v = draw(0.5, 2.0);
    for (auto& v : p.sigma_s)
        v = draw(0.5, 2.0);
    for (auto& v : p.g1)
        v = draw(0.5, 1.5);
    for (auto& v : p.U)
        v = draw(-0.3, 0.3);
    for (auto& v : p.u0)
        v = draw(2.0, 2.2);
    p.g0 = *std::min_element(p.g1.begin(), p.g1.end());
    const double I = draw(0.5, 1.0) * current;
    // equal and opposite totals; Gamma_a and Gamma_c have equal measure on a tensor grid
    p.current_a = I;
    p.current_c = -I;

    std::vector<double> u(p.u0);
    for (auto& v : u)
        v += draw(-0.3, 0.3);
    return {std::move(mesh), std::move(p), std::move(u)};
}

}  // namespace tecell::testing
