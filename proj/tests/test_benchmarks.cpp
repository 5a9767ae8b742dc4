#include <cmath>
#include <set>

#include "doctest.h"
#include "mixbo/benchmarks.hpp"

using namespace mixbo;

TEST_CASE("quartic objective closed-form values") {
    const auto cc = BsVariant::make(2, "cc");
    CHECK(bs_eval(cc, Candidate{{0.0, 0.0}}) == doctest::Approx(13.85254).epsilon(1e-4));

    // the per-dimension stationary point cancels the offset
    for (int d = 2; d <= 6; ++d) {
        const auto v = BsVariant::make(d, std::string(static_cast<std::size_t>(d), 'c'));
        Candidate c;
        c.values.assign(static_cast<std::size_t>(d), -3.38763191);
        CHECK(bs_eval(v, c) == doctest::Approx(0.0).epsilon(1e-5));
    }
}

TEST_CASE("encoded ordinals evaluate like shifted raw coordinates") {
    const auto ii = BsVariant::make(2, "ii");
    const auto cc = BsVariant::make(2, "cc");
    for (int a = 0; a <= 10; ++a)
        for (int b = 0; b <= 10; ++b)
            CHECK(bs_eval(ii, Candidate{{double(a), double(b)}}) ==
                  bs_eval(cc, Candidate{{a - 5.0, b - 5.0}}));
}

TEST_CASE("enumerated golden optima") {
    // frozen from exhaustive enumeration
    const auto ii = BsVariant::make(2, "ii");
    double best = 1e18;
    Candidate arg;
    for (const auto& c : ii.space().enumerate_support()) {
        const double v = bs_eval(ii, c);
        if (v < best) {
            best = v;
            arg = c;
        }
    }
    CHECK(best == doctest::Approx(0.511825912206).epsilon(1e-9));
    CHECK(arg.values == std::vector<double>{2, 2});

    const auto dd = BsVariant::make(2, "dd");
    best = 1e18;
    for (const auto& c : dd.space().enumerate_support()) {
        const double v = bs_eval(dd, c);
        if (v < best) {
            best = v;
            arg = c;
        }
    }
    CHECK(best == doctest::Approx(1.664917934706).epsilon(1e-9));
    CHECK(arg.values == std::vector<double>{1, 1});
}

TEST_CASE("variant grid matches the published benchmark set") {
    const auto grid = BsVariant::grid();
    CHECK(grid.size() == 20);
    std::set<std::string> ids;
    for (const auto& v : grid) ids.insert(v.id());
    CHECK(ids.size() == 20);
    CHECK(ids.count("bs2_ci"));
    CHECK(ids.count("bs4_ccii"));
    CHECK(ids.count("bs5_cciii"));   // 2/5 continuous
    CHECK(ids.count("bs5_iiddd"));   // 2/5 integer
    CHECK(ids.count("bs6_dddddd"));

    const std::pair<int, int> budgets[5] = {{5, 35}, {10, 80}, {20, 100}, {40, 160}, {60, 220}};
    for (const auto& v : grid) CHECK(v.budget() == budgets[v.dim - 2]);

    CHECK_THROWS_AS(BsVariant::make(3, "cc"), DomainError);
    CHECK_THROWS_AS(BsVariant::make(2, "cq"), DomainError);
}

TEST_CASE("dust tables load and evaluate") {
    for (const auto* name : {"dust1", "dust2"}) {
        const DustSpec spec = DustSpec::bundled(name);
        CHECK(spec.name == name);
        CHECK(spec.global_min == -30.0);
        const SearchSpace sp = spec.space();
        CHECK(sp.size() == 3);
        CHECK(sp.param(1).levels == std::vector<double>{0, 1});
    }
    const DustSpec d1 = DustSpec::bundled("dust1");
    CHECK(d1.discrete_levels == std::vector<double>{2, 4, 7, 8});
    const DustSpec d2 = DustSpec::bundled("dust2");
    CHECK(d2.discrete_levels == std::vector<double>{2, 3, 5, 6, 9, 10, 11, 12, 16, 19});
    CHECK(d2.budget() == std::pair<int, int>{12, 128});
}

TEST_CASE("dust landscapes are piecewise constant with one global cell") {
    for (const auto* name : {"dust1", "dust2"}) {
        const DustSpec spec = DustSpec::bundled(name);

        // two points inside the same flat segment of one slice agree exactly
        for (const auto& slice : spec.slices) {
            for (const auto& seg : slice.segments) {
                if (seg.sloped) continue;
                const Candidate a{{seg.x0 + 0.25 * (seg.x1 - seg.x0), double(slice.binary), slice.discrete}};
                const Candidate b{{seg.x0 + 0.75 * (seg.x1 - seg.x0), double(slice.binary), slice.discrete}};
                CHECK(dust_eval(spec, a) == dust_eval(spec, b));
            }
        }

        // exhaustive grid: minimum is the declared global minimum, attained once
        double min_v = 1e18;
        int cells_at_min = 0;
        for (const auto& slice : spec.slices)
            for (const auto& seg : slice.segments) {
                const double lo = std::min(seg.y0, seg.y1);
                min_v = std::min(min_v, lo);
                if (!seg.sloped && seg.y0 == spec.global_min) ++cells_at_min;
            }
        CHECK(min_v == -30.0);
        CHECK(cells_at_min == 1);

        double grid_min = 1e18;
        const SearchSpace sp = spec.space();
        for (double b : {0.0, 1.0})
            for (double d : spec.discrete_levels) {
                for (double x = spec.cont_low; x <= spec.cont_high + 1e-9; x += 0.01) {
                    grid_min = std::min(
                        grid_min, dust_eval(spec, Candidate{{std::min(x, spec.cont_high), b, d}}));
                }
            }
        CHECK(grid_min == doctest::Approx(-30.0).epsilon(1e-9));
    }
}

TEST_CASE("plateau table rejects malformed input") {
    CHECK_THROWS_AS(DustSpec::parse("name x\n"), DomainError);  // no version
    CHECK_THROWS_AS(DustSpec::parse("version 1\nname x\ncontinuous 0 1\ndiscrete 1 2\n"
                                    "global_min -30\nslice 0 1\nseg 0 0.4 5\nseg 0.5 1 -30\n"
                                    "slice 0 2\nseg 0 1 1\nslice 1 1\nseg 0 1 1\nslice 1 2\nseg 0 1 1\n"),
                    DomainError);  // gap in tiling
}

TEST_CASE("brute force optimum") {
    SUBCASE("fully discrete 2d quartic") {
        const auto dd = BsVariant::make(2, "dd");
        const auto opt =
            brute_force_optimum([&](const Candidate& c) { return bs_eval(dd, c); }, dd.space());
        CHECK(opt.value == doctest::Approx(1.664917934706).epsilon(1e-9));
        CHECK(opt.arg.values == std::vector<double>{1, 1});
        CHECK(opt.y_max > opt.y_min);
    }
    SUBCASE("dust1 reaches the pink cell") {
        const DustSpec spec = DustSpec::bundled("dust1");
        const auto opt = brute_force_optimum([&](const Candidate& c) { return dust_eval(spec, c); },
                                             spec.space(), 2001);
        CHECK(opt.value == doctest::Approx(-30.0));
        CHECK(opt.arg.values[1] == 1.0);
        CHECK(opt.arg.values[2] == 7.0);
        CHECK(opt.arg.values[0] >= 14.0);
        CHECK(opt.arg.values[0] <= 15.0);
    }
    SUBCASE("continuous quartic refines to the stationary point") {
        const auto cc = BsVariant::make(2, "cc");
        const auto opt = brute_force_optimum([&](const Candidate& c) { return bs_eval(cc, c); },
                                             cc.space(), 101);
        CHECK(opt.value == doctest::Approx(0.0).epsilon(1e-6));
        for (double v : opt.arg.values) CHECK(v == doctest::Approx(-3.38763191).epsilon(1e-3));
    }
    SUBCASE("cap guards oversized grids") {
        const auto v6 = BsVariant::make(6, "cccccc");
        CHECK_THROWS_AS(brute_force_optimum([&](const Candidate& c) { return bs_eval(v6, c); },
                                            v6.space(), 401),
                        UnsupportedError);
    }
}
