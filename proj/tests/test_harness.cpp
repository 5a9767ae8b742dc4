#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "mixbo/harness.hpp"
#include "mixbo/sobol.hpp"

using namespace mixbo;

TEST_CASE("model preset parsing") {
    const auto ei = ModelPreset::parse("ei_BOSS_on_gam_Mat52");
    CHECK(ei.af == AfKind::EI);
    CHECK(ei.kernel == "BOSS_on_gam_Mat52");
    const auto lcb = ModelPreset::parse("lcb_meta_off");
    CHECK(lcb.af == AfKind::LCB);
    CHECK(ModelPreset::parse("SOBOL_off").sobol_only);
    CHECK_THROWS_AS(ModelPreset::parse("ei_not_a_kernel"), DomainError);
    CHECK_THROWS_AS(ModelPreset::parse("BOSS_on_gam_Mat52"), DomainError);
}

TEST_CASE("config round trip and validation") {
    RunConfig c;
    c.benchmark = {"bs", 3, "idd"};
    c.preset = "lcb_BOSS_off_Mat52";
    c.seeds = {0, 3};
    c.maf = {true, 0.05};
    c.pr.tau = 0.2;
    const RunConfig back = RunConfig::from_json_text(c.to_json_text());
    CHECK(back.benchmark.key() == "bs3_idd");
    CHECK(back.preset == c.preset);
    CHECK(back.seeds == c.seeds);
    CHECK(back.maf.enabled);
    CHECK(back.pr.tau == 0.2);

    // rounding presets are rejected on spaces with discrete dims at validation
    RunConfig bad;
    bad.benchmark = {"bs", 2, "id"};
    bad.preset = "ei_KR_on_gam_Mat52";
    CHECK_THROWS_AS(bad.validate(), UnsupportedError);
    RunConfig ok;
    ok.benchmark = {"bs", 2, "ci"};
    ok.preset = "ei_KR_on_gam_Mat52";
    CHECK_NOTHROW(ok.validate());

    CHECK_THROWS_AS(RunConfig::from_json_text("{\"preset\": \"nope\"}"), DomainError);
}

TEST_CASE("benchmark truth oracle") {
    // separable oracle against the generic grid on a small variant
    const BenchmarkRef ref{"bs", 2, "id"};
    const Optimum t = benchmark_truth(ref);
    const auto v = BsVariant::make(2, "id");
    const auto grid = brute_force_optimum([&](const Candidate& c) { return bs_eval(v, c); }, v.space());
    CHECK(t.value == doctest::Approx(grid.value).epsilon(1e-9));
    CHECK(t.arg.values == grid.arg.values);
    CHECK(t.y_max == doctest::Approx(grid.y_max).epsilon(1e-9));

    const Optimum dust = benchmark_truth(BenchmarkRef{"dust1", 0, ""});
    CHECK(dust.value == doctest::Approx(-30.0));
}

TEST_CASE("tolerance tables") {
    const auto strict = ToleranceSpec::named("bs2_ci", "strict");
    CHECK(strict.y_pct == 0.001);
    CHECK(strict.x_pct == 0.01);
    CHECK(ToleranceSpec::named("bs5_cciii", "loose").x_pct == 0.04);
    CHECK(ToleranceSpec::named("dust1", "medium").y_pct == 0.02);
    CHECK(ToleranceSpec::named("dust2", "loose").y_pct == 0.05);
    CHECK_THROWS_AS(ToleranceSpec::named("bs2_ci", "huge"), DomainError);
}

namespace {

RunTrace make_trace(const std::vector<std::tuple<int, Candidate, double>>& rows) {
    RunTrace t;
    double best = 1e18;
    for (const auto& [iter, cand, y] : rows) {
        TraceRow r;
        r.iter = iter;
        r.candidate = cand;
        r.y = y;
        best = std::min(best, y);
        r.best_y = best;
        t.rows.push_back(r);
    }
    return t;
}

}  // namespace

TEST_CASE("convergence checking") {
    const SearchSpace sp({ParameterSpec::continuous("x", 0, 10), ParameterSpec::integer("i", 0, 4)});
    Optimum truth;
    truth.arg = Candidate{{5.0, 2.0}};
    truth.value = -1.0;
    truth.y_min = -1.0;
    truth.y_max = 9.0;  // range 10
    ToleranceSpec tol;
    tol.y_pct = 0.01;  // 0.1 in y
    tol.x_pct = 0.02;  // 0.2 in x

    SUBCASE("first point exact optimum converges at iteration 0") {
        const auto t = make_trace({{0, Candidate{{5.0, 2.0}}, -1.0}});
        CHECK(check_convergence(t, sp, tol, truth) == 0);
    }
    SUBCASE("wrong ordinal level never converges") {
        const auto t = make_trace({{0, Candidate{{5.0, 3.0}}, -0.999}, {1, Candidate{{5.0, 3.0}}, -1.0}});
        CHECK(!check_convergence(t, sp, tol, truth).has_value());
    }
    SUBCASE("tolerance boundaries are inclusive") {
        const auto t = make_trace({{0, Candidate{{5.2, 2.0}}, -0.9}});
        CHECK(check_convergence(t, sp, tol, truth) == 0);
        const auto t2 = make_trace({{0, Candidate{{5.2000001, 2.0}}, -0.9}});
        CHECK(!check_convergence(t2, sp, tol, truth).has_value());
    }
    SUBCASE("reports the iteration that introduced the qualifying sample") {
        const auto t = make_trace({{0, Candidate{{9.0, 0.0}}, 5.0},
                                   {1, Candidate{{1.0, 1.0}}, 2.0},
                                   {2, Candidate{{5.1, 2.0}}, -0.95},
                                   {3, Candidate{{5.0, 2.0}}, -1.0}});
        CHECK(check_convergence(t, sp, tol, truth) == 2);
    }
}

TEST_CASE("composite score reproduces published rows") {
    // (converged, mean printed, total, score printed)
    auto synth = [](int c, int total, int iter_sum) {
        std::vector<std::optional<int>> runs;
        for (int i = 0; i < c; ++i) runs.emplace_back(iter_sum / c + (i < iter_sum % c ? 1 : 0));
        for (int i = c; i < total; ++i) runs.emplace_back(std::nullopt);
        return composite_score(runs);
    };

    const CompositeScore a = synth(6, 10, 215);  // mean 35.83
    CHECK(a.mean_iteration == doctest::Approx(35.83).epsilon(2e-4));
    CHECK(a.score == doctest::Approx(0.016744).epsilon(1e-4));

    const CompositeScore b = synth(1, 10, 8);  // the lone-run row
    CHECK(b.mean_iteration == 8.0);
    CHECK(b.score == doctest::Approx(0.0125));

    const CompositeScore none = composite_score({std::nullopt, std::nullopt});
    CHECK(none.converged == 0);
    CHECK(none.score == 0.0);

    const CompositeScore single = composite_score({std::optional<int>(8)});
    CHECK(single.score == doctest::Approx(0.125));
}

TEST_CASE("rank tables") {
    SUBCASE("plain ordering") {
        std::map<std::string, std::map<std::string, double>> scores;
        scores["a"]["v1"] = 0.02;
        scores["b"]["v1"] = 0.01;
        const auto r = rank_models(scores);
        REQUIRE(r.size() == 2);
        CHECK(r[0].model == "a");
        CHECK(r[0].mean == 1.0);
        CHECK(r[1].mean == 2.0);
    }
    SUBCASE("ties share the better rank") {
        std::map<std::string, std::map<std::string, double>> scores;
        scores["a"]["v1"] = 0.02;
        scores["b"]["v1"] = 0.02;
        scores["c"]["v1"] = 0.01;
        const auto r = rank_models(scores);
        CHECK(r[0].mean == 1.0);
        CHECK(r[1].mean == 1.0);
        CHECK(r[2].mean == 2.0);  // dense ranking
    }
    SUBCASE("hand-computed 3x2 fixture with a partial model") {
        std::map<std::string, std::map<std::string, double>> scores;
        scores["m1"] = {{"v1", 0.03}, {"v2", 0.01}};
        scores["m2"] = {{"v1", 0.02}, {"v2", 0.02}};
        scores["m3"] = {{"v1", 0.01}};  // participates in one variant only
        const auto r = rank_models(scores);
        REQUIRE(r.size() == 3);
        // v1 ranks: m1=1, m2=2, m3=3; v2 ranks: m2=1, m1=2
        for (const auto& s : r) {
            if (s.model == "m1") {
                CHECK(s.num_ranks == 2);
                CHECK(s.mean == doctest::Approx(1.5));
                CHECK(s.min == 1);
                CHECK(s.max == 2);
            } else if (s.model == "m2") {
                CHECK(s.mean == doctest::Approx(1.5));
                CHECK(s.median == doctest::Approx(1.5));
            } else {
                CHECK(s.num_ranks == 1);
                CHECK(s.mean == 3.0);
            }
        }
    }
}

TEST_CASE("bo run produces a well-formed trace") {
    RunConfig c;
    c.benchmark = {"bs", 2, "ci"};
    c.preset = "ei_BOSS_on_gam_Mat52";
    c.iter_budget = 6;  // keep the unit suite quick; full budgets run in acceptance
    c.pr.restarts = 6;
    c.pr.steps = 40;
    c.fit.restarts = 2;
    c.fit.steps = 80;
    const RunTrace t = run_bo(c, 0);
    CHECK(t.rows.size() == 5 + 6);
    double prev = 1e18;
    for (const auto& r : t.rows) {
        CHECK(r.best_y <= prev + 1e-12);
        prev = r.best_y;
        CHECK(r.regret >= -1e-9);
        CHECK_NOTHROW(make_benchmark(c.benchmark).space.validate_candidate(r.candidate));
    }
    for (std::size_t i = 0; i < 5; ++i) CHECK(t.rows[i].iter == 0);
    CHECK(t.rows.back().iter == 6);
}

TEST_CASE("sobol baseline replays the raw sequence") {
    RunConfig c;
    c.benchmark = {"bs", 2, "dd"};
    c.preset = "SOBOL_off";
    c.iter_budget = 10;
    const RunTrace t = run_bo(c, 3);
    const auto inst = make_benchmark(c.benchmark);
    const auto stream = sobol_candidates(inst.space, 15, 15 * 3);
    REQUIRE(t.rows.size() == 15);
    for (std::size_t i = 0; i < 15; ++i) {
        CHECK(t.rows[i].candidate == stream[i]);
        CHECK(t.rows[i].af_kind == "sobol");
    }
}

TEST_CASE("trace csv round trips") {
    RunConfig c;
    c.benchmark = {"bs", 2, "dd"};
    c.preset = "SOBOL_off";
    c.iter_budget = 4;
    const auto inst = make_benchmark(c.benchmark);
    const RunTrace t = run_bo(c, 1);
    const std::string csv = trace_to_csv(t, inst.space);
    const RunTrace back = trace_from_csv(csv, inst.space);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(back.rows[i].candidate == t.rows[i].candidate);
        CHECK(back.rows[i].y == t.rows[i].y);
        CHECK(back.rows[i].af_kind == t.rows[i].af_kind);
    }
    CHECK(trace_to_csv(back, inst.space) == csv);

    // fixed column schema
    CHECK(csv.rfind("seed,iter,x1,x2,y,best_y,regret,af_kind,seconds\n", 0) == 0);
}

TEST_CASE("plot data aggregates regret across seeds") {
    RunConfig c;
    c.benchmark = {"bs", 2, "dd"};
    c.preset = "SOBOL_off";
    c.iter_budget = 6;
    std::vector<RunTrace> traces;
    for (int seed : {0, 1, 2}) traces.push_back(run_bo(c, seed));
    const std::string csv = plot_data_csv(traces);
    CHECK(csv.rfind("iter,mean_regret,sd_regret,min_regret,max_regret\n", 0) == 0);
    // one line per iteration 0..6 plus the header
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
}
