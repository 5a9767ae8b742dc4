#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "mixbo/reparam.hpp"

using namespace mixbo;

namespace {

/// Synthetic acquisition over normalized points; x-gradients by central
/// differences (the theta path under test never differentiates through here).
class TestAf : public AcquisitionFunction {
public:
    explicit TestAf(std::function<double(const NormalizedPoint&)> f) : f_(std::move(f)) {}

    Vec value(const std::vector<NormalizedPoint>& pts) const override {
        Vec v(static_cast<Eigen::Index>(pts.size()));
        for (std::size_t i = 0; i < pts.size(); ++i) v(static_cast<Eigen::Index>(i)) = f_(pts[i]);
        return v;
    }
    std::pair<Vec, Mat> value_with_grad(const std::vector<NormalizedPoint>& pts,
                                        const std::vector<std::size_t>& dims) const override {
        Vec v = value(pts);
        Mat g(v.size(), static_cast<Eigen::Index>(dims.size()));
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t d = 0; d < dims.size(); ++d) {
                NormalizedPoint lo = pts[i], hi = pts[i];
                const double h = 1e-6;
                lo.coords[dims[d]] -= h;
                hi.coords[dims[d]] += h;
                g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = (f_(hi) - f_(lo)) / (2 * h);
            }
        return {v, g};
    }

private:
    std::function<double(const NormalizedPoint&)> f_;
};

constexpr double kSig5 = 0.9933071490757153;  // sigmoid(5)

}  // namespace

TEST_CASE("ordinal transforms follow the table") {
    const auto disc13 = ParameterSpec::discrete("d", {1, 3});
    auto mid = transform_ordinal(disc13, 2.0, 0.1);
    CHECK(mid.support == std::vector<double>{1, 3});
    CHECK(mid.probs[1] == doctest::Approx(0.5));

    const auto integer = ParameterSpec::integer("i", 0, 10);
    auto at2 = transform_ordinal(integer, 2.0, 0.1);
    CHECK(at2.support == std::vector<double>{2, 3});
    CHECK(at2.probs[1] == doctest::Approx(1.0 - kSig5).epsilon(1e-7));
    CHECK(at2.probs[0] == doctest::Approx(kSig5).epsilon(1e-7));

    const auto binary = ParameterSpec::binary("b");
    auto at1 = transform_ordinal(binary, 1.0, 0.1);
    CHECK(at1.support == std::vector<double>{0, 1});
    CHECK(at1.probs[1] == doctest::Approx(kSig5).epsilon(1e-7));

    // out-of-range theta clamps rather than throwing mid-optimization
    auto clamped = transform_ordinal(binary, 7.0, 0.1);
    CHECK(clamped.probs[1] == doctest::Approx(kSig5).epsilon(1e-7));

    for (const auto& d : {mid, at2, at1, clamped}) d.validate();
}

TEST_CASE("categorical softmax transform") {
    const auto cat = ParameterSpec::categorical("c", {"a", "b", "c"});
    Vec logits = Vec::Zero(3);
    auto uniform = transform_categorical(cat, logits, 0.1);
    for (double p : uniform.probs) CHECK(p == doctest::Approx(1.0 / 3.0));

    logits << 1.0, 0.0, 0.0;
    auto sharp = transform_categorical(cat, logits, 0.1, true);
    CHECK(sharp.probs[0] > 0.999);
    auto soft = transform_categorical(cat, logits, 0.1, false);  // paper-literal variant
    CHECK(soft.probs[0] < 0.4);
    sharp.validate();
    soft.validate();
}

TEST_CASE("per-dimension distributions sit on valid levels") {
    const SearchSpace sp({ParameterSpec::continuous("x", 0, 1),
                          ParameterSpec::discrete("d", {0, 1, 3, 4, 7, 9}),
                          ParameterSpec::categorical("c", {"a", "b"})});
    PrSettings s;
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 100; ++t) {
        ThetaVector th;
        th.cont = Vec::Constant(1, u(rng));
        th.ord = Vec::Constant(1, 9.0 * u(rng));
        th.cat = {Vec::Random(2)};
        const auto dists = theta_distributions(sp, th, s);
        REQUIRE(dists.size() == 2);
        dists[0].validate();
        dists[1].validate();
        CHECK(dists[0].support.size() == 2);
        for (double v : dists[0].support)
            CHECK(std::count(sp.param(1).levels.begin(), sp.param(1).levels.end(), v) == 1);
        // adjacency of the ordinal bracket
        const auto& lv = sp.param(1).levels;
        const auto it = std::find(lv.begin(), lv.end(), dists[0].support[0]);
        CHECK(*(it + 1) == dists[0].support[1]);
    }
}

TEST_CASE("probabilistic objective point values") {
    const SearchSpace sp({ParameterSpec::integer("i", 0, 10)});
    PrSettings s;

    SUBCASE("two-term weighted sum") {
        TestAf af([](const NormalizedPoint& p) { return p.coords[0] == doctest::Approx(0.2) ? 1.0 : 0.0; });
        ThetaVector th;
        th.cont = Vec(0);
        th.ord = Vec::Constant(1, 2.0);
        CHECK(probabilistic_objective(af, sp, th, s) == doctest::Approx(kSig5).epsilon(1e-7));
    }
    SUBCASE("degenerate theta is a point mass") {
        TestAf af([](const NormalizedPoint& p) { return std::sin(37.0 * p.coords[0]); });
        const Candidate c{{7.0}};
        const ThetaVector th = ThetaVector::degenerate_at(sp, c);
        CHECK(probabilistic_objective(af, sp, th, s) ==
              af.value({sp.normalize(c)})(0));
    }
    SUBCASE("convex combination never beats the best configuration") {
        TestAf af([](const NormalizedPoint& p) { return std::cos(11.0 * p.coords[0]); });
        double best = -1e9;
        for (const auto& c : sp.enumerate_support()) best = std::max(best, af.value({sp.normalize(c)})(0));
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> u(0, 10);
        for (int t = 0; t < 1000; ++t) {
            ThetaVector th;
            th.cont = Vec(0);
            th.ord = Vec::Constant(1, u(rng));
            CHECK(probabilistic_objective(af, sp, th, s) <= best + 1e-12);
        }
    }
}

TEST_CASE("exact enumeration cap") {
    std::vector<ParameterSpec> ps;
    for (int i = 0; i < 11; ++i) ps.push_back(ParameterSpec::binary("b" + std::to_string(i)));
    const SearchSpace sp(std::move(ps));  // joint bracket support 2^11 = 2048
    PrSettings s;
    TestAf af([](const NormalizedPoint&) { return 1.0; });
    ThetaVector th;
    th.cont = Vec(0);
    th.ord = Vec::Constant(11, 0.5);
    CHECK_THROWS_AS(probabilistic_objective(af, sp, th, s, PoMode::Exact), UnsupportedError);
    CHECK(probabilistic_objective(af, sp, th, s, PoMode::MonteCarlo) == doctest::Approx(1.0));
}

TEST_CASE("monte carlo estimate agrees with exact enumeration") {
    const SearchSpace sp({ParameterSpec::discrete("d", {0, 1, 3, 4, 7, 9}), ParameterSpec::binary("b")});
    TestAf af([](const NormalizedPoint& p) { return std::sin(9.0 * p.coords[0]) + 0.3 * p.coords[1]; });
    PrSettings s;
    s.mc_size = 4096;
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 10; ++t) {
        ThetaVector th;
        th.cont = Vec(0);
        th.ord = Vec(2);
        th.ord << 9.0 * u(rng), u(rng);
        s.seed = static_cast<std::uint64_t>(100 + t);
        const double exact = probabilistic_objective(af, sp, th, s, PoMode::Exact);
        const double mc = probabilistic_objective(af, sp, th, s, PoMode::MonteCarlo);

        // exact second moment gives the Monte Carlo standard error
        const auto dists = theta_distributions(sp, th, s);
        double second = 0.0;
        std::vector<std::size_t> idx{0, 0};
        for (std::size_t a = 0; a < dists[0].support.size(); ++a)
            for (std::size_t b = 0; b < dists[1].support.size(); ++b) {
                NormalizedPoint p;
                p.coords = {(dists[0].support[a] - 0.0) / 9.0, dists[1].support[b]};
                const double v = af.value({p})(0);
                second += dists[0].probs[a] * dists[1].probs[b] * v * v;
            }
        const double se = std::sqrt(std::max(second - exact * exact, 0.0) / s.mc_size);
        CHECK(std::abs(mc - exact) <= 3.0 * se + 1e-12);
    }
}

TEST_CASE("po gradient saturation and symmetry") {
    const SearchSpace sp({ParameterSpec::discrete("d", {0, 9})});
    PrSettings s;

    SUBCASE("saturated sigmoid kills the gradient") {
        TestAf af([](const NormalizedPoint& p) { return p.coords[0]; });
        ThetaVector th;
        th.cont = Vec(0);
        th.ord = Vec::Constant(1, 0.2);  // z = -4.3 in value space, /tau -> -43
        const PoGradient g = po_gradient(af, sp, th, s);
        CHECK(std::abs(g.dord(0)) < 1e-6);
    }
    SUBCASE("symmetric acquisition at the midpoint") {
        TestAf af([](const NormalizedPoint&) { return 0.77; });
        ThetaVector th;
        th.cont = Vec(0);
        th.ord = Vec::Constant(1, 4.5);
        const PoGradient g = po_gradient(af, sp, th, s);
        CHECK(std::abs(g.dord(0)) <= 1e-8);
    }
}

TEST_CASE("po gradients match finite differences") {
    const SearchSpace sp({ParameterSpec::continuous("x", 0, 1), ParameterSpec::integer("i", 0, 10),
                          ParameterSpec::categorical("c", {"a", "b", "c"})});
    // smooth synthetic acquisition with interactions
    TestAf af([](const NormalizedPoint& p) {
        return std::sin(3.0 * p.coords[0] + 1.7 * p.coords[1]) + 0.5 * std::cos(2.0 * p.coords[1]) +
               0.25 * p.coords[2];
    });
    PrSettings s;
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    int checked = 0;
    for (int t = 0; t < 100; ++t) {
        ThetaVector th;
        th.cont = Vec::Constant(1, u(rng));
        // keep clear of bracket switches so central differences are valid
        double ord = u(rng) * 10.0;
        if (std::abs(ord - std::round(ord)) < 0.05) ord += 0.07;
        th.ord = Vec::Constant(1, std::min(ord, 9.95));
        Vec logits(3);
        logits << u(rng), u(rng), u(rng);
        th.cat = {logits};

        const PoGradient g = po_gradient(af, sp, th, s);
        const double h = 1e-6;

        auto po_at = [&](const ThetaVector& tv) { return probabilistic_objective(af, sp, tv, s); };
        {
            ThetaVector lo = th, hi = th;
            lo.cont(0) -= h;
            hi.cont(0) += h;
            const double fd = (po_at(hi) - po_at(lo)) / (2 * h);
            if (std::abs(fd) > 1e-7) CHECK(g.dcont(0) == doctest::Approx(fd).epsilon(1e-4));
        }
        {
            ThetaVector lo = th, hi = th;
            lo.ord(0) -= h;
            hi.ord(0) += h;
            const double fd = (po_at(hi) - po_at(lo)) / (2 * h);
            if (std::abs(fd) > 1e-7) CHECK(g.dord(0) == doctest::Approx(fd).epsilon(1e-4));
        }
        for (int k = 0; k < 3; ++k) {
            ThetaVector lo = th, hi = th;
            lo.cat[0](k) -= h;
            hi.cat[0](k) += h;
            const double fd = (po_at(hi) - po_at(lo)) / (2 * h);
            if (std::abs(fd) > 1e-7) CHECK(g.dcat[0](k) == doctest::Approx(fd).epsilon(1e-4));
        }
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("pr optimizer beats a theta grid on a 1d integer space") {
    const SearchSpace sp({ParameterSpec::integer("i", 0, 10)});
    TestAf af([](const NormalizedPoint& p) {
        const double x = p.coords[0] * 10.0;
        return -0.3 * (x - 6.0) * (x - 6.0) + std::sin(2.0 * x);
    });
    PrSettings s;
    s.seed = 1;
    const PrResult r = optimize_acquisition_pr(af, sp, s);

    double grid_best = -1e18;
    for (int k = 0; k < 1000; ++k) {
        ThetaVector th;
        th.cont = Vec(0);
        th.ord = Vec::Constant(1, 10.0 * k / 999.0);
        grid_best = std::max(grid_best, probabilistic_objective(af, sp, th, s));
    }
    CHECK(r.po >= grid_best - 1e-6);
}

TEST_CASE("pr optimizer on a constant acquisition") {
    const SearchSpace sp({ParameterSpec::discrete("d", {0, 1, 3, 4, 7, 9}), ParameterSpec::binary("b")});
    TestAf af([](const NormalizedPoint&) { return 1.234; });
    PrSettings s;
    s.restarts = 4;
    s.steps = 20;
    const PrResult r = optimize_acquisition_pr(af, sp, s);
    CHECK(r.po == doctest::Approx(1.234).epsilon(1e-9));
}

TEST_CASE("seeded incumbent restart dominates") {
    const SearchSpace sp({ParameterSpec::discrete("d", {0, 1, 3, 4, 7, 9})});
    // spiky acquisition the relaxed optimizer would miss: only level 4 pays out
    TestAf af([](const NormalizedPoint& p) { return p.coords[0] == doctest::Approx(4.0 / 9.0) ? 10.0 : 0.0; });
    PrSettings s;
    s.restarts = 3;
    s.steps = 10;
    const Candidate incumbent{{4.0}};
    const PrResult r = optimize_acquisition_pr(af, sp, s, incumbent);
    CHECK(r.po >= 10.0 - 1e-12);
    const Candidate c = sample_candidates(af, sp, r.theta, s);
    CHECK(c == incumbent);
}

TEST_CASE("candidate sampling") {
    const SearchSpace sp({ParameterSpec::integer("i", 0, 1)});
    PrSettings s;

    SUBCASE("degenerate theta always returns its support point") {
        TestAf af([](const NormalizedPoint&) { return 0.0; });
        const ThetaVector th = ThetaVector::degenerate_at(sp, Candidate{{1.0}});
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            s.seed = seed;
            CHECK(sample_candidates(af, sp, th, s) == Candidate{{1.0}});
        }
    }
    SUBCASE("argmax of the drawn batch wins") {
        TestAf af([](const NormalizedPoint& p) { return p.coords[0]; });  // level 1 pays 1
        ThetaVector th;
        th.cont = Vec(0);
        th.ord = Vec::Constant(1, 0.5);  // 50/50 between the levels
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            s.seed = seed;
            CHECK(sample_candidates(af, sp, th, s) == Candidate{{1.0}});
        }
    }
    SUBCASE("samples always validate") {
        const SearchSpace mixed({ParameterSpec::continuous("x", -5, 5),
                                 ParameterSpec::discrete("d", {0, 1, 3, 4, 7, 9}),
                                 ParameterSpec::categorical("c", {"a", "b", "c"})});
        TestAf af([](const NormalizedPoint& p) { return p.coords[0] + p.coords[1]; });
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> u(0, 1);
        for (int t = 0; t < 20; ++t) {
            ThetaVector th;
            th.cont = Vec::Constant(1, u(rng));
            th.ord = Vec::Constant(1, 9.0 * u(rng));
            Vec logits(3);
            logits << u(rng), u(rng), u(rng);
            th.cat = {logits};
            s.seed = static_cast<std::uint64_t>(t);
            CHECK_NOTHROW(mixed.validate_candidate(sample_candidates(af, mixed, th, s)));
        }
    }
}
