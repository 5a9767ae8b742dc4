#include "mixbo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>

#include "json.hpp"
#include "mixbo/sobol.hpp"

namespace mixbo {

namespace {
using nlohmann::json;

// seed-stream tags
constexpr std::uint64_t kTagNoise = 0x6e6f697365ull;
constexpr std::uint64_t kTagFit = 0x666974ull;
constexpr std::uint64_t kTagAcq = 0x616371ull;
}  // namespace

std::string BenchmarkRef::key() const {
    if (id == "bs") return "bs" + std::to_string(dims) + "_" + pattern;
    return id;
}

BenchmarkInstance make_benchmark(const BenchmarkRef& ref) {
    BenchmarkInstance inst;
    inst.id = ref.key();
    if (ref.id == "bs") {
        const BsVariant v = BsVariant::make(ref.dims, ref.pattern);
        inst.space = v.space();
        inst.objective = [v](const Candidate& c) { return bs_eval(v, c); };
        inst.default_budget = v.budget();
    } else if (ref.id == "dust1" || ref.id == "dust2") {
        auto spec = std::make_shared<DustSpec>(DustSpec::bundled(ref.id));
        inst.space = spec->space();
        inst.objective = [spec](const Candidate& c) { return dust_eval(*spec, c); };
        inst.default_budget = spec->budget();
    } else {
        throw DomainError("unknown benchmark '" + ref.id + "'");
    }
    return inst;
}

namespace {

// The quartic benchmark separates across dimensions, so its optimum, minimum
// and maximum are sums of per-dimension extrema; this keeps the truth oracle
// exact for the 5- and 6-dimensional variants the grid could not cover.
Optimum bs_truth(const BsVariant& v) {
    const SearchSpace space = v.space();
    const double d = static_cast<double>(v.dim);
    Optimum out;
    out.arg.values.resize(space.size());
    double sum_min = 0.0, sum_max = 0.0;
    for (int j = 0; j < v.dim; ++j) {
        const bool odd = j % 2 == 0;  // 1-based odd coordinate
        auto g = [odd](double x) {
            double val = 0.15 * x * x * x * x - 3.0 * x * x + 3.0 * x;
            if (odd) {
                const double t = x + 3.38763191;
                val += 0.5 * t * t;
            }
            return val;
        };
        const auto& p = space.param(static_cast<std::size_t>(j));
        double best_x = 0.0, best_v = std::numeric_limits<double>::infinity();
        double worst_v = -std::numeric_limits<double>::infinity();
        if (p.kind == ParamKind::Continuous) {
            const int n = 4001;
            for (int k = 0; k < n; ++k) {
                const double x = -5.0 + 10.0 * k / (n - 1.0);
                const double val = g(x);
                if (val < best_v) {
                    best_v = val;
                    best_x = x;
                }
                worst_v = std::max(worst_v, val);
            }
            for (double step = 10.0 / 4000.0; step > 1e-13; step *= 0.5) {
                for (const double sgn : {-1.0, 1.0}) {
                    const double x = std::clamp(best_x + sgn * step, -5.0, 5.0);
                    const double val = g(x);
                    if (val < best_v) {
                        best_v = val;
                        best_x = x;
                    }
                }
            }
        } else {
            for (const double lv : p.levels) {
                const double val = g(lv - 5.0);
                if (val < best_v) {
                    best_v = val;
                    best_x = lv;
                }
                worst_v = std::max(worst_v, val);
            }
        }
        out.arg.values[static_cast<std::size_t>(j)] = best_x;
        sum_min += best_v;
        sum_max += worst_v;
    }
    out.value = sum_min / (2.0 * d) + 12.4180436;
    out.y_min = out.value;
    out.y_max = sum_max / (2.0 * d) + 12.4180436;
    return out;
}

}  // namespace

Optimum benchmark_truth(const BenchmarkRef& ref) {
    static std::map<std::string, Optimum> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    const auto it = cache.find(ref.key());
    if (it != cache.end()) return it->second;

    Optimum out;
    if (ref.id == "bs") {
        out = bs_truth(BsVariant::make(ref.dims, ref.pattern));
    } else {
        const BenchmarkInstance inst = make_benchmark(ref);
        out = brute_force_optimum(inst.objective, inst.space, 2001);
    }
    cache[ref.key()] = out;
    return out;
}

ModelPreset ModelPreset::parse(const std::string& name) {
    ModelPreset p;
    p.name = name;
    if (name == "SOBOL_off") {
        p.sobol_only = true;
        return p;
    }
    std::string kernel;
    if (name.rfind("ei_", 0) == 0) {
        p.af = AfKind::EI;
        kernel = name.substr(3);
    } else if (name.rfind("lcb_", 0) == 0) {
        p.af = AfKind::LCB;
        kernel = name.substr(4);
    } else {
        throw DomainError("unknown model preset '" + name + "' (expected ei_*/lcb_*/SOBOL_off)");
    }
    const auto& known = KernelSpec::preset_names();
    if (std::find(known.begin(), known.end(), kernel) == known.end())
        throw DomainError("unknown kernel preset '" + kernel + "' in model preset '" + name + "'");
    p.kernel = kernel;
    return p;
}

// ---- config ------------------------------------------------------------------

int RunConfig::effective_init() const {
    return init_points >= 0 ? init_points : make_benchmark(benchmark).default_budget.first;
}

int RunConfig::effective_budget() const {
    return iter_budget >= 0 ? iter_budget : make_benchmark(benchmark).default_budget.second;
}

void RunConfig::validate() const {
    const ModelPreset preset_info = ModelPreset::parse(preset);
    const BenchmarkInstance inst = make_benchmark(benchmark);
    if (!preset_info.sobol_only) KernelSpec::preset(preset_info.kernel).validate_for_space(inst.space);
    if (seeds.empty()) throw DomainError("config: need at least one seed");
    if (effective_init() < 2) throw DomainError("config: need at least 2 initial points");
    if (effective_budget() < 0) throw DomainError("config: negative iteration budget");
    if (penalty.enabled && penalty.value < 1e4) throw DomainError("config: penalty value must be >= 1e4");
    if (maf.enabled && !(maf.threshold > 0.0)) throw DomainError("config: maf threshold must be positive");
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    const json j = json::parse(text);
    RunConfig c;
    if (j.contains("benchmark")) {
        const auto& b = j.at("benchmark");
        if (b.is_string()) {
            const std::string s = b.get<std::string>();
            if (s == "dust1" || s == "dust2") {
                c.benchmark.id = s;
            } else {
                throw DomainError("config: benchmark string must be dust1/dust2; use an object for bs");
            }
        } else {
            c.benchmark.id = b.value("id", "bs");
            c.benchmark.dims = b.value("dims", 2);
            c.benchmark.pattern = b.value("pattern", "ci");
        }
    }
    c.preset = j.value("preset", c.preset);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<int>>();
    c.init_points = j.value("init_points", -1);
    c.iter_budget = j.value("iter_budget", -1);
    if (j.contains("penalty")) {
        c.penalty.enabled = j.at("penalty").value("enabled", true);
        c.penalty.value = j.at("penalty").value("value", 1e6);
    }
    if (j.contains("maf")) {
        c.maf.enabled = j.at("maf").value("enabled", false);
        c.maf.threshold = j.at("maf").value("threshold", 0.1);
    }
    if (j.contains("pr")) {
        const auto& p = j.at("pr");
        c.pr.tau = p.value("tau", 0.1);
        c.pr.restarts = p.value("restarts", 20);
        c.pr.steps = p.value("steps", 100);
        c.pr.lr = p.value("lr", 0.025);
        c.pr.n_samples = p.value("n_samples", 32);
        c.pr.mc_size = p.value("mc_size", 128);
        c.pr.enum_cap = p.value("enum_cap", static_cast<std::size_t>(1024));
        c.pr.cat_softmax_divide_tau = p.value("cat_softmax_divide_tau", true);
    }
    if (j.contains("fit")) {
        const auto& f = j.at("fit");
        c.fit.noise_init = f.value("noise_init", 1e-3);
        c.fit.restarts = f.value("restarts", 5);
        c.fit.steps = f.value("steps", 200);
        c.fit.lr = f.value("lr", 0.05);
    }
    c.noise_sd = j.value("noise_sd", 0.0);
    c.record_timing = j.value("record_timing", false);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.validate();
    return c;
}

std::string RunConfig::to_json_text() const {
    json j;
    j["benchmark"] = {{"id", benchmark.id}, {"dims", benchmark.dims}, {"pattern", benchmark.pattern}};
    j["preset"] = preset;
    j["seeds"] = seeds;
    j["init_points"] = init_points;
    j["iter_budget"] = iter_budget;
    j["penalty"] = {{"enabled", penalty.enabled}, {"value", penalty.value}};
    j["maf"] = {{"enabled", maf.enabled}, {"threshold", maf.threshold}};
    j["pr"] = {{"tau", pr.tau},           {"restarts", pr.restarts},
               {"steps", pr.steps},       {"lr", pr.lr},
               {"n_samples", pr.n_samples}, {"mc_size", pr.mc_size},
               {"enum_cap", pr.enum_cap}, {"cat_softmax_divide_tau", pr.cat_softmax_divide_tau}};
    j["fit"] = {{"noise_init", fit.noise_init}, {"restarts", fit.restarts}, {"steps", fit.steps}, {"lr", fit.lr}};
    j["noise_sd"] = noise_sd;
    j["record_timing"] = record_timing;
    j["out_dir"] = out_dir;
    return j.dump(2);
}

// ---- KR acquisition path -------------------------------------------------------

namespace {

/// Nelder-Mead on the continuous coordinates with the ordinal block frozen;
/// the rounding kernel offers no usable gradients.
Candidate kr_refine(const AcquisitionFunction& af, const SearchSpace& space,
                    const std::vector<std::size_t>& cont_dims, NormalizedPoint start) {
    const std::size_t d = cont_dims.size();
    auto eval = [&](const Vec& xc) {
        NormalizedPoint p = start;
        for (std::size_t k = 0; k < d; ++k) p.coords[cont_dims[k]] = std::clamp(xc(static_cast<Eigen::Index>(k)), 0.0, 1.0);
        return -af.value({p})(0);  // minimize
    };
    Vec x0(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) x0(static_cast<Eigen::Index>(k)) = start.coords[cont_dims[k]];

    std::vector<Vec> simplex{x0};
    for (std::size_t k = 0; k < d; ++k) {
        Vec v = x0;
        v(static_cast<Eigen::Index>(k)) = std::clamp(v(static_cast<Eigen::Index>(k)) + 0.1, 0.0, 1.0);
        if (v(static_cast<Eigen::Index>(k)) == x0(static_cast<Eigen::Index>(k)))
            v(static_cast<Eigen::Index>(k)) -= 0.1;
        simplex.push_back(v);
    }
    std::vector<double> fv(simplex.size());
    for (std::size_t i = 0; i < simplex.size(); ++i) fv[i] = eval(simplex[i]);

    const int max_iter = 120 * static_cast<int>(d);
    for (int it = 0; it < max_iter; ++it) {
        std::vector<std::size_t> order(simplex.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t lo = order.front(), hi = order.back(), sh = order[order.size() - 2];
        if (std::abs(fv[hi] - fv[lo]) < 1e-12) break;
        Vec centroid = Vec::Zero(static_cast<Eigen::Index>(d));
        for (std::size_t i : order)
            if (i != hi) centroid += simplex[i];
        centroid /= static_cast<double>(d);
        Vec refl = centroid + (centroid - simplex[hi]);
        double fr = eval(refl);
        if (fr < fv[lo]) {
            Vec exp_ = centroid + 2.0 * (centroid - simplex[hi]);
            const double fe = eval(exp_);
            if (fe < fr) {
                simplex[hi] = exp_;
                fv[hi] = fe;
            } else {
                simplex[hi] = refl;
                fv[hi] = fr;
            }
        } else if (fr < fv[sh]) {
            simplex[hi] = refl;
            fv[hi] = fr;
        } else {
            Vec contr = centroid + 0.5 * (simplex[hi] - centroid);
            const double fc = eval(contr);
            if (fc < fv[hi]) {
                simplex[hi] = contr;
                fv[hi] = fc;
            } else {
                for (std::size_t i : order) {
                    if (i == lo) continue;
                    simplex[i] = simplex[lo] + 0.5 * (simplex[i] - simplex[lo]);
                    fv[i] = eval(simplex[i]);
                }
            }
        }
    }
    std::size_t bi = 0;
    for (std::size_t i = 1; i < simplex.size(); ++i)
        if (fv[i] < fv[bi]) bi = i;
    NormalizedPoint p = start;
    for (std::size_t k = 0; k < d; ++k)
        p.coords[cont_dims[k]] = std::clamp(simplex[bi](static_cast<Eigen::Index>(k)), 0.0, 1.0);
    return space.denormalize(p);
}

Candidate kr_propose(const GpModel& model, const AcquisitionSpec& aspec, AfKind kind, const PrSettings& s) {
    const SearchSpace& space = model.space();
    const GpAcquisition af(model, aspec, kind);
    const auto cont_dims = space.dims_of(ParamKind::Continuous);
    const auto int_dims = space.dims_of(ParamKind::Integer);

    std::size_t combos = 1;
    for (const auto dim : int_dims) combos *= space.param(dim).level_count();
    if (combos > 1000000) throw UnsupportedError("KR enumeration: too many integer combinations");

    // one batch point per integer combo, continuous coords from a small Sobol screen
    const std::size_t n_screen = cont_dims.empty() ? 1 : 8 * cont_dims.size();
    const auto screen = cont_dims.empty()
                            ? std::vector<std::vector<double>>{}
                            : sobol_sequence(cont_dims.size(), n_screen, n_screen * s.seed % 4096);

    std::vector<NormalizedPoint> batch;
    std::vector<std::size_t> idx(int_dims.size(), 0);
    NormalizedPoint proto;
    proto.coords.assign(space.size(), 0.0);
    for (std::size_t n = 0; n < combos; ++n) {
        NormalizedPoint p = proto;
        for (std::size_t k = 0; k < int_dims.size(); ++k)
            p.coords[int_dims[k]] = space.param(int_dims[k]).anchor(idx[k]);
        if (cont_dims.empty()) {
            batch.push_back(p);
        } else {
            for (const auto& sc : screen) {
                NormalizedPoint q = p;
                for (std::size_t k = 0; k < cont_dims.size(); ++k) q.coords[cont_dims[k]] = sc[k];
                batch.push_back(q);
            }
        }
        for (std::size_t k = int_dims.size(); k-- > 0;) {
            if (++idx[k] < space.param(int_dims[k]).level_count()) break;
            idx[k] = 0;
        }
    }
    const Vec att = af.value(batch);

    if (cont_dims.empty()) {
        Eigen::Index bi;
        att.maxCoeff(&bi);
        return space.denormalize(batch[static_cast<std::size_t>(bi)]);
    }

    // per combo: refine from its best screened start, keep the global best
    Candidate best;
    double best_att = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < combos; ++n) {
        std::size_t base = n * n_screen, bi = base;
        for (std::size_t g = 1; g < n_screen; ++g)
            if (att(static_cast<Eigen::Index>(base + g)) > att(static_cast<Eigen::Index>(bi))) bi = base + g;
        const Candidate refined = kr_refine(af, space, cont_dims, batch[bi]);
        const double v = af.value({space.normalize(refined)})(0);
        if (v > best_att) {
            best_att = v;
            best = refined;
        }
    }
    return best;
}

}  // namespace

// ---- run loop -------------------------------------------------------------------

std::string trace_filename(const RunConfig& config, int seed) {
    return config.benchmark.key() + "__" + config.preset + "__seed" + std::to_string(seed) + ".csv";
}

RunTrace run_bo(const RunConfig& config, int seed) {
    config.validate();
    const BenchmarkInstance bench = make_benchmark(config.benchmark);
    const Optimum truth = benchmark_truth(config.benchmark);
    const ModelPreset preset = ModelPreset::parse(config.preset);
    const int n_init = config.effective_init();
    const int budget = config.effective_budget();
    const auto total = static_cast<std::size_t>(n_init + budget);

    std::mt19937_64 noise_rng(derive_seed(static_cast<std::uint64_t>(seed), kTagNoise));
    std::normal_distribution<double> noise(0.0, config.noise_sd > 0.0 ? config.noise_sd : 1.0);
    auto observe = [&](const Candidate& c) {
        double y = bench.objective(c);
        if (config.noise_sd > 0.0) y += noise(noise_rng);
        return y;
    };

    const auto stream =
        sobol_candidates(bench.space, total, total * static_cast<std::size_t>(seed));

    RunTrace trace;
    trace.seed = seed;
    std::vector<Candidate> sampled;
    std::vector<NormalizedPoint> sampled_norm;
    std::vector<double> ys;
    double best_y = std::numeric_limits<double>::infinity();
    Candidate best_candidate;

    auto append = [&](int iter, const Candidate& c, const std::string& af_kind, double seconds) {
        const double y = observe(c);
        sampled.push_back(c);
        sampled_norm.push_back(bench.space.normalize(c));
        ys.push_back(y);
        if (y < best_y) {
            best_y = y;
            best_candidate = c;
        }
        TraceRow row;
        row.seed = seed;
        row.iter = iter;
        row.candidate = c;
        row.y = y;
        row.best_y = best_y;
        row.regret = best_y - truth.value;
        row.af_kind = af_kind;
        row.seconds = config.record_timing ? seconds : 0.0;
        trace.rows.push_back(std::move(row));
    };

    for (int i = 0; i < n_init; ++i) append(0, stream[static_cast<std::size_t>(i)], "sobol", 0.0);

    AcquisitionSpec aspec;
    aspec.kind = preset.af;
    aspec.lcb_weight = 2.0;
    aspec.penalty = config.penalty;
    aspec.maf = config.maf;
    MafController maf(aspec);
    std::optional<GpModel> last_model;
    std::optional<KernelSpec> kspec;
    if (!preset.sobol_only) kspec = KernelSpec::preset(preset.kernel);

    for (int iter = 1; iter <= budget; ++iter) {
        const auto t0 = std::chrono::steady_clock::now();
        Candidate cand;
        std::string label;

        if (preset.sobol_only) {
            cand = stream[static_cast<std::size_t>(n_init + iter - 1)];
            label = "sobol";
        } else {
            PrSettings prs = config.pr;
            prs.seed = derive_seed(static_cast<std::uint64_t>(seed), kTagAcq + static_cast<std::uint64_t>(iter));
            try {
                Dataset data = Dataset::from_raw(sampled_norm, ys);
                FitOptions fo = config.fit;
                fo.seed = derive_seed(static_cast<std::uint64_t>(seed), kTagFit + static_cast<std::uint64_t>(iter));
                GpModel model = fit_map(*kspec, bench.space, data, fo);
                last_model = model;

                const AfKind kind = config.maf.enabled ? maf.next_kind() : aspec.kind;
                label = kind == AfKind::MaxVariance ? "maxvar" : (preset.af == AfKind::EI ? "ei" : "lcb");

                if (kspec->rounding == Rounding::KernelRound) {
                    cand = kr_propose(model, aspec, kind, prs);
                } else {
                    const GpAcquisition af(model, aspec, kind);
                    const PrResult res = optimize_acquisition_pr(af, bench.space, prs, best_candidate);
                    cand = sample_candidates(af, bench.space, res.theta, prs);
                }

                Proposal prop;
                prop.candidate = cand;
                prop.used_exploration = kind == AfKind::MaxVariance;
                prop.min_distance_to_data = std::numeric_limits<double>::infinity();
                for (const auto& s : sampled)
                    prop.min_distance_to_data = std::min(prop.min_distance_to_data, bench.space.distance(cand, s));
                maf.observe(prop);
            } catch (const NumericError&) {
                label = "fallback_maxvar";
                if (last_model) {
                    cand = max_variance_candidate(*last_model, aspec, prs);
                } else {
                    // no usable surrogate yet: most isolated point of a Sobol pool
                    const auto pool = sobol_candidates(bench.space, 128, total * 131);
                    double best_d = -1.0;
                    for (const auto& c : pool) {
                        double dmin = std::numeric_limits<double>::infinity();
                        for (const auto& s : sampled) dmin = std::min(dmin, bench.space.distance(c, s));
                        if (dmin > best_d) {
                            best_d = dmin;
                            cand = c;
                        }
                    }
                }
            }
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        append(iter, cand, label, secs);
    }
    return trace;
}

std::vector<std::string> run_all(const RunConfig& config) {
    config.validate();
    const BenchmarkInstance bench = make_benchmark(config.benchmark);
    std::vector<std::string> files;
    for (const int seed : config.seeds) {
        const RunTrace trace = run_bo(config, seed);
        const std::string path = config.out_dir + "/" + trace_filename(config, seed);
        write_text_file(path, trace_to_csv(trace, bench.space));
        files.push_back(path);
    }
    return files;
}

}  // namespace mixbo
