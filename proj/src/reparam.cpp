#include "mixbo/reparam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mixbo/sobol.hpp"

namespace mixbo {

namespace {

struct ThetaLayout {
    std::vector<std::size_t> cont_dims;
    std::vector<std::size_t> ord_dims;
    std::vector<std::size_t> cat_dims;

    static ThetaLayout of(const SearchSpace& space) {
        ThetaLayout lo;
        for (std::size_t i = 0; i < space.size(); ++i) {
            switch (space.param(i).kind) {
                case ParamKind::Continuous: lo.cont_dims.push_back(i); break;
                case ParamKind::Integer:
                case ParamKind::Discrete: lo.ord_dims.push_back(i); break;
                case ParamKind::Categorical: lo.cat_dims.push_back(i); break;
            }
        }
        return lo;
    }
};

double ord_theta_low(const ParameterSpec& p) {
    return p.kind == ParamKind::Integer ? 0.0 : p.levels.front();
}
double ord_theta_high(const ParameterSpec& p) {
    return p.kind == ParamKind::Integer ? static_cast<double>(p.levels.size() - 1) : p.levels.back();
}

/// Bracketing index i (upper level is i+1) and the sigmoid argument z such
/// that P(upper) = sigmoid(z / tau) -- shared by value and derivative paths.
struct Bracket {
    std::size_t i;
    double z;  // theta - d_i - (d_{i+1} - d_i)/2, in theta units
};

Bracket ordinal_bracket(const ParameterSpec& p, double theta) {
    const std::size_t L = p.levels.size();
    if (p.kind == ParamKind::Integer) {
        double t = std::clamp(theta, 0.0, static_cast<double>(L - 1));
        auto i = static_cast<std::size_t>(std::floor(t));
        if (i > L - 2) i = L - 2;
        return {i, t - static_cast<double>(i) - 0.5};
    }
    double t = std::clamp(theta, p.levels.front(), p.levels.back());
    std::size_t i = 0;
    while (i + 2 < L && p.levels[i + 1] <= t) ++i;
    const double gap = p.levels[i + 1] - p.levels[i];
    return {i, t - p.levels[i] - 0.5 * gap};
}

}  // namespace

void DiscreteDistribution::validate() const {
    if (support.size() != probs.size() || support.empty())
        throw DomainError("DiscreteDistribution: malformed support");
    double s = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw DomainError("DiscreteDistribution: negative probability");
        s += p;
    }
    if (std::abs(s - 1.0) > 1e-12) throw DomainError("DiscreteDistribution: probabilities must sum to 1");
}

ThetaVector ThetaVector::degenerate_at(const SearchSpace& space, const Candidate& c) {
    space.validate_candidate(c);
    const ThetaLayout lo = ThetaLayout::of(space);
    const NormalizedPoint np = space.normalize(c);
    ThetaVector t;
    t.degenerate = true;
    t.cont.resize(static_cast<Eigen::Index>(lo.cont_dims.size()));
    for (std::size_t k = 0; k < lo.cont_dims.size(); ++k)
        t.cont(static_cast<Eigen::Index>(k)) = np.coords[lo.cont_dims[k]];
    t.ord.resize(static_cast<Eigen::Index>(lo.ord_dims.size()));
    for (std::size_t k = 0; k < lo.ord_dims.size(); ++k) {
        const auto& p = space.param(lo.ord_dims[k]);
        const std::size_t idx = p.nearest_level(np.coords[lo.ord_dims[k]]);
        t.ord(static_cast<Eigen::Index>(k)) =
            p.kind == ParamKind::Integer ? static_cast<double>(idx) : p.levels[idx];
    }
    for (std::size_t k = 0; k < lo.cat_dims.size(); ++k) {
        const auto& p = space.param(lo.cat_dims[k]);
        Vec logits = Vec::Zero(static_cast<Eigen::Index>(p.categories.size()));
        logits(static_cast<Eigen::Index>(std::llround(c.values[lo.cat_dims[k]]))) = 1.0;
        t.cat.push_back(std::move(logits));
    }
    return t;
}

DiscreteDistribution transform_ordinal(const ParameterSpec& p, double theta, double tau) {
    if (!p.is_ordinal()) throw DomainError("transform_ordinal: dimension is not ordinal");
    const Bracket b = ordinal_bracket(p, theta);
    const double hi = sigmoid(b.z / tau);
    DiscreteDistribution d;
    d.support = {p.levels[b.i], p.levels[b.i + 1]};
    d.probs = {1.0 - hi, hi};
    return d;
}

DiscreteDistribution transform_categorical(const ParameterSpec& p, const Vec& logits, double tau,
                                           bool divide_tau) {
    if (p.kind != ParamKind::Categorical) throw DomainError("transform_categorical: dimension is not categorical");
    if (logits.size() != static_cast<Eigen::Index>(p.categories.size()))
        throw DomainError("transform_categorical: logit length mismatch");
    Vec z = (logits.array() - 0.5).matrix();
    z = divide_tau ? Vec(z / tau) : Vec(z * tau);
    const double zmax = z.maxCoeff();
    Vec e = (z.array() - zmax).exp();
    e /= e.sum();
    DiscreteDistribution d;
    d.support.resize(p.categories.size());
    d.probs.resize(p.categories.size());
    for (std::size_t c = 0; c < p.categories.size(); ++c) {
        d.support[c] = static_cast<double>(c);
        d.probs[c] = e(static_cast<Eigen::Index>(c));
    }
    return d;
}

std::vector<DiscreteDistribution> theta_distributions(const SearchSpace& space, const ThetaVector& theta,
                                                      const PrSettings& s) {
    const ThetaLayout lo = ThetaLayout::of(space);
    std::vector<DiscreteDistribution> out;
    out.reserve(lo.ord_dims.size() + lo.cat_dims.size());
    std::size_t oi = 0, ci = 0;
    for (std::size_t i = 0; i < space.size(); ++i) {
        const auto& p = space.param(i);
        if (p.kind == ParamKind::Continuous) continue;
        if (p.kind == ParamKind::Categorical) {
            const Vec& logits = theta.cat.at(ci++);
            if (theta.degenerate) {
                Eigen::Index best;
                logits.maxCoeff(&best);
                out.push_back(DiscreteDistribution::point_mass(static_cast<double>(best)));
            } else {
                out.push_back(transform_categorical(p, logits, s.tau, s.cat_softmax_divide_tau));
            }
        } else {
            const double t = theta.ord(static_cast<Eigen::Index>(oi++));
            if (theta.degenerate) {
                const double level =
                    p.kind == ParamKind::Integer ? p.levels[static_cast<std::size_t>(std::llround(t))]
                                                 : p.levels[p.nearest_level((t - p.low) / (p.high - p.low))];
                out.push_back(DiscreteDistribution::point_mass(level));
            } else {
                out.push_back(transform_ordinal(p, t, s.tau));
            }
        }
    }
    return out;
}

namespace {

struct JointEnum {
    std::vector<std::size_t> nc_dims;  // non-continuous dims, space order
    std::vector<DiscreteDistribution> dists;
    std::size_t combos = 1;
};

JointEnum make_joint(const SearchSpace& space, const ThetaVector& theta, const PrSettings& s) {
    JointEnum j;
    for (std::size_t i = 0; i < space.size(); ++i)
        if (space.param(i).kind != ParamKind::Continuous) j.nc_dims.push_back(i);
    j.dists = theta_distributions(space, theta, s);
    for (const auto& d : j.dists) j.combos *= d.support.size();
    return j;
}

NormalizedPoint assemble_point(const SearchSpace& space, const ThetaLayout& lo, const ThetaVector& theta,
                               const JointEnum& j, const std::vector<std::size_t>& choice) {
    NormalizedPoint pt;
    pt.coords.resize(space.size());
    for (std::size_t k = 0; k < lo.cont_dims.size(); ++k)
        pt.coords[lo.cont_dims[k]] = theta.cont(static_cast<Eigen::Index>(k));
    for (std::size_t k = 0; k < j.nc_dims.size(); ++k) {
        const std::size_t dim = j.nc_dims[k];
        const auto& p = space.param(dim);
        const double v = j.dists[k].support[choice[k]];
        pt.coords[dim] = p.kind == ParamKind::Categorical ? v : (v - p.low) / (p.high - p.low);
    }
    return pt;
}

/// Enumerated joint support: points, weights, and per-combo choices.
struct EnumBatch {
    std::vector<NormalizedPoint> pts;
    std::vector<std::vector<std::size_t>> choices;
    Vec weights;
};

EnumBatch enumerate_joint(const SearchSpace& space, const ThetaLayout& lo, const ThetaVector& theta,
                          const JointEnum& j) {
    EnumBatch b;
    b.pts.reserve(j.combos);
    b.choices.reserve(j.combos);
    b.weights.resize(static_cast<Eigen::Index>(j.combos));
    std::vector<std::size_t> choice(j.nc_dims.size(), 0);
    for (std::size_t n = 0; n < j.combos; ++n) {
        double w = 1.0;
        for (std::size_t k = 0; k < j.nc_dims.size(); ++k) w *= j.dists[k].probs[choice[k]];
        b.pts.push_back(assemble_point(space, lo, theta, j, choice));
        b.choices.push_back(choice);
        b.weights(static_cast<Eigen::Index>(n)) = w;
        for (std::size_t k = j.nc_dims.size(); k-- > 0;) {
            if (++choice[k] < j.dists[k].support.size()) break;
            choice[k] = 0;
        }
    }
    return b;
}

std::vector<std::size_t> sample_choice(const JointEnum& j, std::mt19937_64& rng) {
    std::vector<std::size_t> choice(j.dists.size());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t k = 0; k < j.dists.size(); ++k) {
        double u = unif(rng);
        std::size_t c = 0;
        double acc = j.dists[k].probs[0];
        while (c + 1 < j.dists[k].probs.size() && u > acc) acc += j.dists[k].probs[++c];
        choice[k] = c;
    }
    return choice;
}

/// d P(choice) / d theta for one ordinal dim; the distribution carries two
/// atoms {lo, hi} with P(hi) = sigmoid(z/tau).
double ordinal_prob_dtheta(const ParameterSpec& p, double theta, double tau, std::size_t choice) {
    const Bracket b = ordinal_bracket(p, theta);
    const double s = sigmoid(b.z / tau);
    const double ds = s * (1.0 - s) / tau;
    return choice == 1 ? ds : -ds;
}

}  // namespace

double probabilistic_objective(const AcquisitionFunction& af, const SearchSpace& space,
                               const ThetaVector& theta, const PrSettings& s, PoMode mode) {
    const ThetaLayout lo = ThetaLayout::of(space);
    const JointEnum j = make_joint(space, theta, s);
    const bool exact = mode == PoMode::Exact || (mode == PoMode::Auto && j.combos <= s.enum_cap);
    if (mode == PoMode::Exact && j.combos > s.enum_cap)
        throw UnsupportedError("probabilistic_objective: joint support " + std::to_string(j.combos) +
                               " exceeds enumeration cap " + std::to_string(s.enum_cap));
    if (exact) {
        const EnumBatch b = enumerate_joint(space, lo, theta, j);
        const Vec att = af.value(b.pts);
        return att.dot(b.weights);
    }
    std::mt19937_64 rng(derive_seed(s.seed, 0x504f4d43ull));
    std::vector<NormalizedPoint> pts;
    pts.reserve(static_cast<std::size_t>(s.mc_size));
    for (int n = 0; n < s.mc_size; ++n) {
        const auto choice = sample_choice(j, rng);
        pts.push_back(assemble_point(space, lo, theta, j, choice));
    }
    return af.value(pts).mean();
}

PoGradient po_gradient(const AcquisitionFunction& af, const SearchSpace& space, const ThetaVector& theta,
                       const PrSettings& s, PoMode mode) {
    const ThetaLayout lo = ThetaLayout::of(space);
    const JointEnum j = make_joint(space, theta, s);
    const bool exact = mode == PoMode::Exact || (mode == PoMode::Auto && j.combos <= s.enum_cap);

    PoGradient g;
    g.dcont = Vec::Zero(static_cast<Eigen::Index>(lo.cont_dims.size()));
    g.dord = Vec::Zero(static_cast<Eigen::Index>(lo.ord_dims.size()));
    for (const auto& dim : lo.cat_dims)
        g.dcat.push_back(Vec::Zero(static_cast<Eigen::Index>(space.param(dim).categories.size())));

    if (exact) {
        const EnumBatch b = enumerate_joint(space, lo, theta, j);
        auto [att, datt] = af.value_with_grad(b.pts, lo.cont_dims);
        g.po = att.dot(b.weights);
        for (Eigen::Index d = 0; d < g.dcont.size(); ++d)
            g.dcont(d) = b.weights.dot(datt.col(d));

        if (theta.degenerate) return g;  // point masses carry no theta gradient

        // leave-one-out weights per combo, then the per-dimension probability
        // derivatives (expectation is multilinear in the per-dim probabilities)
        const std::size_t nd = j.nc_dims.size();
        std::vector<double> pre(nd + 1), suf(nd + 1);
        std::size_t oi_of_dim[64];
        std::size_t ci_of_dim[64];
        {
            std::size_t oi = 0, ci = 0;
            for (std::size_t k = 0; k < nd; ++k) {
                if (space.param(j.nc_dims[k]).kind == ParamKind::Categorical)
                    ci_of_dim[k] = ci++;
                else
                    oi_of_dim[k] = oi++;
            }
        }
        for (std::size_t n = 0; n < b.pts.size(); ++n) {
            const auto& choice = b.choices[n];
            pre[0] = 1.0;
            for (std::size_t k = 0; k < nd; ++k) pre[k + 1] = pre[k] * j.dists[k].probs[choice[k]];
            suf[nd] = 1.0;
            for (std::size_t k = nd; k-- > 0;) suf[k] = suf[k + 1] * j.dists[k].probs[choice[k]];
            const double a = att(static_cast<Eigen::Index>(n));
            for (std::size_t k = 0; k < nd; ++k) {
                const double w_minus = pre[k] * suf[k + 1];
                const auto& p = space.param(j.nc_dims[k]);
                if (p.kind == ParamKind::Categorical) {
                    // accumulate E[att | cat = c]; chain through softmax below
                    g.dcat[ci_of_dim[k]](static_cast<Eigen::Index>(choice[k])) += a * w_minus;
                } else {
                    const double t = theta.ord(static_cast<Eigen::Index>(oi_of_dim[k]));
                    g.dord(static_cast<Eigen::Index>(oi_of_dim[k])) +=
                        a * w_minus * ordinal_prob_dtheta(p, t, s.tau, choice[k]);
                }
            }
        }
        // softmax Jacobian: dp_c/dtheta_k = p_c (delta_ck - p_k) / tau
        std::size_t ci = 0;
        for (std::size_t k = 0; k < nd; ++k) {
            const auto& p = space.param(j.nc_dims[k]);
            if (p.kind != ParamKind::Categorical) continue;
            const Vec e_att = g.dcat[ci];  // E[att | cat = c] per category
            const auto& probs = j.dists[k].probs;
            const double factor = s.cat_softmax_divide_tau ? 1.0 / s.tau : s.tau;
            Vec grad = Vec::Zero(e_att.size());
            double inner = 0.0;
            for (std::size_t c = 0; c < probs.size(); ++c)
                inner += probs[c] * e_att(static_cast<Eigen::Index>(c));
            for (std::size_t kk = 0; kk < probs.size(); ++kk)
                grad(static_cast<Eigen::Index>(kk)) =
                    factor * probs[kk] * (e_att(static_cast<Eigen::Index>(kk)) - inner);
            g.dcat[ci] = grad;
            ++ci;
        }
        return g;
    }

    // Monte Carlo: unbiased value from hard samples; pathwise gradient through
    // tanh-relaxed ordinal samples evaluated off-anchor.
    std::mt19937_64 rng(derive_seed(s.seed, 0x504f4d43ull));
    std::vector<NormalizedPoint> hard_pts, relaxed_pts;
    std::vector<std::vector<double>> relax_chain(lo.ord_dims.size());  // d coord / d theta per sample
    std::vector<std::vector<std::size_t>> cat_choices;
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<std::size_t> grad_dims = lo.cont_dims;
    grad_dims.insert(grad_dims.end(), lo.ord_dims.begin(), lo.ord_dims.end());

    for (int n = 0; n < s.mc_size; ++n) {
        const auto choice = sample_choice(j, rng);
        hard_pts.push_back(assemble_point(space, lo, theta, j, choice));
        NormalizedPoint rp = hard_pts.back();
        std::size_t oi = 0;
        std::vector<std::size_t> cats;
        for (std::size_t k = 0; k < j.nc_dims.size(); ++k) {
            const std::size_t dim = j.nc_dims[k];
            const auto& p = space.param(dim);
            if (p.kind == ParamKind::Categorical) {
                cats.push_back(choice[k]);
                continue;
            }
            if (j.dists[k].support.size() < 2 || theta.degenerate) {
                relax_chain[oi].push_back(0.0);
                ++oi;
                continue;
            }
            const double p_hi = j.dists[k].probs[1];
            const double u = unif(rng);
            const double th = std::tanh((p_hi - u) / s.tau);
            const double soft = 0.5 * (1.0 + th);
            const double a_lo = (j.dists[k].support[0] - p.low) / (p.high - p.low);
            const double a_hi = (j.dists[k].support[1] - p.low) / (p.high - p.low);
            rp.coords[dim] = a_lo + (a_hi - a_lo) * soft;
            const double dsoft_dp = 0.5 * (1.0 - th * th) / s.tau;
            const double t = theta.ord(static_cast<Eigen::Index>(oi));
            relax_chain[oi].push_back((a_hi - a_lo) * dsoft_dp * ordinal_prob_dtheta(p, t, s.tau, 1));
            ++oi;
        }
        cat_choices.push_back(cats);
        relaxed_pts.push_back(std::move(rp));
    }
    g.po = af.value(hard_pts).mean();
    auto [ratt, rgrad] = af.value_with_grad(relaxed_pts, grad_dims);
    const double inv_n = 1.0 / static_cast<double>(s.mc_size);
    for (std::size_t k = 0; k < lo.cont_dims.size(); ++k)
        g.dcont(static_cast<Eigen::Index>(k)) = rgrad.col(static_cast<Eigen::Index>(k)).mean();
    for (std::size_t k = 0; k < lo.ord_dims.size(); ++k) {
        double acc = 0.0;
        for (int n = 0; n < s.mc_size; ++n)
            acc += rgrad(n, static_cast<Eigen::Index>(lo.cont_dims.size() + k)) *
                   relax_chain[k][static_cast<std::size_t>(n)];
        g.dord(static_cast<Eigen::Index>(k)) = acc * inv_n;
    }
    // categorical gradient: swap each sample through all categories
    if (!lo.cat_dims.empty() && !theta.degenerate) {
        std::size_t ci_base = 0;
        for (std::size_t kdim = 0; kdim < j.nc_dims.size(); ++kdim) {
            const std::size_t dim = j.nc_dims[kdim];
            const auto& p = space.param(dim);
            if (p.kind != ParamKind::Categorical) continue;
            const auto& probs = j.dists[kdim].probs;
            const std::size_t C = probs.size();
            std::vector<NormalizedPoint> swapped;
            swapped.reserve(hard_pts.size() * C);
            for (const auto& hp : hard_pts)
                for (std::size_t c = 0; c < C; ++c) {
                    NormalizedPoint q = hp;
                    q.coords[dim] = static_cast<double>(c);
                    swapped.push_back(std::move(q));
                }
            const Vec sv = af.value(swapped);
            Vec e_att = Vec::Zero(static_cast<Eigen::Index>(C));
            for (std::size_t n = 0; n < hard_pts.size(); ++n)
                for (std::size_t c = 0; c < C; ++c)
                    e_att(static_cast<Eigen::Index>(c)) += sv(static_cast<Eigen::Index>(n * C + c)) * inv_n;
            const double factor = s.cat_softmax_divide_tau ? 1.0 / s.tau : s.tau;
            double inner = 0.0;
            for (std::size_t c = 0; c < C; ++c) inner += probs[c] * e_att(static_cast<Eigen::Index>(c));
            for (std::size_t kk = 0; kk < C; ++kk)
                g.dcat[ci_base](static_cast<Eigen::Index>(kk)) =
                    factor * probs[kk] * (e_att(static_cast<Eigen::Index>(kk)) - inner);
            ++ci_base;
        }
    }
    return g;
}

namespace {

struct FlatTheta {
    // packed optimizer view: [cont | ord | cat logits...]
    static Vec pack(const ThetaVector& t) {
        Eigen::Index total = t.cont.size() + t.ord.size();
        for (const auto& c : t.cat) total += c.size();
        Vec z(total);
        Eigen::Index k = 0;
        z.segment(k, t.cont.size()) = t.cont;
        k += t.cont.size();
        z.segment(k, t.ord.size()) = t.ord;
        k += t.ord.size();
        for (const auto& c : t.cat) {
            z.segment(k, c.size()) = c;
            k += c.size();
        }
        return z;
    }

    static ThetaVector unpack(const Vec& z, const ThetaVector& like) {
        ThetaVector t = like;
        t.degenerate = false;
        Eigen::Index k = 0;
        t.cont = z.segment(k, like.cont.size());
        k += like.cont.size();
        t.ord = z.segment(k, like.ord.size());
        k += like.ord.size();
        for (std::size_t i = 0; i < like.cat.size(); ++i) {
            t.cat[i] = z.segment(k, like.cat[i].size());
            k += like.cat[i].size();
        }
        return t;
    }

    static Vec pack_grad(const PoGradient& g) {
        Eigen::Index total = g.dcont.size() + g.dord.size();
        for (const auto& c : g.dcat) total += c.size();
        Vec z(total);
        Eigen::Index k = 0;
        z.segment(k, g.dcont.size()) = g.dcont;
        k += g.dcont.size();
        z.segment(k, g.dord.size()) = g.dord;
        k += g.dord.size();
        for (const auto& c : g.dcat) {
            z.segment(k, c.size()) = c;
            k += c.size();
        }
        return z;
    }
};

}  // namespace

PrResult optimize_acquisition_pr(const AcquisitionFunction& af, const SearchSpace& space, const PrSettings& s,
                                 const std::optional<Candidate>& incumbent) {
    const ThetaLayout lo = ThetaLayout::of(space);
    const std::size_t n_cont = lo.cont_dims.size();
    const std::size_t n_ord = lo.ord_dims.size();

    // clamp box for the packed vector
    std::vector<double> box_lo(n_cont, 0.0), box_hi(n_cont, 1.0);
    for (const auto dim : lo.ord_dims) {
        box_lo.push_back(ord_theta_low(space.param(dim)));
        box_hi.push_back(ord_theta_high(space.param(dim)));
    }
    for (const auto dim : lo.cat_dims)
        for (std::size_t c = 0; c < space.param(dim).categories.size(); ++c) {
            box_lo.push_back(0.0);
            box_hi.push_back(1.0);
        }
    auto project = [&](Vec& z) {
        for (Eigen::Index i = 0; i < z.size(); ++i)
            z(i) = std::clamp(z(i), box_lo[static_cast<std::size_t>(i)], box_hi[static_cast<std::size_t>(i)]);
    };

    // Sobol-spread starting points over (cont, ord); zero-plus-jitter logits
    const std::size_t sobol_dim = std::max<std::size_t>(n_cont + n_ord, 1);
    const auto spread =
        sobol_sequence(sobol_dim, static_cast<std::size_t>(s.restarts),
                       static_cast<std::size_t>(s.restarts) * static_cast<std::size_t>(s.seed));
    std::mt19937_64 jitter_rng(derive_seed(s.seed, 0x6a697474ull));
    std::uniform_real_distribution<double> jitter(0.0, 0.01);

    ThetaVector proto;
    proto.cont = Vec::Zero(static_cast<Eigen::Index>(n_cont));
    proto.ord = Vec::Zero(static_cast<Eigen::Index>(n_ord));
    for (const auto dim : lo.cat_dims)
        proto.cat.push_back(Vec::Zero(static_cast<Eigen::Index>(space.param(dim).categories.size())));

    std::vector<ThetaVector> starts;
    for (int r = 0; r < s.restarts; ++r) {
        ThetaVector t = proto;
        for (std::size_t k = 0; k < n_cont; ++k)
            t.cont(static_cast<Eigen::Index>(k)) = spread[static_cast<std::size_t>(r)][k];
        for (std::size_t k = 0; k < n_ord; ++k) {
            const auto& p = space.param(lo.ord_dims[k]);
            const double u = spread[static_cast<std::size_t>(r)][n_cont + k];
            t.ord(static_cast<Eigen::Index>(k)) =
                ord_theta_low(p) + u * (ord_theta_high(p) - ord_theta_low(p));
        }
        for (auto& c : t.cat)
            for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = jitter(jitter_rng);
        starts.push_back(std::move(t));
    }
    if (incumbent) starts.push_back(ThetaVector::degenerate_at(space, *incumbent));

    PrResult best;
    for (const auto& start : starts) {
        // A degenerate start is scored as given, then relaxed for the ascent.
        if (start.degenerate) {
            const double po = probabilistic_objective(af, space, start, s);
            if (std::isfinite(po) && po > best.po) best = {start, po};
        }
        Vec z = FlatTheta::pack(start);
        project(z);
        Vec m = Vec::Zero(z.size()), v = Vec::Zero(z.size());
        double b1t = 1.0, b2t = 1.0;
        for (int step = 0; step <= s.steps; ++step) {
            const ThetaVector t = FlatTheta::unpack(z, proto);
            PoGradient g;
            try {
                g = po_gradient(af, space, t, s);
            } catch (const NumericError&) {
                break;
            }
            if (!std::isfinite(g.po)) break;  // discard this restart's continuation
            if (g.po > best.po) best = {t, g.po};
            if (step == s.steps) break;
            const Vec grad = FlatTheta::pack_grad(g);
            b1t *= 0.9;
            b2t *= 0.999;
            m = 0.9 * m + 0.1 * grad;
            v = 0.999 * v.array() + 0.001 * grad.array().square();
            const Vec mh = m / (1.0 - b1t);
            const Vec vh = v / (1.0 - b2t);
            z += s.lr * (mh.array() / (vh.array().sqrt() + 1e-8)).matrix();
            project(z);
        }
    }
    if (!std::isfinite(best.po)) throw NumericError("optimize_acquisition_pr: no finite PO found");
    return best;
}

Candidate sample_candidates(const AcquisitionFunction& af, const SearchSpace& space, const ThetaVector& theta,
                            const PrSettings& s) {
    const ThetaLayout lo = ThetaLayout::of(space);
    const JointEnum j = make_joint(space, theta, s);
    std::mt19937_64 rng(derive_seed(s.seed, 0x73616d70ull));
    std::vector<NormalizedPoint> pts;
    pts.reserve(static_cast<std::size_t>(s.n_samples));
    for (int n = 0; n < s.n_samples; ++n) pts.push_back(assemble_point(space, lo, theta, j, sample_choice(j, rng)));
    const Vec att = af.value(pts);
    Eigen::Index bi;
    att.maxCoeff(&bi);
    return space.denormalize(pts[static_cast<std::size_t>(bi)]);
}

Candidate max_variance_candidate(const GpModel& model, const AcquisitionSpec& spec, const PrSettings& s) {
    AcquisitionSpec explore = spec;
    explore.penalty.enabled = false;  // variance needs no resampling guard
    const GpAcquisition af(model, explore, AfKind::MaxVariance);
    const PrResult r = optimize_acquisition_pr(af, model.space(), s);
    return sample_candidates(af, model.space(), r.theta, s);
}

}  // namespace mixbo
