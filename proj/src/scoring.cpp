#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "mixbo/harness.hpp"

namespace mixbo {

ToleranceSpec ToleranceSpec::named(const std::string& benchmark_id, const std::string& level) {
    const bool bs = benchmark_id.rfind("bs", 0) == 0;
    ToleranceSpec t;
    t.level = level;
    if (bs) {
        if (level == "strict") {
            t.y_pct = 0.001;
            t.x_pct = 0.01;
        } else if (level == "medium") {
            t.y_pct = 0.005;
            t.x_pct = 0.02;
        } else if (level == "loose") {
            t.y_pct = 0.01;
            t.x_pct = 0.04;
        } else {
            throw DomainError("unknown tolerance level '" + level + "'");
        }
    } else if (benchmark_id == "dust1") {
        if (level == "strict") {
            t.y_pct = 0.005;
            t.x_pct = 0.005;
        } else if (level == "medium") {
            t.y_pct = 0.02;
            t.x_pct = 0.02;
        } else if (level == "loose") {
            t.y_pct = 0.03;
            t.x_pct = 0.03;
        } else {
            throw DomainError("unknown tolerance level '" + level + "'");
        }
    } else if (benchmark_id == "dust2") {
        if (level == "strict") {
            t.y_pct = 0.005;
            t.x_pct = 0.005;
        } else if (level == "medium") {
            t.y_pct = 0.01;
            t.x_pct = 0.01;
        } else if (level == "loose") {
            t.y_pct = 0.05;
            t.x_pct = 0.05;
        } else {
            throw DomainError("unknown tolerance level '" + level + "'");
        }
    } else {
        throw DomainError("no tolerance table for benchmark '" + benchmark_id + "'");
    }
    return t;
}

std::optional<int> check_convergence(const RunTrace& trace, const SearchSpace& space,
                                     const ToleranceSpec& tol, const Optimum& truth) {
    const double y_range = truth.y_max - truth.y_min;
    double best_y = std::numeric_limits<double>::infinity();
    Candidate best_candidate;

    auto qualifies = [&](const Candidate& c, double y) {
        if (std::abs(y - truth.value) > tol.y_pct * y_range) return false;
        for (std::size_t i = 0; i < space.size(); ++i) {
            const auto& p = space.param(i);
            const double v = c.values[i];
            const double v_opt = truth.arg.values[i];
            if (p.kind == ParamKind::Continuous) {
                if (std::abs(v - v_opt) > tol.x_pct * (p.high - p.low)) return false;
            } else {
                if (std::abs(v - v_opt) > 1e-9) return false;  // exact level/category match
            }
        }
        return true;
    };

    for (const auto& row : trace.rows) {
        if (row.y < best_y) {
            best_y = row.y;
            best_candidate = row.candidate;
            if (qualifies(best_candidate, best_y)) return row.iter;
        }
    }
    return std::nullopt;
}

CompositeScore composite_score(const std::vector<std::optional<int>>& convergence_iters) {
    if (convergence_iters.empty()) throw DomainError("composite_score: need at least one run");
    CompositeScore cs;
    cs.total = static_cast<int>(convergence_iters.size());
    double sum = 0.0;
    for (const auto& it : convergence_iters) {
        if (it.has_value()) {
            ++cs.converged;
            sum += static_cast<double>(*it);
        }
    }
    if (cs.converged == 0) {
        cs.score = 0.0;
        return cs;
    }
    cs.mean_iteration = sum / cs.converged;
    cs.score = cs.mean_iteration > 0.0
                   ? static_cast<double>(cs.converged) / (static_cast<double>(cs.total) * cs.mean_iteration)
                   : std::numeric_limits<double>::infinity();
    return cs;
}

std::vector<RankSummary> rank_models(const std::map<std::string, std::map<std::string, double>>& scores) {
    std::set<std::string> variants;
    for (const auto& [model, per_variant] : scores)
        for (const auto& [variant, s] : per_variant) variants.insert(variant);

    std::map<std::string, std::vector<int>> ranks;
    for (const auto& variant : variants) {
        // models participating in this variant, ranked by descending score
        std::vector<std::pair<std::string, double>> entries;
        for (const auto& [model, per_variant] : scores) {
            const auto it = per_variant.find(variant);
            if (it != per_variant.end()) entries.emplace_back(model, it->second);
        }
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        int rank = 0;
        double prev = std::numeric_limits<double>::quiet_NaN();
        for (const auto& [model, s] : entries) {
            if (s != prev) {
                ++rank;  // dense ranking; equal scores share the better rank
                prev = s;
            }
            ranks[model].push_back(rank);
        }
    }

    std::vector<RankSummary> out;
    for (auto& [model, rs] : ranks) {
        std::sort(rs.begin(), rs.end());
        RankSummary sum;
        sum.model = model;
        sum.num_ranks = static_cast<int>(rs.size());
        sum.mean = std::accumulate(rs.begin(), rs.end(), 0.0) / rs.size();
        sum.median = rs.size() % 2 == 1 ? rs[rs.size() / 2]
                                        : 0.5 * (rs[rs.size() / 2 - 1] + rs[rs.size() / 2]);
        sum.min = rs.front();
        sum.max = rs.back();
        out.push_back(sum);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.mean != b.mean) return a.mean < b.mean;
        return a.model < b.model;
    });
    return out;
}

std::string plot_data_csv(const std::vector<RunTrace>& traces) {
    if (traces.empty()) throw DomainError("plot_data_csv: no traces");
    int max_iter = 0;
    for (const auto& t : traces)
        for (const auto& r : t.rows) max_iter = std::max(max_iter, r.iter);

    std::ostringstream out;
    out << "iter,mean_regret,sd_regret,min_regret,max_regret\n";
    for (int iter = 0; iter <= max_iter; ++iter) {
        std::vector<double> regrets;
        for (const auto& t : traces) {
            double r = std::numeric_limits<double>::quiet_NaN();
            for (const auto& row : t.rows) {
                if (row.iter <= iter) r = row.regret;  // rows are in order; keep the latest
            }
            if (std::isfinite(r)) regrets.push_back(r);
        }
        if (regrets.empty()) continue;
        const double mean = std::accumulate(regrets.begin(), regrets.end(), 0.0) / regrets.size();
        double var = 0.0;
        for (const double r : regrets) var += (r - mean) * (r - mean);
        var /= regrets.size();
        const auto [mn, mx] = std::minmax_element(regrets.begin(), regrets.end());
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", iter, mean, std::sqrt(var), *mn, *mx);
        out << buf;
    }
    return out.str();
}

}  // namespace mixbo
