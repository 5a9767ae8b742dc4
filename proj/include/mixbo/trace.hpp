#pragma once

#include <string>
#include <vector>

#include "mixbo/search_space.hpp"

namespace mixbo {

struct TraceRow {
    int seed = 0;
    int iter = 0;  // 0 = initialization block, then 1..budget
    Candidate candidate;
    double y = 0.0;
    double best_y = 0.0;
    double regret = 0.0;
    std::string af_kind;  // sobol | ei | lcb | maxvar | fallback_maxvar
    double seconds = 0.0;
};

struct RunTrace {
    int seed = 0;
    std::vector<TraceRow> rows;
};

/// Fixed CSV schema: seed,iter,<one column per dimension, raw units>,y,
/// best_y,regret,af_kind,seconds.  Numbers use shortest round-trip formatting
/// so identical runs produce identical bytes.
std::string trace_to_csv(const RunTrace& trace, const SearchSpace& space);
RunTrace trace_from_csv(const std::string& csv, const SearchSpace& space);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace mixbo
