#include "mixbo/trace.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mixbo/common.hpp"

namespace mixbo {

namespace {
std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

std::string trace_to_csv(const RunTrace& trace, const SearchSpace& space) {
    std::ostringstream out;
    out << "seed,iter";
    for (const auto& p : space.params()) out << ',' << p.name;
    out << ",y,best_y,regret,af_kind,seconds\n";
    for (const auto& r : trace.rows) {
        out << r.seed << ',' << r.iter;
        for (double v : r.candidate.values) out << ',' << fmt(v);
        out << ',' << fmt(r.y) << ',' << fmt(r.best_y) << ',' << fmt(r.regret) << ',' << r.af_kind << ','
            << fmt(r.seconds) << '\n';
    }
    return out.str();
}

RunTrace trace_from_csv(const std::string& csv, const SearchSpace& space) {
    RunTrace trace;
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw DomainError("trace csv: empty file");
    const std::size_t dims = space.size();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != dims + 7) throw DomainError("trace csv: wrong column count");
        TraceRow r;
        r.seed = std::stoi(cells[0]);
        r.iter = std::stoi(cells[1]);
        r.candidate.values.resize(dims);
        for (std::size_t i = 0; i < dims; ++i) r.candidate.values[i] = std::stod(cells[2 + i]);
        r.y = std::stod(cells[2 + dims]);
        r.best_y = std::stod(cells[3 + dims]);
        r.regret = std::stod(cells[4 + dims]);
        r.af_kind = cells[5 + dims];
        r.seconds = std::stod(cells[6 + dims]);
        trace.rows.push_back(std::move(r));
        trace.seed = trace.rows.back().seed;
    }
    return trace;
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write file: " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot read file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace mixbo
