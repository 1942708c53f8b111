#include "acfs/results.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace acfs {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string ReplicationRow::key() const {
    std::ostringstream os;
    os << dgp << '\t' << fmt_double(lambda) << '\t' << method << '\t' << rep;
    return os.str();
}

std::string results_header() {
    return "dgp\tlambda\tmethod\trep\tseed\tx1\tx2\tx3\tx4\tx5\tx6\t"
           "oracle_J\toracle_EC\toracle_CVaR\toracle_calls\tseconds\tstatus";
}

std::string format_row(const ReplicationRow& r) {
    std::ostringstream os;
    os << r.dgp << '\t' << fmt_double(r.lambda) << '\t' << r.method << '\t' << r.rep << '\t'
       << r.seed;
    for (int j = 0; j < 6; ++j) os << '\t' << fmt_double(r.x(j));
    char sec[32];
    std::snprintf(sec, sizeof(sec), "%.3f", r.seconds);
    os << '\t' << fmt_double(r.oracle_j) << '\t' << fmt_double(r.oracle_ec) << '\t'
       << fmt_double(r.oracle_cvar) << '\t' << r.oracle_calls << '\t' << sec << '\t' << r.status;
    return os.str();
}

ReplicationRow parse_row(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> fields;
    std::string f;
    while (std::getline(is, f, '\t')) fields.push_back(f);
    if (fields.size() != 17) throw std::runtime_error("results row: expected 17 fields");
    ReplicationRow r;
    r.dgp = fields[0];
    r.lambda = std::stod(fields[1]);
    r.method = fields[2];
    r.rep = std::stoi(fields[3]);
    r.seed = std::stoull(fields[4]);
    for (int j = 0; j < 6; ++j) r.x(j) = std::stod(fields[5 + static_cast<std::size_t>(j)]);
    r.oracle_j = std::stod(fields[11]);
    r.oracle_ec = std::stod(fields[12]);
    r.oracle_cvar = std::stod(fields[13]);
    r.oracle_calls = std::stoll(fields[14]);
    r.seconds = std::stod(fields[15]);
    r.status = fields[16];
    return r;
}

std::vector<ReplicationRow> read_results(const std::string& path) {
    std::vector<ReplicationRow> rows;
    std::ifstream in(path);
    if (!in) return rows;
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i == 0 && lines[i] == results_header()) continue;
        try {
            rows.push_back(parse_row(lines[i]));
        } catch (const std::exception&) {
            if (i + 1 == lines.size()) break; // torn trailing write; drop it
            throw;
        }
    }
    return rows;
}

ResultsWriter::ResultsWriter(std::string path, int n_tasks)
    : path_(std::move(path)), n_tasks_(n_tasks), pending_(static_cast<std::size_t>(n_tasks)),
      ready_(static_cast<std::size_t>(n_tasks), false) {
    header_written_ = std::filesystem::exists(path_) && std::filesystem::file_size(path_) > 0;
}

void ResultsWriter::submit(int task_index, ReplicationRow row) {
    pending_[static_cast<std::size_t>(task_index)] = std::move(row);
    ready_[static_cast<std::size_t>(task_index)] = true;
    flush_ready();
}

void ResultsWriter::flush_ready() {
    if (next_ >= n_tasks_ && n_tasks_ > 0) return;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw std::runtime_error("cannot open results file for append: " + path_);
    if (!header_written_) {
        out << results_header() << '\n';
        header_written_ = true;
    }
    while (next_ < n_tasks_ && ready_[static_cast<std::size_t>(next_)]) {
        out << format_row(pending_[static_cast<std::size_t>(next_)]) << '\n';
        pending_[static_cast<std::size_t>(next_)] = ReplicationRow{};
        ++next_;
    }
    out.flush();
}

} // namespace acfs
