#ifndef ACFS_RESULTS_HPP
#define ACFS_RESULTS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "acfs/decision.hpp"

namespace acfs {

// One optimiser run. Columns, in file order:
// dgp lambda method rep seed x1..x6 oracle_J oracle_EC oracle_CVaR oracle_calls seconds status
struct ReplicationRow {
    std::string dgp;
    double lambda = 0.0;
    std::string method;
    int rep = 0;
    std::uint64_t seed = 0;
    Vec6 x = Vec6::Zero();
    double oracle_j = 0.0;
    double oracle_ec = 0.0;
    double oracle_cvar = 0.0;
    long long oracle_calls = 0;
    double seconds = 0.0;
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
    // resume key
    std::string key() const;
};

std::string results_header();
std::string format_row(const ReplicationRow& row);
ReplicationRow parse_row(const std::string& line);

std::vector<ReplicationRow> read_results(const std::string& path); // empty if absent

// Single-writer appender that keeps rows in canonical task order: a row for
// task i is flushed only once every earlier task has been flushed.
class ResultsWriter {
public:
    ResultsWriter(std::string path, int n_tasks);

    void submit(int task_index, ReplicationRow row); // thread-safe? no: call from collector
    bool all_flushed() const { return next_ == n_tasks_; }

private:
    std::string path_;
    int n_tasks_;
    int next_ = 0;
    std::vector<ReplicationRow> pending_;
    std::vector<bool> ready_;
    bool header_written_ = false;

    void flush_ready();
};

} // namespace acfs

#endif
