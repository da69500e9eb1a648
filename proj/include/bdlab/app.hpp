#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bdlab/config.hpp"
#include "bdlab/forms.hpp"
#include "bdlab/special.hpp"
#include "json.hpp"

namespace bdlab::app {

using json = nlohmann::ordered_json;

struct Check {
    std::string name;
    bool pass = false;
    bool hard = true;  // soft checks are reported but do not change the exit status
    json values = json::object();
    std::string note;
};

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct SuiteResult {
    std::string name;
    std::vector<Check> checks;
    std::vector<Table> tables;
    bool pass() const;
};

// tables, calibrations and the bump shared by the suites of one run
class Context {
public:
    explicit Context(RunConfig cfg);
    const RunConfig& config() const { return cfg_; }
    // table with n_max >= n_min; throws PreconditionError naming the required n_max when it exceeds the limits
    forms::CoefficientTable table(const std::string& label, long n_min);
    // same coefficients with eta calibrated by the Voronoi formula
    forms::CoefficientTable calibrated(const std::string& label, long n_min);
    const special::BumpU& bump() const { return u_; }

private:
    RunConfig cfg_;
    std::map<std::string, forms::CoefficientTable> tables_;
    std::map<std::string, std::complex<double>> eta_;
    special::BumpU u_;
};

SuiteResult run_suite(const std::string& name, Context& ctx);

json suite_json(const SuiteResult& s);
void write_csv(const Table& t, const std::string& path);

// per-suite CSV files and their columns, for --help
std::string csv_documentation();

// runs the configured suites and writes results.json, CSV tables, summary.txt and config.resolved
// exit status: 0 all hard checks pass, 1 a check or computation failed, 2 configuration error
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace bdlab::app
