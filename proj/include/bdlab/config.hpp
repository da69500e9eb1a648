#pragma once

#include <string>
#include <vector>

namespace bdlab::app {

// every key accepted on the command line and in config files
struct RunConfig {
    std::string form = "delta";
    std::vector<std::string> suites;
    std::string out = "bdlab-out";
    std::string cache;
    int threads = 1;
    double tol = 1e-11;      // relative quadrature tolerance
    double epsilon = 0.05;   // stand-in for every epsilon
    double N = 1000.0;
    double T = 200.0;
    double K = 20.0;
    double P = 50.0;
    double gamma = 0.0;
    double delta = 20.0;     // derivative scale of the weight V
    long p = 31;
    double X = 1e5;
    double Y = 1000.0;
    std::vector<double> t_grid{16, 32, 64, 128, 256, 512, 1024};
    long n_max = 0;          // 0 sizes tables automatically up to n_max_limit
    long n_max_limit = 2000000;

    void set(const std::string& key, const std::string& value);
    // key=value lines; '#' starts a comment
    void load_file(const std::string& path);
    std::string resolved() const;
};

const std::vector<std::string>& suite_names();
const std::vector<std::string>& config_keys();

}  // namespace bdlab::app
