#include <cstdlib>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "bdlab/app.hpp"
#include "bdlab/error.hpp"

int main(int argc, char** argv) {
    using bdlab::app::RunConfig;

    CLI::App cli{"bdlab: numerical verification suites for the t-aspect Weyl bound of GL(2) L-functions"};
    std::string names;
    for (const auto& s : bdlab::app::suite_names()) names += (names.empty() ? "" : ", ") + s;
    cli.footer("Suites: " + names + "\n\n" + bdlab::app::csv_documentation() +
               "\nEvery key may also be given as key=value in a --config file or with --set key=value.\n"
               "BDLAB_CACHE sets the default coefficient cache directory.");

    std::string config_file;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::vector<std::string> sets;
    auto flag = [&](const std::string& key, const std::string& help) {
        cli.add_option_function<std::string>(
            "--" + key, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
    };
    cli.add_option("--config", config_file, "key=value file, applied before the flags");
    flag("form", "delta or 11a");
    flag("suite", "comma-separated suites, 'all' or 'none'");
    flag("out", "output directory (default bdlab-out)");
    flag("cache", "coefficient cache directory");
    flag("threads", "worker threads, 0 for all cores");
    flag("tol", "relative quadrature tolerance");
    flag("epsilon", "value used for every epsilon");
    flag("N", "length of the sum");
    flag("T", "size of the phase");
    flag("K", "decomposition parameter K");
    flag("P", "primes are taken in [P, 2P]");
    flag("gamma", "linear part of the phase");
    flag("delta", "derivative scale of the weight V");
    flag("p", "prime modulus for delta-identity");
    flag("X", "Bessel integral scale for delta-identity");
    flag("Y", "Voronoi test weight scale");
    flag("t_grid", "comma-separated heights for weylscan");
    flag("n_max", "coefficient table size, 0 for automatic");
    flag("n_max_limit", "largest automatic table");
    cli.add_option("--set", sets, "key=value override, repeatable");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = cli.exit(e);
        return rc == 0 ? 0 : 2;
    }

    RunConfig cfg;
    try {
        if (const char* env = std::getenv("BDLAB_CACHE")) cfg.cache = env;
        if (!config_file.empty()) cfg.load_file(config_file);
        for (const auto& [k, v] : overrides) cfg.set(k, v);
        for (const auto& kv : sets) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw bdlab::ConfigError("--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
    } catch (const bdlab::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return bdlab::app::run(cfg, std::cerr);
}
