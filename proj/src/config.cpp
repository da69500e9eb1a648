#include "bdlab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "bdlab/error.hpp"

namespace bdlab::app {

namespace {

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::logic_error&) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
    }
}

long to_long(const std::string& key, const std::string& v) {
    double x = to_double(key, v);
    if (x != double(long(x))) throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
    return long(x);
}

std::vector<std::string> split(const std::string& v, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string num(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> s{"forms-check", "special-check", "quad-appendix", "bessel-asymptotics",
                                            "delta-identity", "voronoi", "poisson-step", "decomposition",
                                            "bound-ledger", "sumscan", "lvalue", "weylscan", "all"};
    return s;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> k{"form",  "suite", "out",   "cache", "threads", "tol",    "epsilon",
                                            "N",     "T",     "K",     "P",     "gamma",   "delta",  "p",
                                            "X",     "Y",     "t_grid", "n_max", "n_max_limit"};
    return k;
}

void RunConfig::set(const std::string& key_in, const std::string& value_in) {
    std::string key = trim(key_in), value = trim(value_in);
    if (key == "form") {
        if (value != "delta" && value != "11a") throw ConfigError("config: unknown form '" + value + "' (delta, 11a)");
        form = value;
    } else if (key == "suite") {
        suites.clear();
        for (const auto& s : split(value, ',')) {
            const auto& names = suite_names();
            if (s == "none") continue;
            if (std::find(names.begin(), names.end(), s) == names.end()) throw ConfigError("config: unknown suite '" + s + "'");
            suites.push_back(s);
        }
    } else if (key == "out") {
        out = value;
    } else if (key == "cache") {
        cache = value;
    } else if (key == "threads") {
        threads = int(to_long(key, value));
        if (threads < 0) throw ConfigError("config: threads must be >= 0");
    } else if (key == "tol") {
        tol = to_double(key, value);
        if (!(tol > 0.0)) throw ConfigError("config: tol must be positive");
    } else if (key == "epsilon") {
        epsilon = to_double(key, value);
        if (!(epsilon > 0.0 && epsilon < 0.5)) throw ConfigError("config: epsilon must lie in (0, 1/2)");
    } else if (key == "N") {
        N = to_double(key, value);
    } else if (key == "T") {
        T = to_double(key, value);
    } else if (key == "K") {
        K = to_double(key, value);
    } else if (key == "P") {
        P = to_double(key, value);
    } else if (key == "gamma") {
        gamma = to_double(key, value);
    } else if (key == "delta") {
        delta = to_double(key, value);
    } else if (key == "p") {
        p = to_long(key, value);
    } else if (key == "X") {
        X = to_double(key, value);
    } else if (key == "Y") {
        Y = to_double(key, value);
    } else if (key == "t_grid") {
        t_grid.clear();
        for (const auto& s : split(value, ',')) t_grid.push_back(to_double(key, s));
        if (t_grid.empty()) throw ConfigError("config: t_grid is empty");
    } else if (key == "n_max") {
        n_max = to_long(key, value);
        if (n_max < 0) throw ConfigError("config: n_max must be >= 0");
    } else if (key == "n_max_limit") {
        n_max_limit = to_long(key, value);
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot read " + path);
    std::string line;
    int no = 0;
    while (std::getline(f, line)) {
        ++no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: " + path + ":" + std::to_string(no) + ": expected key=value");
        set(line.substr(0, eq), line.substr(eq + 1));
    }
}

std::string RunConfig::resolved() const {
    std::ostringstream os;
    std::string s, tg;
    for (size_t i = 0; i < suites.size(); ++i) s += (i ? "," : "") + suites[i];
    for (size_t i = 0; i < t_grid.size(); ++i) tg += (i ? "," : "") + num(t_grid[i]);
    os << "form=" << form << "\n"
       << "suite=" << s << "\n"
       << "out=" << out << "\n"
       << "cache=" << cache << "\n"
       << "threads=" << threads << "\n"
       << "tol=" << num(tol) << "\n"
       << "epsilon=" << num(epsilon) << "\n"
       << "N=" << num(N) << "\n"
       << "T=" << num(T) << "\n"
       << "K=" << num(K) << "\n"
       << "P=" << num(P) << "\n"
       << "gamma=" << num(gamma) << "\n"
       << "delta=" << num(delta) << "\n"
       << "p=" << p << "\n"
       << "X=" << num(X) << "\n"
       << "Y=" << num(Y) << "\n"
       << "t_grid=" << tg << "\n"
       << "n_max=" << n_max << "\n"
       << "n_max_limit=" << n_max_limit << "\n";
    return os.str();
}

}  // namespace bdlab::app
