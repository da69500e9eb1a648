#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bdlab/app.hpp"
#include "bdlab/cache.hpp"
#include "bdlab/config.hpp"
#include "bdlab/error.hpp"
#include "bdlab/forms.hpp"
#include "doctest.h"

using namespace bdlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("bdlab-test-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

void spit(const fs::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << s;
}

}  // namespace

TEST_CASE("cache round trip is bitwise exact") {
    auto dir = scratch("cache");
    for (auto t : {forms::coefficients_delta(10000), forms::coefficients_11a(3000).with_eta(-1.0),
                   forms::CoefficientTable(forms::descriptor_delta(), std::vector<double>{0.0, 1.0, -0.5, 0.125})}) {
        auto path = (dir / "t.bdc").string();
        cache::write(t, path);
        auto back = cache::read(path);
        CHECK(back.n_max() == t.n_max());
        CHECK(back.encoding() == t.encoding());
        CHECK(back.descriptor().label == t.descriptor().label);
        CHECK(back.descriptor().eta == t.descriptor().eta);
        CHECK(std::memcmp(back.lambdas().data(), t.lambdas().data(), sizeof(double) * (t.n_max() + 1)) == 0);
    }
}

TEST_CASE("corrupted, truncated and bumped-version caches are refused") {
    auto dir = scratch("cache-bad");
    auto path = dir / "d.bdc";
    cache::write(forms::coefficients_delta(2000), path.string());
    std::string good = slurp(path);

    std::string bad = good;
    bad[bad.size() / 2] ^= 0x10;
    spit(path, bad);
    try {
        cache::read(path.string());
        FAIL("expected a checksum error");
    } catch (const CacheError& e) {
        CHECK(std::string(e.what()).find("checksum") != std::string::npos);
    }

    spit(path, good.substr(0, good.size() - 100));
    CHECK_THROWS_AS(cache::read(path.string()), CacheError);

    std::string v2 = good;
    v2[5] = '2';
    spit(path, v2);
    try {
        cache::read(path.string());
        FAIL("expected a version error");
    } catch (const CacheError& e) {
        std::string m = e.what();
        CHECK(m.find('2') != std::string::npos);
        CHECK(m.find('1') != std::string::npos);
        CHECK(m.find("version") != std::string::npos);
    }
}

TEST_CASE("load_or_build reuses a large enough cache") {
    auto dir = scratch("cache-reuse");
    auto a = cache::load_or_build(dir.string(), "delta", 3000);
    auto b = cache::load_or_build(dir.string(), "delta", 2000);
    CHECK(b.n_max() >= 3000);
    CHECK(b.raw(2999) == a.raw(2999));
}

TEST_CASE("config keys and files") {
    app::RunConfig c;
    CHECK_THROWS_AS(c.set("colour", "red"), ConfigError);
    CHECK_THROWS_AS(c.set("N", "abc"), ConfigError);
    CHECK_THROWS_AS(c.set("suite", "nope"), ConfigError);
    c.set("suite", "none");
    CHECK(c.suites.empty());
    c.set("t_grid", "16, 32,64");
    CHECK(c.t_grid.size() == 3);
    auto dir = scratch("config");
    spit(dir / "c.cfg", "# comment\nform = 11a\nT=500 # trailing\n");
    c.load_file((dir / "c.cfg").string());
    CHECK(c.form == "11a");
    CHECK(c.T == 500.0);
    spit(dir / "bad.cfg", "form 11a\n");
    CHECK_THROWS_AS(c.load_file((dir / "bad.cfg").string()), ConfigError);
    app::RunConfig d;
    for (const auto& line : {std::string("form=11a"), std::string("T=500")}) {
        auto eq = line.find('=');
        d.set(line.substr(0, eq), line.substr(eq + 1));
    }
    std::istringstream rs(c.resolved());
    std::string line;
    app::RunConfig e;
    while (std::getline(rs, line)) {
        auto eq = line.find('=');
        if (eq != std::string::npos) e.set(line.substr(0, eq), line.substr(eq + 1));
    }
    CHECK(e.resolved() == c.resolved());
}

TEST_CASE("run exit status") {
    auto dir = scratch("run");
    std::ostringstream log;
    app::RunConfig c;
    c.out = (dir / "none").string();
    CHECK(app::run(c, log) == 2);
    CHECK(log.str().find("no suite selected") != std::string::npos);

    c.suites = {"special-check"};
    c.out = (dir / "ok").string();
    CHECK(app::run(c, log) == 0);
    CHECK(fs::exists(dir / "ok" / "results.json"));
    CHECK(fs::exists(dir / "ok" / "summary.txt"));
    CHECK(fs::exists(dir / "ok" / "config.resolved"));
    CHECK(fs::exists(dir / "ok" / "special-check__bessel_j.csv"));
    CHECK(!fs::exists(dir / "ok" / ".bdlab.lock"));

    spit(dir / "ok" / ".bdlab.lock", "");
    CHECK(app::run(c, log) == 2);
    fs::remove(dir / "ok" / ".bdlab.lock");

    c.suites = {"weylscan"};
    c.t_grid = {16, 4096};
    c.n_max = 20000;
    c.out = (dir / "weyl").string();
    std::ostringstream wl;
    CHECK(app::run(c, wl) == 2);
    CHECK(wl.str().find("needs n_max >=") != std::string::npos);
}

TEST_CASE("results are identical across runs") {
    auto dir = scratch("det");
    app::RunConfig c;
    c.suites = {"special-check", "sumscan"};
    std::ostringstream log;
    c.out = (dir / "a").string();
    REQUIRE(app::run(c, log) == 0);
    c.out = (dir / "b").string();
    REQUIRE(app::run(c, log) == 0);
    auto strip = [](std::string s) { return s.substr(0, s.find("\"config\"")); };
    CHECK(strip(slurp(dir / "a" / "results.json")) == strip(slurp(dir / "b" / "results.json")));
}
