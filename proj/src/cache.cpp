#include "bdlab/cache.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "bdlab/error.hpp"

namespace bdlab::cache {

namespace {

const std::string magic = "BDLAB";

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::string encoding_name(forms::Encoding e) { return e == forms::Encoding::integer ? "integer" : "float64"; }

}  // namespace

std::uint64_t checksum(const unsigned char* data, std::size_t size) {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= data[i];
        h *= 1099511628211ULL;
    }
    return h;
}

void write(const forms::CoefficientTable& table, const std::string& path) {
    const auto& d = table.descriptor();
    std::vector<unsigned char> payload;
    long n = table.n_max();
    if (table.encoding() == forms::Encoding::integer) {
        payload.reserve(16 * (n + 1));
        for (forms::i128 v : table.raws()) {
            auto u = static_cast<unsigned __int128>(v);
            put_u64(payload, static_cast<std::uint64_t>(u));
            put_u64(payload, static_cast<std::uint64_t>(u >> 64));
        }
    } else {
        payload.reserve(8 * (n + 1));
        for (double x : table.lambdas()) {
            std::uint64_t bits;
            std::memcpy(&bits, &x, 8);
            put_u64(payload, bits);
        }
    }
    std::ostringstream head;
    head.precision(17);
    head << magic << format_version << "\n"
         << "label=" << d.label << " M=" << d.M << " k=" << d.k << " n_max=" << n
         << " encoding=" << encoding_name(table.encoding()) << " eta=" << d.eta.real() << "," << d.eta.imag()
         << " calibrated=" << (d.eta_calibrated ? 1 : 0) << "\n";
    std::vector<unsigned char> tail;
    put_u64(tail, checksum(payload.data(), payload.size()));

    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw CacheError("cache: cannot open " + tmp + " for writing");
        std::string h = head.str();
        f.write(h.data(), std::streamsize(h.size()));
        f.write(reinterpret_cast<const char*>(payload.data()), std::streamsize(payload.size()));
        f.write(reinterpret_cast<const char*>(tail.data()), 8);
        if (!f) throw CacheError("cache: write to " + tmp + " failed");
    }
    std::filesystem::rename(tmp, path);
}

forms::CoefficientTable read(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CacheError("cache: cannot open " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    auto line_end = [&](std::size_t from) {
        for (std::size_t i = from; i < buf.size(); ++i)
            if (buf[i] == '\n') return i;
        throw CacheError("cache: " + path + " is truncated inside the header");
    };
    std::size_t e1 = line_end(0);
    std::string first(buf.begin(), buf.begin() + long(e1));
    if (first.compare(0, magic.size(), magic) != 0) throw CacheError("cache: " + path + " is not a coefficient cache");
    std::string ver = first.substr(magic.size());
    if (ver != std::to_string(format_version))
        throw CacheError("cache: version mismatch in " + path + ": file has version " + ver + ", reader expects version " +
                         std::to_string(format_version));
    std::size_t e2 = line_end(e1 + 1);
    std::istringstream head(std::string(buf.begin() + long(e1) + 1, buf.begin() + long(e2)));

    forms::NewformDescriptor d;
    long n = -1;
    std::string enc;
    double er = 1.0, ei = 0.0;
    int cal = 0;
    std::string tok;
    while (head >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw CacheError("cache: malformed header field '" + tok + "' in " + path);
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        try {
            if (key == "label") d.label = val;
            else if (key == "M") d.M = std::stoi(val);
            else if (key == "k") d.k = std::stoi(val);
            else if (key == "n_max") n = std::stol(val);
            else if (key == "encoding") enc = val;
            else if (key == "eta") {
                auto c = val.find(',');
                er = std::stod(val.substr(0, c));
                ei = std::stod(val.substr(c + 1));
            } else if (key == "calibrated") cal = std::stoi(val);
            else throw CacheError("cache: unknown header field '" + key + "' in " + path);
        } catch (const std::logic_error&) {
            throw CacheError("cache: malformed header field '" + tok + "' in " + path);
        }
    }
    if (n < 1 || (enc != "integer" && enc != "float64")) throw CacheError("cache: incomplete header in " + path);
    std::size_t width = enc == "integer" ? 16 : 8;
    std::size_t need = std::size_t(n + 1) * width;
    std::size_t start = e2 + 1;
    if (buf.size() < start + need + 8) throw CacheError("cache: " + path + " is truncated");
    if (buf.size() > start + need + 8) throw CacheError("cache: " + path + " has trailing bytes");
    const unsigned char* p = buf.data() + start;
    std::uint64_t stored = get_u64(p + need);
    if (stored != checksum(p, need)) throw CacheError("cache: checksum mismatch in " + path);

    d.eta = {er, ei};
    forms::CoefficientTable t;
    if (enc == "integer") {
        std::vector<forms::i128> raw(n + 1);
        for (long i = 0; i <= n; ++i) {
            unsigned __int128 u = get_u64(p + 16 * i + 8);
            u = (u << 64) | get_u64(p + 16 * i);
            raw[i] = static_cast<forms::i128>(u);
        }
        t = forms::CoefficientTable(d, std::move(raw));
    } else {
        std::vector<double> lam(n + 1);
        for (long i = 0; i <= n; ++i) {
            std::uint64_t bits = get_u64(p + 8 * i);
            std::memcpy(&lam[i], &bits, 8);
        }
        t = forms::CoefficientTable(d, std::move(lam));
    }
    return cal ? t.with_eta(d.eta) : t;
}

forms::CoefficientTable load_or_build(const std::string& dir, const std::string& label, long n_max) {
    if (dir.empty()) return forms::coefficients_by_label(label, n_max);
    std::filesystem::create_directories(dir);
    std::string path = (std::filesystem::path(dir) / (label + ".bdc")).string();
    if (std::filesystem::exists(path)) {
        forms::CoefficientTable t = read(path);
        if (t.n_max() >= n_max) return t;
    }
    forms::CoefficientTable t = forms::coefficients_by_label(label, n_max);
    write(t, path);
    return t;
}

}  // namespace bdlab::cache
