#include "sgt/record.hpp"

#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sgt::record {

using nlohmann::json;

void RunConfig::validate() const {
    if (samples < 1) throw std::invalid_argument("RunConfig: samples >= 1 required");
    if (!(tolerance > 0.0)) throw std::invalid_argument("RunConfig: tolerance > 0 required");
    if (workers < 1) throw std::invalid_argument("RunConfig: workers >= 1 required");
    if (format != "json" && format != "csv")
        throw std::invalid_argument("RunConfig: format must be json or csv");
}

std::string RunConfig::canonical_json() const {
    json j;
    j["seed"] = seed;
    j["samples"] = samples;
    j["tolerance"] = tolerance;
    j["n_max"] = n_max;
    j["quadrature"] = quadrature;
    j["format"] = format;
    j["workers"] = workers;
    return j.dump();
}

std::string sha1_hex(const std::string& bytes) {
    // compact SHA-1 (FIPS 180-1)
    std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
    std::string msg = bytes;
    const std::uint64_t ml = static_cast<std::uint64_t>(bytes.size()) * 8;
    msg.push_back(static_cast<char>(0x80));
    while (msg.size() % 64 != 56) msg.push_back('\0');
    for (int i = 7; i >= 0; --i) msg.push_back(static_cast<char>((ml >> (8 * i)) & 0xFF));
    const auto rol = [](std::uint32_t v, int s) { return (v << s) | (v >> (32 - s)); };
    for (std::size_t chunk = 0; chunk < msg.size(); chunk += 64) {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i)
            w[i] = (static_cast<std::uint8_t>(msg[chunk + 4 * i]) << 24) |
                   (static_cast<std::uint8_t>(msg[chunk + 4 * i + 1]) << 16) |
                   (static_cast<std::uint8_t>(msg[chunk + 4 * i + 2]) << 8) |
                   static_cast<std::uint8_t>(msg[chunk + 4 * i + 3]);
        for (int i = 16; i < 80; ++i)
            w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            const std::uint32_t t = rol(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rol(b, 30);
            b = a;
            a = t;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
    }
    std::ostringstream os;
    for (std::uint32_t v : h) {
        for (int i = 7; i >= 0; --i) os << "0123456789abcdef"[(v >> (4 * i)) & 0xF];
    }
    return os.str();
}

void ResultRecord::add(const std::string& name, double value, double err) {
    values.push_back({name, {value, err}});
}

namespace {

json params_json(const ThermalParams& p) {
    json j;
    j["beta"] = p.beta;
    j["mass"] = p.mass;
    j["coupling_a"] = p.coupling_a;
    j["hbar"] = p.hbar;
    j["mu_scale"] = p.mu_scale;
    j["coupling_lambda"] = p.coupling_lambda;
    return j;
}

ThermalParams params_from(const json& j) {
    ThermalParams p;
    p.beta = j.at("beta").get<double>();
    p.mass = j.at("mass").get<double>();
    p.coupling_a = j.at("coupling_a").get<double>();
    p.hbar = j.at("hbar").get<double>();
    p.mu_scale = j.at("mu_scale").get<double>();
    p.coupling_lambda = j.at("coupling_lambda").get<double>();
    return p;
}

}  // namespace

std::string ResultRecord::to_json() const {
    json j;
    j["command"] = command;
    j["params"] = params_json(params);
    j["config"] = json::parse(config.canonical_json());
    j["config"]["output_dir"] = config.output_dir;
    j["config_hash"] = config_hash;
    json vals = json::array();
    for (const auto& [name, v] : values)
        vals.push_back({{"name", name}, {"value", v.value}, {"std_error", v.std_error}});
    j["values"] = vals;
    j["wall_ms"] = wall_ms;
    j["timestamp"] = timestamp;
    j["seed"] = config.seed;
    j["workers"] = config.workers;
    return j.dump(2);
}

std::string ResultRecord::to_csv() const {
    // one header row, fixed column order
    std::ostringstream os;
    os.precision(17);
    os << "command,name,value,std_error,seed,workers,config_hash\n";
    for (const auto& [name, v] : values)
        os << command << "," << name << "," << v.value << "," << v.std_error << ","
           << config.seed << "," << config.workers << "," << config_hash << "\n";
    return os.str();
}

ResultRecord ResultRecord::from_json(const std::string& text) {
    const json j = json::parse(text);
    ResultRecord r;
    r.command = j.at("command").get<std::string>();
    r.params = params_from(j.at("params"));
    const json& c = j.at("config");
    r.config.seed = c.at("seed").get<std::uint64_t>();
    r.config.samples = c.at("samples").get<long long>();
    r.config.tolerance = c.at("tolerance").get<double>();
    r.config.n_max = c.at("n_max").get<int>();
    r.config.quadrature = c.at("quadrature").get<std::string>();
    r.config.format = c.at("format").get<std::string>();
    r.config.workers = c.at("workers").get<int>();
    r.config.output_dir = c.value("output_dir", "");
    r.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& v : j.at("values"))
        r.values.push_back({v.at("name").get<std::string>(),
                            {v.at("value").get<double>(), v.at("std_error").get<double>()}});
    r.wall_ms = j.at("wall_ms").get<double>();
    r.timestamp = j.at("timestamp").get<std::string>();
    return r;
}

bool ResultRecord::equivalent(const ResultRecord& other) const {
    if (command != other.command || config_hash != other.config_hash) return false;
    if (values.size() != other.values.size()) return false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i].first != other.values[i].first) return false;
        if (values[i].second.value != other.values[i].second.value) return false;
        if (values[i].second.std_error != other.values[i].second.std_error) return false;
    }
    return true;
}

std::string ResultRecord::write(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::string safe = command;
    for (char& c : safe)
        if (c == ' ' || c == '/') c = '_';
    const std::string ext = config.format == "csv" ? ".csv" : ".json";
    const fs::path path = fs::path(dir) / (safe + "_" + config_hash.substr(0, 12) + ext);
    std::ofstream out(path);
    out << (config.format == "csv" ? to_csv() : to_json());
    return path.string();
}

}  // namespace sgt::record
