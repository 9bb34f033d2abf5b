#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sgt/mc.hpp"
#include "sgt/params.hpp"

namespace sgt::record {

// Batch run controls persisted with every result.
struct RunConfig {
    std::uint64_t seed = 1;
    long long samples = 20000;
    double tolerance = 1e-8;
    int n_max = 2;
    std::string quadrature = "gk15-adaptive";
    std::string output_dir;
    std::string format = "json";  // json | csv
    int workers = 1;

    void validate() const;
    McConfig mc() const {
        McConfig c;
        c.seed = seed;
        c.samples = samples;
        c.workers = workers;
        return c;
    }
    std::string canonical_json() const;
};

struct ValueEntry {
    double value = 0.0;
    double std_error = 0.0;
};

// One persisted result: command, parameter snapshot, config hash, values.
// Re-running with an identical config reproduces the values bit-exactly;
// only the timestamp and wall time differ.
struct ResultRecord {
    std::string command;
    ThermalParams params;
    RunConfig config;
    std::string config_hash;
    std::vector<std::pair<std::string, ValueEntry>> values;
    double wall_ms = 0.0;
    std::string timestamp;

    void add(const std::string& name, double value, double err = 0.0);
    std::string to_json() const;
    std::string to_csv() const;
    static ResultRecord from_json(const std::string& text);
    // equality modulo timestamp and wall time
    bool equivalent(const ResultRecord& other) const;
    // write into dir (created if needed); returns the file path
    std::string write(const std::string& dir) const;
};

// SHA-1 of a byte string, lowercase hex. Used as the config content hash.
std::string sha1_hex(const std::string& bytes);

}  // namespace sgt::record
