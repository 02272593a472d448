#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "attention.hpp"

namespace polyattn {

enum class BRule { constant, scaled };         // constant: B = value; scaled: B = value*sqrt(ln n)
enum class EpsRule { constant, polynomial };   // constant: eps_a = value; polynomial: n^-value
enum class Method { exact, poly };

struct SweepConfig {
    std::vector<std::size_t> n_values; // nonempty, ascending
    std::size_t d = 8;
    BRule b_rule = BRule::constant;
    double b_value = 1.0;
    EpsRule eps_rule = EpsRule::constant;
    double eps_value = 1e-3;
    std::vector<Method> methods;
    std::uint64_t seed = 0;
    int repetitions = 1;
    std::size_t exact_cap = 16384; // exact is skipped above this n
};

struct SweepRecord {
    std::size_t n = 0;
    std::size_t d = 0;
    double entry_bound = 0.0;
    double eps_a = 0.0;
    Method method = Method::exact;
    std::optional<int> degree;           // poly only
    std::optional<std::int64_t> rank;    // poly only
    double wall_time_seconds = 0.0;      // median over repetitions
    std::optional<double> max_abs_error; // poly vs exact, when exact also ran at this n
    std::uint64_t seed = 0;              // seed of the first repetition's instance
};

/// Q, K, V entries i.i.d. uniform on [-B, B] from std::mt19937_64(seed):
/// each entry consumes one 64-bit draw x, u = (x >> 11) * 2^-53,
/// value = B * (2u - 1); fill order is Q, then K, then V, row-major.
/// Same seed gives a bit-identical instance.
AttentionInstance generate_instance(std::size_t n, std::size_t d, double entry_bound,
                                    double eps_a, std::uint64_t seed);

/// Instance seed for repetition `rep` at size `n`: seed + 1000003*n + rep.
std::uint64_t instance_seed(std::uint64_t seed, std::size_t n, int rep);

/// One record per (n, method); wall time is the median over repetitions.
std::vector<SweepRecord> run_sweep(const SweepConfig& cfg);

/// Header row naming every record field, then one line per record. Byte
/// deterministic for a fixed config and seed except the wall-time column.
std::string records_to_csv(const std::vector<SweepRecord>& records);

/// Same records as a JSON array.
std::string records_to_json(const std::vector<SweepRecord>& records);

/// Parses the JSON sweep config (see README for the schema).
SweepConfig parse_sweep_config(const std::string& json_text);

double resolve_entry_bound(const SweepConfig& cfg, std::size_t n);
double resolve_eps_a(const SweepConfig& cfg, std::size_t n);

} // namespace polyattn
