#include "bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include <json.hpp>

namespace polyattn {

namespace {

const char* method_name(Method m) { return m == Method::exact ? "exact" : "poly"; }

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

} // namespace

std::uint64_t instance_seed(std::uint64_t seed, std::size_t n, int rep) {
    return seed + std::uint64_t{1000003} * n + static_cast<std::uint64_t>(rep);
}

AttentionInstance generate_instance(std::size_t n, std::size_t d, double entry_bound,
                                    double eps_a, std::uint64_t seed) {
    if (!(entry_bound > 0.0))
        fail(ErrorCode::invalid_argument, "generate_instance: B must be > 0");
    std::mt19937_64 rng(seed);
    auto draw = [&]() {
        const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
        return entry_bound * (2.0 * u - 1.0);
    };
    DenseMatrix q(n, d), k(n, d), v(n, d);
    for (DenseMatrix* m : {&q, &k, &v})
        for (std::size_t i = 0; i < n; ++i) {
            double* row = m->row(i);
            for (std::size_t c = 0; c < d; ++c) row[c] = draw();
        }
    return AttentionInstance(std::move(q), std::move(k), std::move(v), entry_bound, eps_a);
}

double resolve_entry_bound(const SweepConfig& cfg, std::size_t n) {
    if (cfg.b_rule == BRule::constant) return cfg.b_value;
    return cfg.b_value * std::sqrt(std::log(static_cast<double>(n)));
}

double resolve_eps_a(const SweepConfig& cfg, std::size_t n) {
    if (cfg.eps_rule == EpsRule::constant) return cfg.eps_value;
    return std::pow(static_cast<double>(n), -cfg.eps_value);
}

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg) {
    if (cfg.n_values.empty())
        fail(ErrorCode::invalid_argument, "sweep: n_values must be nonempty");
    if (!std::is_sorted(cfg.n_values.begin(), cfg.n_values.end()))
        fail(ErrorCode::invalid_argument, "sweep: n_values must be ascending");
    if (cfg.repetitions < 1)
        fail(ErrorCode::invalid_argument, "sweep: repetitions must be >= 1");
    if (cfg.methods.empty())
        fail(ErrorCode::invalid_argument, "sweep: methods must be nonempty");

    const bool want_exact =
        std::find(cfg.methods.begin(), cfg.methods.end(), Method::exact) != cfg.methods.end();
    const bool want_poly =
        std::find(cfg.methods.begin(), cfg.methods.end(), Method::poly) != cfg.methods.end();

    std::vector<SweepRecord> out;
    for (std::size_t n : cfg.n_values) {
        const double b = resolve_entry_bound(cfg, n);
        const double eps_a = resolve_eps_a(cfg, n);
        const bool run_exact = want_exact && n <= cfg.exact_cap;

        std::vector<double> times_exact, times_poly;
        std::optional<int> g;
        std::optional<std::int64_t> r;
        std::optional<double> worst_err;
        for (int rep = 0; rep < cfg.repetitions; ++rep) {
            const AttentionInstance inst =
                generate_instance(n, cfg.d, b, eps_a, instance_seed(cfg.seed, n, rep));
            DenseMatrix t_exact(1, 1);
            if (run_exact) {
                const auto t0 = std::chrono::steady_clock::now();
                t_exact = exact_attention(inst);
                times_exact.push_back(
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            }
            if (want_poly) {
                ApproxReport rep_out;
                const auto t0 = std::chrono::steady_clock::now();
                const DenseMatrix t_poly = poly_attention(inst, &rep_out);
                times_poly.push_back(
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
                g = rep_out.degree;
                r = rep_out.rank;
                if (run_exact) {
                    const double e = max_abs_diff(t_exact, t_poly);
                    worst_err = worst_err ? std::max(*worst_err, e) : e;
                }
            }
        }
        const std::uint64_t rec_seed = instance_seed(cfg.seed, n, 0);
        if (run_exact) {
            SweepRecord rec;
            rec.n = n;
            rec.d = cfg.d;
            rec.entry_bound = b;
            rec.eps_a = eps_a;
            rec.method = Method::exact;
            rec.wall_time_seconds = median(times_exact);
            rec.seed = rec_seed;
            out.push_back(rec);
        }
        if (want_poly) {
            SweepRecord rec;
            rec.n = n;
            rec.d = cfg.d;
            rec.entry_bound = b;
            rec.eps_a = eps_a;
            rec.method = Method::poly;
            rec.degree = g;
            rec.rank = r;
            rec.wall_time_seconds = median(times_poly);
            rec.max_abs_error = worst_err;
            rec.seed = rec_seed;
            out.push_back(rec);
        }
    }
    return out;
}

std::string records_to_csv(const std::vector<SweepRecord>& records) {
    std::string out = "n,d,B,eps_a,method,g,r,wall_time_seconds,max_abs_error,seed\n";
    for (const SweepRecord& rec : records) {
        out += std::to_string(rec.n) + ',' + std::to_string(rec.d) + ',' +
               fmt_double(rec.entry_bound) + ',' + fmt_double(rec.eps_a) + ',' +
               method_name(rec.method) + ',';
        if (rec.degree) out += std::to_string(*rec.degree);
        out += ',';
        if (rec.rank) out += std::to_string(*rec.rank);
        out += ',' + fmt_double(rec.wall_time_seconds) + ',';
        if (rec.max_abs_error) out += fmt_double(*rec.max_abs_error);
        out += ',' + std::to_string(rec.seed) + '\n';
    }
    return out;
}

std::string records_to_json(const std::vector<SweepRecord>& records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const SweepRecord& rec : records) {
        nlohmann::json j{{"n", rec.n},
                         {"d", rec.d},
                         {"B", rec.entry_bound},
                         {"eps_a", rec.eps_a},
                         {"method", method_name(rec.method)},
                         {"wall_time_seconds", rec.wall_time_seconds},
                         {"seed", rec.seed}};
        j["g"] = rec.degree ? nlohmann::json(*rec.degree) : nlohmann::json();
        j["r"] = rec.rank ? nlohmann::json(*rec.rank) : nlohmann::json();
        j["max_abs_error"] =
            rec.max_abs_error ? nlohmann::json(*rec.max_abs_error) : nlohmann::json();
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

SweepConfig parse_sweep_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::parse_failure, std::string("sweep config: ") + e.what());
    }
    try {
        SweepConfig cfg;
        cfg.n_values = j.at("n_values").get<std::vector<std::size_t>>();
        cfg.d = j.at("d").get<std::size_t>();
        const auto& br = j.at("B_rule");
        const std::string bk = br.at("kind").get<std::string>();
        if (bk == "constant")
            cfg.b_rule = BRule::constant;
        else if (bk == "scaled")
            cfg.b_rule = BRule::scaled;
        else
            fail(ErrorCode::parse_failure, "sweep config: B_rule.kind must be constant|scaled");
        cfg.b_value = br.at("value").get<double>();
        const auto& er = j.at("eps_rule");
        const std::string ek = er.at("kind").get<std::string>();
        if (ek == "constant")
            cfg.eps_rule = EpsRule::constant;
        else if (ek == "polynomial")
            cfg.eps_rule = EpsRule::polynomial;
        else
            fail(ErrorCode::parse_failure,
                 "sweep config: eps_rule.kind must be constant|polynomial");
        cfg.eps_value = er.at("value").get<double>();
        for (const auto& m : j.at("methods")) {
            const std::string s = m.get<std::string>();
            if (s == "exact")
                cfg.methods.push_back(Method::exact);
            else if (s == "poly")
                cfg.methods.push_back(Method::poly);
            else
                fail(ErrorCode::parse_failure, "sweep config: methods entries must be exact|poly");
        }
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.repetitions = j.value("repetitions", 1);
        cfg.exact_cap = j.value("exact_cap", std::size_t{16384});
        return cfg;
    } catch (const Error&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse_failure, std::string("sweep config: ") + e.what());
    }
}

} // namespace polyattn
