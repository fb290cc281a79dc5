#pragma once

#include <charconv>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbt/merit.hpp"
#include "pbt/oracle.hpp"
#include "pbt/recycling.hpp"

namespace pbt::sweep {

inline constexpr const char* kToolVersion = "1.0.0";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Format { csv, json };

struct SweepConfig {
    std::string command;
    int n_min = 2;
    int n_max = 12;
    int d = 2;
    std::string scheme = "optimized"; // epr | optimized | custom
    std::string custom_path;          // weights file for the custom scheme
    Format format = Format::csv;
    std::string out_path; // empty writes to stdout
    double tol = 1e-10;
    bool allow_large = false;
};

inline void validate(const SweepConfig& cfg) {
    if (cfg.n_min < 2 || cfg.n_min > cfg.n_max)
        throw UsageError("need 2 <= n-min <= n-max");
    if (cfg.d < 1)
        throw UsageError("need d >= 1");
    if (!(cfg.tol > 0))
        throw UsageError("need tol > 0");
    if (cfg.scheme != "epr" && cfg.scheme != "optimized" && cfg.scheme != "custom")
        throw UsageError("unknown scheme '" + cfg.scheme + "'");
    if (cfg.scheme == "custom" && cfg.custom_path.empty())
        throw UsageError("custom scheme requires a weights file (custom:<file>)");
}

struct Row {
    std::string quantity;
    std::string scheme;
    std::string branch;
    int N = 0;
    int d = 0;
    std::optional<double> value;
    std::string note; // reason for a null value; emitted in JSON only
};

/// Shortest round-trip decimal rendering.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{})
        throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

inline void sort_rows(std::vector<Row>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.quantity, a.scheme, a.branch, a.N, a.d) <
               std::tie(b.quantity, b.scheme, b.branch, b.N, b.d);
    });
}

inline std::string to_csv(const std::vector<Row>& rows) {
    std::string out = "quantity,scheme,branch,N,d,value\n";
    for (const auto& r : rows) {
        out += r.quantity + ',' + r.scheme + ',' + r.branch + ',' + std::to_string(r.N) + ',' +
               std::to_string(r.d) + ',' + (r.value ? format_double(*r.value) : "") + '\n';
    }
    return out;
}

inline std::string to_json(const std::vector<Row>& rows, const SweepConfig& cfg) {
    nlohmann::ordered_json doc;
    doc["metadata"] = {
        {"tool", "pbt"},
        {"version", kToolVersion},
        {"config",
         {{"command", cfg.command},
          {"n_min", cfg.n_min},
          {"n_max", cfg.n_max},
          {"d", cfg.d},
          {"scheme", cfg.scheme},
          {"tol", cfg.tol},
          {"allow_large", cfg.allow_large}}},
    };
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json jr{{"quantity", r.quantity}, {"scheme", r.scheme},
                                  {"branch", r.branch},     {"N", r.N},
                                  {"d", r.d},               {"value", nullptr}};
        if (r.value)
            jr["value"] = *r.value;
        else
            jr["reason"] = r.note;
        doc["rows"].push_back(std::move(jr));
    }
    return doc.dump(2) + "\n";
}

inline void write_rows(std::vector<Row> rows, const SweepConfig& cfg) {
    sort_rows(rows);
    const std::string text = cfg.format == Format::csv ? to_csv(rows) : to_json(rows, cfg);
    if (cfg.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(cfg.out_path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot open output file " + cfg.out_path);
        out << text;
    }
}

namespace detail {

inline Rational parse_rational(const std::string& text) {
    std::string s = text;
    if (auto slash = s.find('/'); slash != std::string::npos) {
        BigInt num(s.substr(0, slash));
        BigInt den(s.substr(slash + 1));
        if (den == 0)
            throw UsageError("weight with zero denominator: " + text);
        return Rational(num, den);
    }
    // decimal with optional exponent, converted exactly
    bool neg = false;
    std::size_t pos = 0;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-'))
        neg = s[pos++] == '-';
    BigInt digits = 0;
    long long frac_digits = 0, exponent = 0;
    bool saw_dot = false, saw_digit = false;
    for (; pos < s.size(); ++pos) {
        char c = s[pos];
        if (c == '.') {
            if (saw_dot)
                throw UsageError("malformed weight: " + text);
            saw_dot = true;
        } else if (c == 'e' || c == 'E') {
            exponent = std::stoll(s.substr(pos + 1));
            break;
        } else if (c >= '0' && c <= '9') {
            digits = digits * 10 + (c - '0');
            saw_digit = true;
            if (saw_dot)
                ++frac_digits;
        } else {
            throw UsageError("malformed weight: " + text);
        }
    }
    if (!saw_digit)
        throw UsageError("malformed weight: " + text);
    Rational r(digits);
    long long shift = exponent - frac_digits;
    for (long long i = 0; i < shift; ++i)
        r *= 10;
    for (long long i = 0; i < -shift; ++i)
        r /= 10;
    return neg ? -r : r;
}

} // namespace detail

/// Custom weights file: one line per partition, "<parts as comma list>,<weight>".
/// Weights are renormalized, with a warning when the sum is off by more than 1e-9.
inline ResourceWeights load_custom_weights(const std::string& path, int d) {
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot read weights file " + path);
    std::map<Partition, Rational> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            fields.push_back(field);
        if (fields.size() < 2)
            throw UsageError("weights file line " + std::to_string(line_no) +
                             ": expected \"parts...,weight\"");
        std::vector<int> parts;
        for (std::size_t i = 0; i + 1 < fields.size(); ++i)
            parts.push_back(std::stoi(fields[i]));
        Partition mu(std::move(parts));
        if (!entries.emplace(mu, detail::parse_rational(fields.back())).second)
            throw UsageError("weights file: duplicate partition " + mu.str());
    }
    if (entries.empty())
        throw UsageError("weights file is empty");
    const int N = entries.begin()->first.weight();
    Rational sum = 0;
    for (const auto& [mu, wt] : entries) {
        if (mu.weight() != N)
            throw UsageError("weights file mixes partitions of " + std::to_string(N) + " and " +
                             std::to_string(mu.weight()));
        if (mu.rows() > d)
            throw UsageError("partition " + mu.str() + " has more than " + std::to_string(d) +
                             " rows");
        if (wt < 0)
            throw UsageError("negative weight for " + mu.str());
        sum += wt;
    }
    if (sum == 0)
        throw UsageError("weights sum to zero");
    Rational off = sum - 1;
    if (off < 0)
        off = -off;
    if (off > Rational(1, 1000000000))
        std::cerr << "warning: weights sum to " << to_double(sum) << "; renormalizing\n";
    std::vector<Rational> f;
    for (const auto& mu : enum_partitions(N, d)) {
        auto it = entries.find(mu);
        f.push_back(it == entries.end() ? Rational(0) : it->second / sum);
    }
    return make_weights(N, d, std::move(f));
}

inline ResourceWeights weights_for(const SweepConfig& cfg, int N) {
    if (cfg.scheme == "epr")
        return epr_weights(N, cfg.d);
    if (cfg.scheme == "optimized")
        return optimal_ppbt_weights(N, cfg.d);
    ResourceWeights w = load_custom_weights(cfg.custom_path, cfg.d);
    if (w.N != N)
        throw UsageError("custom weights are for N = " + std::to_string(w.N) +
                         "; restrict the sweep range to that N");
    return w;
}

namespace detail {

template <typename Fn>
auto parallel_map(int lo, int hi, Fn&& fn) {
    using Result = std::invoke_result_t<Fn, int>;
    std::vector<std::future<Result>> futures;
    for (int v = lo; v <= hi; ++v)
        futures.push_back(std::async(std::launch::async, fn, v));
    std::vector<Result> out;
    out.reserve(futures.size());
    for (auto& f : futures)
        out.push_back(f.get());
    return out;
}

} // namespace detail

/// Per-N success probability, entanglement fidelity and their ratio.
inline std::vector<Row> run_fidelity(const SweepConfig& cfg) {
    validate(cfg);
    auto reports = detail::parallel_map(cfg.n_min, cfg.n_max, [&](int N) {
        return merit_report(N, cfg.d, weights_for(cfg, N), cfg.scheme);
    });
    std::vector<Row> rows;
    for (const auto& r : reports) {
        rows.push_back({"F_cond", cfg.scheme, "", r.N, cfg.d, r.cond_fidelity, ""});
        rows.push_back({"F_ent", cfg.scheme, "", r.N, cfg.d, r.f_ent, ""});
        rows.push_back({"p_succ", cfg.scheme, "", r.N, cfg.d, r.p_succ, ""});
    }
    return rows;
}

/// Deterministic two-step optimum against the two-state multi-port baseline.
inline std::vector<Row> run_mpbt_compare(const SweepConfig& cfg) {
    validate(cfg);
    struct Point {
        int N;
        double det, mpbt;
    };
    auto points = detail::parallel_map(cfg.n_min, cfg.n_max, [&](int N) {
        return Point{N, deterministic_two_step_optimum(N, cfg.d).fidelity,
                     mpbt_fidelity(N, cfg.d, 2)};
    });
    std::vector<Row> rows;
    for (const auto& p : points) {
        rows.push_back({"two_step_det_fidelity", "", "", p.N, cfg.d, p.det, ""});
        rows.push_back({"mpbt_fidelity", "", "", p.N, cfg.d, p.mpbt, ""});
        rows.push_back({"gap", "", "", p.N, cfg.d, p.mpbt - p.det, ""});
    }
    return rows;
}

/// Conditional recycling fidelities; the epr scheme maps to the standard protocol.
inline std::vector<Row> run_recycle(const SweepConfig& cfg) {
    validate(cfg);
    if (cfg.scheme == "custom")
        throw UsageError("recycle supports only the epr and optimized schemes");
    const auto scheme =
        cfg.scheme == "epr" ? RecyclingScheme::standard : RecyclingScheme::optimized;
    const std::string tag = scheme == RecyclingScheme::standard ? "standard" : "optimized";
    auto reports = detail::parallel_map(cfg.n_min, cfg.n_max,
                                        [&](int N) { return recycling_report(N, cfg.d, scheme); });
    std::vector<Row> rows;
    for (const auto& r : reports) {
        rows.push_back({"F_rec", tag, "success", r.N, cfg.d, r.f_succ, ""});
        if (r.f_fail)
            rows.push_back({"F_rec", tag, "failure", r.N, cfg.d, r.f_fail, ""});
        else
            rows.push_back(
                {"F_rec", tag, "failure", r.N, cfg.d, std::nullopt, "failure probability zero"});
    }
    return rows;
}

struct CheckOutcome {
    std::vector<Row> rows;
    int evaluated = 0;
    int skipped = 0;
    double max_deviation = 0.0;
    bool passed = true;
};

namespace detail {

// Dense-oracle evaluation cost guard: operator side within budget, and the
// isotypic projector construction (N! terms) small enough to finish promptly.
inline bool oracle_feasible(int N, int d, const oracle::OracleOptions& opts, bool allow_large) {
    double work = std::pow(double(d), double(N));
    for (int i = 2; i <= N; ++i)
        work *= i;
    if (work > (allow_large ? 1e11 : 3e8))
        return false;
    try {
        oracle::checked_side(N + 2, d, opts);
    } catch (const oracle::BudgetError&) {
        return false;
    }
    return true;
}

} // namespace detail

/// Closed formulas against the dense oracle over the sweep grid; rows carry
/// absolute deviations. Points beyond the evaluation budget are skipped with
/// a notice unless allow_large lifts the operator-size cap.
inline CheckOutcome run_oracle_check(const SweepConfig& cfg) {
    validate(cfg);
    oracle::OracleOptions opts;
    if (cfg.allow_large)
        opts.max_side = 1LL << 20;
    CheckOutcome outcome;
    struct Point {
        int N = 0;
        bool skipped = false;
        std::vector<Row> rows;
    };
    auto points = detail::parallel_map(cfg.n_min, cfg.n_max, [&](int N) {
        Point pt;
        pt.N = N;
        if (!detail::oracle_feasible(N, cfg.d, opts, cfg.allow_large)) {
            pt.skipped = true;
            return pt;
        }
        const int d = cfg.d;
        auto w = weights_for(cfg, N);
        auto push = [&](std::string quantity, std::string scheme, std::string branch,
                        double dev) {
            pt.rows.push_back({std::move(quantity), std::move(scheme), std::move(branch), N, d,
                               dev, ""});
        };
        push("F_ent", cfg.scheme, "",
             std::abs(two_step_fidelity(N, d, w) - oracle::oracle_two_step_fidelity(N, d, w, opts)));
        push("p_succ", cfg.scheme, "",
             std::abs(to_double(p_succ_general(N, d, w)) - oracle::oracle_p_succ(N, d, w, opts)));
        for (auto scheme : {RecyclingScheme::standard, RecyclingScheme::optimized}) {
            const std::string tag =
                scheme == RecyclingScheme::standard ? "standard" : "optimized";
            auto rep = recycling_report(N, d, scheme);
            auto dense_succ = oracle::oracle_recycling(N, d, scheme, oracle::Branch::success, opts);
            push("F_rec", tag, "success", std::abs(rep.f_succ - dense_succ.value()));
            auto dense_fail = oracle::oracle_recycling(N, d, scheme, oracle::Branch::failure, opts);
            if (rep.f_fail.has_value() != dense_fail.has_value())
                push("F_rec", tag, "failure", 1.0); // branch emptiness disagrees
            else if (rep.f_fail)
                push("F_rec", tag, "failure", std::abs(*rep.f_fail - *dense_fail));
        }
        return pt;
    });
    for (auto& pt : points) {
        if (pt.skipped) {
            ++outcome.skipped;
            std::cerr << "notice: skipping N=" << pt.N << ", d=" << cfg.d
                      << " (beyond the oracle evaluation budget)\n";
            continue;
        }
        ++outcome.evaluated;
        for (auto& r : pt.rows) {
            outcome.max_deviation = std::max(outcome.max_deviation, *r.value);
            outcome.rows.push_back(std::move(r));
        }
    }
    outcome.passed = outcome.max_deviation <= cfg.tol;
    return outcome;
}

/// Exact rational identities: branchings, the content identity, the measure
/// normalization at level N-1, character orthogonality, and the closed-form
/// success probability. Values are 1 (holds) or 0 (fails).
inline CheckOutcome run_identities(const SweepConfig& cfg) {
    validate(cfg);
    CheckOutcome outcome;
    const int d = cfg.d;
    auto push = [&](std::string quantity, int N, bool ok) {
        outcome.rows.push_back({std::move(quantity), "", "", N, d, ok ? 1.0 : 0.0, ""});
        ++outcome.evaluated;
        if (!ok) {
            outcome.passed = false;
            outcome.max_deviation = 1.0;
        }
    };
    const int cell_max = std::min(cfg.n_max - 1, 10);
    for (int n = 0; n <= cell_max; ++n) {
        bool content_ok = true, up_ok = true, down_ok = true, gl_ok = true;
        for (const auto& lam : enum_partitions(n, d)) {
            for (Cell a : addable_cells(lam, d)) {
                auto la = add_cell(lam, a);
                content_ok &= Rational(n + 1) * Rational(dim_sym(lam), dim_gl(lam, d)) *
                                  Rational(dim_gl(la, d), dim_sym(la)) ==
                              Rational(d + content(a));
            }
            BigInt up = 0;
            for (Cell a : addable_cells_unbounded(lam))
                up += dim_sym(add_cell(lam, a));
            up_ok &= up == BigInt(n + 1) * dim_sym(lam);
            BigInt down = 0;
            for (Cell r : removable_cells(lam))
                down += dim_sym(remove_cell(lam, r));
            down_ok &= lam.empty() || down == dim_sym(lam);
            BigInt gl = 0;
            for (Cell a : addable_cells(lam, d))
                gl += dim_gl(add_cell(lam, a), d);
            gl_ok &= gl == BigInt(d) * dim_gl(lam, d);
        }
        push("content_identity", n, content_ok);
        push("branching_sym_up", n, up_ok);
        push("branching_sym_down", n, down_ok);
        push("branching_gl", n, gl_ok);
    }
    for (int N = cfg.n_min; N <= cfg.n_max; ++N) {
        bool meas_ok = true;
        for (const auto& lam : enum_partitions(N - 1, d)) {
            Rational sum = 0;
            for (Cell a : addable_cells_unbounded(lam))
                sum += Rational(dim_sym(add_cell(lam, a)), BigInt(N) * dim_sym(lam));
            meas_ok &= sum == 1;
        }
        push("q_measure_normalization", N, meas_ok);
        push("p_succ_closed_form", N,
             p_succ_general(N, d, optimal_ppbt_weights(N, d)) == p_succ_closed(N, d));
    }
    for (int n = 1; n <= std::min(cfg.n_max, 6); ++n) {
        bool ortho_ok = true;
        auto classes = enum_partitions(n, n);
        for (const auto& lam : classes)
            for (const auto& mu : classes) {
                BigInt dot = 0;
                for (const auto& ct : classes)
                    dot += conjugacy_class_size(ct) * char_sym(lam, ct) * char_sym(mu, ct);
                ortho_ok &= dot == (lam == mu ? factorial(n) : BigInt(0));
            }
        push("char_orthogonality", n, ortho_ok);
    }
    return outcome;
}

} // namespace pbt::sweep
