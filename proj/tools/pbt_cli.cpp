// Batch front-end: parameter sweeps, figure-data emission, and self-checks
// for the two-step port-based teleportation library.
//
// Exit codes: 0 success, 1 check failure, 2 usage error, 3 budget exceeded.

#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "pbt/sweep.hpp"

namespace {

using pbt::sweep::CheckOutcome;
using pbt::sweep::SweepConfig;

void add_common_options(CLI::App* sub, SweepConfig& cfg, std::string& scheme_arg,
                        std::string& format_arg) {
    sub->add_option("--d", cfg.d, "local dimension")->capture_default_str();
    sub->add_option("--n-min", cfg.n_min, "smallest port count")->capture_default_str();
    sub->add_option("--n-max", cfg.n_max, "largest port count")->capture_default_str();
    sub->add_option("--scheme", scheme_arg, "resource scheme: epr | optimized | custom:<file>")
        ->capture_default_str();
    sub->add_option("--format", format_arg, "output format: csv | json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sub->add_option("--out", cfg.out_path, "output path (default: stdout)");
    sub->add_option("--tol", cfg.tol, "tolerance for checks")->capture_default_str();
    sub->add_flag("--allow-large", cfg.allow_large, "lift the dense-operator size budget");
}

void finish_config(SweepConfig& cfg, const std::string& scheme_arg,
                   const std::string& format_arg) {
    if (scheme_arg.rfind("custom:", 0) == 0) {
        cfg.scheme = "custom";
        cfg.custom_path = scheme_arg.substr(7);
    } else {
        cfg.scheme = scheme_arg;
    }
    cfg.format = format_arg == "json" ? pbt::sweep::Format::json : pbt::sweep::Format::csv;
}

// Oracle-check rows carry absolute deviations; identities rows carry 1/0 flags.
void print_check_summary(const CheckOutcome& outcome, const SweepConfig& cfg, bool deviations) {
    std::map<std::string, double> per_quantity;
    for (const auto& r : outcome.rows) {
        auto key = r.quantity + (r.scheme.empty() ? "" : "/" + r.scheme) +
                   (r.branch.empty() ? "" : "/" + r.branch);
        double badness = deviations ? r.value.value_or(1.0) : 1.0 - r.value.value_or(0.0);
        per_quantity[key] = std::max(per_quantity[key], badness);
    }
    for (const auto& [key, badness] : per_quantity) {
        if (deviations)
            std::cerr << (badness <= cfg.tol ? "pass " : "FAIL ") << key << ": max deviation "
                      << pbt::sweep::format_double(badness) << "\n";
        else
            std::cerr << (badness == 0.0 ? "pass " : "FAIL ") << key << "\n";
    }
    if (outcome.evaluated == 0)
        std::cerr << "no points evaluated (" << outcome.skipped << " skipped by the budget)\n";
    else
        std::cerr << (outcome.passed ? "all checks passed" : "some checks FAILED") << " ("
                  << outcome.evaluated << " points evaluated, " << outcome.skipped
                  << " skipped)\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-step port-based teleportation: fidelities, success probabilities,\n"
                 "recycling fidelities, and dense-operator self-checks"};
    app.require_subcommand(1);

    SweepConfig cfg;
    std::string scheme_arg = "optimized";
    std::string format_arg = "csv";

    auto* fidelity = app.add_subcommand(
        "fidelity", "p_succ, entanglement fidelity and their ratio over a range of N");
    auto* mpbt = app.add_subcommand(
        "mpbt-compare", "deterministic two-step optimum against the multi-port baseline");
    auto* recycle = app.add_subcommand(
        "recycle", "conditional recycling fidelities for success and failure branches");
    auto* oracle_check = app.add_subcommand(
        "oracle-check", "closed formulas against the dense-operator oracle");
    auto* identities = app.add_subcommand(
        "identities", "exact rational identity checks (branching, contents, p_succ)");
    for (auto* sub : {fidelity, mpbt, recycle, oracle_check, identities})
        add_common_options(sub, cfg, scheme_arg, format_arg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        finish_config(cfg, scheme_arg, format_arg);
        if (fidelity->parsed()) {
            cfg.command = "fidelity";
            pbt::sweep::write_rows(pbt::sweep::run_fidelity(cfg), cfg);
            return 0;
        }
        if (mpbt->parsed()) {
            cfg.command = "mpbt-compare";
            pbt::sweep::write_rows(pbt::sweep::run_mpbt_compare(cfg), cfg);
            return 0;
        }
        if (recycle->parsed()) {
            cfg.command = "recycle";
            pbt::sweep::write_rows(pbt::sweep::run_recycle(cfg), cfg);
            return 0;
        }
        if (oracle_check->parsed()) {
            cfg.command = "oracle-check";
            auto outcome = pbt::sweep::run_oracle_check(cfg);
            pbt::sweep::write_rows(outcome.rows, cfg);
            print_check_summary(outcome, cfg, true);
            if (outcome.evaluated == 0)
                return 3; // every requested point was beyond the budget
            return outcome.passed ? 0 : 1;
        }
        cfg.command = "identities";
        auto outcome = pbt::sweep::run_identities(cfg);
        pbt::sweep::write_rows(outcome.rows, cfg);
        print_check_summary(outcome, cfg, false);
        return outcome.passed ? 0 : 1;
    } catch (const pbt::sweep::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const pbt::oracle::BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
