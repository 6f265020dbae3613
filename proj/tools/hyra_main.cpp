// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hyra/encode.hpp"
#include "hyra/hnsolve.hpp"
#include "hyra/modelio.hpp"

namespace {

constexpr int kExitSat = 0;
constexpr int kExitUnsat = 1;
constexpr int kExitUnknown = 2;
constexpr int kExitUsage = 64;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bounded reachability solver for networks of hybrid automata"};

    std::string model_path;
    std::optional<int> k;
    std::optional<double> max_delay;
    std::optional<double> delta;
    std::string mode_name = "heuristic-learn";
    int n_flow_steps = 50;
    size_t max_boxes = 100000;
    double timeout = 0.0;
    std::string witness_out;
    std::string dump_encoding_path;
    bool trace = false;
    int threads = 1;

    app.add_option("--model", model_path, "model file (.hna)")->required();
    app.add_option("-k", k, "number of transitions to unroll");
    app.add_option("-M", max_delay, "upper bound on each step's duration");
    app.add_option("--delta", delta, "satisfiability tolerance");
    app.add_option("--mode", mode_name, "search mode")
        ->check(CLI::IsMember({"plain", "heuristic", "heuristic-learn"}));
    app.add_option("--n-flow-steps", n_flow_steps, "slabs per flow enclosure");
    app.add_option("--max-boxes", max_boxes, "box budget per full theory check");
    app.add_option("--timeout", timeout, "wall-clock limit in seconds (0 = none)");
    app.add_option("--witness-out", witness_out, "write the witness run here");
    app.add_option("--dump-encoding", dump_encoding_path,
                   "write the unrolled encoding here and continue");
    app.add_flag("--trace", trace, "log solver events to standard error");
    app.add_option("--threads", threads, "worker threads (currently always 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    hyra::ModelDocument doc;
    try {
        doc = hyra::parse_model_file(model_path);
    } catch (const hyra::SyntaxError& e) {
        std::cerr << "error: " << model_path << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const hyra::SemanticError& e) {
        std::cerr << "error: " << model_path << ":\n";
        for (const auto& d : e.diags) std::cerr << "  " << d.str() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    hyra::SolverConfig config;
    if (mode_name == "plain")
        config.mode = hyra::SolveMode::Plain;
    else if (mode_name == "heuristic")
        config.mode = hyra::SolveMode::Heuristic;
    else
        config.mode = hyra::SolveMode::HeuristicLearn;
    config.delta = delta.value_or(doc.default_delta);
    config.n_flow_steps = n_flow_steps;
    config.max_boxes = max_boxes;
    config.timeout_seconds = timeout;
    if (trace) config.trace = [](const std::string& msg) { std::cerr << "[trace] " << msg << "\n"; };
    if (threads != 1 && trace)
        std::cerr << "[trace] --threads " << threads << " requested; running with 1\n";

    const int steps = k.value_or(doc.default_k);
    const double m_bound = max_delay.value_or(doc.default_max_delay);

    try {
        if (!dump_encoding_path.empty()) {
            hyra::ClauseDB db =
                hyra::encode(doc.network, doc.goal, steps, m_bound);
            std::ofstream out(dump_encoding_path);
            if (!out) {
                std::cerr << "error: cannot write " << dump_encoding_path << "\n";
                return kExitUsage;
            }
            out << hyra::dump_encoding(db);
        }

        hyra::SolveResult result =
            hyra::hnsolve(doc.network, doc.goal, steps, m_bound, config);

        switch (result.verdict) {
            case hyra::Verdict::DeltaSat: {
                std::cout << "verdict: delta-sat\n";
                std::cout << "runs-generated: " << result.stats.runs_generated << "\n";
                std::cout << "learned-clauses: " << result.stats.learned_clauses << "\n";
                std::cout << "theory-checks: " << result.stats.icp.checks << "\n";
                std::cout << "boxes-explored: " << result.stats.icp.boxes_explored
                          << "\n";
                if (!witness_out.empty()) {
                    std::ofstream out(witness_out);
                    if (!out) {
                        std::cerr << "error: cannot write " << witness_out << "\n";
                        return kExitUsage;
                    }
                    out << hyra::serialize_witness(result.witness);
                }
                return kExitSat;
            }
            case hyra::Verdict::Unsat:
                std::cout << "verdict: unsat\n";
                std::cout << "runs-generated: " << result.stats.runs_generated << "\n";
                std::cout << "learned-clauses: " << result.stats.learned_clauses << "\n";
                return kExitUnsat;
            case hyra::Verdict::Unknown:
                std::cout << "verdict: unknown\n";
                return kExitUnknown;
        }
    } catch (const hyra::EncodingOverflowError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnknown;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnknown;
    }
    return kExitUnknown;
}
