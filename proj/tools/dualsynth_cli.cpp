// dualsynth command-line front end. Talks to the library only through the C API.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dualsynth.h"
#include "json.hpp"

namespace {

enum Exit { kRealizable = 0, kUnrealizable = 1, kUnknown = 2, kInputError = 3, kRefused = 4, kInternal = 5 };

int exit_for(ds_status st) {
    switch (st) {
        case DS_OK: return 0;
        case DS_ERR_REFUSED: return kRefused;
        case DS_ERR_INTERNAL: return kInternal;
        default: return kInputError;
    }
}

int fail(ds_status st) {
    std::cerr << "error: " << ds_last_error() << "\n";
    return exit_for(st);
}

template <class Fn>
std::string fetch(Fn&& fn, ds_status* status) {
    size_t needed = 0;
    *status = fn(nullptr, 0, &needed);
    if (*status != DS_OK) return {};
    std::string out(needed, '\0');
    *status = fn(out.data(), out.size(), &needed);
    if (*status != DS_OK) return {};
    out.resize(needed - 1);
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct ProblemHandle {
    ds_problem* p = nullptr;
    ~ProblemHandle() { ds_problem_free(p); }
};

int cmd_synthesize(const std::string& file, const ds_options& opts, const std::string& out_dir, bool fts) {
    ProblemHandle h;
    if (ds_status st = ds_problem_load_file(file.c_str(), &h.p); st != DS_OK) return fail(st);
    ds_result* r = nullptr;
    if (ds_status st = ds_synthesize(h.p, &opts, &r); st != DS_OK) return fail(st);
    const ds_status wst = ds_result_write_artifacts(r, out_dir.c_str(), fts ? 1 : 0);
    const ds_outcome oc = ds_result_outcome(r);
    const int iters = ds_result_iterations(r);
    ds_status vst;
    const std::string verdict = fetch([&](char* b, size_t c, size_t* n) { return ds_result_verdict_json(r, b, c, n); }, &vst);
    ds_result_free(r);
    if (wst != DS_OK) return fail(wst);

    const auto doc = nlohmann::json::parse(verdict);
    std::cout << doc["outcome"].get<std::string>() << " after " << iters << " iteration(s)";
    if (!doc["reason"].is_null()) std::cout << " (budget: " << doc["reason"].get<std::string>() << ")";
    std::cout << "\n";
    for (const auto& w : doc["witness"]) {
        std::cout << "witness:";
        for (const auto& d : w) std::cout << " [" << d[0] << "," << d[1] << "]";
        std::cout << "\n";
    }
    std::cout << "artifacts: " << out_dir << "\n";
    switch (oc) {
        case DS_REALIZABLE: return kRealizable;
        case DS_UNREALIZABLE: return kUnrealizable;
        default: return kUnknown;
    }
}

// Environment alphabet as listed in the canonical problem: variable 0 varies fastest.
struct Alphabet {
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> values;
    size_t size() const {
        size_t n = 1;
        for (const auto& v : values) n *= v.size();
        return n;
    }
    uint32_t encode(const std::vector<size_t>& idx) const {
        size_t code = 0, stride = 1;
        for (size_t k = 0; k < idx.size(); ++k) {
            code += idx[k] * stride;
            stride *= values[k].size();
        }
        return static_cast<uint32_t>(code);
    }
};

bool parse_env_script(const std::string& text, const Alphabet& a, std::vector<uint32_t>& out, std::string& err) {
    std::vector<size_t> cur(a.names.size(), 0);
    std::istringstream in(text);
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line.erase(0, line.find_first_not_of(" \t\r"));
        line.erase(line.find_last_not_of(" \t\r") + 1);
        if (line.empty()) continue;
        std::istringstream items(line);
        for (std::string item; std::getline(items, item, ',');) {
            item.erase(0, item.find_first_not_of(" \t"));
            item.erase(item.find_last_not_of(" \t") + 1);
            if (item == "-") continue;
            const auto eq = item.find('=');
            if (eq == std::string::npos) {
                err = "line " + std::to_string(lineno) + ": expected name=value, got '" + item + "'";
                return false;
            }
            const std::string name = item.substr(0, eq), value = item.substr(eq + 1);
            size_t var = a.names.size();
            for (size_t k = 0; k < a.names.size(); ++k)
                if (a.names[k] == name) var = k;
            if (var == a.names.size()) {
                err = "line " + std::to_string(lineno) + ": unknown environment variable '" + name + "'";
                return false;
            }
            size_t v = a.values[var].size();
            for (size_t k = 0; k < a.values[var].size(); ++k)
                if (a.values[var][k] == value) v = k;
            if (v == a.values[var].size()) {
                err = "line " + std::to_string(lineno) + ": '" + name + "' has no value '" + value + "'";
                return false;
            }
            cur[var] = v;
        }
        out.push_back(a.encode(cur));
    }
    return true;
}

int cmd_simulate(const std::string& problem_file, const std::string& controller_file, int steps,
                 const std::string& env_script, const std::string& random_seed, const std::string& s0_text,
                 const std::string& out_path) {
    ProblemHandle h;
    if (ds_status st = ds_problem_load_file(problem_file.c_str(), &h.p); st != DS_OK) return fail(st);
    ds_status st;
    const std::string canon = fetch([&](char* b, size_t c, size_t* n) { return ds_problem_canonical_json(h.p, b, c, n); }, &st);
    if (st != DS_OK) return fail(st);
    const auto doc = nlohmann::json::parse(canon);

    Alphabet alpha;
    for (const auto& v : doc["environment"]) {
        alpha.names.push_back(v["name"]);
        alpha.values.push_back(v["values"].get<std::vector<std::string>>());
    }
    std::vector<uint32_t> env;
    if (!env_script.empty()) {
        const std::string text = slurp(env_script);
        if (text.empty() && !std::ifstream(env_script)) {
            std::cerr << "error: cannot open '" << env_script << "'\n";
            return kInputError;
        }
        std::string err;
        if (!parse_env_script(text, alpha, env, err)) {
            std::cerr << "error: " << env_script << ": " << err << "\n";
            return kInputError;
        }
    } else {
        std::mt19937_64 rng(std::stoull(random_seed));
        std::uniform_int_distribution<size_t> pick(0, alpha.size() - 1);
        for (int t = 0; t <= steps; ++t) env.push_back(static_cast<uint32_t>(pick(rng)));
    }

    std::vector<double> s0;
    if (s0_text.empty()) {
        for (const auto& d : doc["initial_set"]) s0.push_back(0.5 * (d[0].get<double>() + d[1].get<double>()));
    } else {
        std::istringstream in(s0_text);
        for (std::string x; std::getline(in, x, ',');) {
            try {
                s0.push_back(std::stod(x));
            } catch (const std::exception&) {
                std::cerr << "error: --s0: '" << x << "' is not a number\n";
                return kInputError;
            }
        }
    }

    const std::string controller = slurp(controller_file);
    if (controller.empty()) {
        std::cerr << "error: cannot read controller '" << controller_file << "'\n";
        return kInputError;
    }
    ds_trace* trace = nullptr;
    st = ds_simulate(h.p, controller.c_str(), s0.data(), s0.size(), env.empty() ? nullptr : env.data(), env.size(),
                     steps, &trace);
    if (st != DS_OK) return fail(st);
    const std::string csv = fetch([&](char* b, size_t c, size_t* n) { return ds_trace_csv(trace, b, c, n); }, &st);
    ds_trace_free(trace);
    if (st != DS_OK) return fail(st);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        out << csv;
        if (!out) {
            std::cerr << "error: cannot write '" << out_path << "'\n";
            return kInputError;
        }
        std::cout << "steps: " << steps << "\ntrace: " << out_path << "\n";
    }
    return 0;
}

int cmd_report(const std::string& dir, bool as_json) {
    ds_report* r = nullptr;
    if (ds_status st = ds_report_load(dir.c_str(), &r); st != DS_OK) return fail(st);
    ds_status st;
    const std::string text = fetch(
        [&](char* b, size_t c, size_t* n) { return as_json ? ds_report_json(r, b, c, n) : ds_report_text(r, b, c, n); },
        &st);
    if (ds_report_partial(r)) std::cerr << "warning: partial report for " << dir << "\n";
    ds_report_free(r);
    if (st != DS_OK) return fail(st);
    std::cout << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Controller synthesis for affine systems against GR(1) specifications"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ds_version()));

    ds_options opts;
    ds_options_init(&opts);
    std::string problem, out_dir = "dualsynth_run";
    bool fts = false, rebuild = false;
    auto* syn = app.add_subcommand("synthesize", "Decide realizability and build a controller");
    syn->add_option("file", problem, "Problem JSON")->required();
    syn->add_option("--m", opts.m, "Split factor for maybe regions (default 2^n)")->check(CLI::Range(2, 1 << 20));
    syn->add_option("--max-iters", opts.max_iters, "Refinement budget (default 20)")->check(CLI::PositiveNumber);
    syn->add_option("--min-cell", opts.min_cell, "Smallest cell side before giving up (default 1e-3)")
        ->check(CLI::NonNegativeNumber);
    syn->add_option("--threads", opts.threads, "Reachability worker threads")->check(CLI::Range(1u, 256u));
    syn->add_flag("--rebuild-check", rebuild, "Re-solve every iteration from scratch and compare");
    syn->add_flag("--fts", fts, "Also export the final abstraction as fts.json and fts.dot");
    syn->add_option("--out", out_dir, "Artifact directory");

    std::string controller, env_script, seed, s0, trace_out;
    int steps = 0;
    auto* sim = app.add_subcommand("simulate", "Run a synthesized controller");
    sim->add_option("problem", problem, "Problem JSON")->required();
    sim->add_option("controller", controller, "controller.json from synthesize")->required();
    sim->add_option("--steps", steps, "Number of steps")->required()->check(CLI::NonNegativeNumber);
    auto* script_opt = sim->add_option("--env-script", env_script, "One line of name=value,... per step");
    auto* random_opt = sim->add_option("--random", seed, "Uniformly random environment with this seed")
                           ->check(CLI::NonNegativeNumber);
    script_opt->excludes(random_opt);
    sim->add_option("--s0", s0, "Initial state x,y,... (default: center of the initial set)");
    sim->add_option("--out", trace_out, "Trace CSV path (default: stdout)");

    std::string run_dir;
    bool report_json = false;
    auto* rep = app.add_subcommand("report", "Summarize a run directory");
    rep->add_option("run-dir", run_dir, "Directory written by synthesize")->required();
    rep->add_flag("--json", report_json, "Machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kInputError;
    }

    if (syn->parsed()) {
        opts.rebuild_check = rebuild ? 1 : 0;
        return cmd_synthesize(problem, opts, out_dir, fts);
    }
    if (sim->parsed()) {
        if (env_script.empty() && seed.empty()) {
            std::cerr << "error: simulate needs --env-script FILE or --random SEED\n";
            return kInputError;
        }
        return cmd_simulate(problem, controller, steps, env_script, seed, s0, trace_out);
    }
    return cmd_report(run_dir, report_json);
}
