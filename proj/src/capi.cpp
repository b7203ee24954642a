#include "dualsynth.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <string>

#include <spdlog/spdlog.h>

#include "engine.hpp"
#include "errors.hpp"
#include "exports.hpp"
#include "problem_io.hpp"

using namespace dualsynth;

struct ds_problem {
    engine::Problem problem;
};

struct ds_result {
    engine::Problem problem;
    engine::Verdict verdict;
};

struct ds_trace {
    engine::Execution execution;
    std::string csv;
};

struct ds_report {
    io::Report report;
};

namespace {

thread_local std::string last_error;

void init_logging() {
    static std::once_flag once;
    std::call_once(once, [] {
        const char* level = std::getenv("DUALSYNTH_LOG");
        spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
    });
}

template <class Fn>
ds_status guarded(Fn&& fn) {
    init_logging();
    try {
        fn();
        last_error.clear();
        return DS_OK;
    } catch (const RefusalError& e) {
        last_error = e.what();
        return DS_ERR_REFUSED;
    } catch (const InputError& e) {
        last_error = e.what();
        return DS_ERR_INPUT;
    } catch (const InternalError& e) {
        last_error = std::string("internal: ") + e.what();
        return DS_ERR_INTERNAL;
    } catch (const std::filesystem::filesystem_error& e) {
        last_error = e.what();
        return DS_ERR_IO;
    } catch (const std::invalid_argument& e) {
        last_error = e.what();
        return DS_ERR_INPUT;
    } catch (const std::runtime_error& e) {
        last_error = e.what();
        return DS_ERR_IO;
    } catch (const std::exception& e) {
        last_error = std::string("internal: ") + e.what();
        return DS_ERR_INTERNAL;
    }
}

ds_status argument_error(const char* what) {
    last_error = what;
    return DS_ERR_ARGUMENT;
}

ds_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
    if (needed) *needed = s.size() + 1;
    if (!buf || cap < s.size() + 1) {
        if (!buf && cap == 0 && needed) return DS_OK;
        last_error = "buffer too small: need " + std::to_string(s.size() + 1) + " bytes";
        return DS_ERR_BUFFER;
    }
    std::memcpy(buf, s.c_str(), s.size() + 1);
    return DS_OK;
}

}  // namespace

extern "C" {

void ds_options_init(ds_options* opts) {
    if (!opts) return;
    opts->m = 0;
    opts->max_iters = 0;
    opts->min_cell = -1.0;
    opts->threads = 1;
    opts->rebuild_check = 0;
}

const char* ds_last_error(void) { return last_error.c_str(); }

const char* ds_version(void) { return "0.1.0"; }

ds_status ds_problem_load_file(const char* path, ds_problem** out) {
    if (!path || !out) return argument_error("null argument");
    *out = nullptr;
    return guarded([&] {
        if (!std::filesystem::exists(path)) throw std::runtime_error(std::string("cannot open '") + path + "'");
        *out = new ds_problem{io::load_problem_file(path)};
    });
}

ds_status ds_problem_load_string(const char* json, ds_problem** out) {
    if (!json || !out) return argument_error("null argument");
    *out = nullptr;
    return guarded([&] { *out = new ds_problem{io::parse_problem(json)}; });
}

void ds_problem_free(ds_problem* p) { delete p; }

ds_status ds_problem_canonical_json(const ds_problem* p, char* buf, size_t cap, size_t* needed) {
    if (!p) return argument_error("null problem");
    std::string s;
    const ds_status st = guarded([&] { s = io::canonical_json(p->problem); });
    return st == DS_OK ? copy_out(s, buf, cap, needed) : st;
}

ds_status ds_problem_hash(const ds_problem* p, char* buf, size_t cap, size_t* needed) {
    if (!p) return argument_error("null problem");
    std::string s;
    const ds_status st = guarded([&] { s = io::problem_hash(p->problem); });
    return st == DS_OK ? copy_out(s, buf, cap, needed) : st;
}

ds_status ds_synthesize(const ds_problem* p, const ds_options* opts, ds_result** out) {
    if (!p || !out) return argument_error("null argument");
    *out = nullptr;
    return guarded([&] {
        engine::Options o = p->problem.options;
        if (opts) {
            if (opts->m != 0) o.m = opts->m;
            if (opts->max_iters != 0) o.max_iters = opts->max_iters;
            if (opts->min_cell >= 0.0) o.min_cell = opts->min_cell;
            o.threads = opts->threads == 0 ? 1 : opts->threads;
            o.rebuild_check = opts->rebuild_check != 0;
        }
        auto r = std::make_unique<ds_result>();
        r->problem = p->problem;
        r->verdict = engine::run(r->problem, o);
        *out = r.release();
    });
}

ds_outcome ds_result_outcome(const ds_result* r) {
    if (!r) return DS_UNKNOWN;
    switch (r->verdict.outcome) {
        case engine::Outcome::Realizable: return DS_REALIZABLE;
        case engine::Outcome::Unrealizable: return DS_UNREALIZABLE;
        case engine::Outcome::Unknown: break;
    }
    return DS_UNKNOWN;
}

int ds_result_iterations(const ds_result* r) { return r ? r->verdict.iterations : 0; }

ds_status ds_result_verdict_json(const ds_result* r, char* buf, size_t cap, size_t* needed) {
    if (!r) return argument_error("null result");
    std::string s;
    const ds_status st = guarded([&] { s = io::verdict_json(r->verdict, io::problem_hash(r->problem)); });
    return st == DS_OK ? copy_out(s, buf, cap, needed) : st;
}

ds_status ds_result_controller_json(const ds_result* r, char* buf, size_t cap, size_t* needed) {
    if (!r) return argument_error("null result");
    if (!r->verdict.controller) {
        last_error = std::string("no controller: outcome is ") + engine::to_string(r->verdict.outcome);
        return DS_ERR_REFUSED;
    }
    std::string s;
    const ds_status st = guarded([&] { s = io::controller_json(*r->verdict.controller); });
    return st == DS_OK ? copy_out(s, buf, cap, needed) : st;
}

ds_status ds_result_write_artifacts(const ds_result* r, const char* dir, int with_fts) {
    if (!r || !dir) return argument_error("null argument");
    return guarded([&] {
        io::ArtifactOptions opts;
        opts.fts = with_fts != 0;
        io::write_artifacts(dir, r->verdict, r->problem, opts);
    });
}

void ds_result_free(ds_result* r) { delete r; }

ds_status ds_simulate(const ds_problem* p, const char* controller_json, const double* s0, size_t s0_len,
                      const uint32_t* env, size_t env_len, int steps, ds_trace** out) {
    if (!p || !controller_json || !s0 || !out) return argument_error("null argument");
    if (!env && env_len) return argument_error("null environment trace with nonzero length");
    *out = nullptr;
    return guarded([&] {
        const engine::ContinuousController c = io::parse_controller(controller_json);
        if (c.problem_hash != io::problem_hash(p->problem))
            throw RefusalError("controller was synthesized for a different problem (hash mismatch)");
        std::vector<std::size_t> trace(env, env + env_len);
        auto t = std::make_unique<ds_trace>();
        t->execution = engine::simulate(c, p->problem.sys, trace, std::span<const double>(s0, s0_len), steps);
        t->csv = io::trace_csv(t->execution, c.env_names, p->problem.sys.input_dim());
        *out = t.release();
    });
}

size_t ds_trace_length(const ds_trace* t) { return t ? t->execution.rows.size() : 0; }

size_t ds_trace_state(const ds_trace* t, size_t row, double* out, size_t n) {
    if (!t || row >= t->execution.rows.size()) return 0;
    const auto& s = t->execution.rows[row].s;
    for (size_t k = 0; k < n && k < s.size() && out; ++k) out[k] = s[k];
    return s.size();
}

ds_status ds_trace_csv(const ds_trace* t, char* buf, size_t cap, size_t* needed) {
    if (!t) return argument_error("null trace");
    return copy_out(t->csv, buf, cap, needed);
}

void ds_trace_free(ds_trace* t) { delete t; }

ds_status ds_report_load(const char* run_dir, ds_report** out) {
    if (!run_dir || !out) return argument_error("null argument");
    *out = nullptr;
    return guarded([&] { *out = new ds_report{io::make_report(run_dir)}; });
}

int ds_report_partial(const ds_report* r) { return r && r->report.partial ? 1 : 0; }

ds_status ds_report_json(const ds_report* r, char* buf, size_t cap, size_t* needed) {
    if (!r) return argument_error("null report");
    return copy_out(r->report.json, buf, cap, needed);
}

ds_status ds_report_text(const ds_report* r, char* buf, size_t cap, size_t* needed) {
    if (!r) return argument_error("null report");
    return copy_out(r->report.text, buf, cap, needed);
}

void ds_report_free(ds_report* r) { delete r; }

}  // extern "C"
