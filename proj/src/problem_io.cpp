#include "problem_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include "errors.hpp"
#include "json.hpp"

namespace dualsynth::io {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << contents;
    if (!out) throw std::runtime_error("error writing '" + path + "'");
}

namespace {

// Line of every value in a syntactically valid document, keyed by JSON pointer.
class LineIndex {
public:
    explicit LineIndex(std::string_view text) : s_(text) {
        skip_ws();
        value("");
    }

    int line_of(const std::string& pointer) const {
        std::string p = pointer;
        while (true) {
            if (auto it = lines_.find(p); it != lines_.end()) return it->second;
            const auto cut = p.rfind('/');
            if (cut == std::string::npos) return 1;
            p = p.substr(0, cut);
        }
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) {
            if (s_[pos_] == '\n') ++line_;
            ++pos_;
        }
    }

    std::string string_token() {
        std::string out;
        ++pos_;  // opening quote
        while (pos_ < s_.size() && s_[pos_] != '"') {
            if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) {
                out += s_[pos_ + 1];
                pos_ += 2;
                continue;
            }
            out += s_[pos_++];
        }
        ++pos_;
        return out;
    }

    static std::string escape(const std::string& key) {
        std::string out;
        for (char c : key) {
            if (c == '~') out += "~0";
            else if (c == '/') out += "~1";
            else out += c;
        }
        return out;
    }

    void value(const std::string& path) {
        lines_.emplace(path, line_);
        if (pos_ >= s_.size()) return;
        const char c = s_[pos_];
        if (c == '{') {
            ++pos_;
            skip_ws();
            while (pos_ < s_.size() && s_[pos_] != '}') {
                const std::string key = string_token();
                skip_ws();
                ++pos_;  // colon
                skip_ws();
                value(path + "/" + escape(key));
                skip_ws();
                if (pos_ < s_.size() && s_[pos_] == ',') ++pos_;
                skip_ws();
            }
            ++pos_;
        } else if (c == '[') {
            ++pos_;
            skip_ws();
            for (int k = 0; pos_ < s_.size() && s_[pos_] != ']'; ++k) {
                value(path + "/" + std::to_string(k));
                skip_ws();
                if (pos_ < s_.size() && s_[pos_] == ',') ++pos_;
                skip_ws();
            }
            ++pos_;
        } else if (c == '"') {
            string_token();
        } else {
            while (pos_ < s_.size() && std::string_view(",]} \t\r\n").find(s_[pos_]) == std::string_view::npos) ++pos_;
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::map<std::string, int> lines_;
};

class Reader {
public:
    Reader(const json& doc, const LineIndex& lines, std::string origin)
        : doc_(doc), lines_(lines), origin_(std::move(origin)) {}

    [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
        throw InputError(origin_ + ":" + std::to_string(lines_.line_of(ptr)) + ": " + (ptr.empty() ? "/" : ptr) +
                         ": " + msg);
    }

    const json& at(const json& obj, const std::string& ptr, const char* key) const {
        if (!obj.contains(key)) fail(ptr, std::string("missing required field '") + key + "'");
        return obj.at(key);
    }

    void expect_object(const json& j, const std::string& ptr, std::initializer_list<const char*> allowed) const {
        if (!j.is_object()) fail(ptr, "expected an object");
        for (const auto& [k, v] : j.items()) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || k == a;
            if (!ok) fail(ptr + "/" + k, "unknown field '" + k + "'");
        }
    }

    double number(const json& j, const std::string& ptr) const {
        if (!j.is_number()) fail(ptr, "expected a number");
        const double v = j.get<double>();
        if (!std::isfinite(v)) fail(ptr, "expected a finite number");
        return v;
    }

    std::string string(const json& j, const std::string& ptr) const {
        if (!j.is_string()) fail(ptr, "expected a string");
        return j.get<std::string>();
    }

    std::vector<std::string> strings(const json& j, const std::string& ptr) const {
        if (!j.is_array()) fail(ptr, "expected an array of strings");
        std::vector<std::string> out;
        for (std::size_t k = 0; k < j.size(); ++k) out.push_back(string(j[k], ptr + "/" + std::to_string(k)));
        return out;
    }

    geometry::Matrix matrix(const json& j, const std::string& ptr) const {
        if (!j.is_array() || j.empty()) fail(ptr, "expected a nonempty array of rows");
        std::vector<std::vector<double>> rows;
        for (std::size_t r = 0; r < j.size(); ++r) {
            const std::string rp = ptr + "/" + std::to_string(r);
            if (!j[r].is_array() || j[r].empty()) fail(rp, "expected a nonempty array of numbers");
            std::vector<double> row;
            for (std::size_t c = 0; c < j[r].size(); ++c) row.push_back(number(j[r][c], rp + "/" + std::to_string(c)));
            if (!rows.empty() && row.size() != rows.front().size())
                fail(rp, "row has " + std::to_string(row.size()) + " entries, expected " +
                             std::to_string(rows.front().size()));
            rows.push_back(std::move(row));
        }
        return geometry::Matrix::from_rows(rows);
    }

    geometry::Box box(const json& j, const std::string& ptr) const {
        if (!j.is_array() || j.empty()) fail(ptr, "expected a box: a nonempty array of [lo, hi] pairs");
        geometry::Vector lo, hi;
        for (std::size_t d = 0; d < j.size(); ++d) {
            const std::string dp = ptr + "/" + std::to_string(d);
            if (!j[d].is_array() || j[d].size() != 2) fail(dp, "expected a [lo, hi] pair");
            lo.push_back(number(j[d][0], dp + "/0"));
            hi.push_back(number(j[d][1], dp + "/1"));
            if (lo.back() > hi.back()) fail(dp, "lower bound exceeds upper bound");
        }
        return {lo, hi};
    }

    engine::Problem problem() const {
        engine::Problem p;
        expect_object(doc_, "", {"dynamics", "input_set", "domain", "initial_set", "propositions", "environment",
                                 "spec", "options"});
        const json& dyn = at(doc_, "", "dynamics");
        expect_object(dyn, "/dynamics", {"A", "B"});
        p.sys.A = matrix(at(dyn, "/dynamics", "A"), "/dynamics/A");
        p.sys.B = matrix(at(dyn, "/dynamics", "B"), "/dynamics/B");
        if (p.sys.A.rows() != p.sys.A.cols()) fail("/dynamics/A", "A must be square");
        if (p.sys.B.rows() != p.sys.A.rows()) fail("/dynamics/B", "B must have as many rows as A");
        p.sys.input_set = box(at(doc_, "", "input_set"), "/input_set");
        if (p.sys.input_set.dim() != p.sys.B.cols()) fail("/input_set", "dimension must equal the columns of B");
        p.sys.domain = box(at(doc_, "", "domain"), "/domain");
        if (p.sys.domain.dim() != p.sys.A.rows()) fail("/domain", "dimension must equal the rows of A");
        p.sys.initial_set = box(at(doc_, "", "initial_set"), "/initial_set");
        if (p.sys.initial_set.dim() != p.sys.A.rows()) fail("/initial_set", "dimension must equal the rows of A");
        if (!p.sys.domain.contains(p.sys.initial_set)) fail("/initial_set", "initial_set must lie inside domain");

        if (doc_.contains("propositions")) {
            const json& props = doc_["propositions"];
            if (!props.is_array()) fail("/propositions", "expected an array");
            for (std::size_t k = 0; k < props.size(); ++k) {
                const std::string pp = "/propositions/" + std::to_string(k);
                expect_object(props[k], pp, {"name", "box"});
                geometry::Proposition prop{string(at(props[k], pp, "name"), pp + "/name"),
                                           box(at(props[k], pp, "box"), pp + "/box")};
                if (prop.region.dim() != p.sys.A.rows()) fail(pp + "/box", "dimension must equal the rows of A");
                if (!p.sys.domain.contains(prop.region)) fail(pp + "/box", "proposition must lie inside domain");
                p.sys.propositions.push_back(std::move(prop));
            }
        }
        if (doc_.contains("environment")) {
            const json& env = doc_["environment"];
            if (!env.is_array()) fail("/environment", "expected an array");
            std::vector<abstraction::EnvAlphabet::Variable> vars;
            for (std::size_t k = 0; k < env.size(); ++k) {
                const std::string vp = "/environment/" + std::to_string(k);
                expect_object(env[k], vp, {"name", "values"});
                abstraction::EnvAlphabet::Variable var{string(at(env[k], vp, "name"), vp + "/name"),
                                                       strings(at(env[k], vp, "values"), vp + "/values")};
                if (var.values.empty()) fail(vp + "/values", "needs at least one value");
                vars.push_back(std::move(var));
            }
            p.env = abstraction::EnvAlphabet(std::move(vars));
        }

        const json& spec = at(doc_, "", "spec");
        expect_object(spec, "/spec", {"init", "assumptions", "guarantees", "responses", "ltl"});
        if (spec.contains("init")) p.spec.init = string(spec["init"], "/spec/init");
        if (spec.contains("ltl")) p.spec.ltl = string(spec["ltl"], "/spec/ltl");
        if (spec.contains("assumptions")) p.spec.assumptions = strings(spec["assumptions"], "/spec/assumptions");
        if (spec.contains("guarantees")) p.spec.guarantees = strings(spec["guarantees"], "/spec/guarantees");
        if (spec.contains("responses")) {
            const json& rs = spec["responses"];
            if (!rs.is_array()) fail("/spec/responses", "expected an array");
            for (std::size_t k = 0; k < rs.size(); ++k) {
                const std::string rp = "/spec/responses/" + std::to_string(k);
                expect_object(rs[k], rp, {"trigger", "response"});
                p.spec.responses.push_back({string(at(rs[k], rp, "trigger"), rp + "/trigger"),
                                            string(at(rs[k], rp, "response"), rp + "/response")});
            }
        }

        if (doc_.contains("options")) {
            const json& o = doc_["options"];
            expect_object(o, "/options", {"m", "max_iters", "min_cell", "seed"});
            auto integer = [&](const char* key, std::int64_t lo) -> std::int64_t {
                const std::string ptr = std::string("/options/") + key;
                if (!o[key].is_number_integer()) fail(ptr, "expected an integer");
                const std::int64_t v = o[key].get<std::int64_t>();
                if (v < lo) fail(ptr, "must be at least " + std::to_string(lo));
                return v;
            };
            if (o.contains("m")) p.options.m = static_cast<int>(integer("m", 0));
            if (o.contains("max_iters")) p.options.max_iters = static_cast<int>(integer("max_iters", 1));
            if (o.contains("seed")) p.options.seed = static_cast<std::uint64_t>(integer("seed", 0));
            if (o.contains("min_cell")) {
                p.options.min_cell = number(o["min_cell"], "/options/min_cell");
                if (p.options.min_cell < 0) fail("/options/min_cell", "must be nonnegative");
            }
            if (p.options.m == 1) fail("/options/m", "must be 0 (default) or at least 2");
        }
        return p;
    }

private:
    const json& doc_;
    const LineIndex& lines_;
    std::string origin_;
};

std::pair<int, int> line_col(std::string_view text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

json parse_json(std::string_view text, const std::string& origin) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
        const auto [line, col] = line_col(text, byte);
        std::string what = e.what();
        if (auto cut = what.find("; "); cut != std::string::npos) what = what.substr(cut + 2);
        throw InputError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
    }
}

json box_json(const geometry::Box& b) {
    json out = json::array();
    for (std::size_t d = 0; d < b.dim(); ++d) out.push_back({b.lower(d), b.upper(d)});
    return out;
}

}  // namespace

engine::Problem parse_problem(std::string_view text, const std::string& origin) {
    const json doc = parse_json(text, origin);
    const LineIndex lines(text);
    engine::Problem p = Reader(doc, lines, origin).problem();
    try {
        p.sys.validate();
    } catch (const InputError& e) {
        throw InputError(origin + ": " + e.what());
    }
    return p;
}

engine::Problem load_problem_file(const std::string& path) { return parse_problem(read_file(path), path); }

std::string canonical_json(const engine::Problem& p) {
    json props = json::array();
    for (const auto& prop : p.sys.propositions) props.push_back({{"name", prop.name}, {"box", box_json(prop.region)}});
    json env = json::array();
    for (const auto& v : p.env.variables()) env.push_back({{"name", v.name}, {"values", v.values}});
    json responses = json::array();
    for (const auto& r : p.spec.responses) responses.push_back({{"trigger", r.trigger}, {"response", r.response}});
    json spec = {{"init", p.spec.init},
                 {"assumptions", p.spec.assumptions},
                 {"guarantees", p.spec.guarantees},
                 {"responses", responses}};
    if (!p.spec.ltl.empty()) spec["ltl"] = p.spec.ltl;
    json doc = {{"dynamics", {{"A", p.sys.A.to_rows()}, {"B", p.sys.B.to_rows()}}},
                {"input_set", box_json(p.sys.input_set)},
                {"domain", box_json(p.sys.domain)},
                {"initial_set", box_json(p.sys.initial_set)},
                {"propositions", props},
                {"environment", env},
                {"spec", spec},
                {"options",
                 {{"m", p.options.m},
                  {"max_iters", p.options.max_iters},
                  {"min_cell", p.options.min_cell},
                  {"seed", p.options.seed}}}};
    return doc.dump(2) + "\n";
}

std::string problem_hash(const engine::Problem& p) {
    const std::string text = canonical_json(p);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw InternalError("SHA-256 computation failed");
    std::ostringstream os;
    for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[k]);
    return os.str();
}

std::string controller_json(const engine::ContinuousController& c) {
    json regions = json::array();
    std::vector<std::string> names;
    for (std::size_t k = 0; k < c.region_ids.size(); ++k) {
        names.push_back(partition::to_string(c.region_ids[k]));
        regions.push_back({{"index", k}, {"region_id", names.back()}, {"box", box_json(c.boxes[k])}});
    }
    json doc = {{"problem_hash", c.problem_hash},
                {"env", c.env_names},
                {"regions", regions},
                {"strategy", json::parse(gr1::strategy_json(c.automaton, names, c.env_names))},
                {"selector", {{"method", "max-margin LP"}, {"margin_cap", 0.5}, {"landing_tolerance", engine::kLandingTolerance}}}};
    return doc.dump(2) + "\n";
}

engine::ContinuousController parse_controller(std::string_view text, const std::string& origin) {
    const json doc = parse_json(text, origin);
    auto fail = [&](const std::string& msg) -> void { throw InputError(origin + ": " + msg); };
    engine::ContinuousController c;
    try {
        c.problem_hash = doc.at("problem_hash").get<std::string>();
        c.env_names = doc.at("env").get<std::vector<std::string>>();
        std::map<std::string, std::uint32_t> by_name;
        for (const auto& r : doc.at("regions")) {
            const std::string name = r.at("region_id").get<std::string>();
            partition::RegionId id;
            std::stringstream ss(name);
            for (std::string part; std::getline(ss, part, '.');) id.push_back(std::stoi(part));
            by_name[name] = static_cast<std::uint32_t>(c.region_ids.size());
            c.region_ids.push_back(id);
            geometry::Vector lo, hi;
            for (const auto& d : r.at("box")) {
                lo.push_back(d.at(0).get<double>());
                hi.push_back(d.at(1).get<double>());
            }
            c.boxes.emplace_back(lo, hi);
        }
        std::map<std::string, std::size_t> env_index;
        for (std::size_t e = 0; e < c.env_names.size(); ++e) env_index[c.env_names[e]] = e;
        auto& a = c.automaton;
        a.envs = c.env_names.size();
        const json& st = doc.at("strategy");
        for (const auto& m : st.at("memory_states")) {
            a.states.push_back({by_name.at(m.at("region").get<std::string>()), m.at("bits").get<std::uint32_t>(),
                                m.at("counter").get<std::uint32_t>()});
        }
        a.next.assign(a.states.size(), std::vector<std::int64_t>(a.envs, -1));
        a.letters.assign(a.states.size(), std::vector<gr1::Letter>(a.envs));
        for (const auto& t : st.at("transitions")) {
            const std::size_t s = t.at("memory").get<std::size_t>();
            const std::size_t e = env_index.at(t.at("env").get<std::string>());
            const std::int64_t n = t.at("next_memory").get<std::int64_t>();
            if (s >= a.states.size() || n < 0 || static_cast<std::size_t>(n) >= a.states.size())
                fail("transition refers to an unknown memory state");
            a.next[s][e] = n;
            if (t.contains("p")) {
                for (bool b : t.at("p").get<std::vector<bool>>()) a.letters[s][e].p.push_back(b);
                for (bool b : t.at("q").get<std::vector<bool>>()) a.letters[s][e].q.push_back(b);
            }
        }
        for (const auto& i : st.at("initial")) {
            const std::size_t s = i.get<std::size_t>();
            if (s >= a.states.size()) fail("initial memory state out of range");
            a.initial.push_back(s);
        }
    } catch (const json::exception& e) {
        throw InputError(origin + ": malformed controller: " + e.what());
    } catch (const std::out_of_range& e) {
        throw InputError(origin + ": malformed controller: unknown region or environment name");
    } catch (const std::invalid_argument& e) {
        throw InputError(origin + ": malformed controller: " + e.what());
    }
    return c;
}

}  // namespace dualsynth::io
