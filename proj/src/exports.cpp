#include "exports.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <regex>
#include <sstream>

#include "errors.hpp"
#include "json.hpp"
#include "problem_io.hpp"

namespace dualsynth::io {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json box_json(const geometry::Box& b) {
    json out = json::array();
    for (std::size_t d = 0; d < b.dim(); ++d) out.push_back({b.lower(d), b.upper(d)});
    return out;
}

json stats_json(const engine::IterationStats& s) {
    return {{"iteration", s.iteration},
            {"leaves", s.leaves},
            {"winning", s.winning},
            {"maybe", s.maybe},
            {"losing", s.losing},
            {"queries_issued", s.queries_issued},
            {"queries_saved", s.queries_saved},
            {"queries_naive", s.queries_naive},
            {"pess_edges", s.pess_edges},
            {"opt_edges", s.opt_edges},
            {"rebuild_checked", s.rebuild_checked},
            {"wall_ms", s.wall_ms}};
}

// "W" if every initial leaf is winning, "L" if any is losing, else "M".
std::string initial_status(const engine::IterationRecord& rec) {
    bool all_w = true;
    for (const auto& l : rec.leaves) {
        if (!l.initial) continue;
        if (l.status == partition::Status::Losing) return "L";
        if (l.status != partition::Status::Winning) all_w = false;
    }
    return all_w ? "W" : "M";
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

}  // namespace

std::string verdict_json(const engine::Verdict& v, const std::string& problem_hash) {
    json witness = json::array();
    for (const auto& b : v.witness) witness.push_back(box_json(b));
    json stats = json::array();
    for (const auto& rec : v.history) {
        json s = stats_json(rec.stats);
        s["initial_status"] = initial_status(rec);
        stats.push_back(std::move(s));
    }
    json winning = json::array(), losing = json::array();
    if (!v.history.empty()) {
        for (const auto& l : v.history.back().leaves) {
            if (l.status == partition::Status::Winning) winning.push_back(box_json(l.box));
            if (l.status == partition::Status::Losing) losing.push_back(box_json(l.box));
        }
    }
    json doc = {{"outcome", engine::to_string(v.outcome)},
                {"reason", v.reason.empty() ? json(nullptr) : json(v.reason)},
                {"iterations", v.iterations},
                {"problem_hash", problem_hash},
                {"witness", witness},
                {"winning_set", winning},
                {"losing_set", losing},
                {"stats", stats},
                {"controller", v.controller ? json("controller.json") : json(nullptr)}};
    return doc.dump(2) + "\n";
}

std::string partition_json(const engine::IterationRecord& rec) {
    json out = json::array();
    for (const auto& l : rec.leaves) {
        out.push_back({{"region_id", partition::to_string(l.id)},
                       {"box", box_json(l.box)},
                       {"status", partition::to_string(l.status)},
                       {"labels", l.labels},
                       {"initial", l.initial}});
    }
    return out.dump(2) + "\n";
}

std::string partition_svg(const engine::IterationRecord& rec, const geometry::ControlSystem& sys) {
    if (sys.state_dim() != 2) throw std::invalid_argument("SVG rendering needs a 2-D state space");
    const auto& dom = sys.domain;
    const double scale = 600.0 / std::max(dom.side(0), dom.side(1));
    const double W = dom.side(0) * scale, H = dom.side(1) * scale, pad = 10.0;
    auto X = [&](double x) { return pad + (x - dom.lower(0)) * scale; };
    auto Y = [&](double y) { return pad + (dom.upper(1) - y) * scale; };
    auto color = [](partition::Status s) {
        switch (s) {
            case partition::Status::Winning: return "#4caf50";
            case partition::Status::Maybe: return "#ffeb3b";
            case partition::Status::Losing: return "#f44336";
            case partition::Status::Unexplored: break;
        }
        return "#bdbdbd";
    };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W + 2 * pad << "\" height=\"" << H + 2 * pad
       << "\">\n";
    for (const auto& l : rec.leaves) {
        os << "  <rect data-region=\"" << partition::to_string(l.id) << "\" data-status=\""
           << partition::to_string(l.status) << "\" x=\"" << X(l.box.lower(0)) << "\" y=\"" << Y(l.box.upper(1))
           << "\" width=\"" << l.box.side(0) * scale << "\" height=\"" << l.box.side(1) * scale << "\" fill=\""
           << color(l.status) << "\" stroke=\"#333\" stroke-width=\"0.5\"/>\n";
    }
    const auto& init = sys.initial_set;
    os << "  <rect x=\"" << X(init.lower(0)) << "\" y=\"" << Y(init.upper(1)) << "\" width=\"" << init.side(0) * scale
       << "\" height=\"" << init.side(1) * scale
       << "\" fill=\"none\" stroke=\"#1a237e\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>\n";
    for (const auto& p : sys.propositions) {
        const auto c = p.region.center();
        os << "  <text x=\"" << X(c[0]) << "\" y=\"" << Y(c[1])
           << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">" << p.name << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string trace_csv(const engine::Execution& ex, const std::vector<std::string>& env_names, std::size_t input_dim) {
    std::ostringstream os;
    os.precision(17);
    const std::size_t n = ex.rows.empty() ? 0 : ex.rows.front().s.size();
    os << "t";
    for (std::size_t d = 0; d < n; ++d) os << ",s_" << d;
    os << ",e";
    for (std::size_t d = 0; d < input_dim; ++d) os << ",u_" << d;
    os << ",region,memory\n";
    for (const auto& r : ex.rows) {
        os << r.t;
        for (double x : r.s) os << "," << x;
        os << ",\"" << env_names.at(r.env) << "\"";
        for (std::size_t d = 0; d < input_dim; ++d) {
            os << ",";
            if (r.u) os << (*r.u)[d];
        }
        os << "," << partition::to_string(r.region) << "," << r.memory << "\n";
    }
    return os.str();
}

std::vector<std::string> write_artifacts(const std::string& dir, const engine::Verdict& v, const engine::Problem& p,
                                         const ArtifactOptions& opts) {
    fs::create_directories(dir);
    std::vector<std::string> written;
    auto put = [&](const std::string& name, const std::string& text) {
        const std::string path = (fs::path(dir) / name).string();
        write_file(path, text);
        written.push_back(path);
    };
    const std::string hash = problem_hash(p);
    put("verdict.json", verdict_json(v, hash));
    if (v.controller) put("controller.json", controller_json(*v.controller));
    for (const auto& rec : v.history) {
        const std::string i = std::to_string(rec.stats.iteration);
        put("partition_" + i + ".json", partition_json(rec));
        if (p.sys.state_dim() == 2) put("partition_" + i + ".svg", partition_svg(rec, p.sys));
    }
    if (opts.fts && v.abstraction && v.forest) {
        put("fts.json", abstraction::fts_json(*v.abstraction, *v.forest, p.env));
        put("fts.dot", abstraction::fts_dot(*v.abstraction, *v.forest, p.env));
    }
    return written;
}

Report make_report(const std::string& dir) {
    Report rep;
    if (!fs::is_directory(dir)) throw InputError("'" + dir + "' is not a directory");
    json rows = json::array();
    json outcome = nullptr;
    const fs::path vpath = fs::path(dir) / "verdict.json";
    bool have_verdict = false;
    if (fs::exists(vpath)) {
        try {
            const json v = json::parse(read_file(vpath.string()));
            outcome = v.at("outcome");
            rows = v.at("stats");
            have_verdict = true;
        } catch (const json::exception& e) {
            rep.warnings.push_back("verdict.json is unreadable: " + std::string(e.what()));
        }
    } else {
        rep.warnings.push_back("verdict.json is missing; run did not finish");
    }
    if (!have_verdict) {
        rep.partial = true;
        std::vector<std::pair<int, fs::path>> parts;
        const std::regex pat("partition_([0-9]+)\\.json");
        for (const auto& entry : fs::directory_iterator(dir)) {
            std::smatch m;
            const std::string name = entry.path().filename().string();
            if (std::regex_match(name, m, pat)) parts.emplace_back(std::stoi(m[1]), entry.path());
        }
        std::sort(parts.begin(), parts.end());
        for (const auto& [i, path] : parts) {
            try {
                const json leaves = json::parse(read_file(path.string()));
                std::size_t w = 0, mb = 0, l = 0;
                bool any_l = false, all_w = true;
                for (const auto& leaf : leaves) {
                    const std::string s = leaf.at("status");
                    const bool init = leaf.value("initial", false);
                    w += s == "winning";
                    mb += s == "maybe";
                    l += s == "losing";
                    if (init && s == "losing") any_l = true;
                    if (init && s != "winning") all_w = false;
                }
                rows.push_back({{"iteration", i},
                                {"leaves", leaves.size()},
                                {"winning", w},
                                {"maybe", mb},
                                {"losing", l},
                                {"queries_issued", nullptr},
                                {"queries_saved", nullptr},
                                {"queries_naive", nullptr},
                                {"wall_ms", nullptr},
                                {"initial_status", any_l ? "L" : all_w ? "W" : "M"}});
            } catch (const json::exception& e) {
                rep.warnings.push_back(path.filename().string() + " is unreadable: " + e.what());
            }
        }
        if (rows.empty()) throw InputError("'" + dir + "' contains no run artifacts");
    }

    json doc = {{"outcome", outcome}, {"partial", rep.partial}, {"rows", rows}, {"warnings", rep.warnings}};
    rep.json = doc.dump(2) + "\n";

    auto cell = [](const json& j) -> std::string {
        if (j.is_null()) return "-";
        if (j.is_number_float()) return fmt("%.1f", j.get<double>());
        if (j.is_string()) return j.get<std::string>();
        return j.dump();
    };
    const std::vector<std::pair<const char*, const char*>> cols = {
        {"iter", "iteration"}, {"leaves", "leaves"},          {"W", "winning"},       {"M", "maybe"},
        {"L", "losing"},       {"init", "initial_status"},   {"issued", "queries_issued"},
        {"saved", "queries_saved"}, {"naive", "queries_naive"}, {"ms", "wall_ms"}};
    std::vector<std::vector<std::string>> table;
    table.emplace_back();
    for (const auto& c : cols) table.back().push_back(c.first);
    for (const auto& r : rows) {
        table.emplace_back();
        for (const auto& c : cols) table.back().push_back(cell(r.contains(c.second) ? r[c.second] : json(nullptr)));
    }
    std::vector<std::size_t> width(cols.size(), 0);
    for (const auto& row : table)
        for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
    std::ostringstream os;
    for (const auto& w : rep.warnings) os << "warning: " << w << "\n";
    os << "outcome: " << (outcome.is_null() ? std::string("incomplete") : outcome.get<std::string>()) << "\n";
    for (const auto& row : table) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) os << "  ";
            os << std::string(width[k] - row[k].size(), ' ') << row[k];
        }
        os << "\n";
    }
    rep.text = os.str();
    return rep;
}

}  // namespace dualsynth::io
