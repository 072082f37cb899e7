#pragma once

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qframe/arithmetic.hpp"
#include "qframe/cauchy.hpp"
#include "qframe/dfs.hpp"
#include "qframe/error.hpp"
#include "qframe/frame_field.hpp"
#include "qframe/gauge.hpp"
#include "qframe/state.hpp"
#include "qframe/superposition.hpp"

namespace qframe::cli {

enum class Format { human, json, csv };

struct RunConfig {
    std::string format = "human";
    bool json = false;
    std::uint64_t seed = 0;
    std::size_t cap = kDefaultSupportCap;

    Format fmt() const {
        if (json || format == "json") return Format::json;
        if (format == "csv") return Format::csv;
        return Format::human;
    }
};

namespace detail {

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

inline void collect_names(const CLI::App* app, std::vector<std::string>& flags, std::vector<std::string>& commands) {
    for (const auto* o : app->get_options())
        for (const auto& n : o->get_lnames()) flags.push_back("--" + n);
    for (const auto* s : app->get_subcommands({})) {
        commands.push_back(s->get_name());
        collect_names(s, flags, commands);
    }
}

/// Closest known flag or subcommand to any unrecognised token.
inline std::string suggestion(const CLI::App& app, const std::vector<std::string>& args) {
    std::vector<std::string> flags, commands;
    collect_names(&app, flags, commands);
    for (const auto& a : args) {
        auto token = a.substr(0, a.find('='));
        const auto& pool = token.rfind("--", 0) == 0 ? flags : commands;
        if (std::find(pool.begin(), pool.end(), token) != pool.end()) continue;
        if (token.rfind("-", 0) == 0 && token.rfind("--", 0) != 0) continue;
        std::string best;
        std::size_t best_d = 3;  // suggest only close matches
        for (const auto& c : pool) {
            auto d = edit_distance(token, c);
            if (d < best_d) best_d = d, best = c;
        }
        if (!best.empty()) return "did you mean '" + best + "' (for '" + token + "')?";
    }
    return {};
}

inline nlohmann::json read_json_arg(const std::string& arg) {
    auto first = arg.find_first_not_of(" \t");
    if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) return nlohmann::json::parse(arg);
    std::ifstream in(arg);
    if (!in) throw DomainError("cannot open " + arg);
    return nlohmann::json::parse(in);
}

inline std::string csv_cell(const nlohmann::json& v) {
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

/// Writes records in the chosen format. CSV prints a header whenever the
/// column set changes.
class Emitter {
public:
    Emitter(std::ostream& os, const RunConfig& cfg) : os_(os), cfg_(cfg) {}

    void record(nlohmann::ordered_json rec, const std::string& human) {
        switch (cfg_.fmt()) {
            case Format::human: os_ << human << '\n'; break;
            case Format::json:
                rec["seed"] = cfg_.seed;
                os_ << rec.dump() << '\n';
                break;
            case Format::csv: {
                rec["seed"] = cfg_.seed;
                std::vector<std::string> keys;
                for (const auto& [k, v] : rec.items()) keys.push_back(k);
                if (keys != header_) {
                    header_ = keys;
                    for (std::size_t i = 0; i < keys.size(); ++i) os_ << (i ? "," : "") << keys[i];
                    os_ << '\n';
                }
                std::size_t i = 0;
                for (const auto& [k, v] : rec.items()) os_ << (i++ ? "," : "") << csv_cell(v);
                os_ << '\n';
                break;
            }
        }
    }

    Format format() const { return cfg_.fmt(); }

private:
    std::ostream& os_;
    const RunConfig& cfg_;
    std::vector<std::string> header_;
};

inline std::string amp_text(Amplitude a) {
    std::ostringstream os;
    os << std::setprecision(12) << a.real() << (a.imag() < 0 ? " - " : " + ") << std::abs(a.imag()) << "i";
    return os.str();
}

inline void emit_superposition(Emitter& out, const StateSuperposition& psi) {
    for (const auto& [k, a] : psi) {
        nlohmann::ordered_json r{{"state", format(k)}, {"re", a.real()}, {"im", a.imag()}};
        out.record(r, format(k) + "  " + amp_text(a));
    }
}

// --- eval -------------------------------------------------------------------------

inline void eval_cmd(Emitter& out, const std::string& op, const std::vector<std::string>& args, std::int64_t ell) {
    auto need = [&](std::size_t n) {
        if (args.size() != n)
            throw CLI::ValidationError("eval " + op, "expects " + std::to_string(n) + " operand(s)");
    };
    auto result = [&](const StringRational& r) {
        nlohmann::ordered_json j{{"op", op}, {"result", format(r)}, {"value", value(r).to_decimal()}};
        out.record(j, format(r) + " = " + value(r).to_decimal());
    };
    if (op == "value") {
        need(1);
        auto raw = parse(args[0]);
        auto x = canonicalize(raw);
        nlohmann::ordered_json j{{"op", op}, {"state", args[0]}, {"canonical", format(x)}, {"value", value(x).to_decimal()}};
        out.record(j, value(x).to_decimal());
    } else if (op == "canon") {
        need(1);
        result(parse_canonical(args[0]));
    } else if (op == "accuracy") {
        need(1);
        result(accuracy_state(std::stoll(args[0])));
    } else if (op == "abs" || op == "neg") {
        need(1);
        auto x = parse_canonical(args[0]);
        result(op == "abs" ? abs_A(x) : negate_A(x));
    } else if (op == "add" || op == "sub" || op == "mul") {
        need(2);
        auto x = parse_canonical(args[0]), y = parse_canonical(args[1]);
        auto o = op == "add" ? Operation::add : op == "sub" ? Operation::sub : Operation::mul;
        result(apply(o, x, y));
    } else if (op == "div") {
        need(2);
        result(div_A(parse_canonical(args[0]), parse_canonical(args[1]), ell));
    } else if (op == "rel") {
        need(3);
        auto r = parse_relation(args[0]);
        bool h = holds(r, parse_canonical(args[1]), parse_canonical(args[2]));
        nlohmann::ordered_json j{{"op", op}, {"relation", args[0]}, {"x", args[1]}, {"y", args[2]}, {"holds", h}};
        out.record(j, h ? "true" : "false");
    } else {
        throw CLI::ValidationError("eval", "unknown operation '" + op +
                                              "' (value, canon, accuracy, abs, neg, add, sub, mul, div, rel)");
    }
}

// --- cauchy -----------------------------------------------------------------------

inline void emit_report(Emitter& out, const CauchyReport& r) {
    if (out.format() == Format::json) {
        nlohmann::ordered_json j = report_to_json(r);
        out.record(j, "");
        return;
    }
    auto h_text = [](const WitnessRow& w) { return w.h ? std::to_string(*w.h) : std::string("none"); };
    if (out.format() == Format::csv) {
        for (const auto& w : r.witnesses)
            out.record({{"verdict", verdict_name(r)}, {"ell", w.ell}, {"h", h_text(w)}}, "");
        for (const auto& row : r.table)
            out.record({{"verdict", verdict_name(r)}, {"ell", row.ell}, {"h", row.h}, {"min_p", row.min_p}}, "");
        return;
    }
    std::ostringstream os;
    os << "verdict: " << verdict_name(r) << "\nhorizon: " << r.horizon;
    if (!r.witnesses.empty()) {
        os << "\nell  h";
        for (const auto& w : r.witnesses) os << '\n' << std::setw(3) << w.ell << "  " << h_text(w);
    }
    if (r.estimate) {
        os << "\nestimate: " << std::setprecision(12) << *r.estimate;
        for (std::size_t i = 0; i < r.per_ell.size(); ++i) os << "\n  ell " << i + 1 << ": " << r.per_ell[i];
    }
    if (r.counterexample)
        os << "\ncounterexample: ell=" << r.counterexample->ell << " j=" << r.counterexample->j
           << " k=" << r.counterexample->k << " gap=" << r.counterexample->gap.to_decimal();
    out.record({}, os.str());
}

inline StateSequence load_sequence(const std::string& path) {
    auto spec = read_json_arg(path);
    auto base = std::filesystem::path(path).parent_path();
    return sequence_from_json(spec, base);
}

// --- frames -----------------------------------------------------------------------

inline FrameField load_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open frame field " + path + " (create one with 'frames new')");
    return FrameField::from_json(nlohmann::json::parse(in));
}

inline void save_field(const FrameField& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write frame field " + path);
    out << f.to_json().dump(2) << '\n';
}

inline nlohmann::ordered_json frame_record(const Frame& f) {
    nlohmann::ordered_json j{{"id", f.id}, {"stage", f.stage}};
    j["parent"] = f.parent ? nlohmann::ordered_json(*f.parent) : nlohmann::ordered_json(nullptr);
    return j;
}

}  // namespace detail

/// Runs one command line. Returns 0 on success, 1 on library errors, 2 on
/// usage errors.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"qframe: qubit string rationals, gauge frames, Cauchy checks and DFS encoding", "qframe"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key=value configuration file; flags override it");

    RunConfig cfg;
    if (const char* env = std::getenv("QFRAME_SUPPORT_CAP")) {
        try {
            cfg.cap = std::stoull(env);
        } catch (const std::exception&) {
            err << "error: QFRAME_SUPPORT_CAP is not a number\n";
            return 2;
        }
    }
    app.add_option("--format", cfg.format, "human, json or csv")->check(CLI::IsMember({"human", "json", "csv"}));
    app.add_flag("--json", cfg.json, "same as --format json");
    app.add_option("--seed", cfg.seed, "master seed, echoed into every machine-readable record");
    app.add_option("--cap", cfg.cap, "superposition support cap")->check(CLI::PositiveNumber);

    // eval
    auto* eval = app.add_subcommand("eval", "arithmetic on string states");
    std::string eval_op;
    std::vector<std::string> eval_args;
    std::int64_t eval_ell = 16;
    eval->add_option("op", eval_op, "value, canon, accuracy, abs, neg, add, sub, mul, div, rel")->required();
    eval->add_option("operands", eval_args, "state strings (rel takes the relation first)");
    eval->add_option("--ell", eval_ell, "accuracy for div")->check(CLI::PositiveNumber);

    // gauge
    auto* gauge = app.add_subcommand("gauge", "gauge transformations");
    gauge->require_subcommand(1);
    std::string g_path, g_state, g_second;
    auto* g_apply = gauge->add_subcommand("apply", "U|x> as a superposition");
    g_apply->add_option("--gauge", g_path, "gauge JSON file or inline JSON")->required();
    g_apply->add_option("--state", g_state, "basis state")->required();
    auto* g_overlap = gauge->add_subcommand("overlap", "<x|U x>");
    g_overlap->add_option("--gauge", g_path)->required();
    g_overlap->add_option("--state", g_state)->required();
    auto* g_compose = gauge->add_subcommand("compose", "second * first");
    g_compose->add_option("--first", g_path)->required();
    g_compose->add_option("--second", g_second)->required();

    // cauchy
    auto* cauchy = app.add_subcommand("cauchy", "Cauchy and equivalence checks");
    cauchy->require_subcommand(1);
    std::string c_seq, c_seq2, c_gauge;
    std::int64_t lmax = 8, budget = 32, window = 4, hmax = 8;
    auto add_common = [&](CLI::App* c) {
        c->add_option("--seq", c_seq, "sequence spec JSON")->required();
        c->add_option("--lmax", lmax, "largest ell")->check(CLI::PositiveNumber);
        c->add_option("--budget", budget, "terms probed")->check(CLI::PositiveNumber);
    };
    auto* c_check = cauchy->add_subcommand("check", "basis or U-frame Cauchy check");
    add_common(c_check);
    c_check->add_option("--gauge", c_gauge, "judge in the frame of this gauge");
    auto* c_prob = cauchy->add_subcommand("prob", "probabilistic check over superposition terms");
    add_common(c_prob);
    c_prob->add_option("--window", window)->check(CLI::PositiveNumber);
    c_prob->add_option("--hmax", hmax)->check(CLI::NonNegativeNumber);
    c_prob->add_option("--gauge", c_gauge, "view the sequence through this gauge first");
    auto* c_equiv = cauchy->add_subcommand("equiv", "equivalence of two sequences");
    add_common(c_equiv);
    c_equiv->add_option("--seq2", c_seq2)->required();

    // dfs
    auto* dfs_cmd = app.add_subcommand("dfs", "decoherence-free encoding");
    dfs_cmd->require_subcommand(1);
    std::string bits, d_gauge;
    std::size_t trials = 1000;
    bool fam_global = false, fam_paired = false, fam_unpaired = false;
    double threshold = 0.1;
    auto* d_encode = dfs_cmd->add_subcommand("encode", "physical state of a logical string");
    d_encode->add_option("--bits", bits)->required();
    auto* d_check = dfs_cmd->add_subcommand("check", "logical probabilities after a physical gauge");
    d_check->add_option("--bits", bits)->required();
    d_check->add_option("--gauge", d_gauge)->required();
    auto* d_fuzz = dfs_cmd->add_subcommand("fuzz", "random gauges against an encoded string");
    d_fuzz->add_option("--bits", bits)->required();
    d_fuzz->add_option("--trials", trials)->check(CLI::PositiveNumber);
    d_fuzz->add_option("--threshold", threshold);
    auto* fg = d_fuzz->add_flag("--global", fam_global);
    auto* fp = d_fuzz->add_flag("--local-paired", fam_paired);
    auto* fu = d_fuzz->add_flag("--local-unpaired", fam_unpaired);
    fg->excludes(fp)->excludes(fu);
    fp->excludes(fu);

    // frames
    auto* frames = app.add_subcommand("frames", "frame fields");
    frames->require_subcommand(1);
    std::string field_path = "frames.json", topo = "one-way", parent, observer, owner, f_state, f_gauge, frame_id;
    std::int64_t k = 4;
    bool no_rule = false, dot = false;
    auto add_field = [&](CLI::App* c) { c->add_option("--field", field_path, "field JSON file"); };
    auto* f_new = frames->add_subcommand("new", "create a field");
    add_field(f_new);
    f_new->add_option("--topology", topo)->check(CLI::IsMember({"finite", "one-way", "two-way", "cyclic"}));
    f_new->add_option("--k", k)->check(CLI::PositiveNumber);
    f_new->add_flag("--no-ancestor-rule", no_rule, "let cyclic views go around the cycle");
    auto* f_spawn = frames->add_subcommand("spawn", "child frame under a gauge");
    add_field(f_spawn);
    f_spawn->add_option("--parent", parent)->required();
    f_spawn->add_option("--gauge", f_gauge)->required();
    auto* f_parent = frames->add_subcommand("parent", "predecessor of a frame");
    add_field(f_parent);
    f_parent->add_option("--frame", frame_id)->required();
    auto* f_path = frames->add_subcommand("path", "composite gauge between frames");
    add_field(f_path);
    f_path->add_option("--from", observer)->required();
    f_path->add_option("--to", owner)->required();
    auto* f_cycle = frames->add_subcommand("cycle", "composite gauge around a cyclic field");
    add_field(f_cycle);
    f_cycle->add_option("--frame", frame_id)->required();
    auto* f_view = frames->add_subcommand("view", "an owner's state seen by an observer");
    add_field(f_view);
    f_view->add_option("--observer", observer)->required();
    f_view->add_option("--owner", owner)->required();
    f_view->add_option("--state", f_state)->required();
    auto* f_export = frames->add_subcommand("export", "JSON adjacency or DOT");
    add_field(f_export);
    f_export->add_flag("--dot", dot);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        auto hint = detail::suggestion(app, args);
        if (!hint.empty()) err << hint << '\n';
        return 2;
    }

    detail::Emitter em(out, cfg);
    try {
        if (eval->parsed()) {
            detail::eval_cmd(em, eval_op, eval_args, eval_ell);
        } else if (g_apply->parsed()) {
            auto u = gauge_from_json(detail::read_json_arg(g_path));
            detail::emit_superposition(em, apply_gauge(u, parse_basis(g_state), cfg.cap));
        } else if (g_overlap->parsed()) {
            auto u = gauge_from_json(detail::read_json_arg(g_path));
            auto a = overlap_after_gauge(u, parse_basis(g_state));
            em.record({{"state", g_state}, {"re", a.real()}, {"im", a.imag()}, {"abs", std::abs(a)}}, detail::amp_text(a));
        } else if (g_compose->parsed()) {
            auto g = compose(gauge_from_json(detail::read_json_arg(g_second)), gauge_from_json(detail::read_json_arg(g_path)));
            nlohmann::ordered_json j{{"gauge", gauge_to_json(g)}};
            em.record(j, gauge_to_json(g).dump());
        } else if (c_check->parsed()) {
            auto seq = detail::load_sequence(c_seq);
            if (c_gauge.empty())
                detail::emit_report(em, check_cauchy_basis(seq, lmax, budget));
            else
                detail::emit_report(em, check_cauchy_gauged(seq, gauge_from_json(detail::read_json_arg(c_gauge)), lmax, budget));
        } else if (c_prob->parsed()) {
            auto seq = detail::load_sequence(c_seq);
            if (!c_gauge.empty()) seq = seq.gauged(gauge_from_json(detail::read_json_arg(c_gauge)));
            detail::emit_report(em, prob_cauchy(seq, lmax, window, hmax, cfg.cap));
        } else if (c_equiv->parsed()) {
            detail::emit_report(em, equivalent(detail::load_sequence(c_seq), detail::load_sequence(c_seq2), lmax, budget));
        } else if (d_encode->parsed()) {
            auto psi = dfs::encode(bits).to_superposition();
            for (const auto& [key, a] : psi)
                em.record({{"qubits", key}, {"re", a.real()}, {"im", a.imag()}}, key + "  " + detail::amp_text(a));
        } else if (d_check->parsed()) {
            auto u = gauge_from_json(detail::read_json_arg(d_gauge));
            auto probs = dfs::logical_probs(dfs::encode(bits).gauged(u));
            for (std::size_t j = 0; j < probs.size(); ++j) {
                std::ostringstream h;
                h << "pair " << j + 1 << ": triplet " << std::setprecision(12) << probs[j].triplet << "  singlet "
                  << probs[j].singlet;
                em.record({{"pair", j + 1}, {"triplet", probs[j].triplet}, {"singlet", probs[j].singlet}}, h.str());
            }
        } else if (d_fuzz->parsed()) {
            auto fam = fam_paired ? dfs::GaugeFamily::local_paired
                                  : fam_unpaired ? dfs::GaugeFamily::local_unpaired : dfs::GaugeFamily::global;
            auto r = dfs::fuzz_invariance(bits, trials, cfg.seed, fam, threshold);
            nlohmann::ordered_json j = dfs::fuzz_to_json(r);
            std::ostringstream h;
            h << "family: " << dfs::family_name(r.family) << "\ntrials: " << r.trials << "\nseed: " << r.seed
              << "\nmax deviation: " << std::setprecision(6) << r.max_deviation << "\nabove " << r.threshold << ": "
              << r.above_threshold;
            em.record(j, h.str());
        } else if (f_new->parsed()) {
            auto t = Topology::parse(topo, k);
            FrameField f(t, !no_rule);
            detail::save_field(f, field_path);
            auto a = f.anchor();
            auto j = detail::frame_record(a);
            j["topology"] = t.name();
            em.record(j, "anchor " + a.id + " (" + t.name() + ")");
        } else if (f_spawn->parsed()) {
            auto f = detail::load_field(field_path);
            auto c = f.spawn(parent, gauge_from_json(detail::read_json_arg(f_gauge)));
            detail::save_field(f, field_path);
            em.record(detail::frame_record(c), c.id + " (stage " + std::to_string(c.stage) + ")");
        } else if (f_parent->parsed()) {
            auto f = detail::load_field(field_path);
            auto p = f.parent_of(frame_id);
            detail::save_field(f, field_path);
            em.record(detail::frame_record(p), p.id + " (stage " + std::to_string(p.stage) + ")");
        } else if (f_path->parsed()) {
            auto g = detail::load_field(field_path).path_gauge(observer, owner);
            em.record({{"from", observer}, {"to", owner}, {"gauge", gauge_to_json(g)}}, gauge_to_json(g).dump());
        } else if (f_cycle->parsed()) {
            auto f = detail::load_field(field_path);
            auto g = f.cycle_gauge(frame_id);
            bool id = g.is_identity(1e-12);
            em.record({{"frame", frame_id}, {"identity", id}, {"gauge", gauge_to_json(g)}},
                      gauge_to_json(g).dump() + (id ? "\n(identity)" : "\n(not the identity)"));
        } else if (f_view->parsed()) {
            auto f = detail::load_field(field_path);
            detail::emit_superposition(em, f.view_state(observer, owner, parse_basis(f_state), cfg.cap));
        } else if (f_export->parsed()) {
            auto f = detail::load_field(field_path);
            if (dot)
                f.write_dot(out);
            else
                out << f.to_json().dump() << '\n';
        }
    } catch (const CLI::ValidationError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const nlohmann::json::exception& e) {
        err << "error: bad JSON: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace qframe::cli
