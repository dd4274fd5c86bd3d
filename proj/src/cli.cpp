#include <cise/cli.hpp>
#include <cise/hash.hpp>
#include <cise/report.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cise {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Flags {
    std::string spec;
    bool json = false;
    std::string bounds;
    std::string array_len;
    std::string solver;
    double timeout = 10;
    bool no_assume_invariant = false;
    std::string out;
    std::uint64_t max_nodes = Bounds{}.max_nodes;
    // check
    bool listings = false;
    // simulate
    std::uint64_t seed = 0;
    std::uint64_t runs = 10'000;
    int replicas = 3;
    int ops = 20;
    bool no_tokens = false;
    std::string delivery = "causal";
    std::int64_t single_run = -1;
    std::size_t keep = 5;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text) || !(out.flush())) throw IoError("cannot write " + path.string());
}

std::string tool_hash() {
    std::ifstream in("/proc/self/exe", std::ios::binary);
    if (!in) return "";
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

std::pair<std::int64_t, std::int64_t> parse_range(const std::string& text, const char* flag) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw UsageError(std::string(flag) + " expects lo:hi, got '" + text + "'");
    try {
        std::size_t used = 0;
        const std::string a = text.substr(0, colon);
        const std::string b = text.substr(colon + 1);
        const std::int64_t lo = std::stoll(a, &used);
        if (used != a.size()) throw std::invalid_argument(a);
        const std::int64_t hi = std::stoll(b, &used);
        if (used != b.size()) throw std::invalid_argument(b);
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw UsageError(std::string(flag) + " expects integers lo:hi, got '" + text + "'");
    }
}

Bounds bounds_of(const Flags& f) {
    Bounds b;
    if (!f.bounds.empty()) std::tie(b.lo, b.hi) = parse_range(f.bounds, "--bounds");
    if (!f.array_len.empty()) {
        const auto [lo, hi] = parse_range(f.array_len, "--array-len");
        if (lo < 0 || hi > 64) throw UsageError("--array-len must stay within 0:64");
        b.min_len = static_cast<int>(lo);
        b.max_len = static_cast<int>(hi);
    }
    b.max_nodes = f.max_nodes;
    try {
        validate(b);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return b;
}

AnalysisOptions analysis_options(const Flags& f) {
    AnalysisOptions opt;
    opt.bounds = bounds_of(f);
    opt.vc.assume_invariant = !f.no_assume_invariant;
    if (!f.solver.empty()) {
        opt.solver = f.solver;
    } else if (const char* env = std::getenv("CISE3_SOLVER"); env != nullptr && *env != '\0') {
        opt.solver = std::string(env);
    }
    if (!(f.timeout > 0)) throw UsageError("--timeout must be positive");
    opt.timeout_s = f.timeout;
    return opt;
}

struct Loaded {
    std::shared_ptr<const TypedSpec> spec;
    ReportMeta meta;
};

Loaded load(const Flags& f) {
    const std::string source = read_file(f.spec);
    Loaded l;
    l.spec = std::make_shared<const TypedSpec>(load_spec(source));
    l.meta.spec_path = f.spec;
    l.meta.spec_sha256 = sha256_hex(source);
    l.meta.tool_sha256 = tool_hash();
    return l;
}

std::vector<std::string> op_names(const TypedSpec& spec) {
    std::vector<std::string> out;
    for (const auto& op : spec.ast.operations) out.push_back(op.name);
    return out;
}

struct Checked {
    Analysis analysis;
    ConflictRelation relation;
    TokenSystem tokens;
};

Checked run_check(const Loaded& l, const Flags& f) {
    Checked c{analyze(l.spec, analysis_options(f)), {}, {}};
    c.relation = build_conflicts(c.analysis.results, l.spec->ast.conflicts);
    c.tokens = synthesize(c.relation, op_names(*l.spec));
    return c;
}

int cmd_check(const Flags& f, std::ostream& out) {
    const Loaded l = load(f);
    const Checked c = run_check(l, f);
    const std::string json = report_json(c.analysis, c.relation, c.tokens, l.meta).dump(2) + "\n";
    const std::string text = report_text(c.analysis, c.relation, c.tokens, l.meta, f.listings);
    if (!f.out.empty()) {
        write_file(fs::path(f.out) / "report.json", json);
        write_file(fs::path(f.out) / "report.txt", text);
    }
    out << (f.json ? json : text);
    return check_exit_code(c.analysis, c.relation);
}

std::vector<Delivery> deliveries(const std::string& d) {
    if (d == "causal") return {Delivery::causal};
    if (d == "arbitrary") return {Delivery::arbitrary};
    if (d == "both") return {Delivery::causal, Delivery::arbitrary};
    throw UsageError("--delivery expects causal, arbitrary or both");
}

int cmd_simulate(const Flags& f, std::ostream& out) {
    const Loaded l = load(f);
    const Checked c = run_check(l, f);
    SimConfig cfg;
    cfg.replicas = f.replicas;
    cfg.ops_per_run = f.ops;
    cfg.runs = f.runs;
    cfg.seed = f.seed;
    cfg.bounds = bounds_of(f);
    cfg.enforce_tokens = !f.no_tokens;
    cfg.keep_failures = f.keep;

    if (f.single_run >= 0) {
        const auto ds = deliveries(f.delivery);
        if (ds.size() != 1) throw UsageError("--run needs a single delivery model");
        cfg.delivery = ds[0];
        const Simulator sim(l.spec, c.tokens, cfg);
        const RunTrace t = sim.run(static_cast<std::uint64_t>(f.single_run));
        if (f.json) {
            nlohmann::json doc = trace_json(t, *l.spec);
            if (t.failed()) doc["minimized"] = trace_json(sim.minimize(t), *l.spec);
            out << doc.dump(2) << '\n';
        } else {
            out << format_run(t, *l.spec);
            if (t.failed()) out << "\nminimized\n" << format_run(sim.minimize(t), *l.spec);
        }
        return t.failed() ? 1 : 0;
    }

    std::vector<SimReport> reports;
    for (Delivery d : deliveries(f.delivery)) {
        cfg.delivery = d;
        reports.push_back(Simulator(l.spec, c.tokens, cfg).run_all());
    }
    const std::string json = sim_json(reports, *l.spec, c.tokens, l.meta).dump(2) + "\n";
    if (!f.out.empty()) write_file(fs::path(f.out) / "simulation.json", json);
    out << (f.json ? json : sim_text(reports, *l.spec, c.tokens, l.meta));
    const bool ok = std::all_of(reports.begin(), reports.end(), [](const SimReport& r) { return r.failed_runs == 0; });
    return ok ? 0 : 1;
}

int cmd_emit_smt(const Flags& f, std::ostream& out) {
    const Loaded l = load(f);
    VcOptions vc;
    vc.assume_invariant = !f.no_assume_invariant;
    const ObligationSet set = gen_all(l.spec, vc);
    const fs::path dir = fs::path(f.out.empty() ? "smt-out" : f.out) / "vc";
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::vector<const Obligation*> sorted;
    for (const auto& ob : set.obligations) sorted.push_back(&ob);
    std::sort(sorted.begin(), sorted.end(), [](const Obligation* a, const Obligation* b) { return a->id < b->id; });
    for (const Obligation* ob : sorted) {
        const fs::path file = dir / (ob->id + ".smt2");
        write_file(file, emit(*ob).text);
        out << file.string() << '\n';
    }
    return 0;
}

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("spec", f.spec, "specification file (.cise)")->required();
    sub->add_option("--bounds", f.bounds, "integer range lo:hi for enumeration (default -4:4)");
    sub->add_option("--array-len", f.array_len, "array length range a:b (default 0:3)");
    sub->add_flag("--no-assume-invariant", f.no_assume_invariant,
                  "do not assume the invariant on initial states of pair and self obligations");
    sub->add_option("--out", f.out, "directory for written artifacts");
    sub->add_option("--max-nodes", f.max_nodes, "partial valuations visited per obligation before giving up");
}

void add_solver(CLI::App* sub, Flags& f) {
    sub->add_option("--solver", f.solver, "SMT solver command reading SMT-LIB on stdin (env CISE3_SOLVER)");
    sub->add_option("--timeout", f.timeout, "solver timeout per obligation in seconds (default 10)");
    sub->add_flag("--json", f.json, "print JSON instead of text");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Flags f;
    CLI::App app{"Checks a replicated-data specification for operations that need synchronization.", "cise-check"};
    app.set_version_flag("--version", tool_version);
    app.require_subcommand(1);

    CLI::App* check = app.add_subcommand("check", "analyze every obligation, report conflicts and tokens");
    add_common(check, f);
    add_solver(check, f);
    check->add_flag("--listings", f.listings, "append the generated obligations to the text report");

    CLI::App* simulate = app.add_subcommand("simulate", "run replicas under the synthesized tokens");
    add_common(simulate, f);
    add_solver(simulate, f);
    simulate->add_option("--seed", f.seed, "simulation seed (default 0)");
    simulate->add_option("--runs", f.runs, "number of runs (default 10000)");
    simulate->add_option("--replicas", f.replicas, "replicas per run (default 3)");
    simulate->add_option("--ops", f.ops, "issue attempts per run (default 20)");
    simulate->add_flag("--no-tokens", f.no_tokens, "ignore the token system");
    simulate->add_option("--delivery", f.delivery, "causal, arbitrary or both (default causal)");
    simulate->add_option("--run", f.single_run, "print the full trace of one run index");
    simulate->add_option("--keep-failures", f.keep, "failing runs kept in the report (default 5)");

    CLI::App* emit_smt = app.add_subcommand("emit-smt", "write one SMT-LIB file per obligation to <out>/vc");
    add_common(emit_smt, f);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        if (check->parsed()) return cmd_check(f, out);
        if (simulate->parsed()) return cmd_simulate(f, out);
        return cmd_emit_smt(f, out);
    } catch (const SpecError& e) {
        for (const auto& d : e.diagnostics()) err << format_diagnostic(d, f.spec) << '\n';
        if (e.diagnostics().empty()) err << f.spec << ": " << e.what() << '\n';
        return 2;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return 2;
    } catch (const SolverSpawnError& e) {
        err << "solver error: " << e.what() << '\n';
        return 2;
    } catch (const UnsupportedConstruct& e) {
        err << "cannot encode for SMT: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace cise
