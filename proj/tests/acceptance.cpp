// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.

#include "spec_gen.hpp"

#include <cise/analysis.hpp>
#include <cise/bounded.hpp>
#include <cise/smt.hpp>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <sys/wait.h>

using nlohmann::json;
using namespace cise;
namespace fs = std::filesystem;

namespace {

struct ToolRun {
    int code = -1;
    std::string out;
    double seconds = 0;
};

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

ToolRun tool(const std::vector<std::string>& args) {
    std::string cmd = quote(CISE_CHECK_BIN);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " 2>/dev/null";
    const auto t0 = std::chrono::steady_clock::now();
    FILE* p = popen(cmd.c_str(), "r");
    ToolRun r;
    if (p == nullptr) return r;
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::string spec_path(const std::string& name) { return std::string(CISE_SPEC_DIR) + "/" + name; }

std::vector<std::string> bundled_specs() {
    std::vector<std::string> out;
    for (const char* dir : {CISE_SPEC_DIR, CISE_CORPUS_DIR}) {
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.path().extension() == ".cise") out.push_back(e.path().string());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::shared_ptr<const TypedSpec> load_file(const std::string& path) {
    return std::make_shared<const TypedSpec>(load_spec(read_file(path)));
}

const json* find_by(const json& arr, const std::string& key, const std::string& value) {
    for (const auto& e : arr) {
        if (e.contains(key) && e[key] == value) return &e;
    }
    return nullptr;
}

const json* cell(const json& doc, const std::string& a, const std::string& b) {
    for (const auto& e : doc["matrix"]) {
        if (e["first"] == a && e["second"] == b) return &e;
    }
    return nullptr;
}

struct Result {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------------------

Result bank_verdicts() {
    const ToolRun r = tool({"check", spec_path("bank.cise"), "--json"});
    if (r.code != 1) return {false, "exit " + std::to_string(r.code) + ", expected 1"};
    const json d = json::parse(r.out);
    std::ostringstream why;
    for (const char* op : {"deposit", "withdraw"}) {
        const json* s = find_by(d["safety"], "operation", op);
        if (s == nullptr || (*s)["outcome"] != "holds") why << op << " safety not valid; ";
    }
    const json* dw = cell(d, "deposit", "withdraw");
    if (dw == nullptr || (*dw)["commutes"] != "holds" || (*dw)["stable"] != "holds") {
        why << "deposit/withdraw not commuting and stable; ";
    }
    const json* dd = cell(d, "deposit", "deposit");
    if (dd == nullptr || (*dd)["stable"] != "holds") why << "deposit not self-stable; ";
    const json* ww = cell(d, "withdraw", "withdraw");
    if (ww == nullptr || (*ww)["stable"] != "fails") why << "withdraw not self-conflicting; ";

    const json* ob = find_by(d["obligations"], "id", "self_withdraw");
    std::string witness_text;
    bool witness_ok = false;
    if (ob != nullptr) {
        for (const auto& a : (*ob)["assertions"]) {
            if (a["outcome"] != "fails" || a["witness"].is_null()) continue;
            const json& w = a["witness"];
            const std::int64_t acct = w["scalars"]["accountId"];
            const std::int64_t amount = w["scalars"]["amount"];
            const auto bal = w["states"]["state"]["balance"].get<std::vector<std::int64_t>>();
            if (acct < 0 || acct >= static_cast<std::int64_t>(bal.size())) continue;
            const std::int64_t b = bal[static_cast<std::size_t>(acct)];
            witness_ok = amount > 0 && b - amount >= 0 && b - 2 * amount < 0;
            witness_text = w["text"];
            break;
        }
    }
    if (!witness_ok) why << "no withdraw self witness satisfying the predicate; ";
    if (r.seconds >= 10) why << "took " << r.seconds << " s; ";
    const std::string problems = why.str();
    std::ostringstream detail;
    detail << "witness " << witness_text << "; " << r.seconds << " s";
    return {problems.empty(), problems.empty() ? detail.str() : problems};
}

Result bank_tokens() {
    const ToolRun r = tool({"check", spec_path("bank.cise"), "--json"});
    const json ts = json::parse(r.out)["token_system"];
    const json expected = json::parse(R"({
        "tokens": [{"name": "tok_withdraw_withdraw", "pair": ["withdraw", "withdraw"]}],
        "conflicts": [["tok_withdraw_withdraw", "tok_withdraw_withdraw"]],
        "assignment": [{"operation": "deposit", "tokens": []},
                       {"operation": "withdraw", "tokens": ["tok_withdraw_withdraw"]}]})");
    if (ts != expected) return {false, "got " + ts.dump()};
    return {true, "T = {tok_withdraw_withdraw}, withdraw -> {tok}, deposit -> {}, tok conflicts with itself"};
}

// Every counterexample the bounded checker reports, over the bundled specs,
// the test corpus, a weakened bank and a batch of generated specs.
Result counterexample_soundness() {
    std::vector<std::pair<std::string, std::shared_ptr<const TypedSpec>>> corpus;
    for (const auto& p : bundled_specs()) corpus.emplace_back(fs::path(p).filename().string(), load_file(p));
    std::string mutant = read_file(spec_path("bank.cise"));
    mutant.replace(mutant.find("requires { amount > 0 }"), 23, "requires { amount >= -1 }");
    corpus.emplace_back("bank with weakened deposit", std::make_shared<const TypedSpec>(load_spec(mutant)));
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        gen::SpecGen g(seed, gen::GenOptions{1, 3, 2, true, true});
        corpus.emplace_back("generated " + std::to_string(seed),
                            std::make_shared<const TypedSpec>(typecheck(g.spec())));
    }
    int total = 0;
    int replayed = 0;
    std::string first_bad;
    for (const auto& [name, spec] : corpus) {
        for (bool assume : {true, false}) {
            VcOptions vc;
            vc.assume_invariant = assume;
            const Bounds b = name.rfind("generated", 0) == 0 ? Bounds{-2, 2, 0, 2} : Bounds{};
            for (const Obligation& ob : gen_all(spec, vc).obligations) {
                const Verdict v = check(ob, b);
                for (const auto& av : v.assertions) {
                    if (!av.witness) continue;
                    ++total;
                    const Trace t = replay(*av.witness, ob);
                    if (t.reproduced && t.failed_assertion == av.witness->assertion) {
                        ++replayed;
                    } else if (first_bad.empty()) {
                        first_bad = name + " " + ob.id;
                    }
                }
            }
        }
    }
    std::ostringstream d;
    d << replayed << "/" << total << " counterexamples replay to the reported assertion over " << corpus.size()
      << " specs";
    if (!first_bad.empty()) d << "; first mismatch: " << first_bad;
    return {total > 0 && replayed == total, d.str()};
}

Valuation random_valuation(const Obligation& ob, std::mt19937_64& rng) {
    auto pick = [&](Int lo, Int hi) { return lo + static_cast<Int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
    Valuation v;
    for (const auto& s : ob.scalars) v.scalars.push_back(s.type == Type::boolean ? pick(0, 1) : pick(-6, 6));
    for (std::size_t i = 0; i < ob.states.size(); ++i) {
        ConcreteState st;
        for (const auto& f : ob.spec->ast.state.fields) {
            if (f.type.kind == Type::boolean) {
                st.fields.emplace_back(pick(0, 1) != 0);
            } else if (f.type.kind == Type::int_array) {
                IntArray a(static_cast<std::size_t>(pick(0, 4)));
                for (auto& c : a) c = pick(-6, 6);
                st.fields.emplace_back(std::move(a));
            } else {
                st.fields.emplace_back(pick(-6, 6));
            }
        }
        v.states.push_back(std::move(st));
    }
    return v;
}

bool solver_available(std::string& cmd) {
    if (const char* env = std::getenv("CISE3_SOLVER"); env != nullptr && *env != '\0') {
        cmd = env;
        return true;
    }
    if (std::system("command -v z3 >/dev/null 2>&1") == 0) {
        cmd = "z3";
        return true;
    }
    return false;
}

// Solver-proved goals must have no bounded counterexample at [-6, 6] with
// arrays up to length 4. The encoding is also checked against the
// interpreter on 1000 sampled valuations per obligation either way.
Result oracle_agreement() {
    std::string solver;
    const bool have_solver = solver_available(solver);
    const Bounds wide{-6, 6, 0, 4, 200'000'000};
    int proved = 0;
    int disagreements = 0;
    int exhausted = 0;
    long compared = 0;
    long mismatches = 0;
    int obligations = 0;
    std::string first_bad;
    for (const auto& path : bundled_specs()) {
        const auto spec = load_file(path);
        for (const Obligation& ob : gen_all(spec).obligations) {
            ++obligations;
            const SmtDoc doc = emit(ob);
            std::mt19937_64 rng(std::hash<std::string>{}(ob.id) ^ 0x5eedULL);
            int sampled = 0;
            for (int i = 0; i < 100'000 && sampled < 1000; ++i) {
                const Valuation v = random_valuation(ob, rng);
                const Execution ex = execute(ob, v);
                const SmtEvaluation ev = evaluate(doc, ob, v);
                bool counted = false;
                if (ex.assumptions == Truth::yes || ex.assumptions == Truth::no) {
                    const bool all = std::all_of(ev.assumptions.begin(), ev.assumptions.end(), [](bool b) { return b; });
                    ++compared;
                    counted = true;
                    if (all != (ex.assumptions == Truth::yes)) ++mismatches;
                }
                for (std::size_t g = 0; g < doc.goals.size(); ++g) {
                    const Truth t = ex.assertions[static_cast<std::size_t>(doc.goals[g].assertion)];
                    if (t != Truth::yes && t != Truth::no) continue;
                    ++compared;
                    counted = true;
                    if (ev.goals[g] != (t == Truth::yes)) {
                        ++mismatches;
                        if (first_bad.empty()) first_bad = ob.id + " goal " + doc.goals[g].label;
                    }
                }
                sampled += counted ? 1 : 0;
            }
            if (sampled < 1000) {
                ++mismatches;
                if (first_bad.empty()) first_bad = ob.id + ": only " + std::to_string(sampled) + " usable samples";
            }
            if (!have_solver) continue;
            const SolverVerdict sv = discharge(doc, solver, 20);
            const Verdict bv = check(ob, wide);
            if (bv.status == VerdictStatus::resource_exhausted) ++exhausted;
            for (const auto& g : sv.goals) {
                if (g.status != GoalStatus::proved) continue;
                ++proved;
                if (bv.assertions[static_cast<std::size_t>(g.assertion)].status == AssertionStatus::fails) {
                    ++disagreements;
                    if (first_bad.empty()) first_bad = ob.id + " assertion " + std::to_string(g.assertion);
                }
            }
        }
    }
    std::ostringstream d;
    if (have_solver) {
        d << "solver '" << solver << "': " << proved << " proved goals, " << disagreements
          << " refuted by bounded search at [-6, 6] x len <= 4";
        if (exhausted > 0) d << " (" << exhausted << " searches hit the node cap)";
        d << "; ";
    } else {
        d << "no solver configured; ";
    }
    d << obligations << " obligations, " << compared << " interpreter/encoding comparisons, " << mismatches
      << " mismatches";
    if (!first_bad.empty()) d << "; first: " << first_bad;
    const bool ok = mismatches == 0 && disagreements == 0 && exhausted == 0 && (!have_solver || proved > 0);
    return {ok, d.str()};
}

// Two withdraws on one account, neither seen at the other's origin.
bool concurrent_withdraws(const json& trace) {
    auto saw = [](const json& op, const json& id) {
        return std::find(op["seen"].begin(), op["seen"].end(), id) != op["seen"].end();
    };
    for (const auto& x : trace["ops"]) {
        for (const auto& y : trace["ops"]) {
            if (x["id"] >= y["id"] || x["operation"] != "withdraw" || y["operation"] != "withdraw") continue;
            if (x["args"]["accountId"] == y["args"]["accountId"] && !saw(x, y["id"]) && !saw(y, x["id"])) return true;
        }
    }
    return false;
}

Result simulator_validation() {
    const ToolRun with = tool({"simulate", spec_path("bank.cise"), "--seed", "42", "--runs", "10000", "--json"});
    const ToolRun without = tool({"simulate", spec_path("bank.cise"), "--seed", "42", "--runs", "10000", "--no-tokens",
                                  "--delivery", "arbitrary", "--json"});
    std::ostringstream why;
    if (with.code != 0) why << "with tokens: exit " << with.code << "; ";
    if (without.code != 1) why << "without tokens: exit " << without.code << "; ";
    if (!why.str().empty()) return {false, why.str()};
    const json wd = json::parse(with.out);
    const json nd = json::parse(without.out);
    const json& w = wd["simulations"][0];
    const json& n = nd["simulations"][0];
    if (w["invariant_violations"] != 0 || w["divergences"] != 0) why << "violations with tokens; ";
    int shown = 0;
    for (const auto& f : n["failures"]) shown += concurrent_withdraws(f["trace"]) ? 1 : 0;
    if (n["invariant_violations"].get<int>() < 1 || shown == 0) why << "no concurrent-withdraw violation; ";
    const double total = with.seconds + without.seconds;
    if (total >= 60) why << "took " << total << " s; ";
    std::ostringstream d;
    d << "tokens (" << w["config"]["delivery"].get<std::string>() << "): " << w["invariant_violations"]
      << " violations, " << w["divergences"] << " divergences; no tokens (arbitrary): "
      << n["invariant_violations"] << " violations in " << n["failed_runs"] << " runs, " << shown << "/"
      << n["failures"].size() << " kept traces show concurrent withdraws; " << total << " s";
    return {why.str().empty(), why.str().empty() ? d.str() : why.str()};
}

Result mutex_example() {
    const ToolRun r = tool({"check", spec_path("mutex.cise"), "--json"});
    if (r.code != 1) return {false, "exit " + std::to_string(r.code)};
    const json d = json::parse(r.out);
    std::ostringstream why;
    const json* aa = cell(d, "acquire", "acquire");
    const json* rr = cell(d, "release", "release");
    if (aa == nullptr || (*aa)["stable"] != "fails") why << "acquire not self-conflicting; ";
    if (rr == nullptr || (*rr)["stable"] != "holds") why << "release self-conflicting; ";
    bool stability = false;
    bool release_in_relation = false;
    for (const auto& c : d["conflicts"]) {
        if (c["pair"] == json::array({"acquire", "acquire"})) {
            for (const auto& e : c["evidence"]) stability = stability || e["kind"] == "stability_violation";
        }
        release_in_relation = release_in_relation || c["pair"] == json::array({"release", "release"});
    }
    if (!stability) why << "no stability evidence for acquire; ";
    if (release_in_relation) why << "release/release in the relation; ";
    const json& ts = d["token_system"];
    std::string self_token;
    for (const auto& a : ts["assignment"]) {
        if (a["operation"] != "acquire") continue;
        for (const auto& t : a["tokens"]) {
            for (const auto& c : ts["conflicts"]) {
                if (c[0] == t && c[1] == t && self_token.empty()) self_token = t;
            }
        }
    }
    if (self_token.empty()) why << "acquire holds no self-conflicting token; ";
    return {why.str().empty(), why.str().empty() ? "acquire holds self-conflicting " + self_token : why.str()};
}

Result pair_count() {
    const fs::path dir = fs::temp_directory_path() / "cise_acceptance";
    fs::create_directories(dir);
    std::mt19937_64 rng(5);
    std::string src = "module Five\n\ntype st [@state] = { a : int; b : int } invariant { a >= 0 }\n\n";
    for (int i = 0; i < 5; ++i) {
        const auto k = std::to_string(1 + rng() % 3);
        const std::string field = (rng() & 1) != 0 ? "a" : "b";
        src += "let op" + std::to_string(i) + " (n : int) (s : st)\n  requires { n > 0 }\n= s." + field + " <- s." +
               field + " + n * " + k + "\n\n";
    }
    src += "conflict op1 op3\nconflict op4 op0\n";
    const fs::path p = dir / "five.cise";
    std::ofstream(p) << src;
    const ToolRun r = tool({"check", p.string(), "--json"});
    if (r.code == 2 || r.out.empty()) return {false, "check failed"};
    const json d = json::parse(r.out);
    int safety = 0;
    int self = 0;
    int pairs = 0;
    for (const auto& o : d["obligations"]) {
        safety += o["kind"] == "safety" ? 1 : 0;
        self += o["kind"] == "self" ? 1 : 0;
        pairs += o["kind"] == "pair" ? 1 : 0;
    }
    std::ostringstream detail;
    detail << safety << " safety + " << self << " self + " << pairs << " pair = " << d["obligations"].size()
           << " analyzed, " << d["skipped"].size() << " skipped";
    const bool ok = safety == 5 && self == 5 && pairs == 8 && d["obligations"].size() == 18 &&
                    d["skipped"].size() == 2 && d["matrix"].size() == 15;
    return {ok, detail.str()};
}

Result determinism() {
    int same = 0;
    std::vector<std::string> differing;
    const auto specs = bundled_specs();
    for (const auto& p : specs) {
        const ToolRun a = tool({"check", p, "--json"});
        const ToolRun b = tool({"check", p, "--json"});
        if (!a.out.empty() && a.out == b.out && a.code == b.code) {
            ++same;
        } else {
            differing.push_back(fs::path(p).filename().string());
        }
    }
    std::ostringstream d;
    d << same << "/" << specs.size() << " specs give byte-identical reports";
    for (const auto& s : differing) d << "; differs: " << s;
    return {same == static_cast<int>(specs.size()), d.str()};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, Result (*)()>> criteria = {
        {"bank case study verdicts", bank_verdicts},
        {"bank token system", bank_tokens},
        {"counterexample soundness", counterexample_soundness},
        {"oracle agreement", oracle_agreement},
        {"simulator validation", simulator_validation},
        {"mutex example", mutex_example},
        {"obligation count formula", pair_count},
        {"deterministic reports", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Result r;
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        failed += r.pass ? 0 : 1;
        std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
                  << "): " << r.detail << std::endl;
    }
    return failed;
}
