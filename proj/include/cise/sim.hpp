/// @file sim.hpp
/// @brief Seeded simulation of replicas that ship operations to each other.
///
/// Each run starts every replica in the same state satisfying the invariant,
/// issues operations at random replicas with locally valid arguments, and
/// re-executes each operation's body at every peer on delivery. With token
/// enforcement an operation is not issued while an operation it excludes is
/// still in flight (issued but not yet delivered everywhere).
///
/// Randomness: run r of seed s draws from mt19937_64 seeded with
/// splitmix64(splitmix64(s) ^ r). Bounded integers come from the engine's raw
/// output by rejection, so traces do not depend on the standard library.

#pragma once

#include <cise/bounded.hpp>
#include <cise/tokens.hpp>

#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cise {

enum class Delivery { causal, arbitrary };

std::string_view to_string(Delivery d);

struct SimConfig {
    int replicas = 3;
    int ops_per_run = 20;  ///< issue attempts per run
    std::uint64_t runs = 10'000;
    std::uint64_t seed = 0;
    Bounds bounds;         ///< arguments and initial states
    Delivery delivery = Delivery::causal;
    bool enforce_tokens = true;
    std::size_t keep_failures = 5;  ///< failing runs kept with full traces
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform draws in [0, n) from a 64-bit engine by rejection.
class Draw {
public:
    explicit Draw(std::uint64_t seed) : rng_(seed) {}
    std::uint64_t below(std::uint64_t n);
    Int between(Int lo, Int hi);
    bool coin() { return (rng_() >> 63) != 0; }

private:
    std::mt19937_64 rng_;
};

struct SimOp {
    int id = -1;
    int op = -1;      ///< operation index in the spec
    int origin = -1;  ///< issuing replica
    std::vector<Int> args;  ///< indexed like the op's parameters; 0 at the state slot
    int issued = -1;        ///< event index of the issue
    int completed = -1;     ///< event index of the last delivery; -1 while in flight
    std::vector<int> seen;  ///< ops already applied at the origin when this one was issued

    friend bool operator==(const SimOp&, const SimOp&) = default;
};

struct SimEvent {
    enum class Kind { issue, deliver, defer, stability, fault, invariant, divergence } kind = Kind::issue;
    int replica = -1;
    int op = -1;     ///< SimOp id; for a deferral, the in-flight op that blocks
    int other = -1;  ///< second replica of a divergence; deferred operation index of a deferral
    ConcreteState state;

    friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

std::string_view to_string(SimEvent::Kind k);

struct RunTrace {
    std::uint64_t run = 0;
    std::uint64_t seed = 0;
    Delivery delivery = Delivery::arbitrary;
    int replicas = 0;
    ConcreteState initial;
    std::vector<SimOp> ops;
    std::vector<SimEvent> events;
    std::vector<ConcreteState> final_states;

    [[nodiscard]] int count(SimEvent::Kind k) const;
    [[nodiscard]] bool failed() const;
    friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

/// Neither op had been applied at the other's origin when it was issued.
bool concurrent(const RunTrace& t, int a, int b);
/// The two ops' issue-to-last-delivery intervals intersect.
bool overlapping(const RunTrace& t, int a, int b);

struct Failure {
    std::uint64_t run = 0;
    RunTrace trace;
    RunTrace minimized;  ///< no single op can be dropped without losing the first failure kind
};

struct SimReport {
    SimConfig config;
    std::string spec_hash;
    std::uint64_t runs = 0;
    std::uint64_t failed_runs = 0;
    std::uint64_t invariant_violations = 0;  ///< (run, replica) pairs
    std::uint64_t divergences = 0;           ///< (run, replica pair) unequal at quiescence
    std::uint64_t stability_events = 0;      ///< remote precondition failures
    std::uint64_t faults = 0;
    std::uint64_t deferrals = 0;
    std::uint64_t operations = 0;
    std::vector<Failure> failures;  ///< first `keep_failures` failing runs
};

class Simulator {
public:
    /// Throws ConfigError for fewer than two replicas, invalid bounds, or no
    /// state within bounds satisfying the invariant.
    Simulator(std::shared_ptr<const TypedSpec> spec, TokenSystem tokens, SimConfig cfg);

    SimReport run_all() const;
    RunTrace run(std::uint64_t index) const;
    /// Re-runs a reported failure; ConfigMismatch unless this simulator's
    /// seed, settings and spec reproduce the recorded trace exactly.
    RunTrace replay(const Failure& f) const;
    RunTrace minimize(const RunTrace& t) const;

    [[nodiscard]] const SimConfig& config() const { return cfg_; }

private:
    struct Action {
        bool issue = true;
        int op = -1;
        int target = -1;
    };
    RunTrace execute(const RunTrace& base, const std::vector<Action>& schedule, const std::vector<bool>& removed,
                     bool& valid) const;
    void finish(RunTrace& t, std::vector<ConcreteState>& states) const;
    bool requires_hold(int op, const std::vector<Int>& args, const ConcreteState& s) const;

    std::shared_ptr<const TypedSpec> spec_;
    TokenSystem tokens_;
    SimConfig cfg_;
    std::vector<ConcreteState> initial_states_;
    std::vector<Expr> requires_;
    Expr equality_;
};

std::string format_run(const RunTrace& t, const TypedSpec& spec);

}  // namespace cise
