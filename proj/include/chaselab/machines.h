#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "chaselab/chase.h"
#include "chaselab/model.h"
#include "chaselab/parser.h"

namespace chaselab {

using BigInt = boost::multiprecision::cpp_int;

class MachineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ZeroTest : std::uint8_t { Zero, NonZero };
enum class Delta : std::uint8_t { Inc, Dec, Keep };

/// (state, test1, test2) -> (next, delta1, delta2); counter 3 is incremented
/// by every executed instruction. States are 0-based (q1 is 0).
struct Instruction {
    std::uint32_t state = 0;
    ZeroTest test1 = ZeroTest::Zero;
    ZeroTest test2 = ZeroTest::Zero;
    std::uint32_t next = 0;
    Delta delta1 = Delta::Keep;
    Delta delta2 = Delta::Keep;
};

class CounterMachine {
public:
    CounterMachine() = default;
    /// Throws MachineError on nondeterminism, a decrement under a zero test,
    /// or an out-of-range state.
    CounterMachine(std::string name, std::vector<std::string> states, std::vector<Instruction> instructions);

    const std::string& name() const { return name_; }
    std::size_t stateCount() const { return states_.size(); }
    const std::vector<std::string>& states() const { return states_; }
    const std::vector<Instruction>& instructions() const { return instructions_; }
    const Instruction* find(std::uint32_t state, ZeroTest t1, ZeroTest t2) const;

    std::string str() const;

private:
    std::string name_;
    std::vector<std::string> states_;
    std::vector<Instruction> instructions_;
};

/// Text format:
///   states q1 q2
///   q1 zero zero -> q2 inc keep
/// Tests are zero|nonzero, deltas inc|dec|keep; "#" comments.
ParseResult<CounterMachine> parseMachine(std::string_view text, std::string name = "machine");

struct Configuration {
    std::uint32_t state = 0;
    std::uint64_t c1 = 0, c2 = 0, c3 = 0;

    friend bool operator==(const Configuration&, const Configuration&) = default;
};

struct SimResult {
    bool halted = false;
    std::size_t steps = 0;
    Configuration final;
    std::vector<Configuration> trajectory;  // configurations 0..steps
};

/// Runs from (q1,0,0,0) for at most maxSteps instructions.
SimResult simulate3CM(const CounterMachine& mach, std::size_t maxSteps);

/// Conway function of a machine with m states: modulus p is the product of
/// the first m+3 primes. Coefficients are computed per residue on demand, so
/// machines with large moduli remain usable for orbit computations.
class ConwayFunction {
public:
    explicit ConwayFunction(const CounterMachine& mach);

    std::uint32_t m() const { return m_; }
    const std::vector<std::uint64_t>& primes() const { return primes_; }
    std::uint64_t modulus() const { return modulus_; }

    /// (q_i, r_i); identity (1,1) for residues that encode no configuration
    /// or a halting one.
    std::pair<std::uint64_t, std::uint64_t> coefficients(std::uint64_t residue) const;
    /// Distinct values among all q_i and r_i.
    std::vector<std::uint64_t> coefficientValues() const;

    BigInt apply(const BigInt& n) const;

private:
    std::uint32_t m_ = 0;
    std::vector<std::uint64_t> primes_;
    std::uint64_t modulus_ = 1;
    // Indexed by state*4 + test1*2 + test2.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> table_;
};

ConwayFunction buildConway(const CounterMachine& mach);
BigInt encodeConfig(const ConwayFunction& cw, const Configuration& c);
/// g^0(start), ..., g^maxIters(start). Throws MachineError on inexact division.
std::vector<BigInt> iterateG(const ConwayFunction& cw, const BigInt& start = 2, std::size_t maxIters = 200);

std::vector<std::uint64_t> firstPrimes(std::size_t n);

/// Orientation of rule (d3). Forward advances y by r_i and z by q_i, so
/// T^i_x(y,z) holds for z = y*q_i/r_i and (d7) follows g. AsPrinted advances
/// y by q_i and z by r_i, the literal rule text; (d7) then follows the
/// inverse map.
enum class D3Orientation { Forward, AsPrinted };

struct TmOptions {
    std::uint64_t maxCoefficient = 10'000;
    D3Orientation orientation = D3Orientation::Forward;
};

/// Program T_M over relations E, E<j>, H, T<i>, R<i>, G, N with rules
/// e, d0_<j>, d1, d2_<i>, d3_<i>, d4, d5_<i>, d6, d7_<i>. Throws MachineError
/// when a coefficient exceeds options.maxCoefficient.
Program generateTM(const CounterMachine& mach, const TmOptions& options = {});

struct AppendixAReport {
    bool pass = true;
    std::vector<std::string> violations;
    std::size_t pathLength = 0;  // E_0 edges on the path from w
    std::size_t checkedT = 0, checkedR = 0, checkedG = 0;
    bool orbitBounded = false;
    BigInt orbitMax = 0;
};

/// Structural checks on a (possibly truncated) chase of T_M over its critical
/// instance: E without the w loop is a simple path rooted at w; T and R facts
/// obey the arithmetic invariants; G facts match the orbit of g.
AppendixAReport verifyAppendixA(const ChaseResult& res, const CounterMachine& mach,
                                D3Orientation orientation = D3Orientation::Forward,
                                std::size_t maxViolations = 20);
AppendixAReport verifyAppendixA(const Instance& chase, const CounterMachine& mach,
                                D3Orientation orientation = D3Orientation::Forward,
                                std::size_t maxViolations = 20);

namespace zoo {
CounterMachine immediateHalt();
/// q1..qk increment c1, q_{k+1} decrements it to zero, then halts: 2k steps.
CounterMachine upDown(std::uint32_t k);
/// One state: on (zero,zero) increment both counters, on (nonzero,nonzero)
/// decrement c1, on (zero,nonzero) halt. Halts after 2 steps.
CounterMachine upDownOne();
/// One state, (zero,zero) -> keep keep forever.
CounterMachine loop1();
}  // namespace zoo

}  // namespace chaselab
