#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "abstraction.hpp"

namespace dualsynth::formula {

enum class Op { True, False, Atom, Not, And, Or, Implies, Iff, Next, Eventually, Always, Until, WeakUntil, Release };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    Op op = Op::True;
    std::string name;   // Atom: identifier
    std::string value;  // Atom: right-hand side of name=value, empty otherwise
    std::vector<ExprPtr> args;
};

/// Operators: ! & | -> <-> (also ¬ ∧ ∨ → ↔, && || => <=>), true/false,
/// temporal X F G U W R and [] <> (also □ ◇). Atoms are `name` or `name=value`.
/// Throws InputError with the column of the offending token.
ExprPtr parse(std::string_view text);

std::string to_string(const ExprPtr& e);
const char* op_name(Op op);

/// No temporal operator anywhere.
bool is_boolean(const ExprPtr& e);

ExprPtr make_true();
ExprPtr make_atom(std::string name);
ExprPtr make_not(ExprPtr a);
ExprPtr make_or(ExprPtr a, ExprPtr b);
ExprPtr make_and(ExprPtr a, ExprPtr b);

/// Names a compiled predicate may refer to.
struct Vocabulary {
    std::vector<std::string> labels;
    abstraction::EnvAlphabet env;
    std::vector<std::string> bits;
};

/// Point of evaluation: which labels hold, the environment valuation and the
/// memory bits (bit k of `bits`).
struct Valuation {
    const std::vector<char>* labels = nullptr;
    std::size_t env = 0;
    std::uint32_t bits = 0;
};

/// Boolean formula with every atom resolved against a Vocabulary.
class Predicate {
public:
    Predicate() = default;
    bool eval(const Valuation& v) const;
    bool uses_bits() const { return uses_bits_; }
    const std::string& source() const { return source_; }

private:
    friend Predicate compile(const ExprPtr&, const Vocabulary&, bool);
    enum class Kind : std::uint8_t { True, False, Label, Env, Bit, Not, And, Or, Implies, Iff };
    struct Node {
        Kind kind;
        std::uint32_t a = 0;  // Label/Bit index, Env variable, or first child
        std::uint32_t b = 0;  // Env value index, or second child
    };
    bool eval_node(std::uint32_t k, const Valuation& v) const;

    std::vector<Node> nodes_;  // root is the last node
    std::vector<std::size_t> env_sizes_;
    bool uses_bits_ = false;
    std::string source_;
};

/// A bare environment variable name means name=true (or name=1).
/// Throws InputError for unknown names, bad values or temporal operators.
Predicate compile(const ExprPtr& e, const Vocabulary& vocab, bool allow_bits = true);

}  // namespace dualsynth::formula
