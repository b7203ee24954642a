#include "formula.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "errors.hpp"

namespace dualsynth::formula {

namespace {

enum class Tok {
    End, Ident, Value, LParen, RParen, Not, And, Or, Implies, Iff, True, False, Next, Eventually, Always,
    Until, WeakUntil, Release, Equals
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t column = 0;  // 1-based
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '.'; }

class Lexer {
public:
    explicit Lexer(std::string_view s) : s_(s) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        bool after_equals = false;
        while (true) {
            while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            Token t;
            t.column = pos_ + 1;
            if (pos_ >= s_.size()) {
                t.kind = Tok::End;
                out.push_back(t);
                return out;
            }
            if (after_equals) {
                const std::size_t start = pos_;
                while (pos_ < s_.size() && (ident_char(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-' ||
                                            s_[pos_] == '+')) {
                    ++pos_;
                }
                if (pos_ == start) fail(t.column, "expected a value after '='");
                t.kind = Tok::Value;
                t.text = std::string(s_.substr(start, pos_ - start));
                out.push_back(t);
                after_equals = false;
                continue;
            }
            if (ident_start(static_cast<unsigned char>(s_[pos_]))) {
                const std::size_t start = pos_;
                while (pos_ < s_.size() && ident_char(static_cast<unsigned char>(s_[pos_]))) ++pos_;
                t.text = std::string(s_.substr(start, pos_ - start));
                t.kind = keyword(t.text);
                out.push_back(t);
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail(t.column, "identifiers cannot start with a digit");
            t.kind = symbol(t.column);
            if (t.kind == Tok::Equals) after_equals = true;
            out.push_back(t);
        }
    }

private:
    static Tok keyword(const std::string& w) {
        if (w == "true" || w == "TRUE") return Tok::True;
        if (w == "false" || w == "FALSE") return Tok::False;
        if (w == "X") return Tok::Next;
        if (w == "F") return Tok::Eventually;
        if (w == "G") return Tok::Always;
        if (w == "U") return Tok::Until;
        if (w == "W") return Tok::WeakUntil;
        if (w == "R") return Tok::Release;
        return Tok::Ident;
    }

    bool eat(std::string_view lit) {
        if (s_.substr(pos_, lit.size()) == lit) {
            pos_ += lit.size();
            return true;
        }
        return false;
    }

    Tok symbol(std::size_t column) {
        if (eat("<->") || eat("<=>") || eat("↔")) return Tok::Iff;
        if (eat("->") || eat("=>") || eat("→")) return Tok::Implies;
        if (eat("[]") || eat("□")) return Tok::Always;
        if (eat("<>") || eat("◇")) return Tok::Eventually;
        if (eat("&&") || eat("&") || eat("∧")) return Tok::And;
        if (eat("||") || eat("|") || eat("∨")) return Tok::Or;
        if (eat("!") || eat("~") || eat("¬")) return Tok::Not;
        if (eat("(")) return Tok::LParen;
        if (eat(")")) return Tok::RParen;
        if (eat("=")) return Tok::Equals;
        fail(column, "unexpected character '" + std::string(1, s_[pos_]) + "'");
    }

    [[noreturn]] static void fail(std::size_t column, const std::string& msg) {
        throw InputError("formula column " + std::to_string(column) + ": " + msg);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

std::shared_ptr<Expr> node(Op op, std::vector<ExprPtr> args = {}) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->args = std::move(args);
    return e;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    ExprPtr parse_all() {
        ExprPtr e = iff();
        if (peek().kind != Tok::End) fail("unexpected '" + describe(peek()) + "'");
        return e;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    Token take() { return toks_[pos_++]; }
    bool accept(Tok k) {
        if (peek().kind != k) return false;
        ++pos_;
        return true;
    }

    static std::string describe(const Token& t) { return t.kind == Tok::End ? "end of input" : t.text.empty() ? "operator" : t.text; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw InputError("formula column " + std::to_string(peek().column) + ": " + msg);
    }

    ExprPtr iff() {
        ExprPtr lhs = implies();
        while (accept(Tok::Iff)) lhs = node(Op::Iff, {lhs, implies()});
        return lhs;
    }

    ExprPtr implies() {
        ExprPtr lhs = disj();
        if (accept(Tok::Implies)) return node(Op::Implies, {lhs, implies()});
        return lhs;
    }

    ExprPtr disj() {
        ExprPtr lhs = conj();
        while (accept(Tok::Or)) lhs = node(Op::Or, {lhs, conj()});
        return lhs;
    }

    ExprPtr conj() {
        ExprPtr lhs = binary_temporal();
        while (accept(Tok::And)) lhs = node(Op::And, {lhs, binary_temporal()});
        return lhs;
    }

    ExprPtr binary_temporal() {
        ExprPtr lhs = unary();
        const Tok k = peek().kind;
        if (k == Tok::Until || k == Tok::WeakUntil || k == Tok::Release) {
            ++pos_;
            const Op op = k == Tok::Until ? Op::Until : k == Tok::WeakUntil ? Op::WeakUntil : Op::Release;
            return node(op, {lhs, binary_temporal()});
        }
        return lhs;
    }

    ExprPtr unary() {
        switch (peek().kind) {
            case Tok::Not: ++pos_; return node(Op::Not, {unary()});
            case Tok::Next: ++pos_; return node(Op::Next, {unary()});
            case Tok::Eventually: ++pos_; return node(Op::Eventually, {unary()});
            case Tok::Always: ++pos_; return node(Op::Always, {unary()});
            default: return primary();
        }
    }

    ExprPtr primary() {
        if (accept(Tok::LParen)) {
            ExprPtr e = iff();
            if (!accept(Tok::RParen)) fail("expected ')'");
            return e;
        }
        if (accept(Tok::True)) return node(Op::True);
        if (accept(Tok::False)) return node(Op::False);
        if (peek().kind == Tok::Ident) {
            auto e = node(Op::Atom);
            e->name = take().text;
            if (accept(Tok::Equals)) {
                if (peek().kind != Tok::Value) fail("expected a value after '='");
                e->value = take().text;
            }
            return e;
        }
        fail("expected a proposition, found " + describe(peek()));
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

ExprPtr parse(std::string_view text) { return Parser(Lexer(text).run()).parse_all(); }

const char* op_name(Op op) {
    switch (op) {
        case Op::True: return "true";
        case Op::False: return "false";
        case Op::Atom: return "atom";
        case Op::Not: return "!";
        case Op::And: return "&";
        case Op::Or: return "|";
        case Op::Implies: return "->";
        case Op::Iff: return "<->";
        case Op::Next: return "X";
        case Op::Eventually: return "F";
        case Op::Always: return "G";
        case Op::Until: return "U";
        case Op::WeakUntil: return "W";
        case Op::Release: return "R";
    }
    return "?";
}

std::string to_string(const ExprPtr& e) {
    if (!e) return "true";
    switch (e->op) {
        case Op::True:
        case Op::False: return op_name(e->op);
        case Op::Atom: return e->value.empty() ? e->name : e->name + "=" + e->value;
        case Op::Not:
        case Op::Next:
        case Op::Eventually:
        case Op::Always: {
            const std::string inner = to_string(e->args[0]);
            const bool bare = e->args[0]->op == Op::Atom || e->args[0]->op == Op::True || e->args[0]->op == Op::False;
            const std::string sep = e->op == Op::Not ? "" : " ";
            return std::string(op_name(e->op)) + sep + (bare ? inner : "(" + inner + ")");
        }
        default:
            return "(" + to_string(e->args[0]) + " " + op_name(e->op) + " " + to_string(e->args[1]) + ")";
    }
}

bool is_boolean(const ExprPtr& e) {
    if (!e) return true;
    switch (e->op) {
        case Op::Next:
        case Op::Eventually:
        case Op::Always:
        case Op::Until:
        case Op::WeakUntil:
        case Op::Release: return false;
        default: break;
    }
    return std::all_of(e->args.begin(), e->args.end(), [](const ExprPtr& a) { return is_boolean(a); });
}

ExprPtr make_true() { return node(Op::True); }

ExprPtr make_atom(std::string name) {
    auto e = node(Op::Atom);
    e->name = std::move(name);
    return e;
}

ExprPtr make_not(ExprPtr a) { return node(Op::Not, {std::move(a)}); }
ExprPtr make_or(ExprPtr a, ExprPtr b) { return node(Op::Or, {std::move(a), std::move(b)}); }
ExprPtr make_and(ExprPtr a, ExprPtr b) { return node(Op::And, {std::move(a), std::move(b)}); }

bool Predicate::eval(const Valuation& v) const {
    if (nodes_.empty()) return true;
    return eval_node(static_cast<std::uint32_t>(nodes_.size() - 1), v);
}

bool Predicate::eval_node(std::uint32_t k, const Valuation& v) const {
    const Node& n = nodes_[k];
    switch (n.kind) {
        case Kind::True: return true;
        case Kind::False: return false;
        case Kind::Label: return (*v.labels)[n.a] != 0;
        case Kind::Bit: return (v.bits >> n.a) & 1U;
        case Kind::Env: {
            std::size_t e = v.env;
            for (std::uint32_t i = 0; i < n.a; ++i) e /= env_sizes_[i];
            return e % env_sizes_[n.a] == n.b;
        }
        case Kind::Not: return !eval_node(n.a, v);
        case Kind::And: return eval_node(n.a, v) && eval_node(n.b, v);
        case Kind::Or: return eval_node(n.a, v) || eval_node(n.b, v);
        case Kind::Implies: return !eval_node(n.a, v) || eval_node(n.b, v);
        case Kind::Iff: return eval_node(n.a, v) == eval_node(n.b, v);
    }
    return false;
}

Predicate compile(const ExprPtr& e, const Vocabulary& vocab, bool allow_bits) {
    Predicate p;
    p.source_ = to_string(e);
    for (const auto& var : vocab.env.variables()) p.env_sizes_.push_back(var.values.size());
    using Kind = Predicate::Kind;
    auto push = [&](Kind kind, std::uint32_t a = 0, std::uint32_t b = 0) {
        p.nodes_.push_back({kind, a, b});
        return static_cast<std::uint32_t>(p.nodes_.size() - 1);
    };
    std::function<std::uint32_t(const ExprPtr&)> walk = [&](const ExprPtr& x) -> std::uint32_t {
        switch (x->op) {
            case Op::True: return push(Kind::True);
            case Op::False: return push(Kind::False);
            case Op::Not: return push(Kind::Not, walk(x->args[0]));
            case Op::And:
            case Op::Or:
            case Op::Implies:
            case Op::Iff: {
                const std::uint32_t a = walk(x->args[0]);
                const std::uint32_t b = walk(x->args[1]);
                const Kind k = x->op == Op::And ? Kind::And : x->op == Op::Or ? Kind::Or
                               : x->op == Op::Implies ? Kind::Implies : Kind::Iff;
                return push(k, a, b);
            }
            case Op::Atom: break;
            default:
                throw InputError("temporal operator '" + std::string(op_name(x->op)) + "' not allowed in '" +
                                 p.source_ + "'");
        }
        const auto& labels = vocab.labels;
        if (auto it = std::find(labels.begin(), labels.end(), x->name); it != labels.end()) {
            if (!x->value.empty()) throw InputError("proposition '" + x->name + "' takes no value");
            return push(Kind::Label, static_cast<std::uint32_t>(it - labels.begin()));
        }
        if (auto it = std::find(vocab.bits.begin(), vocab.bits.end(), x->name); it != vocab.bits.end()) {
            if (!allow_bits) throw InputError("memory bit '" + x->name + "' cannot be used here");
            if (!x->value.empty()) throw InputError("memory bit '" + x->name + "' takes no value");
            p.uses_bits_ = true;
            return push(Kind::Bit, static_cast<std::uint32_t>(it - vocab.bits.begin()));
        }
        const auto& vars = vocab.env.variables();
        for (std::size_t k = 0; k < vars.size(); ++k) {
            if (vars[k].name != x->name) continue;
            const auto& vals = vars[k].values;
            std::vector<std::string> wanted;
            if (x->value.empty()) {
                wanted = {"true", "1"};
            } else {
                wanted = {x->value};
            }
            for (const auto& w : wanted) {
                if (auto v = std::find(vals.begin(), vals.end(), w); v != vals.end()) {
                    return push(Kind::Env, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(v - vals.begin()));
                }
            }
            if (x->value.empty())
                throw InputError("environment variable '" + x->name + "' is not Boolean; write " + x->name + "=<value>");
            throw InputError("environment variable '" + x->name + "' has no value '" + x->value + "'");
        }
        throw InputError("unknown name '" + x->name + "' in '" + p.source_ + "'");
    };
    if (e) walk(e);
    return p;
}

}  // namespace dualsynth::formula
