#pragma once

// The function mini-language of the command-line tool:
//
//   product:<factor>(args)[,...]     additive:[const(c),]<factor>(args)[,...]
//   rect:eps=<list>[,offset=<list>]  gfunction:a=<list>
//   grid:<json path>                 extern:<shell command>
//
// Factors: linear([mu,]tau), cosine([mu,]tau), indicator(eps[,offset]),
// g(a), table(v1,...,vm).  A one-argument linear/cosine takes mu = 1 in a
// product and mu = 0 in a sum.

#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hosi/cli/external_evaluator.hpp"
#include "hosi/core.hpp"
#include "hosi/oracles.hpp"

namespace hosi::cli {

class SpecParseError : public Error {
public:
    SpecParseError(const std::string& msg, std::size_t pos)
        : Error("function spec, position " + std::to_string(pos) + ": " + msg), position_(pos) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

enum class FunctionKind { product, rect, additive, gfunction, grid, external };

struct FunctionSpec {
    FunctionKind kind = FunctionKind::product;
    std::string text;
    int dim = 0;
    std::optional<ProductFunctionSpec> product;  // product and gfunction
    std::optional<RectangleSpec> rect;
    std::optional<AdditiveSpec> additive;
    std::optional<GridFunction> grid;
    std::string command;

    bool oracle_capable() const noexcept { return kind != FunctionKind::external; }

    /// Evaluable function; an external command gets a pool with one child
    /// session per concurrently evaluating worker.
    BlackBoxFunction make_function(double timeout_seconds = 30.0) const {
        switch (kind) {
            case FunctionKind::product:
            case FunctionKind::gfunction: return product->as_function();
            case FunctionKind::rect: return rect->as_function();
            case FunctionKind::additive: return additive->as_function();
            case FunctionKind::grid: return grid->as_function();
            case FunctionKind::external: {
                auto pool = std::make_shared<ExternalEvaluatorPool>(ExternalOptions{command, dim, timeout_seconds});
                return pool->function();
            }
        }
        throw Error("unreachable function kind");
    }

    OracleValue oracle(const VarSubset& u, int p, IndexFamily family, int base = 2) const {
        switch (kind) {
            case FunctionKind::product:
            case FunctionKind::gfunction: return product_indices(*product, u, p, family, base);
            case FunctionKind::rect: return rectangle_indices(*rect, u, p, family, base);
            case FunctionKind::additive: return additive_indices(*additive, u, p, family, base);
            case FunctionKind::grid: return brute_force_grid(*grid, u, p, family, base);
            case FunctionKind::external: break;
        }
        throw OracleUnavailable("external functions have no oracle; use the estimate command");
    }
};

namespace detail {

class SpecCursor {
public:
    SpecCursor(std::string_view text, std::size_t offset) : text_(text), base_(offset) {}

    bool done() const { return pos_ >= text_.size(); }
    char peek() const { return done() ? '\0' : text_[pos_]; }
    std::size_t where() const { return base_ + pos_; }

    [[noreturn]] void fail(const std::string& msg) const { throw SpecParseError(msg, where()); }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'" + (done() ? " at end of input" : ", found '" + std::string(1, peek()) + "'"));
        ++pos_;
    }
    bool accept(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }
    bool accept(std::string_view word) {
        if (text_.substr(pos_, word.size()) != word) return false;
        pos_ += word.size();
        return true;
    }

    std::string identifier() {
        const std::size_t start = pos_;
        while (!done() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) ++pos_;
        if (start == pos_) fail("expected a name");
        return std::string(text_.substr(start, pos_ - start));
    }

    double number() {
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        if (first != last && *first == '+') ++first;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr == first) fail("expected a number");
        if (!std::isfinite(v)) fail("number must be finite");
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        return v;
    }

    std::vector<double> number_list() {
        std::vector<double> out{number()};
        while (peek() == ',' && pos_ + 1 < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) || text_[pos_ + 1] == '.' ||
                text_[pos_ + 1] == '-' || text_[pos_ + 1] == '+')) {
            ++pos_;
            out.push_back(number());
        }
        return out;
    }

private:
    std::string_view text_;
    std::size_t base_;
    std::size_t pos_ = 0;
};

inline Factor parse_factor(SpecCursor& cur, double default_mu) {
    const std::size_t start = cur.where();
    const std::string name = cur.identifier();
    cur.expect('(');
    std::vector<double> args = cur.number_list();
    cur.expect(')');
    auto arity = [&](std::size_t lo, std::size_t hi) {
        if (args.size() < lo || args.size() > hi)
            throw SpecParseError(name + " takes " + std::to_string(lo) + (lo == hi ? "" : " to " + std::to_string(hi)) +
                                     " arguments, got " + std::to_string(args.size()),
                                 start);
    };
    try {
        if (name == "linear" || name == "cosine") {
            arity(1, 2);
            const double mu = args.size() == 2 ? args[0] : default_mu;
            const double tau = args.back();
            return name == "linear" ? Factor::linear(mu, tau) : Factor::cosine(mu, tau);
        }
        if (name == "indicator") {
            arity(1, 2);
            return Factor::indicator(args[0], args.size() == 2 ? args[1] : 0.0);
        }
        if (name == "g" || name == "gfunction") {
            arity(1, 1);
            return Factor::gfunction(args[0]);
        }
        if (name == "table") return Factor::table(args);
    } catch (const SpecParseError&) {
        throw;
    } catch (const Error& e) {
        throw SpecParseError(e.what(), start);
    }
    throw SpecParseError("unknown factor '" + name + "' (linear, cosine, indicator, g, table)", start);
}

inline GridFunction load_grid(const std::string& path, std::size_t pos) {
    std::ifstream in(path);
    if (!in) throw SpecParseError("cannot open grid file '" + path + "'", pos);
    nlohmann::json j;
    try {
        in >> j;
        auto shape = j.at("shape").get<std::vector<std::size_t>>();
        auto values = j.at("values").get<std::vector<double>>();
        return GridFunction(std::move(shape), std::move(values));
    } catch (const nlohmann::json::exception& e) {
        throw SpecParseError("grid file '" + path + "': " + e.what(), pos);
    } catch (const Error& e) {
        throw SpecParseError("grid file '" + path + "': " + e.what(), pos);
    }
}

}  // namespace detail

/// Parses a function spec.  `extern_dim` supplies d for external commands.
inline FunctionSpec parse_function_spec(const std::string& text, std::optional<int> extern_dim = std::nullopt) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw SpecParseError("expected '<family>:<arguments>'", 0);
    const std::string family = text.substr(0, colon);
    const std::string_view rest = std::string_view(text).substr(colon + 1);
    detail::SpecCursor cur(rest, colon + 1);
    FunctionSpec spec;
    spec.text = text;

    auto finish = [&] {
        if (!cur.done()) cur.fail("unexpected trailing input");
    };

    if (family == "product") {
        spec.kind = FunctionKind::product;
        ProductFunctionSpec p;
        do p.factors.push_back(detail::parse_factor(cur, 1.0));
        while (cur.accept(','));
        finish();
        spec.dim = p.dim();
        spec.product = std::move(p);
    } else if (family == "additive") {
        spec.kind = FunctionKind::additive;
        AdditiveSpec a;
        if (cur.accept("const(")) {
            a.constant = cur.number();
            cur.expect(')');
            cur.expect(',');
        }
        do a.terms.push_back(detail::parse_factor(cur, 0.0));
        while (cur.accept(','));
        finish();
        spec.dim = a.dim();
        spec.additive = std::move(a);
    } else if (family == "rect") {
        spec.kind = FunctionKind::rect;
        RectangleSpec r;
        if (!cur.accept("eps=")) cur.fail("expected 'eps='");
        r.eps = cur.number_list();
        if (cur.accept(",offset=")) {
            const std::size_t at = cur.where();
            r.offset = cur.number_list();
            if (r.offset.size() != r.eps.size())
                throw SpecParseError("offset list has " + std::to_string(r.offset.size()) + " entries for " +
                                         std::to_string(r.eps.size()) + " sides",
                                     at);
        }
        finish();
        try {
            (void)r.as_product();
        } catch (const Error& e) {
            throw SpecParseError(e.what(), colon + 1);
        }
        spec.dim = r.dim();
        spec.rect = std::move(r);
    } else if (family == "gfunction") {
        spec.kind = FunctionKind::gfunction;
        if (!cur.accept("a=")) cur.fail("expected 'a='");
        const std::size_t at = cur.where();
        auto a = cur.number_list();
        finish();
        try {
            spec.product = ProductFunctionSpec::gfunction(a);
        } catch (const Error& e) {
            throw SpecParseError(e.what(), at);
        }
        spec.dim = static_cast<int>(a.size());
    } else if (family == "grid") {
        spec.kind = FunctionKind::grid;
        if (rest.empty()) cur.fail("expected a grid file path");
        spec.grid = detail::load_grid(std::string(rest), colon + 1);
        spec.dim = spec.grid->dim();
    } else if (family == "extern") {
        spec.kind = FunctionKind::external;
        if (rest.empty()) cur.fail("expected a command");
        if (!extern_dim) throw SpecParseError("external functions need --dim", 0);
        if (*extern_dim < 1 || *extern_dim > kMaxDim) throw SpecParseError("--dim must lie in [1, 63]", 0);
        spec.command = std::string(rest);
        spec.dim = *extern_dim;
    } else {
        throw SpecParseError("unknown family '" + family + "' (product, rect, additive, gfunction, grid, extern)", 0);
    }
    if (spec.dim < 1 || spec.dim > kMaxDim) throw SpecParseError("dimension must lie in [1, 63]", colon + 1);
    if (extern_dim && spec.kind != FunctionKind::external && *extern_dim != spec.dim)
        throw SpecParseError("--dim " + std::to_string(*extern_dim) + " does not match the spec's dimension " +
                                 std::to_string(spec.dim),
                             0);
    return spec;
}

}  // namespace hosi::cli
