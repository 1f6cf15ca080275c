#include "kcq/automata.hpp"
#include "kcq/errors.hpp"

#include <cctype>
#include <memory>

namespace kcq {

namespace {

// Boolean guard over propositions, evaluated against every letter.
struct GuardNode {
    enum class Kind { True, False, Prop, Not, And, Or } kind;
    std::size_t prop = 0;
    std::unique_ptr<GuardNode> lhs, rhs;

    bool eval(PropSet letter) const {
        switch (kind) {
            case Kind::True: return true;
            case Kind::False: return false;
            case Kind::Prop: return (letter >> prop) & 1u;
            case Kind::Not: return !lhs->eval(letter);
            case Kind::And: return lhs->eval(letter) && rhs->eval(letter);
            case Kind::Or: return lhs->eval(letter) || rhs->eval(letter);
        }
        return false;
    }
};

using NodePtr = std::unique_ptr<GuardNode>;

class GuardParser {
public:
    GuardParser(std::string_view text, const std::vector<std::string>& ap, std::size_t line, std::size_t offset)
        : text_(text), ap_(ap), line_(line), offset_(offset) {}

    NodePtr parse() {
        auto node = parse_or();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "' in guard");
        return node;
    }

private:
    NodePtr parse_or() {
        auto lhs = parse_and();
        while (accept('|')) {
            accept('|');  // allow "||"
            lhs = binary(GuardNode::Kind::Or, std::move(lhs), parse_and());
        }
        return lhs;
    }

    NodePtr parse_and() {
        auto lhs = parse_unary();
        while (accept('&')) {
            accept('&');
            lhs = binary(GuardNode::Kind::And, std::move(lhs), parse_unary());
        }
        return lhs;
    }

    NodePtr parse_unary() {
        if (accept('!')) {
            auto node = std::make_unique<GuardNode>();
            node->kind = GuardNode::Kind::Not;
            node->lhs = parse_unary();
            return node;
        }
        if (accept('(')) {
            auto node = parse_or();
            if (!accept(')')) fail("expected ')'");
            return node;
        }
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (start == pos_) fail("expected proposition");
        const std::string_view name = text_.substr(start, pos_ - start);
        auto node = std::make_unique<GuardNode>();
        if (name == "true") {
            node->kind = GuardNode::Kind::True;
        } else if (name == "false") {
            node->kind = GuardNode::Kind::False;
        } else {
            node->kind = GuardNode::Kind::Prop;
            bool found = false;
            for (std::size_t i = 0; i < ap_.size(); ++i) {
                if (ap_[i] == name) {
                    node->prop = i;
                    found = true;
                }
            }
            if (!found) {
                throw SemanticError({"proposition '" + std::string(name) + "' not declared (line " +
                                     std::to_string(line_) + ", column " + std::to_string(offset_ + start + 1) + ")"});
            }
        }
        return node;
    }

    static NodePtr binary(GuardNode::Kind kind, NodePtr lhs, NodePtr rhs) {
        auto node = std::make_unique<GuardNode>();
        node->kind = kind;
        node->lhs = std::move(lhs);
        node->rhs = std::move(rhs);
        return node;
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, offset_ + pos_ + 1); }

    std::string_view text_;
    const std::vector<std::string>& ap_;
    std::size_t line_;
    std::size_t offset_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<PropSet> expand_guard(std::string_view expr, const std::vector<std::string>& ap, std::size_t line,
                                  std::size_t column_offset) {
    GuardParser parser(expr, ap, line, column_offset);
    const NodePtr root = parser.parse();
    std::vector<PropSet> letters;
    const PropSet count = PropSet{1} << ap.size();
    for (PropSet letter = 0; letter < count; ++letter)
        if (root->eval(letter)) letters.push_back(letter);
    return letters;
}

}  // namespace kcq
