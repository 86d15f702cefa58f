#include "rmkit/guard.hpp"

#include <cctype>
#include <sstream>

namespace rmkit {

Guard Guard::boolean(std::string name, bool negated) {
  Guard g;
  g.kind_ = Kind::BoolAtom;
  g.name_ = std::move(name);
  g.negated_ = negated;
  return g;
}

Guard Guard::numeric(std::string var, NumericFeatureValue test) {
  Guard g;
  g.kind_ = Kind::NumericAtom;
  g.name_ = std::move(var);
  g.test_ = test;
  return g;
}

Guard Guard::conj(std::vector<Guard> children) {
  if (children.empty()) return truth();
  if (children.size() == 1) return children.front();
  Guard g;
  g.kind_ = Kind::And;
  g.children_ = std::move(children);
  return g;
}

Guard Guard::disj(std::vector<Guard> children) {
  if (children.size() == 1) return children.front();
  Guard g;
  g.kind_ = Kind::Or;
  g.children_ = std::move(children);
  return g;
}

bool Guard::eval(const TruthAssignment& t) const {
  switch (kind_) {
    case Kind::True:
      return true;
    case Kind::BoolAtom: {
      bool v = t.boolean(name_);
      return negated_ ? !v : v;
    }
    case Kind::NumericAtom:
      return t.numeric(name_) == test_;
    case Kind::And:
      for (const auto& c : children_)
        if (!c.eval(t)) return false;
      return true;
    case Kind::Or:
      for (const auto& c : children_)
        if (c.eval(t)) return true;
      return false;
  }
  return false;
}

void Guard::collect_bool(std::set<std::string>& out) const {
  if (kind_ == Kind::BoolAtom) out.insert(name_);
  for (const auto& c : children_) c.collect_bool(out);
}

void Guard::collect_numeric(std::set<std::string>& out,
                            bool consuming_only) const {
  if (kind_ == Kind::NumericAtom &&
      (!consuming_only || test_ != NumericFeatureValue::NoProgress))
    out.insert(name_);
  for (const auto& c : children_) c.collect_numeric(out, consuming_only);
}

void Guard::collect_positive(std::set<std::string>& out) const {
  if (kind_ == Kind::BoolAtom && !negated_) out.insert(name_);
  for (const auto& c : children_) c.collect_positive(out);
}

std::set<std::string> Guard::boolean_atoms() const {
  std::set<std::string> out;
  collect_bool(out);
  return out;
}

std::set<std::string> Guard::numeric_atoms() const {
  std::set<std::string> out;
  collect_numeric(out, false);
  return out;
}

std::set<std::string> Guard::consuming_numeric_atoms() const {
  std::set<std::string> out;
  collect_numeric(out, true);
  return out;
}

std::set<std::string> Guard::positive_boolean_atoms() const {
  std::set<std::string> out;
  collect_positive(out);
  return out;
}

std::string Guard::render(bool parenthesise) const {
  switch (kind_) {
    case Kind::True:
      return "true";
    case Kind::BoolAtom:
      return (negated_ ? "!" : "") + name_;
    case Kind::NumericAtom:
      return rmkit::to_string(test_) + "(" + name_ + ")";
    case Kind::And:
    case Kind::Or: {
      std::string sep = kind_ == Kind::And ? " & " : " | ";
      std::string s;
      for (size_t i = 0; i < children_.size(); ++i) {
        if (i) s += sep;
        s += children_[i].render(true);
      }
      return parenthesise ? "(" + s + ")" : s;
    }
  }
  return "?";
}

std::string Guard::to_string() const { return render(false); }

namespace {

// Recursive-descent parser for: expr := term ('|' term)*
//                               term := factor ('&' factor)*
//                               factor := atom | '(' expr ')'
//                               atom := NAME | !NAME | dec(NAME) | done(NAME)
//                                       | live(NAME) | true
class GuardParser {
 public:
  explicit GuardParser(const std::string& text) : text_(text) {}

  Guard parse() {
    Guard g = expr();
    skip_ws();
    if (pos_ != text_.size())
      throw SpecificationError("trailing input in guard: '" + text_ + "'");
    return g;
  }

 private:
  const std::string& text_;
  size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace((unsigned char)text_[pos_]))
      ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string name() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum((unsigned char)text_[pos_]) || text_[pos_] == '_'))
      ++pos_;
    if (start == pos_)
      throw SpecificationError("expected identifier at position " +
                               std::to_string(start) + " in guard '" + text_ +
                               "'");
    return text_.substr(start, pos_ - start);
  }

  Guard expr() {
    std::vector<Guard> terms{term()};
    while (consume('|')) terms.push_back(term());
    return Guard::disj(std::move(terms));
  }

  Guard term() {
    std::vector<Guard> factors{factor()};
    while (consume('&')) factors.push_back(factor());
    return Guard::conj(std::move(factors));
  }

  Guard factor() {
    if (consume('(')) {
      Guard g = expr();
      if (!consume(')'))
        throw SpecificationError("missing ')' in guard '" + text_ + "'");
      return g;
    }
    if (consume('!')) return Guard::boolean(name(), true);
    std::string id = name();
    if (id == "true") return Guard::truth();
    if ((id == "dec" || id == "done" || id == "live") && consume('(')) {
      std::string var = name();
      if (!consume(')'))
        throw SpecificationError("missing ')' in guard '" + text_ + "'");
      NumericFeatureValue v = id == "dec"    ? NumericFeatureValue::Decreased
                              : id == "done" ? NumericFeatureValue::AtBound
                                             : NumericFeatureValue::NoProgress;
      return Guard::numeric(var, v);
    }
    return Guard::boolean(id);
  }
};

}  // namespace

Guard parse_guard(const std::string& text) { return GuardParser(text).parse(); }

}  // namespace rmkit
