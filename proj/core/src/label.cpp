#include "ramc/label.hpp"

#include <cctype>

namespace ramc {
namespace {

void append_quoted_atom(std::string& out, std::string_view s) {
  out += '\'';
  for (char c : s) {
    if (c == '\\' || c == '\'') out += '\\';
    out += c;
  }
  out += '\'';
}

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  void skip_ws() {
    while (!done() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }
  bool eat(char c) {
    if (!done() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
};

/// Atom delimited by single or double quotes, backslash escapes any character.
std::optional<std::string> parse_quoted(Cursor& cur) {
  char quote = cur.peek();
  ++cur.pos;
  std::string out;
  while (!cur.done()) {
    char c = cur.text[cur.pos];
    if (c == '\\' && cur.pos + 1 < cur.text.size()) {
      out += cur.text[cur.pos + 1];
      cur.pos += 2;
      continue;
    }
    if (c == quote) {
      ++cur.pos;
      return out;
    }
    out += c;
    ++cur.pos;
  }
  return std::nullopt;  // unterminated
}

/// Bracketed list captured verbatim, respecting nested brackets and quotes.
std::optional<std::string> parse_bracketed(Cursor& cur) {
  std::size_t start = cur.pos;
  int depth = 0;
  while (!cur.done()) {
    char c = cur.text[cur.pos];
    if (c == '\'' || c == '"') {
      if (!parse_quoted(cur)) return std::nullopt;
      continue;
    }
    if (c == '[') ++depth;
    if (c == ']') {
      --depth;
      if (depth == 0) {
        ++cur.pos;
        return std::string(cur.text.substr(start, cur.pos - start));
      }
    }
    ++cur.pos;
  }
  return std::nullopt;
}

std::optional<std::string> parse_bare(Cursor& cur) {
  std::size_t start = cur.pos;
  while (!cur.done()) {
    char c = cur.text[cur.pos];
    if (c == ',' || c == '}' || c == ':') break;
    ++cur.pos;
  }
  std::string out(cur.text.substr(start, cur.pos - start));
  while (!out.empty() && (out.back() == ' ' || out.back() == '\t')) out.pop_back();
  if (out.empty()) return std::nullopt;
  return out;
}

std::optional<std::string> parse_atom(Cursor& cur) {
  cur.skip_ws();
  if (cur.done()) return std::nullopt;
  char c = cur.peek();
  if (c == '\'' || c == '"') return parse_quoted(cur);
  if (c == '[') return parse_bracketed(cur);
  return parse_bare(cur);
}

std::optional<Label::Dict> parse_dict(Cursor& cur) {
  if (!cur.eat('{')) return std::nullopt;
  Label::Dict dict;
  cur.skip_ws();
  if (cur.eat('}')) return dict;
  for (;;) {
    auto k = parse_atom(cur);
    if (!k) return std::nullopt;
    cur.skip_ws();
    if (!cur.eat(':')) return std::nullopt;
    auto v = parse_atom(cur);
    if (!v) return std::nullopt;
    dict.emplace_back(std::move(*k), std::move(*v));
    cur.skip_ws();
    if (cur.eat('}')) return dict;
    if (!cur.eat(',')) return std::nullopt;
    cur.skip_ws();
  }
}

}  // namespace

bool Label::has(std::string_view key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return true;
  return false;
}

const std::string* Label::get(std::string_view key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return std::get_if<std::string>(&v);
  return nullptr;
}

const Label::Dict* Label::get_dict(std::string_view key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return std::get_if<Dict>(&v);
  return nullptr;
}

std::string Label::get_or(std::string_view key, std::string_view fallback) const {
  const std::string* s = get(key);
  return s ? *s : std::string(fallback);
}

void Label::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

void Label::set_dict(std::string key, Dict value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

void Label::erase(std::string_view key) {
  for (auto it = entries_.begin(); it != entries_.end(); ++it) {
    if (it->first == key) {
      entries_.erase(it);
      return;
    }
  }
}

std::string Label::to_text() const {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : entries_) {
    if (!first) out += ", ";
    first = false;
    append_quoted_atom(out, k);
    out += ": ";
    if (const auto* s = std::get_if<std::string>(&v)) {
      append_quoted_atom(out, *s);
    } else {
      const auto& dict = std::get<Dict>(v);
      out += '{';
      bool inner_first = true;
      for (const auto& [dk, dv] : dict) {
        if (!inner_first) out += ", ";
        inner_first = false;
        append_quoted_atom(out, dk);
        out += ": ";
        append_quoted_atom(out, dv);
      }
      out += '}';
    }
  }
  out += '}';
  return out;
}

std::optional<Label> Label::parse(std::string_view text) {
  Cursor cur{text};
  cur.skip_ws();
  if (cur.done() || cur.peek() != '{') return std::nullopt;
  ++cur.pos;
  Label label;
  cur.skip_ws();
  if (cur.eat('}')) {
    cur.skip_ws();
    if (!cur.done()) return std::nullopt;
    return label;
  }
  for (;;) {
    auto k = parse_atom(cur);
    if (!k) return std::nullopt;
    cur.skip_ws();
    if (!cur.eat(':')) return std::nullopt;
    cur.skip_ws();
    if (!cur.done() && cur.peek() == '{') {
      auto dict = parse_dict(cur);
      if (!dict) return std::nullopt;
      label.set_dict(std::move(*k), std::move(*dict));
    } else {
      auto v = parse_atom(cur);
      if (!v) return std::nullopt;
      label.set(std::move(*k), std::move(*v));
    }
    cur.skip_ws();
    if (cur.eat('}')) {
      cur.skip_ws();
      if (!cur.done()) return std::nullopt;
      return label;
    }
    if (!cur.eat(',')) return std::nullopt;
  }
}

Label project(const Label& label, LabelProjection p) {
  if (p == LabelProjection::Full) return label;
  Label out;
  if (p == LabelProjection::None) return out;
  if (const std::string* ct = label.get(key::kChangeType)) out.set(key::kChangeType, *ct);
  if (p == LabelProjection::Change) return out;
  // Type: changeType + structural type information.
  if (const std::string* t = label.get(key::kType)) out.set(key::kType, *t);
  if (const std::string* c = label.get(key::kClassName)) out.set(key::kClassName, *c);
  if (const std::string* r = label.get(key::kReferenceTypeName))
    out.set(key::kReferenceTypeName, *r);
  return out;
}

Label without_attribute_id(const Label& label) {
  Label out = label;
  const Label::Dict* attrs = label.get_dict(key::kAttributes);
  if (!attrs) return out;
  Label::Dict stripped;
  for (const auto& [k, v] : *attrs)
    if (k != key::kId) stripped.emplace_back(k, v);
  out.set_dict(key::kAttributes, std::move(stripped));
  return out;
}

const char* to_string(LabelProjection p) {
  switch (p) {
    case LabelProjection::None: return "NONE";
    case LabelProjection::Change: return "CHANGE";
    case LabelProjection::Type: return "TYPE";
    case LabelProjection::Full: return "FULL";
  }
  return "?";
}

}  // namespace ramc
