#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "assocdb/errors.hpp"

namespace assocdb {

/// Splits a D4M string list. The final character of `s` is the delimiter:
/// "alice bob " -> {"alice", "bob"}, "e1," -> {"e1"}.
inline std::vector<std::string> parse_keylist(std::string_view s) {
  if (s.empty()) throw KeyListError("empty key list");
  const char delim = s.back();
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (start < s.size()) {
    std::size_t end = s.find(delim, start);
    fields.emplace_back(s.substr(start, end - start));
    start = end + 1;
  }
  return fields;
}

/// Row or column selector for indexing arrays and querying tables.
///
/// Implicitly constructible from a D4M string list so that call sites read
/// like `A("alice,", ":")` or `query(Tedge, ":", "v1,")`:
///   ":"               all keys
///   "a,b,"            the listed keys
///   "alice,:,bob,"    inclusive range
///   "al*,"            byte prefix
/// Positional selection has no string form; use KeySpec::positional.
class KeySpec {
 public:
  struct All {
    bool operator==(const All&) const = default;
  };
  struct List {
    std::vector<std::string> keys;  // sorted, unique
    bool operator==(const List&) const = default;
  };
  struct Range {
    std::string first;
    std::string last;
    bool operator==(const Range&) const = default;
  };
  struct Prefix {
    std::string prefix;
    bool operator==(const Prefix&) const = default;
  };
  // 1-based, inclusive, over the keys present in the array.
  struct Positional {
    std::size_t first = 1;
    std::size_t last = 1;
    bool operator==(const Positional&) const = default;
  };
  using Variant = std::variant<All, List, Range, Prefix, Positional>;

  KeySpec() = default;
  KeySpec(const char* d4m) : KeySpec(parse(d4m)) {}
  KeySpec(const std::string& d4m) : KeySpec(parse(d4m)) {}
  KeySpec(std::string_view d4m) : KeySpec(parse(d4m)) {}

  static KeySpec all() { return KeySpec(All{}); }

  static KeySpec list(std::vector<std::string> keys) {
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return KeySpec(List{std::move(keys)});
  }

  static KeySpec range(std::string first, std::string last) {
    if (last < first) throw KeyListError("range start '" + first + "' sorts after end '" + last + "'");
    return KeySpec(Range{std::move(first), std::move(last)});
  }

  static KeySpec prefix(std::string p) { return KeySpec(Prefix{std::move(p)}); }

  static KeySpec positional(std::size_t first, std::size_t last) {
    if (first < 1 || last < first) throw KeyListError("positional range must satisfy 1 <= first <= last");
    return KeySpec(Positional{first, last});
  }

  static KeySpec parse(std::string_view d4m) {
    if (d4m == ":") return all();
    auto fields = parse_keylist(d4m);
    if (fields.size() == 3 && fields[1] == ":") return range(std::move(fields[0]), std::move(fields[2]));
    if (fields.size() == 1 && !fields[0].empty() && fields[0].back() == '*') {
      fields[0].pop_back();
      return prefix(std::move(fields[0]));
    }
    return list(std::move(fields));
  }

  const Variant& get() const { return spec_; }
  bool is_all() const { return std::holds_alternative<All>(spec_); }
  bool is_positional() const { return std::holds_alternative<Positional>(spec_); }

  /// Key predicate for every kind except Positional, which depends on the
  /// key's ordinal rather than its text.
  bool matches(std::string_view key) const {
    return std::visit(
        [&](const auto& s) -> bool {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, All>) {
            return true;
          } else if constexpr (std::is_same_v<T, List>) {
            return std::binary_search(s.keys.begin(), s.keys.end(), key, std::less<>{});
          } else if constexpr (std::is_same_v<T, Range>) {
            return key >= s.first && key <= s.last;
          } else if constexpr (std::is_same_v<T, Prefix>) {
            return key.starts_with(s.prefix);
          } else {
            throw UnsupportedQuery("positional key spec has no per-key predicate");
          }
        },
        spec_);
  }

  /// Indices into `sorted_keys` selected by this spec, ascending.
  std::vector<std::size_t> select(const std::vector<std::string>& sorted_keys) const {
    std::vector<std::size_t> out;
    if (const auto* pos = std::get_if<Positional>(&spec_)) {
      const std::size_t last = std::min(pos->last, sorted_keys.size());
      for (std::size_t i = pos->first; i <= last; ++i) out.push_back(i - 1);
      return out;
    }
    if (const auto* lst = std::get_if<List>(&spec_)) {
      for (const auto& k : lst->keys) {
        auto it = std::lower_bound(sorted_keys.begin(), sorted_keys.end(), k);
        if (it != sorted_keys.end() && *it == k) out.push_back(static_cast<std::size_t>(it - sorted_keys.begin()));
      }
      return out;
    }
    for (std::size_t i = 0; i < sorted_keys.size(); ++i) {
      if (matches(sorted_keys[i])) out.push_back(i);
    }
    return out;
  }

  bool operator==(const KeySpec&) const = default;

 private:
  explicit KeySpec(Variant v) : spec_(std::move(v)) {}
  Variant spec_{All{}};
};

}  // namespace assocdb
