#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace ramc {

/// Change-type and structural-type vocabulary used in difference/change graphs.
namespace change {
inline constexpr const char* kAdd = "Add";
inline constexpr const char* kPreserve = "Preserve";
inline constexpr const char* kRemove = "Remove";
inline constexpr const char* kChange = "Change";
}  // namespace change

namespace element {
inline constexpr const char* kObject = "object";
inline constexpr const char* kReference = "reference";
inline constexpr const char* kAttributeValueChange = "attributeValueChange";
inline constexpr const char* kAttributeChange = "attributeChange";
}  // namespace element

namespace key {
inline constexpr const char* kChangeType = "changeType";
inline constexpr const char* kType = "type";
inline constexpr const char* kClassName = "className";
inline constexpr const char* kReferenceTypeName = "referenceTypeName";
inline constexpr const char* kAttributes = "attributes";
inline constexpr const char* kAttributeName = "attributeName";
inline constexpr const char* kValueBefore = "valueBefore";
inline constexpr const char* kValueAfter = "valueAfter";
inline constexpr const char* kId = "id";
}  // namespace key

/// Insertion-ordered map from string keys to string values or one nested
/// string->string map (the `attributes` key). Order matters: the textual
/// rendering is order-sensitive and must be byte-stable.
class Label {
 public:
  using Dict = std::vector<std::pair<std::string, std::string>>;
  using Value = std::variant<std::string, Dict>;
  using Entry = std::pair<std::string, Value>;

  Label() = default;

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  bool has(std::string_view key) const;
  /// String value for `key`, or nullptr when absent or map-valued.
  const std::string* get(std::string_view key) const;
  const Dict* get_dict(std::string_view key) const;
  std::string get_or(std::string_view key, std::string_view fallback) const;

  /// Inserts or overwrites in place (insertion position is kept on overwrite).
  void set(std::string key, std::string value);
  void set_dict(std::string key, Dict value);
  void erase(std::string_view key);

  bool operator==(const Label& other) const { return entries_ == other.entries_; }
  bool operator!=(const Label& other) const { return !(*this == other); }

  /// Canonical single-quote map notation, e.g.
  /// {'changeType': 'Add', 'type': 'object', 'className': 'Port', 'attributes': {'id': 'p1'}}
  std::string to_text() const;

  /// Parses the single-quote map notation. Tolerates double-quoted atoms,
  /// bare tokens and bracketed lists (both captured verbatim as strings).
  /// Returns nullopt on malformed input.
  static std::optional<Label> parse(std::string_view text);

 private:
  std::vector<Entry> entries_;
};

enum class LabelProjection { None, Change, Type, Full };

/// Reduces a label per the projection refinement chain None < Change < Type < Full.
Label project(const Label& label, LabelProjection p);

/// Copy with the `id` entry removed from the nested attributes map. Used for
/// fresh-id abstraction when comparing graphs whose generated ids cannot match.
Label without_attribute_id(const Label& label);

const char* to_string(LabelProjection p);

}  // namespace ramc
