#include "doctest.h"
#include "oracles.hpp"
#include "ramc/label.hpp"
#include "ramc/rng.hpp"

using namespace ramc;

TEST_CASE("canonical text uses single-quote map notation in insertion order") {
  Label label;
  label.set(key::kChangeType, "Add");
  label.set(key::kType, "object");
  label.set(key::kClassName, "Port");
  label.set_dict(key::kAttributes, {{"id", "p1"}, {"name", "in"}});
  CHECK(label.to_text() ==
        "{'changeType': 'Add', 'type': 'object', 'className': 'Port', "
        "'attributes': {'id': 'p1', 'name': 'in'}}");
}

TEST_CASE("empty label renders as {}") { CHECK(Label{}.to_text() == "{}"); }

TEST_CASE("parse inverts to_text") {
  Label label;
  label.set(key::kChangeType, "Remove");
  label.set(key::kReferenceTypeName, "ports");
  auto parsed = Label::parse(label.to_text());
  REQUIRE(parsed.has_value());
  CHECK(*parsed == label);
}

TEST_CASE("parse handles escapes, quotes in values, and nested maps") {
  Label label;
  label.set("a", "it's a \\ test");
  label.set("b", "double \" quote");
  label.set_dict(key::kAttributes, {{"id", "x\\"}, {"k", "'quoted'"}});
  auto parsed = Label::parse(label.to_text());
  REQUIRE(parsed.has_value());
  CHECK(*parsed == label);
}

TEST_CASE("parse tolerates bracketed lists and bare tokens as verbatim strings") {
  auto parsed = Label::parse("{'eAnnotations':['a@1 (x)','b@2'], 'abstract':'true'}");
  REQUIRE(parsed.has_value());
  CHECK(parsed->get_or("eAnnotations", "") == "['a@1 (x)','b@2']");
  CHECK(parsed->get_or("abstract", "") == "true");
}

TEST_CASE("parse rejects malformed maps") {
  CHECK_FALSE(Label::parse("not a map").has_value());
  CHECK_FALSE(Label::parse("{'a': }").has_value());
  CHECK_FALSE(Label::parse("{'a': 'b'").has_value());
  CHECK_FALSE(Label::parse("{'a': {'b': {'c': 'd'}}}").has_value());  // too deep
}

TEST_CASE("projection keeps the refinement chain NONE < CHANGE < TYPE < FULL") {
  Label label;
  label.set(key::kChangeType, "Add");
  label.set(key::kType, "object");
  label.set(key::kClassName, "Component");
  label.set_dict(key::kAttributes, {{"id", "c1"}, {"name", "Brake"}});

  CHECK(project(label, LabelProjection::None).empty());

  Label change = project(label, LabelProjection::Change);
  CHECK(change.size() == 1);
  CHECK(change.get_or(key::kChangeType, "") == "Add");

  Label type = project(label, LabelProjection::Type);
  CHECK(type.get_or(key::kChangeType, "") == "Add");
  CHECK(type.get_or(key::kType, "") == "object");
  CHECK(type.get_or(key::kClassName, "") == "Component");
  CHECK_FALSE(type.has(key::kAttributes));

  CHECK(project(label, LabelProjection::Full) == label);
}

TEST_CASE("projection chain is functional: equal finer labels stay equal coarser") {
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    SimpleChangeGraph scg = testing::random_scg(rng, 4);
    for (const auto& [id, label] : scg.graph.nodes) {
      Label full = project(label, LabelProjection::Full);
      Label type = project(label, LabelProjection::Type);
      Label change = project(label, LabelProjection::Change);
      // Type keys are a subset of Full keys; Change of Type equals Change.
      CHECK(project(type, LabelProjection::Change) == change);
      CHECK(project(full, LabelProjection::Type) == type);
    }
  }
}

TEST_CASE("without_attribute_id drops only the id") {
  Label label;
  label.set(key::kClassName, "Port");
  label.set_dict(key::kAttributes, {{"id", "p1"}, {"name", "in"}});
  Label stripped = without_attribute_id(label);
  const Label::Dict* attrs = stripped.get_dict(key::kAttributes);
  REQUIRE(attrs != nullptr);
  REQUIRE(attrs->size() == 1);
  CHECK((*attrs)[0].first == "name");
}
