#include "doctest.h"

#include <algorithm>

#include "clause/document.hpp"
#include "clause/error.hpp"
#include "support.hpp"

using namespace clause;
using testing_support::mf2;

namespace {

GenericDocument tiny() {
  GenericDocument g;
  g.doc_type = "Tiny";
  UnitTemplate a;
  a.label = "A";
  a.versions = {{1, "a1", {}, "", "", {}}, {2, "a2", {}, "", "", {}}};
  UnitTemplate b;
  b.label = "B";
  b.order = 2;
  b.inclusion = Inclusion::Optional;
  UnitTemplate b1;
  b1.label = "B1";
  b1.versions = {{1, "b1", {}, "", "", {}}};
  UnitTemplate b2;
  b2.label = "B2";
  b2.order = 2;
  b2.inclusion = Inclusion::Optional;
  b2.versions = {{1, "b2", {}, "", "", {}}};
  b.children = {b1, b2};
  g.parts = {a, b};
  g.fragments = {{"a1", "A one\n"}, {"a2", "A two\n"}, {"b1", "B one\n"}, {"b2", "B two\n"}};
  return g;
}

bool has_error(const ValidationReport& r, std::string_view needle) {
  return std::any_of(r.errors.begin(), r.errors.end(),
                     [&](const std::string& e) { return e.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("MF/2 fixture encodes the twenty parts with ten optional") {
  GenericDocument g = mf2();
  REQUIRE(g.parts.size() == 20);
  std::vector<std::string> optional;
  for (const auto& p : g.parts)
    if (!p.compulsory()) optional.push_back(p.label);
  CHECK(optional == std::vector<std::string>{"Assignment and Sub-Contracting", "Precedence of Documents",
                                             "Changes in Costs", "Variations", "Defects Liability",
                                             "Taking Over", "Performance Tests", "Accidents and Damage",
                                             "Insurance", "Disputes and Arbitration"});
  const UnitTemplate& ext = resolve_unit(g, {"Time for Completion", "Extension of Time for Completion"});
  CHECK(ext.versions.size() == 2);
  CHECK(ext.versions[0].fragment == "tf1");
  CHECK(ext.versions[1].fragment == "tf2");
  CHECK(resolve_unit(g, {"Time for Completion", "Delays by Sub-Contractors"}).order == 2);
  REQUIRE(g.params.size() == 1);
  CHECK(g.params[0].name == "Engineer");
  CHECK(g.params[0].required);
  ValidationReport r = validate_generic(g);
  CHECK(r.errors.empty());
  CHECK(r.warnings.empty());
}

TEST_CASE("validation catches structural mistakes") {
  CHECK(validate_generic(tiny()).ok());

  GenericDocument dup = tiny();
  dup.parts[1].children[1].label = "B1";
  CHECK(has_error(validate_generic(dup), "duplicate"));

  GenericDocument empty = tiny();
  empty.parts[0].versions.clear();
  CHECK_FALSE(validate_generic(empty).ok());

  GenericDocument gap = tiny();
  gap.parts[0].versions[1].number = 3;
  CHECK_FALSE(validate_generic(gap).ok());

  GenericDocument order = tiny();
  order.parts[1].order = 1;
  CHECK_FALSE(validate_generic(order).ok());

  GenericDocument shared = tiny();
  shared.parts[0].versions[1].fragment = "a1";
  CHECK_FALSE(validate_generic(shared).ok());

  GenericDocument unsafe = tiny();
  unsafe.parts[0].versions[0].fragment = "../etc/passwd";
  CHECK_FALSE(validate_generic(unsafe).ok());

  GenericDocument dangling = tiny();
  dangling.constraints.push_back(Forces{UnitPath{"A"}, UnitPath{"Nowhere"}, std::nullopt});
  CHECK(has_error(validate_generic(dangling), "Nowhere"));

  GenericDocument self = tiny();
  self.constraints.push_back(Incompatible{UnitPath{"B"}, UnitPath{"B"}, std::nullopt});
  CHECK_FALSE(validate_generic(self).ok());

  GenericDocument badparam = tiny();
  badparam.params.push_back({"not valid", ValueKind::String, false, std::nullopt});
  CHECK_FALSE(validate_generic(badparam).ok());

  GenericDocument conflict = tiny();
  conflict.constraints.push_back(Forces{UnitPath{"A"}, UnitPath{"B"}, std::nullopt});
  conflict.constraints.push_back(Incompatible{UnitPath{"A"}, UnitPath{"B"}, std::nullopt});
  ValidationReport r = validate_generic(conflict);
  CHECK(r.ok());
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("navigation and ordering") {
  GenericDocument g = tiny();
  CHECK(resolve_unit(g, {"B", "B2"}).label == "B2");
  CHECK(find_unit(g, {"B", "B3"}) == nullptr);
  CHECK_THROWS_AS(resolve_unit(g, {"C"}), Error);
  CHECK(atomic_units(g) == std::vector<UnitPath>{{"A"}, {"B", "B1"}, {"B", "B2"}});
  CHECK(atomic_units(g, UnitPath{"B"}) == std::vector<UnitPath>{{"B", "B1"}, {"B", "B2"}});
  std::vector<std::string> swapped = {"B", "A"};
  auto o = ordered(g.parts, &swapped);
  CHECK(o[0]->label == "B");
  std::vector<std::string> seen;
  for_each_unit(g, [&](const UnitPath& p, const UnitTemplate&) { seen.push_back(p.str()); });
  CHECK(seen == std::vector<std::string>{"A", "B", "B/B1", "B/B2"});
  CHECK(parse_path("B/B1") == UnitPath{"B", "B1"});
  CHECK(UnitPath{"B"}.is_prefix_of(UnitPath{"B", "B1"}));
  CHECK_FALSE(UnitPath{"B", "B1"}.is_prefix_of(UnitPath{"B"}));
}

TEST_CASE("add_version appends and leaves existing versions alone") {
  GenericDocument g = tiny();
  auto [next, n] = add_version(g, {"A"}, NewVersion{"A three\n", {}, "why", "me", Date{1994, 1, 1}});
  CHECK(n == 3);
  const UnitTemplate& a = resolve_unit(next, {"A"});
  REQUIRE(a.versions.size() == 3);
  CHECK(a.versions[0] == resolve_unit(g, {"A"}).versions[0]);
  CHECK(a.versions[1] == resolve_unit(g, {"A"}).versions[1]);
  CHECK(a.versions[2].commentary == "why");
  CHECK(next.fragments.at(a.versions[2].fragment) == "A three\n");
  CHECK(validate_generic(next).ok());
  CHECK_THROWS_AS(add_version(g, {"B"}, NewVersion{"x", {}, "", "", {}}), Error);
}

TEST_CASE("inclusion, exclusion and fresh drafts") {
  GenericDocument g = tiny();
  DocumentInstance d = new_draft(g, "Q1");
  CHECK(d.selections == std::map<UnitPath, int>{{{"A"}, 1}});
  CHECK(is_included(g, d, {"A"}));
  CHECK_FALSE(is_included(g, d, {"B"}));
  CHECK_FALSE(is_included(g, d, {"B", "B1"}));

  include_unit(g, d, {"B", "B2"});
  CHECK(is_included(g, d, {"B"}));
  CHECK(is_included(g, d, {"B", "B1"}));
  CHECK(is_included(g, d, {"B", "B2"}));

  exclude_unit(g, d, {"B"});
  CHECK_FALSE(is_included(g, d, {"B"}));
  CHECK(d.selections.count({"B", "B1"}) == 0);
  try {
    exclude_unit(g, d, {"A"});
    FAIL("compulsory unit excluded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EditRejected);
  }
}

TEST_CASE("MF/2 fresh draft holds exactly the compulsory parts") {
  GenericDocument g = mf2();
  DocumentInstance d = new_draft(g, "Q1");
  for (const auto& p : g.parts) CHECK(is_included(g, d, {p.label}) == p.compulsory());
  CHECK(d.keywords.at({"Certificates and Payment", "Payment Terms"}) == std::set<std::string>{"payment"});
  for (const auto& [p, v] : d.selections) CHECK(v == 1);
}

TEST_CASE("bindings resolve nearest scope first") {
  GenericDocument g = mf2();
  DocumentInstance d = new_draft(g, "Q1");
  UnitPath eq{"Contractor's Obligations", "Contractor's Equipment"};
  Env env = effective_bindings(g, d, eq, 1);
  CHECK(env.at("days") == Value{std::int64_t{30}});
  CHECK(env.count("Engineer") == 0);
  d.set_binding({}, "Engineer", std::string("Frank"));
  d.set_binding(eq, "days", std::int64_t{45});
  env = effective_bindings(g, d, eq, 1);
  CHECK(env.at("days") == Value{std::int64_t{45}});
  CHECK(env.at("Engineer") == Value{std::string("Frank")});
  d.parties[1].address = "France";
  d.date = Date{1992, 6, 15};
  Env doc = document_env(g, d);
  CHECK(doc.at("Party2.Address") == Value{std::string("France")});
  CHECK(doc.at("Date") == Value{Date{1992, 6, 15}});
  CHECK(doc.count("Party1.Name") == 0);
  d.set_binding({}, "Engineer", std::string("Mary"));
  CHECK(d.bindings.size() == 2);
}

TEST_CASE("slugs") {
  CHECK(slugify("IEE MF/2") == "iee-mf-2");
  CHECK(slugify("Contractor's Equipment") == "contractor-s-equipment");
}
