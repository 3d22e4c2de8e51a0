#include "doctest.h"

#include <algorithm>
#include <random>
#include <thread>

#include "clause/drafter.hpp"
#include "clause/error.hpp"
#include "clause/serialize.hpp"
#include "edits.hpp"
#include "support.hpp"

using namespace clause;
using testing_support::mf2;
using testing_support::TempDir;

namespace {

const UnitPath kAssignment{"Assignment and Sub-Contracting"};
const UnitPath kLiability{"Assignment and Sub-Contracting", "Sub-Contractors Liability"};
const UnitPath kPrecedence{"Precedence of Documents"};
const UnitPath kExtension{"Time for Completion", "Extension of Time for Completion"};

Session step(const GenericDocument& g, Session s, const Edit& e) {
  return apply_edit(g, std::move(s), e, "2026-01-01T00:00:00Z").session;
}

Session to_review(const GenericDocument& g, Session s) {
  for (Stage st : {Stage::Compulsory, Stage::Optional, Stage::Review}) s = step(g, std::move(s), edit::SetStage{st});
  return s;
}

Session with_meta(const GenericDocument& g, Session s) {
  s = step(g, std::move(s),
           edit::SetParties{{"British Gas plc", "UK", {}}, {"Wessex Engineering Ltd", "UK", {}}});
  return step(g, std::move(s), edit::SetDate{Date{1993, 3, 10}});
}

bool rejected(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == ErrorCode::EditRejected;
  }
  return false;
}

}  // namespace

TEST_CASE("a fresh session pre-includes exactly the compulsory parts") {
  GenericDocument g = mf2();
  Session s = new_session(g, "s1", "Q1");
  CHECK(s.stage == Stage::Meta);
  CHECK_FALSE(s.autocheck);
  int included = 0;
  for (const auto& part : g.parts) {
    bool in = is_included(g, s.draft, {part.label});
    CHECK(in == part.compulsory());
    included += in;
  }
  CHECK(included == 10);
  REQUIRE(s.cursor.has_value());
  CHECK(is_included(g, s.draft, *s.cursor));
}

TEST_CASE("replaying a random edit log reproduces the draft") {
  GenericDocument g = mf2();
  std::mt19937 rng(20260101);
  int applied = 0, refused = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Session s = new_session(g, "s" + std::to_string(trial), "Q" + std::to_string(trial + 1));
    int len = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < len; ++i) {
      Edit e = testing_support::random_edit(g, rng);
      try {
        s = step(g, s, e);
        ++applied;
      } catch (const Error& err) {
        REQUIRE(err.code() == ErrorCode::EditRejected);
        ++refused;
      }
    }
    CHECK(replay(g, s) == s.draft);
    Session reread = session_from_json(json::parse(canonical(to_json(s))));
    CHECK(reread == s);
    CHECK(replay(g, reread) == s.draft);
  }
  CHECK(applied > 1000);
  CHECK(refused > 0);
}

TEST_CASE("edits that the generic does not allow are rejected and not logged") {
  GenericDocument g = mf2();
  Session s = new_session(g, "s", "Q1");
  CHECK(rejected([&] { step(g, s, edit::IncludeUnit{{"No Such Part"}}); }));
  CHECK(rejected([&] { step(g, s, edit::ChooseVersion{kPrecedence, 3}); }));
  CHECK(rejected([&] { step(g, s, edit::ChooseVersion{{"Time for Completion"}, 1}); }));
  CHECK(rejected([&] { step(g, s, edit::ExcludeUnit{{"Definitions and Interpretations"}}); }));
  CHECK(rejected([&] { step(g, s, edit::SetParam{{}, "Engineer", std::int64_t{4}}); }));
  CHECK(rejected([&] { step(g, s, edit::SetParam{{}, "not a name", std::string("x")}); }));
  CHECK(rejected([&] { step(g, s, edit::Reorder{{}, {"Definitions and Interpretations"}}); }));
  CHECK(rejected([&] { step(g, s, edit::SetTags{kPrecedence, {Tag{TagKind::Duty, 3, ""}}}); }));
  CHECK(rejected([&] { step(g, s, edit::CreateVersion{kPrecedence, "text", {}, "why", "me", std::nullopt}); }));
  CHECK(rejected([&] { step(g, s, edit::SetStage{Stage::Review}); }));
  CHECK(rejected([&] { step(g, s, edit::SetStage{Stage::Finalized}); }));
  CHECK(rejected([&] { Session t = s; finalize_session(g, t); }));
  CHECK(s.edit_log.empty());
}

TEST_CASE("stages move forward one at a time and back freely") {
  GenericDocument g = mf2();
  Session s = new_session(g, "s", "Q1");
  s = step(g, s, edit::SetStage{Stage::Compulsory});
  s = step(g, s, edit::SetStage{Stage::Optional});
  s = step(g, s, edit::SetStage{Stage::Meta});
  CHECK(s.stage == Stage::Meta);
  CHECK(rejected([&] { step(g, s, edit::SetStage{Stage::Optional}); }));
}

TEST_CASE("autocheck reports after every edit") {
  GenericDocument g = mf2();
  Session s = with_meta(g, new_session(g, "s", "Q1"));
  s.draft.set_binding({}, "Engineer", std::string("Frank"));
  auto quiet = apply_edit(g, s, edit::IncludeUnit{kAssignment}, "t");
  CHECK(quiet.violations.empty());
  s = step(g, s, edit::ToggleAutocheck{true});
  auto loud = apply_edit(g, s, edit::IncludeUnit{kAssignment}, "t");
  REQUIRE(loud.violations.size() == 1);
  CHECK(loud.violations[0].kind == ViolationKind::ForcesUnsatisfied);
  CHECK(loud.violations[0].subjects == std::vector<Subject>{kLiability});
  auto fixed = apply_edit(g, loud.session, edit::IncludeUnit{kLiability}, "t");
  CHECK(fixed.violations.empty());
}

TEST_CASE("finalize waits for the Engineer and the result re-checks clean") {
  GenericDocument g = mf2();
  Session s = to_review(g, with_meta(g, new_session(g, "s", "Q6")));
  try {
    Session t = s;
    finalize_session(g, t);
    FAIL("expected ViolationsOutstanding");
  } catch (const ViolationsOutstanding& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].kind == ViolationKind::MissingParameter);
    CHECK(e.violations()[0].subjects == std::vector<Subject>{ParamName{"Engineer"}});
  }
  s = step(g, s, edit::SetParam{{}, "Engineer", std::string("Frank")});
  DocumentInstance inst = finalize_session(g, s);
  CHECK(inst.status == InstanceStatus::Final);
  CHECK(inst.id == "Q6");
  CHECK(s.stage == Stage::Finalized);
  CHECK(check(g, inst, CheckStage::Finalize).empty());
  CHECK(replay(g, s) == inst);
  CHECK(rejected([&] { step(g, s, edit::SetNotes{"late"}); }));
}

TEST_CASE("the drafter persists sessions and creates versions through the store") {
  TempDir dir;
  Store store(dir.path());
  store.put_generic(mf2());
  Drafter drafter(store);
  Session s = drafter.start_session("IEE MF/2", "Leeds Plant 1995");
  CHECK(s.session_id.size() == 32);
  CHECK(s.draft.id == "Q1");
  CHECK(s.draft.display_name == "Leeds Plant 1995");
  CHECK_THROWS_AS(drafter.start_session("Nothing"), Error);

  auto out = drafter.apply_edit(s.session_id, edit::CreateVersion{kExtension, "Extra time for $Engineer.", {},
                                                                    "Shorter wording.", "tester", std::nullopt});
  GenericDocument g = store.get_generic("IEE MF/2");
  CHECK(resolve_unit(g, kExtension).max_version() == 3);
  CHECK(resolve_unit(g, kExtension).versions.back().commentary == "Shorter wording.");
  CHECK(out.session.draft.selections.at(kExtension) == 3);
  const auto& logged = std::get<edit::CreateVersion>(out.session.edit_log.back().edit);
  CHECK(logged.assigned == 3);

  Store reopened(dir.path());
  Session back = reopened.get_session(s.session_id);
  CHECK(back == out.session);
  CHECK(replay(reopened.get_generic("IEE MF/2"), back) == back.draft);
  CHECK(rejected([&] {
    drafter.apply_edit(s.session_id, edit::CreateVersion{{"Time for Completion"}, "x", {}, "", "", std::nullopt});
  }));
  CHECK(resolve_unit(store.get_generic("IEE MF/2"), kExtension).max_version() == 3);
}

TEST_CASE("concurrent edits to one session are all logged") {
  TempDir dir;
  Store store(dir.path());
  store.put_generic(mf2());
  Drafter drafter(store);
  Session s = drafter.start_session("IEE MF/2");
  constexpr int kThreads = 4, kEach = 10;
  std::vector<std::thread> pool;
  for (int t = 0; t < kThreads; ++t)
    pool.emplace_back([&, t] {
      for (int i = 0; i < kEach; ++i) drafter.apply_edit(s.session_id, edit::SetNotes{std::to_string(t * 100 + i)});
    });
  for (auto& th : pool) th.join();
  Session back = drafter.get_session(s.session_id);
  CHECK(back.edit_log.size() == kThreads * kEach);
  CHECK(replay(store.get_generic("IEE MF/2"), back) == back.draft);
}

TEST_CASE("drafter finalize writes the instance only when clean") {
  TempDir dir;
  Store store(dir.path());
  store.put_generic(mf2());
  Drafter drafter(store);
  Session s = drafter.start_session("IEE MF/2");
  for (Edit e : std::vector<Edit>{edit::SetParties{{"A Ltd", "UK", {}}, {"B Ltd", "UK", {}}}, edit::SetDate{Date{1995, 1, 2}},
                                  edit::SetStage{Stage::Compulsory}, edit::SetStage{Stage::Optional},
                                  edit::SetStage{Stage::Review}})
    drafter.apply_edit(s.session_id, e);
  CHECK_THROWS_AS(drafter.finalize(s.session_id), ViolationsOutstanding);
  CHECK(store.list_instances().empty());
  drafter.apply_edit(s.session_id, edit::SetParam{{}, "Engineer", std::string("Frank")});
  DocumentInstance inst = drafter.finalize(s.session_id);
  CHECK(store.get_instance(inst.id) == inst);
  CHECK(drafter.get_session(s.session_id).stage == Stage::Finalized);
  CHECK(store.integrity_check().empty());
}
