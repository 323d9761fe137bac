#include <doctest.h>

#include <sstream>

#include "hazardband/event_model.hpp"
#include "support.hpp"

using namespace hazardband;
using hazardband::testing::parse;

TEST_CASE("csv rows map onto records") {
  const auto recs = parse("id,from,to,entry,exit\n1,0,2,0,4.5\n2,0,cens,0,3\n");
  REQUIRE(recs.size() == 2);
  CHECK(recs[0] == SubjectRecord{"1", 0.0, 4.5, "0", std::string("2")});
  CHECK(recs[1].censored());
  CHECK(recs[1].from_state == "0");
  CHECK(recs[1].exit_time == 3.0);
}

TEST_CASE("entry not before exit is rejected") {
  CHECK_THROWS_AS(parse("id,from,to,entry,exit\n1,0,2,5,5\n"), ValidationError);
  CHECK_THROWS_AS(parse("id,from,to,entry,exit\n1,0,2,6,5\n"), ValidationError);
  CHECK_THROWS_AS(parse("id,from,to,entry,exit\n1,0,0,0,5\n"), ValidationError);
  CHECK_THROWS_AS(parse("id,from,to,entry,exit\n1,0,1,-1,5\n"), ValidationError);
}

TEST_CASE("parse errors carry the line number") {
  try {
    parse("id,from,to,entry,exit\n1,0,1,0,2\n\n2,0,1,0,abc\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  try {
    parse("id,from,to,entry,exit\n1,0,1,0\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("subject,from,to,entry,exit\n"), ParseError);
  CHECK_THROWS_AS(parse("id,from,to,entry,exit\n1,0,1,0,inf\n"), ParseError);
}

TEST_CASE("csv round trip") {
  const auto recs = parse("id,from,to,entry,exit\n1,0,1,0,1.25\n1,1,cens,1.25,7.3\n2,0,2,0.5,3\n");
  std::ostringstream out;
  write_event_csv(out, recs);
  CHECK(parse(out.str()) == recs);
}

TEST_CASE("subject paths must be connected") {
  CHECK_NOTHROW(parse("id,from,to,entry,exit\n1,0,1,0,1\n1,1,0,1,2\n1,0,cens,2,3\n"));
  CHECK_THROWS_AS(parse("id,from,to,entry,exit\n1,0,1,0,1\n1,1,0,1.5,2\n"), ValidationError);
  CHECK_THROWS_AS(parse("id,from,to,entry,exit\n1,0,1,0,1\n1,2,0,1,2\n"), ValidationError);
  CHECK_THROWS_AS(parse("id,from,to,entry,exit\n1,0,cens,0,1\n1,0,1,1,2\n"), ValidationError);
}

TEST_CASE("counting path from hand-counted risk sets") {
  const auto paths = build_counting_paths(hazardband::testing::d0_records(), 3.0);
  REQUIRE(paths.size() == 1);
  const CountingPath& p = paths.at({"0", "1"});
  CHECK(p == hazardband::testing::d0_path());
}

TEST_CASE("left truncation delays entry into the risk set") {
  const std::vector<SubjectRecord> recs{{"1", 2.0, 5.0, "0", std::string("1")}};
  CHECK(at_risk(recs, "0", 5.0) == 1);
  CHECK(at_risk(recs, "0", 2.0) == 0);
  CHECK(at_risk(recs, "0", 1.0) == 0);
  CHECK(at_risk(recs, "0", 2.0001) == 1);
  CHECK(at_risk(recs, "0", 5.0001) == 0);
  const auto paths = build_counting_paths(recs, 6.0);
  CHECK(paths.at({"0", "1"}).at_risk == std::vector<int>{1});
}

TEST_CASE("tied event times aggregate into one jump") {
  const std::vector<SubjectRecord> recs{{"1", 0.0, 1.0, "0", std::string("1")},
                                        {"2", 0.0, 1.0, "0", std::string("1")}};
  const auto p = build_counting_paths(recs, 2.0).at({"0", "1"});
  CHECK(p.jump_times == std::vector<double>{1.0});
  CHECK(p.jump_sizes == std::vector<int>{2});
  CHECK(p.at_risk == std::vector<int>{2});
}

TEST_CASE("events after tau are dropped but the transition stays observed") {
  const auto recs = parse("id,from,to,entry,exit\n1,0,1,0,4\n2,0,2,0,1\n");
  const auto paths = build_counting_paths(recs, 3.0);
  CHECK(paths.count({"0", "1"}) == 0);
  CHECK(paths.at({"0", "2"}).n_subjects == 2);
  CHECK(observed_transitions(recs).count({"0", "1"}) == 1);
}

TEST_CASE("recurrent sojourns contribute to the same risk set") {
  const auto recs = parse("id,from,to,entry,exit\n1,0,1,0,1\n1,1,0,1,2\n1,0,1,2,3\n2,0,cens,0,2.5\n");
  const auto p = build_counting_paths(recs, 4.0).at({"0", "1"});
  CHECK(p.jump_times == std::vector<double>{1.0, 3.0});
  CHECK(p.at_risk == std::vector<int>{2, 1});
  CHECK(p.n_subjects == 2);
}

TEST_CASE("counting path validation") {
  auto p = hazardband::testing::d0_path();
  CHECK_NOTHROW(p.validate());
  p.jump_sizes[1] = 3;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = hazardband::testing::d0_path();
  p.jump_times = {2.0, 1.0};
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = hazardband::testing::d0_path();
  p.tau = 1.5;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  CHECK_THROWS_AS(build_counting_paths({}, 1.0), ValidationError);
}

TEST_CASE("transition labels") {
  CHECK(TransitionKey::parse("0>1") == TransitionKey{"0", "1"});
  CHECK(TransitionKey::parse("ill>dead").label() == "ill>dead");
  CHECK_THROWS_AS(TransitionKey::parse("01"), std::invalid_argument);
  CHECK_THROWS_AS(TransitionKey::parse(">1"), std::invalid_argument);
  CHECK_THROWS_AS(TransitionKey::parse("1>1"), std::invalid_argument);
}
