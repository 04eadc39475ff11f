#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "lateralbench/dataset.hpp"
#include "lateralbench/io.hpp"

using namespace lateral;
using testutil::make_instance;
using testutil::make_prediction;

namespace {

const char* kOneRecord = R"([
  {"id":"s1","group_id":"g1","variant":"OR","subtask":"sentence",
   "question":"Q?","choices":["a","b","c","d"],"gold_index":2}
])";

}  // namespace

TEST_CASE("load_dataset maps the canonical schema") {
  const auto instances = parse_dataset(kOneRecord, "test");
  REQUIRE(instances.size() == 1);
  CHECK(instances[0].id == "s1");
  CHECK(instances[0].group_id == "g1");
  CHECK(instances[0].variant == Variant::OR);
  CHECK(instances[0].subtask == Subtask::sentence);
  CHECK(instances[0].question == "Q?");
  CHECK(instances[0].choices.size() == 4);
  CHECK(instances[0].gold_index == 2);
}

TEST_CASE("duplicate ids are rejected") {
  const std::string twice = R"([
    {"id":"s1","group_id":"g1","variant":"OR","subtask":"word",
     "question":"q","choices":["a","b"],"gold_index":0},
    {"id":"s1","group_id":"g2","variant":"OR","subtask":"word",
     "question":"q2","choices":["a","b"],"gold_index":1}
  ])";
  try {
    parse_dataset(twice, "test");
    FAIL("expected DuplicateId");
  } catch (const Error& e) {
    CHECK(e.code() == errc::duplicate_id);
    CHECK(std::string(e.what()).find("s1") != std::string::npos);
  }
}

TEST_CASE("gold_index outside the choice range is rejected") {
  const std::string bad = R"([
    {"id":"s1","group_id":"g1","variant":"OR","subtask":"sentence",
     "question":"q","choices":["a","b","c","d"],"gold_index":4}
  ])";
  try {
    parse_dataset(bad, "test");
    FAIL("expected LabelOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == errc::label_out_of_range);
    CHECK(std::string(e.what()).find("s1") != std::string::npos);
  }
}

TEST_CASE("parse errors name the byte offset") {
  try {
    parse_dataset("[{\"id\": }]", "test");
    FAIL("expected MalformedFile");
  } catch (const Error& e) {
    CHECK(e.code() == errc::malformed_file);
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
}

TEST_CASE("serialize/load round-trips and load order is stable") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto corpus = testutil::random_corpus(rng);
    const std::string text = serialize_dataset(corpus.instances);
    const auto reloaded = parse_dataset(text, "roundtrip");
    CHECK(reloaded == corpus.instances);
    const auto again = parse_dataset(text, "roundtrip");
    CHECK(again == reloaded);
  }
}

TEST_CASE("group_instances assembles complete and partial groups") {
  SUBCASE("OR+SR+CR make one complete group") {
    const std::vector<PuzzleInstance> instances = {
        make_instance("a", "g1", Variant::OR, 0),
        make_instance("b", "g1", Variant::SR, 1),
        make_instance("c", "g1", Variant::CR, 2),
    };
    const auto groups = group_instances(instances);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].complete());
    CHECK(groups[0].members.at(Variant::SR).id == "b");
  }

  SUBCASE("missing variants leave groups incomplete") {
    const std::vector<PuzzleInstance> instances = {
        make_instance("a", "g1", Variant::OR, 0),
        make_instance("b", "g1", Variant::SR, 1),
        make_instance("c", "g2", Variant::OR, 2),
    };
    const auto groups = group_instances(instances);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].group_id == "g1");
    CHECK(!groups[0].complete());
    CHECK(!groups[0].has(Variant::CR));
    CHECK(groups[1].members.size() == 1);
  }

  SUBCASE("a group without OR is an error") {
    const std::vector<PuzzleInstance> instances = {
        make_instance("a", "g1", Variant::SR, 0)};
    try {
      group_instances(instances);
      FAIL("expected MissingOriginal");
    } catch (const Error& e) {
      CHECK(e.code() == errc::missing_original);
      CHECK(std::string(e.what()).find("g1") != std::string::npos);
    }
  }

  SUBCASE("two members with one variant is an error") {
    const std::vector<PuzzleInstance> instances = {
        make_instance("a", "g1", Variant::OR, 0),
        make_instance("b", "g1", Variant::OR, 1)};
    CHECK_THROWS_AS(group_instances(instances), Error);
  }
}

TEST_CASE("group_instances partitions the input") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto corpus = testutil::random_corpus(rng);
    const auto groups = group_instances(corpus.instances);
    size_t members = 0;
    std::set<std::string> seen;
    for (const auto& g : groups) {
      for (const auto& [v, inst] : g.members) {
        members++;
        CHECK(seen.insert(inst.id).second);
        CHECK(inst.group_id == g.group_id);
      }
    }
    CHECK(members == corpus.instances.size());
    for (size_t i = 1; i < groups.size(); ++i) {
      CHECK(groups[i - 1].group_id < groups[i].group_id);
    }
  }
}

TEST_CASE("validate reports issues instead of throwing") {
  SUBCASE("clean complete group") {
    const std::vector<PuzzleInstance> instances = {
        make_instance("a", "g1", Variant::OR, 0),
        make_instance("b", "g1", Variant::SR, 1),
        make_instance("c", "g1", Variant::CR, 2),
    };
    CHECK(validate(instances).empty());
  }

  SUBCASE("one-choice instance is an ERROR") {
    auto inst = make_instance("a", "g1", Variant::OR, 0, {"only"});
    const auto report = validate({inst});
    CHECK(report.has_errors());
    bool found = false;
    for (const auto& issue : report.issues) {
      found = found || issue.code == "choices_lt_2";
    }
    CHECK(found);
  }

  SUBCASE("missing CR is only a WARNING") {
    const std::vector<PuzzleInstance> instances = {
        make_instance("a", "g1", Variant::OR, 0),
        make_instance("b", "g1", Variant::SR, 1),
    };
    const auto report = validate(instances);
    CHECK(!report.empty());
    CHECK(!report.has_errors());
  }

  SUBCASE("report is deterministic") {
    const std::vector<PuzzleInstance> instances = {
        make_instance("a", "g2", Variant::SR, 7, {"x"}),
        make_instance("b", "g1", Variant::OR, 0),
    };
    const auto r1 = validate(instances);
    const auto r2 = validate(instances);
    CHECK(r1.to_text() == r2.to_text());
    CHECK(r1.has_errors());
  }
}

TEST_CASE("prediction log round-trips, ABSTAIN included") {
  std::vector<PredictionRecord> records;
  records.push_back(make_prediction("s1", 2));
  records.back().temperature = 0.4;
  records.back().raw_response = "{\"answer\": 3}";
  records.back().attempts = 2;
  records.push_back(make_prediction("s2", std::nullopt));
  records.back().raw_response = "no idea";
  records.back().attempts = 3;

  testutil::TempDir dir("predlog");
  const std::string path = dir.file("preds.jsonl");
  save_prediction_log(records, path);
  const auto reloaded = load_prediction_log(path);
  REQUIRE(reloaded.size() == 2);
  CHECK(reloaded == records);
  CHECK(reloaded[1].abstained());
}
