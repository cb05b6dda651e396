#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "gbest/csv.hpp"
#include "gbest/data.hpp"

using namespace gbest;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

std::string bladder_path() {
    if (const char* dir = std::getenv("GBEST_DATA_DIR")) return std::string(dir) + "/bladder.csv";
    for (const char* candidate : {"data/bladder.csv", "../data/bladder.csv", "../../data/bladder.csv"})
        if (std::filesystem::exists(candidate)) return candidate;
    return "data/bladder.csv";
}

}  // namespace

TEST_CASE("step function evaluates right-continuously", "[data]") {
    const StepFunction f({2.0, 5.0}, {0.6, 0.2}, 1.0);
    CHECK(step_eval(f, 1.0) == 1.0);
    CHECK(step_eval(f, 2.0) == 0.6);
    CHECK(step_eval(f, 3.0) == 0.6);
    CHECK(step_eval(f, 5.0) == 0.2);
    CHECK(step_eval(f, 7.0) == 0.2);
    CHECK(f.eval_left(2.0) == 1.0);
    CHECK(f.eval_left(2.5) == 0.6);
    CHECK_THROWS_AS(step_eval(f, -0.5), Error);
}

TEST_CASE("step function rejects bad knots", "[data]") {
    CHECK_THROWS_AS(StepFunction({2.0, 2.0}, {0.5, 0.4}, 1.0), Error);
    CHECK_THROWS_AS(StepFunction({3.0, 2.0}, {0.5, 0.4}, 1.0), Error);
    CHECK_THROWS_AS(StepFunction({-1.0}, {0.5}, 1.0), Error);
    CHECK_THROWS_AS(StepFunction({1.0}, {0.5, 0.4}, 1.0), Error);
}

TEST_CASE("step function integrates exactly", "[data]") {
    const StepFunction f({1.0, 3.0}, {0.5, 0.25}, 1.0);
    CHECK(f.integrate(0.0) == 0.0);
    CHECK(f.integrate(1.0) == Catch::Approx(1.0));
    CHECK(f.integrate(2.0) == Catch::Approx(1.5));
    CHECK(f.integrate(4.0) == Catch::Approx(2.25));
}

TEST_CASE("dataset validates construction", "[data]") {
    CHECK_THROWS_AS(Dataset({}, {"x1"}), Error);
    CHECK_THROWS_AS(Dataset({{1.0, true, {0.5}, 1.0}}, {}), Error);
    CHECK_THROWS_AS(Dataset({{1.0, true, {0.5, 0.2}, 1.0}}, {"x1"}), Error);
    CHECK_THROWS_AS(Dataset({{-1.0, true, {0.5}, 1.0}}, {"x1"}), Error);
    CHECK_THROWS_AS(Dataset({{1.0, true, {0.5}, -1.0}}, {"x1"}), Error);
    const Dataset d({{2.0, true, {0.5}, 1.0}, {3.0, false, {1.0}, 1.0}}, {"x1"});
    CHECK(d.n() == 2);
    CHECK(d.p() == 1);
    CHECK(d.event_count() == 1);
}

TEST_CASE("discrete distribution renormalizes and validates", "[data]") {
    const DiscreteDistribution g({1.0, 2.0, 3.0}, {2.0, 3.0, 5.0});
    double total = 0.0;
    for (double m : g.masses()) total += m;
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK(g.masses()[0] == Catch::Approx(0.2));
    CHECK(g.cdf(0.5) == 0.0);
    CHECK(g.cdf(2.0) == Catch::Approx(0.5));
    CHECK(g.cdf(9.0) == 1.0);
    CHECK_THROWS_AS(DiscreteDistribution({2.0, 1.0}, {0.5, 0.5}), Error);
    CHECK_THROWS_AS(DiscreteDistribution({1.0, 1.0}, {0.5, 0.5}), Error);
    CHECK_THROWS_AS(DiscreteDistribution({1.0}, {-1.0}), Error);
    CHECK_THROWS_AS(DiscreteDistribution({1.0}, {0.0}), Error);
}

TEST_CASE("csv loads a small file in order", "[data]") {
    const auto path = write_temp("gbest_small.csv", "time,status,x1\n2,1,0.5\n3,0,1.0\n5,1,2.0\n");
    const Dataset d = load_csv(path.string(), {"time", "status", {"x1"}});
    REQUIRE(d.n() == 3);
    CHECK(d.p() == 1);
    CHECK(d.record(0).time == 2.0);
    CHECK(d.record(0).event);
    CHECK(d.record(1).time == 3.0);
    CHECK_FALSE(d.record(1).event);
    CHECK(d.record(2).covariates[0] == 2.0);
    CHECK(d.record(0).weight == 1.0);
}

TEST_CASE("csv rejects malformed input naming row and column", "[data]") {
    const auto bad_status = write_temp("gbest_bad_status.csv", "time,status,x1\n2,1,0.5\n3,2,1.0\n");
    CHECK_THROWS_WITH(load_csv(bad_status.string(), {"time", "status", {"x1"}}),
                      Catch::Matchers::ContainsSubstring("line 3") &&
                          Catch::Matchers::ContainsSubstring("status"));
    const auto bad_number = write_temp("gbest_bad_number.csv", "time,status,x1\n2,1,abc\n");
    CHECK_THROWS_WITH(load_csv(bad_number.string(), {"time", "status", {"x1"}}),
                      Catch::Matchers::ContainsSubstring("line 2") && Catch::Matchers::ContainsSubstring("x1"));
    const auto negative = write_temp("gbest_neg_time.csv", "time,status,x1\n-2,1,0.5\n");
    CHECK_THROWS_WITH(load_csv(negative.string(), {"time", "status", {"x1"}}),
                      Catch::Matchers::ContainsSubstring("negative time"));
    const auto missing = write_temp("gbest_missing.csv", "time,status,x1\n2,1,\n");
    CHECK_THROWS_WITH(load_csv(missing.string(), {"time", "status", {"x1"}}),
                      Catch::Matchers::ContainsSubstring("missing value"));
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", {"time", "status", {"x1"}}), Error);
    CHECK_THROWS_WITH(load_csv(bad_status.string(), {"time", "status", {"nope"}}),
                      Catch::Matchers::ContainsSubstring("unknown column"));
}

TEST_CASE("csv round trip preserves a dataset", "[data]") {
    const Dataset d({{2.5, true, {0.5, -1.25}, 1.0}, {3.75, false, {1.0, 0.125}, 1.0}}, {"a", "b"});
    const auto path = std::filesystem::temp_directory_path() / "gbest_roundtrip.csv";
    write_csv(path.string(), d);
    const Dataset back = load_csv(path.string(), {"time", "status", {"a", "b"}});
    REQUIRE(back.n() == d.n());
    for (std::size_t i = 0; i < d.n(); ++i) {
        CHECK(back.record(i).time == d.record(i).time);
        CHECK(back.record(i).event == d.record(i).event);
        CHECK(back.record(i).covariates == d.record(i).covariates);
    }
}

TEST_CASE("bladder data has the study marginals", "[data][real]") {
    const Dataset d = load_csv(bladder_path(), {"time", "status", {"treatment", "number", "size"}});
    CHECK(d.n() == 85);
    CHECK(d.p() == 3);
    CHECK(d.event_count() == 47);
    CHECK(d.n() - d.event_count() == 38);
}

TEST_CASE("train/test split sizes match rounding", "[data]") {
    std::vector<TimeToEventRecord> rows;
    for (int i = 0; i < 75; ++i) rows.push_back({static_cast<double>(i + 1), i % 2 == 0, {0.0}, 1.0});
    const Dataset d75(rows, {"x1"});
    RngStream rng(11, 0);
    const auto [train75, test75] = split_train_test(d75, 0.5, rng);
    CHECK(train75.n() == 38);
    CHECK(test75.n() == 37);

    rows.resize(50);
    const Dataset d50(rows, {"x1"});
    const auto [train50, test50] = split_train_test(d50, 0.5, rng);
    CHECK(train50.n() == 25);
    CHECK(test50.n() == 25);
}

TEST_CASE("split is deterministic and partitions the data", "[data]") {
    std::vector<TimeToEventRecord> rows;
    for (int i = 0; i < 20; ++i) rows.push_back({static_cast<double>(i + 1), true, {static_cast<double>(i)}, 1.0});
    const Dataset d(rows, {"x1"});
    const auto [a_train, a_test] = split_train_test(d, 0.3, RngStream(5, 17));
    const auto [b_train, b_test] = split_train_test(d, 0.3, RngStream(5, 17));
    REQUIRE(a_train.n() == b_train.n());
    for (std::size_t i = 0; i < a_train.n(); ++i)
        CHECK(a_train.record(i).covariates[0] == b_train.record(i).covariates[0]);

    std::multiset<double> seen;
    for (const auto& r : a_train.records()) seen.insert(r.covariates[0]);
    for (const auto& r : a_test.records()) seen.insert(r.covariates[0]);
    CHECK(seen.size() == 20);
    CHECK(std::set<double>(seen.begin(), seen.end()).size() == 20);

    const Dataset tiny({{1.0, true, {0.0}, 1.0}}, {"x1"});
    CHECK_THROWS_AS(split_train_test(tiny, 0.5, RngStream(1, 1)), Error);
}

TEST_CASE("kfold partitions with near-equal folds", "[data]") {
    std::vector<TimeToEventRecord> rows;
    for (int i = 0; i < 85; ++i) rows.push_back({static_cast<double>(i + 1), true, {static_cast<double>(i)}, 1.0});
    const Dataset d(rows, {"x1"});
    const auto folds = kfold(d, 5, RngStream(2, 4));
    REQUIRE(folds.size() == 5);
    std::set<double> covered;
    for (const auto& [train, test] : folds) {
        CHECK(test.n() == 17);
        CHECK(train.n() == 68);
        for (const auto& r : test.records()) CHECK(covered.insert(r.covariates[0]).second);
    }
    CHECK(covered.size() == 85);

    rows.resize(10);
    const Dataset d10(rows, {"x1"});
    const auto folds2 = kfold(d10, 2, RngStream(3, 9));
    CHECK(folds2[0].second.n() == 5);
    CHECK(folds2[1].second.n() == 5);
    CHECK_THROWS_AS(kfold(d10, 11, RngStream(1, 1)), Error);
    CHECK_THROWS_AS(kfold(d10, 1, RngStream(1, 1)), Error);
}
