#include <catch2/catch_amalgamated.hpp>

#include "gbest/estimators.hpp"
#include "gbest/rng.hpp"

using namespace gbest;

namespace {

TimeToEventRecord rec(double time, bool event, double weight = 1.0) {
    return {time, event, {0.0}, weight};
}

}  // namespace

TEST_CASE("kaplan-meier hand example", "[estimators]") {
    const std::vector<TimeToEventRecord> rows{rec(2, true), rec(3, false), rec(5, true)};
    const auto s = kaplan_meier(rows);
    CHECK(s(2.0) == Catch::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(s(3.0) == Catch::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(s(5.0) == 0.0);
    CHECK(s(1.0) == 1.0);
    CHECK(is_survival_curve(s));
}

TEST_CASE("kaplan-meier with no events is constant one", "[estimators]") {
    const std::vector<TimeToEventRecord> rows{rec(2, false), rec(4, false)};
    const auto s = kaplan_meier(rows);
    CHECK(s.knots().empty());
    CHECK(s(100.0) == 1.0);
}

TEST_CASE("kaplan-meier is invariant to a power-of-two weight scale", "[estimators]") {
    const std::vector<TimeToEventRecord> unit{rec(2, true), rec(3, false), rec(5, true), rec(7, true)};
    std::vector<TimeToEventRecord> halved = unit;
    for (auto& r : halved) r.weight = 0.5;
    const auto a = kaplan_meier(unit);
    const auto b = kaplan_meier(halved);
    REQUIRE(a.knots() == b.knots());
    CHECK(a.values() == b.values());
}

TEST_CASE("weight scale invariance for arbitrary positive scales", "[estimators]") {
    RngStream rng(99, 3);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<TimeToEventRecord> rows;
        const int n = 2 + static_cast<int>(rng.uniform_int(8));
        for (int i = 0; i < n; ++i)
            rows.push_back(rec(1.0 + rng.uniform_int(5), rng.uniform() < 0.6, 0.25 + rng.uniform()));
        bool any_event = false;
        for (const auto& r : rows) any_event |= r.event;
        if (!any_event) rows[0].event = true;
        const double c = 0.1 + 5.0 * rng.uniform();
        std::vector<TimeToEventRecord> scaled = rows;
        for (auto& r : scaled) r.weight *= c;
        const auto a = kaplan_meier(rows);
        const auto b = kaplan_meier(scaled);
        const auto ha = nelson_aalen(rows);
        const auto hb = nelson_aalen(scaled);
        REQUIRE(a.knots() == b.knots());
        for (std::size_t i = 0; i < a.values().size(); ++i)
            CHECK(a.values()[i] == Catch::Approx(b.values()[i]).margin(1e-12));
        for (std::size_t i = 0; i < ha.values().size(); ++i)
            CHECK(ha.values()[i] == Catch::Approx(hb.values()[i]).margin(1e-12));
    }
}

TEST_CASE("kaplan-meier equals empirical survival without censoring", "[estimators]") {
    RngStream rng(7, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<TimeToEventRecord> rows;
        const int n = 1 + static_cast<int>(rng.uniform_int(12));
        for (int i = 0; i < n; ++i) rows.push_back(rec(1.0 + rng.uniform_int(6), true));
        const auto s = kaplan_meier(rows);
        for (double t : {0.5, 1.0, 2.0, 3.5, 6.0, 10.0}) {
            int beyond = 0;
            for (const auto& r : rows) beyond += r.time > t ? 1 : 0;
            CHECK(s(t) == Catch::Approx(static_cast<double>(beyond) / n).margin(1e-12));
        }
    }
}

TEST_CASE("survival curves are nonincreasing", "[estimators]") {
    RngStream rng(13, 5);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<TimeToEventRecord> rows;
        const int n = 2 + static_cast<int>(rng.uniform_int(15));
        for (int i = 0; i < n; ++i)
            rows.push_back(rec(0.5 + 4.0 * rng.uniform(), rng.uniform() < 0.7, 0.5 + rng.uniform()));
        const auto s = kaplan_meier(rows);
        CHECK(is_survival_curve(s, 1e-12));
        double prev = 1.0;
        for (double t = 0.0; t < 5.0; t += 0.25) {
            CHECK(s(t) <= prev + 1e-12);
            prev = s(t);
        }
    }
}

TEST_CASE("nelson-aalen hand example", "[estimators]") {
    const std::vector<TimeToEventRecord> rows{rec(2, true), rec(3, false), rec(5, true)};
    const auto h = nelson_aalen(rows);
    CHECK(h(2.0) == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(h(4.0) == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(h(5.0) == Catch::Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK(h(1.0) == 0.0);
}

TEST_CASE("nelson-aalen edge cases", "[estimators]") {
    CHECK(nelson_aalen(std::vector<TimeToEventRecord>{rec(2, false)})(10.0) == 0.0);
    const auto h = nelson_aalen(std::vector<TimeToEventRecord>{rec(1, true)});
    CHECK(h(1.0) == 1.0);
    std::vector<TimeToEventRecord> zero{rec(1, true, 0.0)};
    CHECK_THROWS_AS(nelson_aalen(zero), Error);
}

TEST_CASE("censoring km swaps roles with the tie convention", "[estimators]") {
    const std::vector<TimeToEventRecord> rows{rec(2, false), rec(4, true)};
    const auto g = censoring_km(rows);
    CHECK(g(2.0) == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(g(1.0) == 1.0);

    const std::vector<TimeToEventRecord> all_events{rec(1, true), rec(2, true)};
    const auto g2 = censoring_km(all_events);
    CHECK(g2.knots().empty());
    CHECK(g2(5.0) == 1.0);
}

TEST_CASE("censoring km removes tied events from the risk set first", "[estimators]") {
    // At t=2: one event and one censoring tied; risk set for the censoring
    // is 3 - 1 = 2, so G(2) = 1 - 1/2.
    const std::vector<TimeToEventRecord> rows{rec(2, true), rec(2, false), rec(3, true)};
    const auto g = censoring_km(rows);
    CHECK(g(2.0) == Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("km and censoring km factor the empirical mass on tiny datasets", "[estimators]") {
    // With distinct times, S(t) * G(t) equals the fraction still under
    // observation, #(time > t)/n; checked by enumeration for n <= 5.
    RngStream rng(21, 9);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(4));
        std::vector<TimeToEventRecord> rows;
        for (int i = 0; i < n; ++i) rows.push_back(rec(i + 1.0, rng.uniform() < 0.5));
        const auto s = kaplan_meier(rows);
        const auto g = censoring_km(rows);
        for (double t = 0.5; t < n + 1.0; t += 1.0) {
            int beyond = 0;
            for (const auto& r : rows) beyond += r.time > t ? 1 : 0;
            CHECK(s(t) * g(t) == Catch::Approx(static_cast<double>(beyond) / n).margin(1e-12));
        }
    }
}
