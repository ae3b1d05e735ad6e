#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <set>

#include "rud/csv.hpp"
#include "rud/replay.hpp"

using namespace rud;

namespace {

Transition make_t(double v) {
    return {{v}, {v}, v, {v}, false, 0};
}

}  // namespace

TEST_CASE("insert into empty buffer") {
    ReplayBuffer buf(4, 0);
    const size_t slot = buf.insert(make_t(1.0));
    CHECK(buf.size() == 1);
    CHECK(buf.replay_count(slot) == 0);
    CHECK(buf.at(slot).insert_step == 1);
}

TEST_CASE("ring eviction resets the counter of the overwritten slot") {
    ReplayBuffer buf(2, 0);
    buf.insert(make_t(1.0));
    buf.insert(make_t(2.0));
    buf.sample_indices(2);  // both counters now 1
    buf.insert(make_t(3.0));
    CHECK(buf.size() == 2);
    CHECK(buf.at(0).state[0] == 3.0);  // oldest slot overwritten
    CHECK(buf.replay_count(0) == 0);
    buf.verify_conservation();
}

TEST_CASE("insert_step strictly increases") {
    ReplayBuffer buf(50, 0);
    long prev = 0;
    for (int i = 0; i < 100; ++i) {
        const size_t slot = buf.insert(make_t(i));
        CHECK(buf.at(slot).insert_step > prev);
        prev = buf.at(slot).insert_step;
    }
}

TEST_CASE("sampling size == n touches every slot exactly once") {
    ReplayBuffer buf(8, 1);
    for (int i = 0; i < 8; ++i) buf.insert(make_t(i));
    const auto idx = buf.sample_indices(8);
    std::set<size_t> unique(idx.begin(), idx.end());
    CHECK(unique.size() == 8);
    for (size_t s = 0; s < 8; ++s) CHECK(buf.replay_count(s) == 1);
}

TEST_CASE("sampling with insufficient data is an error") {
    ReplayBuffer buf(8, 1);
    buf.insert(make_t(0));
    CHECK_THROWS_WITH(buf.sample_indices(2), Catch::Matchers::ContainsSubstring("insufficient"));
}

TEST_CASE("mini-batch indices are distinct") {
    ReplayBuffer buf(100, 2);
    for (int i = 0; i < 100; ++i) buf.insert(make_t(i));
    for (int call = 0; call < 50; ++call) {
        const auto idx = buf.sample_indices(30);
        std::set<size_t> unique(idx.begin(), idx.end());
        CHECK(unique.size() == 30);
    }
}

TEST_CASE("same RNG seed gives identical sampled index sequences") {
    ReplayBuffer a(64, 7), b(64, 7);
    for (int i = 0; i < 64; ++i) {
        a.insert(make_t(i));
        b.insert(make_t(i));
    }
    for (int call = 0; call < 10; ++call) CHECK(a.sample_indices(16) == b.sample_indices(16));
}

TEST_CASE("sampling is uniform over slots") {
    ReplayBuffer buf(1000, 9);
    for (int i = 0; i < 1000; ++i) buf.insert(make_t(i));
    const int calls = 10000;
    for (int c = 0; c < calls; ++c) buf.sample_indices(100);
    // mean count 1000 per slot; chi^2 over 1000 cells, each expectation 1000
    const double expected = 1000.0;
    double chi2 = 0, mean = 0;
    for (size_t s = 0; s < 1000; ++s) {
        const double d = buf.replay_count(s) - expected;
        chi2 += d * d / expected;
        mean += buf.replay_count(s);
        // per-slot std is ~30, so 15% is a > 4.5 sigma envelope
        CHECK(std::fabs(d) / expected < 0.15);
    }
    mean /= 1000.0;
    CHECK(std::fabs(mean - expected) / expected < 0.05);
    // 999 dof, significance 0.01 critical value ~ 1106
    CHECK(chi2 < 1106.0);
}

TEST_CASE("counter conservation and snapshot") {
    ReplayBuffer buf(200, 3);
    for (int i = 0; i < 200; ++i) buf.insert(make_t(i));
    auto snap = buf.replay_count_snapshot();
    for (const auto& [step, count] : snap) CHECK(count == 0);

    const int calls = 25;
    for (int c = 0; c < calls; ++c) buf.sample_indices(10);
    snap = buf.replay_count_snapshot();
    long total = 0;
    for (const auto& [step, count] : snap) total += count;
    CHECK(total == 10 * calls);
    buf.verify_conservation();

    const std::string path = std::filesystem::temp_directory_path() / "rud_snapshot_test.csv";
    buf.write_snapshot_csv(path);
    const CsvTable t = read_csv(path);
    REQUIRE(t.header == std::vector<std::string>{"insert_step", "replay_count"});
    REQUIRE(t.rows.size() == 200);
    long csv_total = 0;
    for (size_t r = 0; r < t.rows.size(); ++r) csv_total += t.as_long(r, 1);
    CHECK(csv_total == total);
    std::filesystem::remove(path);
}
