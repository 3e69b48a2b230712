#include "mcrg/diff.hpp"
#include "mcrg/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace mcrg;

namespace {

std::string strip_file_headers(const std::string& diff) {
    std::string out = diff;
    for (int i = 0; i < 2; ++i) {
        if (out.rfind("---", 0) == 0 || out.rfind("+++", 0) == 0) out.erase(0, out.find('\n') + 1);
    }
    return out;
}

std::string fixture(const std::string& name) { return oracle::read_file(oracle::fixture_dir() / "diff" / name); }

}  // namespace

TEST_CASE("hunk header fields") {
    auto hunks = parse_unified_diff("@@ -1,3 +1,4 @@\n a\n+b\n c\n d\n");
    REQUIRE(hunks.size() == 1);
    CHECK(hunks[0].old_start == 1);
    CHECK(hunks[0].old_len == 3);
    CHECK(hunks[0].new_start == 1);
    CHECK(hunks[0].new_len == 4);
    CHECK(hunk_counts_consistent(hunks[0]));
}

TEST_CASE("omitted counts default to one") {
    auto hunks = parse_unified_diff("@@ -2 +2 @@\n-x\n+y\n");
    REQUIRE(hunks.size() == 1);
    CHECK(hunks[0].old_len == 1);
    CHECK(hunks[0].new_len == 1);
}

TEST_CASE("empty diff has no hunks") {
    CHECK(parse_unified_diff("").empty());
    CHECK(apply_hunks("a\nb\n", {}) == "a\nb\n");
}

TEST_CASE("adding one line to a three line file") {
    auto hunks = parse_unified_diff("@@ -1,3 +1,4 @@\n a\n b\n+new\n c\n");
    std::string out = apply_hunks("a\nb\nc\n", hunks);
    CHECK(out == "a\nb\nnew\nc\n");
    CHECK(line_count(out) == 4);
}

TEST_CASE("two hunk fixture produced by GNU diff") {
    const std::string old_text = fixture("two_hunks.old");
    const std::string new_text = fixture("two_hunks.new");
    auto hunks = parse_unified_diff(fixture("two_hunks.diff"));
    REQUIRE(hunks.size() == 2);
    CHECK(hunks[1].old_start == 11);
    CHECK(hunks[1].new_start == 12);
    CHECK(apply_hunks(old_text, hunks) == new_text);
    CHECK(added_lines(hunks) == std::set<int>{3, 6, 15});
    CHECK(format_unified_diff(compute_hunks(old_text, new_text)) == strip_file_headers(fixture("two_hunks.diff")));
}

TEST_CASE("missing newline markers") {
    for (const char* base : {"no_eol", "add_eol"}) {
        CAPTURE(base);
        const std::string old_text = fixture(std::string(base) + ".old");
        const std::string new_text = fixture(std::string(base) + ".new");
        const std::string diff = fixture(std::string(base) + ".diff");
        auto hunks = parse_unified_diff(diff);
        CHECK(apply_hunks(old_text, hunks) == new_text);
        CHECK(format_unified_diff(compute_hunks(old_text, new_text)) == strip_file_headers(diff));
    }
}

TEST_CASE("parse, format, parse is a fixed point") {
    auto first = parse_unified_diff(fixture("two_hunks.diff"));
    std::string text = format_unified_diff(first);
    auto second = parse_unified_diff(text);
    CHECK(first == second);
    CHECK(format_unified_diff(second) == text);
}

TEST_CASE("malformed diffs") {
    SUBCASE("bad header") { CHECK_THROWS_AS(parse_unified_diff("@@ -1,x +1 @@\n a\n"), MalformedDiff); }
    SUBCASE("body shorter than header") { CHECK_THROWS_AS(parse_unified_diff("@@ -1,3 +1,3 @@\n a\n"), MalformedDiff); }
    SUBCASE("body longer than header") {
        CHECK_THROWS_AS(parse_unified_diff("@@ -1,1 +1,1 @@\n a\n b\n"), MalformedDiff);
    }
    SUBCASE("line without origin") { CHECK_THROWS_AS(parse_unified_diff("@@ -1,1 +1,1 @@\n*a\n"), MalformedDiff); }
    SUBCASE("line number reported") {
        try {
            parse_unified_diff("@@ -1,1 +1,1 @@\n a\n@@ -5,z +5 @@\n");
            FAIL("expected MalformedDiff");
        } catch (const MalformedDiff& e) {
            CHECK(e.line_no == 3);
        }
    }
}

TEST_CASE("hunks that do not apply") {
    auto hunks = parse_unified_diff("@@ -1,2 +1,2 @@\n a\n-b\n+c\n");
    CHECK_THROWS_AS(apply_hunks("a\nx\n", hunks), HunkMismatch);
    CHECK_THROWS_AS(apply_hunks("a\n", hunks), HunkMismatch);
    auto overlapping = parse_unified_diff("@@ -2,1 +2,1 @@\n-b\n+c\n@@ -1,1 +1,1 @@\n-a\n+z\n");
    CHECK_THROWS_AS(apply_hunks("a\nb\n", overlapping), HunkMismatch);
}

TEST_CASE("changed lines match the LCS oracle on random pairs") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        std::string a = oracle::random_text(rng, static_cast<int>(rng() % 30), rng() % 4 != 0);
        std::string b = oracle::mutate_text(rng, a, rng() % 4 != 0);
        auto hunks = compute_hunks(a, b);
        // Alignment can differ between algorithms; the edit size cannot.
        CHECK(added_lines(hunks).size() == oracle::lcs_changed_lines(a, b).size());
        for (int line : added_lines(hunks)) {
            CHECK(line >= 1);
            CHECK(line <= line_count(b));
        }
        for (const auto& h : hunks) CHECK(hunk_counts_consistent(h));
    }
}

TEST_CASE("GNU diff output applies") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 40; ++i) {
        std::string a = oracle::random_text(rng, 5 + static_cast<int>(rng() % 25), rng() % 3 != 0);
        std::string b = oracle::mutate_text(rng, a, rng() % 3 != 0);
        auto gnu = oracle::gnu_unified_diff(a, b);
        if (!gnu) return;
        CHECK(apply_hunks(a, parse_unified_diff(*gnu)) == b);
    }
}

TEST_CASE("line mapping round trips through unchanged lines") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        std::string a = oracle::random_text(rng, 1 + static_cast<int>(rng() % 20), true);
        std::string b = oracle::mutate_text(rng, a, true);
        auto hunks = compute_hunks(a, b, static_cast<int>(rng() % 4));
        auto added = added_lines(hunks);
        int n_new = line_count(b);
        for (int l = 1; l <= n_new; ++l) {
            auto old_line = map_line_backward(hunks, l);
            CHECK(old_line.has_value() == !added.count(l));
            if (old_line) {
                auto back = map_line_forward(hunks, *old_line);
                REQUIRE(back.has_value());
                CHECK(*back == l);
            }
        }
    }
}

TEST_CASE("disturbance of tracked lines") {
    // old: a b c d e ; new: a b X c d e
    auto insert = compute_hunks("a\nb\nc\nd\ne\n", "a\nb\nX\nc\nd\ne\n");
    CHECK(hunks_disturb(insert, {2, 3}));
    CHECK_FALSE(hunks_disturb(insert, {3, 4}));
    CHECK_FALSE(hunks_disturb(insert, {1}));
    CHECK_FALSE(hunks_disturb(insert, {}));
    auto edit = compute_hunks("a\nb\nc\n", "a\nB\nc\n");
    CHECK(hunks_disturb(edit, {2}));
    CHECK_FALSE(hunks_disturb(edit, {1, 3}));
    CHECK_FALSE(hunks_disturb(edit, {3}));
}

TEST_CASE("independently generated diffs round trip") {
    std::mt19937_64 rng(50);
    for (int i = 0; i < 300; ++i) {
        CAPTURE(i);
        std::string a = oracle::random_text(rng, static_cast<int>(rng() % 25), rng() % 3 != 0);
        std::string b = oracle::mutate_text(rng, a, rng() % 3 != 0);
        CHECK(apply_hunks(a, parse_unified_diff(oracle::lcs_unified_diff(a, b))) == b);
        CHECK(apply_hunks(a, parse_unified_diff(format_unified_diff(compute_hunks(a, b)))) == b);
    }
}
