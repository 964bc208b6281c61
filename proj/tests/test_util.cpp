#include <doctest.h>

#include "codemorph/subprocess.hpp"
#include "codemorph/util.hpp"

#include "test_support.hpp"

#include <set>

using namespace codemorph;
namespace fs = std::filesystem;

TEST_CASE("fnv1a64 matches the published test vectors") {
    // Reference values computed from the FNV-1a specification constants
    // (offset basis 0xcbf29ce484222325, prime 0x100000001b3).
    CHECK(util::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(util::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(util::fnv1a64("b") == 0xaf63df4c8601f1a5ULL);
    CHECK(util::fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(util::fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(util::fnv1a64_hex("foobar") == "85944171f73967e8");
    CHECK(util::fnv1a64_hex("a").size() == 16);
}

TEST_CASE("read/write/append round-trip bytes exactly") {
    testsup::TempDir tmp;
    fs::path f = tmp.path() / "sub" / "file.txt";
    std::string blob = "line1\nline2\0embedded";
    blob += std::string("\x01\xff", 2);
    util::write_file(f, blob);
    CHECK(util::read_file(f) == blob);
    util::write_file(f, "short");
    CHECK(util::read_file(f) == "short");
    util::append_line(f, "one");
    util::append_line(f, "two");
    CHECK(util::read_file(f) == "shortone\ntwo\n");
    CHECK(testsup::thrown_kind([&] { util::read_file(tmp.path() / "absent"); }) ==
          errkind::IoError);
}

TEST_CASE("tree_hash keys on relative paths and content") {
    testsup::TempDir a;
    testsup::TempDir b;
    util::write_file(a.path() / "x.txt", "hello");
    util::write_file(a.path() / "d" / "y.txt", "world");
    util::write_file(b.path() / "x.txt", "hello");
    util::write_file(b.path() / "d" / "y.txt", "world");
    CHECK(util::tree_hash(a.path()) == util::tree_hash(b.path()));

    util::write_file(b.path() / "d" / "y.txt", "world!");
    CHECK(util::tree_hash(a.path()) != util::tree_hash(b.path()));

    util::write_file(b.path() / "d" / "y.txt", "world");
    CHECK(util::tree_hash(a.path()) == util::tree_hash(b.path()));
    util::write_file(b.path() / "z.txt", "");
    CHECK(util::tree_hash(a.path()) != util::tree_hash(b.path()));
}

TEST_CASE("glob_match: * and ? stay inside a component, ** crosses") {
    CHECK(util::glob_match("app", "app"));
    CHECK_FALSE(util::glob_match("app", "bin/app"));
    CHECK(util::glob_match("*.c", "main.c"));
    CHECK_FALSE(util::glob_match("*.c", "src/main.c"));
    CHECK(util::glob_match("src/*.c", "src/main.c"));
    CHECK(util::glob_match("**/*.c", "a/b/c/main.c"));
    CHECK(util::glob_match("**/*.c", "main.c"));
    CHECK(util::glob_match("build/**", "build/x/y"));
    CHECK(util::glob_match("fil?.c", "file.c"));
    CHECK_FALSE(util::glob_match("fil?.c", "files.c"));
    CHECK(util::glob_match("a/**/z", "a/z"));
    CHECK(util::glob_match("a/**/z", "a/b/c/z"));
    CHECK_FALSE(util::glob_match("a/**/z", "a/b/c"));
}

TEST_CASE("string helpers") {
    CHECK(util::split_lines("") == std::vector<std::string>{});
    CHECK(util::split_lines("a\nb\n") == std::vector<std::string>{"a", "b"});
    CHECK(util::split_lines("a\nb") == std::vector<std::string>{"a", "b"});
    CHECK(util::split_lines("\n\n") == std::vector<std::string>{"", ""});

    CHECK(util::trim("  x \t\n") == "x");
    CHECK(util::trim("") == "");
    CHECK(util::trim(" \t ") == "");

    CHECK(util::collapse_ws("a  b\t\nc") == "a b c");
    CHECK(util::collapse_ws("  lead and trail  ") == "lead and trail");

    CHECK(util::to_lower("MiXeD 123") == "mixed 123");
    CHECK(util::starts_with("abcdef", "abc"));
    CHECK_FALSE(util::starts_with("ab", "abc"));
    CHECK(util::ends_with("abcdef", "def"));
    CHECK_FALSE(util::ends_with("ef", "def"));

    CHECK(util::sanitize_component("src/net/a.c") == "src__net__a.c");
    CHECK(util::sanitize_component("win\\path.c") == "win__path.c");
    CHECK(util::sanitize_component("a b:c") == "a_b_c");
    CHECK(util::sanitize_component("plain-name_1.cpp") == "plain-name_1.cpp");
}

TEST_CASE("iso8601 conversions round-trip") {
    CHECK(util::iso8601_from_time(0) == "1970-01-01T00:00:00Z");
    CHECK(util::iso8601_to_time("1970-01-01T00:00:00Z") == 0);
    std::int64_t stamp = 1700000000; // 2023-11-14T22:13:20Z
    CHECK(util::iso8601_from_time(stamp) == "2023-11-14T22:13:20Z");
    CHECK(util::iso8601_to_time(util::iso8601_from_time(stamp)) == stamp);
    CHECK(testsup::thrown_kind([] { util::iso8601_to_time("not a stamp"); }) == errkind::IoError);

    std::int64_t now = util::unix_now();
    std::int64_t round = util::iso8601_to_time(util::iso8601_now());
    CHECK(std::abs(round - now) <= 2);
}

TEST_CASE("count_lines counts terminated and dangling lines") {
    CHECK(util::count_lines("") == 0);
    CHECK(util::count_lines("a") == 1);
    CHECK(util::count_lines("a\n") == 1);
    CHECK(util::count_lines("a\nb") == 2);
    CHECK(util::count_lines("a\nb\n") == 2);
    CHECK(util::count_lines("\n") == 1);
}

TEST_CASE("run_command captures streams, exit codes and timeouts") {
    testsup::TempDir tmp;

    CommandResult ok = run_command("echo out && echo err 1>&2", tmp.path());
    CHECK(ok.exit_code == 0);
    CHECK(ok.out == "out\n");
    CHECK(ok.err == "err\n");
    CHECK_FALSE(ok.timed_out);

    CommandResult fail = run_command("exit 7", tmp.path());
    CHECK(fail.exit_code == 7);

    CommandResult missing = run_command("definitely_not_a_real_tool_qq", tmp.path());
    CHECK(missing.exit_code == 127);

    CommandResult cwd = run_command("pwd", tmp.path());
    CHECK(util::trim(cwd.out) == fs::canonical(tmp.path()).string());

    CommandResult slow = run_command("sleep 5", tmp.path(), 0.2);
    CHECK(slow.timed_out);
    CHECK(slow.exit_code != 0);
}
