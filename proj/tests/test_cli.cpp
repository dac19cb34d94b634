#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

// Runs the CLI with stderr merged into stdout.
Result run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" CLI_PATH "\" " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int st = pclose(pipe);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::vector<std::string> body_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream ss(text);
  for (std::string line; std::getline(ss, line);)
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  return lines;
}

std::string body(const std::string& text) {
  std::string out;
  for (const auto& l : body_lines(text)) out += l + "\n";
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gladiator_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::string kSmall = "run -d 3 --rounds 5 --shots 40 --policy eraser+m --lr 1 --seed 3";

}  // namespace

TEST(Cli, RunEmitsHeaderAndOneRow) {
  const Result r = run_cli(kSmall);
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(r.out.rfind("# gladiator ", 0), 0u);
  const auto lines = body_lines(r.out);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0].rfind("code,distance,rounds,shots,policy", 0), 0u);
  EXPECT_EQ(lines[1].rfind("surface,3,5,40,eraser+m,0.001,1,", 0), 0u);
}

TEST(Cli, CsvBodyIsDeterministic) {
  const Result a = run_cli(kSmall);
  const Result b = run_cli(kSmall + " --jobs 2");
  ASSERT_EQ(a.status, 0);
  ASSERT_EQ(b.status, 0);
  EXPECT_EQ(body(a.out), body(b.out));
  const Result c = run_cli("run -d 3 --rounds 5 --shots 40 --policy eraser+m --lr 1 --seed 4");
  EXPECT_NE(body(a.out), body(c.out));
}

TEST(Cli, SweepHasOneRowPerCell) {
  const Result r = run_cli("sweep -d 3,5 --lr 0.1,1 --policy no-lrc,eraser --rounds 3 --shots 20");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto lines = body_lines(r.out);
  ASSERT_EQ(lines.size(), 1u + 8u);
  // Distance varies fastest.
  EXPECT_EQ(lines[1].rfind("surface,3,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("surface,5,", 0), 0u);
  EXPECT_NE(r.out.find("# sweep distance=3,5"), std::string::npos);
}

TEST(Cli, ParseErrorsExitTwo) {
  for (const char* args : {"", "bogus", "run --no-such-flag", "run --shots abc"}) {
    const Result r = run_cli(args);
    EXPECT_EQ(r.status, 2) << args << "\n" << r.out;
    EXPECT_NE(r.out.find("gladiator: error: "), std::string::npos) << args;
  }
}

TEST(Cli, ConfigErrorsExitOne) {
  for (const char* args : {"run --policy nope", "run -d 4", "run -p 2", "run --shots 0", "run --code file:/nonexistent",
                           "run -d 3,5", "run --config /nonexistent.cfg"}) {
    const Result r = run_cli(args);
    EXPECT_EQ(r.status, 1) << args << "\n" << r.out;
    EXPECT_EQ(r.out.rfind("gladiator: error: ", 0), 0u) << args << "\n" << r.out;
  }
}

TEST(Cli, ConfigFileAndOverrides) {
  const std::string cfg = std::string(TEST_DATA_DIR) + "/small_run.cfg";
  const Result r = run_cli("run --config " + cfg);
  ASSERT_EQ(r.status, 0) << r.out;
  const auto lines = body_lines(r.out);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[1].rfind("surface,3,8,40,eraser+m,", 0), 0u);
  EXPECT_NE(r.out.find("# seed=7"), std::string::npos);
  const Result flag = run_cli("run --config " + cfg + " --rounds 4");
  EXPECT_EQ(body_lines(flag.out).at(1).rfind("surface,3,4,40,", 0), 0u);
  const Result env = run_cli("run --config " + cfg, "GLADIATOR_ROUNDS=6");
  EXPECT_EQ(body_lines(env.out).at(1).rfind("surface,3,6,40,", 0), 0u) << env.out;

  const fs::path dir = temp_dir("cfg");
  std::ofstream(dir / "bad.cfg") << "shots=10\nunknown-key=1\n";
  const Result bad = run_cli("run --config " + (dir / "bad.cfg").string());
  EXPECT_EQ(bad.status, 1);
  EXPECT_NE(bad.out.find("unknown key"), std::string::npos);
}

TEST(Cli, OutputFiles) {
  const fs::path dir = temp_dir("out");
  const Result r = run_cli(kSmall + " --out " + (dir / "r.csv").string() + " --json " + (dir / "r.json").string() +
                           " --trace " + (dir / "t.jsonl").string() + " --trace-shots 2");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(body_lines(read_file(dir / "r.csv")).size(), 2u);
  EXPECT_NE(read_file(dir / "r.json").find("\"policy\":\"eraser+m\""), std::string::npos);
  EXPECT_EQ(body_lines(read_file(dir / "t.jsonl")).size(), 10u);
}

TEST(Cli, ColorCodeRunsWithoutLer) {
  const Result r = run_cli("run --code color -d 3 --rounds 4 --shots 20 --policy gladiator+m");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(body_lines(r.out).at(1).rfind("color,3,4,20,gladiator+m,", 0), 0u);
}

TEST(Cli, ExternalCodeFile) {
  const Result r = run_cli("run --code file:" + std::string(TEST_DATA_DIR) +
                           "/repetition_d3.code --rounds 4 --shots 20 --policy eraser");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("file:"), std::string::npos);
}

TEST(Cli, TablesAndMinimize) {
  const fs::path dir = temp_dir("tables");
  const Result t = run_cli("tables -d 3 --out " + dir.string());
  ASSERT_EQ(t.status, 0) << t.out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  EXPECT_FALSE(files.empty());
  const Result m = run_cli("minimize " + std::string(TEST_DATA_DIR) + "/surface_5bit.dnf --width 5");
  // A DNF file is not a pattern list.
  EXPECT_NE(m.status, 0);
  const fs::path list = dir / "flagged.txt";
  std::ofstream(list) << "0110\n1001\n1110\n";
  const Result ok = run_cli("minimize " + list.string());
  ASSERT_EQ(ok.status, 0) << ok.out;
  EXPECT_NE(ok.out.find("# width 4"), std::string::npos);
}

TEST(Cli, TableCacheGivesSameResult) {
  const fs::path dir = temp_dir("cache");
  const std::string args = "run -d 3 --rounds 5 --shots 40 --policy gladiator-d+m --lr 1 --tables-dir " + dir.string();
  const Result a = run_cli(args);
  ASSERT_EQ(a.status, 0) << a.out;
  EXPECT_FALSE(fs::is_empty(dir));
  const Result b = run_cli(args);
  EXPECT_EQ(body(a.out), body(b.out));
}

TEST(Cli, VerifyPrintsOneLinePerCheck) {
  const Result r = run_cli("verify");
  std::istringstream ss(r.out);
  int lines = 0;
  for (std::string line; std::getline(ss, line);) {
    ++lines;
    EXPECT_TRUE(line.rfind("PASS ", 0) == 0 || line.rfind("FAIL ", 0) == 0) << line;
  }
  EXPECT_EQ(lines, 10);
  EXPECT_EQ(r.status, r.out.find("FAIL ") == std::string::npos ? 0 : 1);
}

TEST(Cli, VersionAndHelp) {
  EXPECT_EQ(run_cli("--version").status, 0);
  const Result h = run_cli("--help");
  EXPECT_EQ(h.status, 0);
  EXPECT_NE(h.out.find("sweep"), std::string::npos);
}
